//! Minimization diagrams of quadratic families `f(x) = a|x-q|² + b·x + c`.
//!
//! Each `f` factors as a linear functional of the lifted point `φ(x)`, so the
//! region where `f_i` is smallest is the pre-image of a convex polytope cut by
//! the paraboloid of point spheres. Order-k diagrams use the family of k-fold sums.

use std::collections::BTreeSet;

use crate::dataset::{fold, LinearInequality, Tag};
use crate::error::{invalid, GvdError, Result};
use crate::hull::{
    build_polytope, reduce_inequalities, BoundingBox, ReducedRow, Slice, DEFAULT_JOGGLE,
    DEFAULT_MARGIN,
};
use crate::lie_geometry::lie_form;
use crate::quadric::EdgeEnd;
use crate::strata::stratify;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFunction {
    pub a: f64,
    pub q: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
}

impl QuadraticFunction {
    pub fn new(a: f64, q: Vec<f64>, b: Vec<f64>, c: f64) -> Result<Self> {
        if q.len() != b.len() {
            return invalid("q and b must have the same length");
        }
        if !(a.is_finite() && c.is_finite() && q.iter().chain(&b).all(|v| v.is_finite())) {
            return invalid("quadratic function has non-finite parameters");
        }
        Ok(Self { a, q, b, c })
    }

    /// `|x - p|²`
    pub fn squared_distance(p: &[f64]) -> Self {
        Self {
            a: 1.0,
            q: p.to_vec(),
            b: vec![0.0; p.len()],
            c: 0.0,
        }
    }

    /// `|x - p|² - r²`
    pub fn power(p: &[f64], r: f64) -> Self {
        Self {
            a: 1.0,
            q: p.to_vec(),
            b: vec![0.0; p.len()],
            c: -r * r,
        }
    }

    /// `|x - p|² / w²`
    pub fn weighted(p: &[f64], w: f64) -> Self {
        Self {
            a: 1.0 / (w * w),
            q: p.to_vec(),
            b: vec![0.0; p.len()],
            c: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let d2: f64 = x.iter().zip(&self.q).map(|(u, v)| (u - v) * (u - v)).sum();
        let bx: f64 = x.iter().zip(&self.b).map(|(u, v)| u * v).sum();
        self.a * d2 + bx + self.c
    }

    /// Coefficients of `A|x|² + B·x + C`.
    pub fn expanded(&self) -> (f64, Vec<f64>, f64) {
        let qq: f64 = self.q.iter().map(|v| v * v).sum();
        let lin = self
            .b
            .iter()
            .zip(&self.q)
            .map(|(b, q)| b - 2.0 * self.a * q)
            .collect();
        (self.a, lin, self.a * qq + self.c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFunctional {
    pub avec: Vec<f64>,
}

impl LinearFunctional {
    /// `<y, avec>` in the Lie product.
    pub fn eval(&self, y: &[f64]) -> f64 {
        lie_form(y, &self.avec)
    }
}

pub fn quadratic_to_functional(f: &QuadraticFunction) -> LinearFunctional {
    let (a, lin, k) = f.expanded();
    let mut avec = Vec::with_capacity(f.dim() + 3);
    avec.push(-a - k);
    avec.push(-a + k);
    avec.extend(lin);
    avec.push(0.0);
    LinearFunctional { avec }
}

/// `φ(x) = ((1+|x|²)/2, (1-|x|²)/2, x, 0)`
pub fn phi(x: &[f64]) -> Vec<f64> {
    let xx: f64 = x.iter().map(|v| v * v).sum();
    let mut y = Vec::with_capacity(x.len() + 3);
    y.push((1.0 + xx) / 2.0);
    y.push((1.0 - xx) / 2.0);
    y.extend_from_slice(x);
    y.push(0.0);
    y
}

/// Inverse of [`phi`] on the paraboloid; rejects points off it.
pub fn phi_inverse(y: &[f64]) -> Result<Vec<f64>> {
    let n = y.len();
    let x = &y[2..n - 1];
    let xx: f64 = x.iter().map(|v| v * v).sum();
    let res = (y[0] - y[1] - xx).abs() + (y[0] + y[1] - 1.0).abs() + y[n - 1].abs();
    if res > 1e-8 * xx.max(1.0) {
        return invalid(format!("point is off the paraboloid (residual {res:.3e})"));
    }
    Ok(x.to_vec())
}

/// All index-sorted k-subsets of `0..m`, in lexicographic order.
pub fn k_subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

/// The `C(m,k)` sums `f_{i1} + … + f_{ik}` over sorted index sets.
pub fn order_k_family(fs: &[QuadraticFunction], k: usize) -> Result<Vec<QuadraticFunction>> {
    if k == 0 || k > fs.len() {
        return invalid(format!("order k = {k} outside 1..={}", fs.len()));
    }
    let d = fs[0].dim();
    Ok(k_subsets(fs.len(), k)
        .into_iter()
        .map(|set| {
            let mut a = 0.0;
            let mut lin = vec![0.0; d];
            let mut c = 0.0;
            for &i in &set {
                let (ai, li, ci) = fs[i].expanded();
                a += ai;
                for (x, y) in lin.iter_mut().zip(li) {
                    *x += y;
                }
                c += ci;
            }
            QuadraticFunction {
                a,
                q: vec![0.0; d],
                b: lin,
                c,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdVertex {
    pub point: Vec<f64>,
    pub value: f64,
    pub minimizers: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdEdge {
    pub endpoints: [EdgeEnd; 2],
    pub indices: BTreeSet<usize>,
    pub polyline: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct MinimizationDiagram {
    pub vertices: Vec<MdVertex>,
    pub edges: Vec<MdEdge>,
    /// Labels of the nonempty cells (1-based function indices; k-sets for order k).
    pub cells: Vec<BTreeSet<usize>>,
    pub order_k: usize,
    pub dimension: usize,
    pub bbox: BoundingBox,
    cell_rows: Vec<Vec<ReducedRow>>,
}

#[derive(Debug, Clone, Copy)]
pub struct MdOptions {
    pub margin: f64,
    pub seed: u64,
    pub joggle: f64,
}

impl Default for MdOptions {
    fn default() -> Self {
        Self {
            margin: DEFAULT_MARGIN,
            seed: 0,
            joggle: DEFAULT_JOGGLE,
        }
    }
}

/// `margin ·` the largest sup-norm of a minimiser (or centre, for affine `f`), at least 1.
pub fn choose_md_box(fs: &[QuadraticFunction], margin: f64) -> BoundingBox {
    let extent = fs
        .iter()
        .map(|f| {
            let p: Vec<f64> = if f.a != 0.0 {
                f.q.iter().zip(&f.b).map(|(q, b)| q - b / (2.0 * f.a)).collect()
            } else {
                f.q.clone()
            };
            p.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        })
        .fold(0.0f64, f64::max);
    BoundingBox {
        half_width: (margin * extent).max(1.0),
    }
}

pub fn minimization_diagram(fs: &[QuadraticFunction], bbox: &BoundingBox) -> Result<MinimizationDiagram> {
    let labels = (1..=fs.len()).map(|i| BTreeSet::from([i])).collect();
    diagram_for_family(fs, labels, 1, bbox, &MdOptions::default())
}

pub fn minimization_diagram_with(
    fs: &[QuadraticFunction],
    bbox: &BoundingBox,
    opts: &MdOptions,
) -> Result<MinimizationDiagram> {
    let labels = (1..=fs.len()).map(|i| BTreeSet::from([i])).collect();
    diagram_for_family(fs, labels, 1, bbox, opts)
}

/// Order-k diagram: cells of the k-fold sums, labelled by the k-sets they stand for.
pub fn order_k_diagram(
    fs: &[QuadraticFunction],
    k: usize,
    bbox: &BoundingBox,
    opts: &MdOptions,
) -> Result<MinimizationDiagram> {
    let family = order_k_family(fs, k)?;
    let labels = k_subsets(fs.len(), k)
        .into_iter()
        .map(|s| s.into_iter().map(|i| i + 1).collect())
        .collect();
    diagram_for_family(&family, labels, k, bbox, opts)
}

fn diagram_for_family(
    fs: &[QuadraticFunction],
    labels: Vec<BTreeSet<usize>>,
    order_k: usize,
    bbox: &BoundingBox,
    opts: &MdOptions,
) -> Result<MinimizationDiagram> {
    if fs.is_empty() || (order_k == 1 && fs.len() < 2) {
        return invalid("a minimization diagram needs at least 2 functions");
    }
    let d = fs[0].dim();
    if d < 2 || fs.iter().any(|f| f.dim() != d) {
        return invalid("functions must share a dimension of at least 2");
    }
    let slice = Slice {
        d,
        with_radius: false,
    };
    let folded: Vec<Vec<f64>> = fs.iter().map(|f| fold(&quadratic_to_functional(f).avec)).collect();
    let delta = bbox.half_width / 256.0;

    let mut vertices: Vec<MdVertex> = Vec::new();
    let mut edges: Vec<MdEdge> = Vec::new();
    let mut cells = Vec::new();
    let mut cell_rows = Vec::new();

    for i in 0..fs.len() {
        let mut ineqs = Vec::with_capacity(fs.len() + 2 * d);
        for j in 0..fs.len() {
            if j == i {
                continue;
            }
            let coeffs: Vec<f64> = folded[i].iter().zip(&folded[j]).map(|(a, b)| a - b).collect();
            if coeffs.iter().all(|&v| v == 0.0) {
                continue;
            }
            ineqs.push(LinearInequality {
                coeffs,
                bound: 0.0,
                tag: Tag::Site(j),
            });
        }
        for k in 0..d {
            for s in [1.0, -1.0] {
                let mut coeffs = vec![0.0; d + 3];
                coeffs[2 + k] = s;
                ineqs.push(LinearInequality {
                    coeffs,
                    bound: bbox.half_width,
                    tag: Tag::BoundingBox,
                });
            }
        }
        let reference = reduce_inequalities(&ineqs, slice).with_sigma1_caps(bbox);
        let poly = match build_polytope(&reference, opts.seed, opts.joggle) {
            Ok(p) => p,
            Err(GvdError::Infeasible(_)) => continue,
            Err(e) => return Err(e),
        };
        let strata = stratify(&poly, delta);
        let label_of = |row: usize| poly.tag(row).site();

        let mut root_vertex: Vec<Option<usize>> = vec![None; strata.roots.len()];
        for (ri, root) in strata.roots.iter().enumerate() {
            if root.boundary {
                continue;
            }
            let x = root.y[1..=d].to_vec();
            let mut set: BTreeSet<usize> = BTreeSet::from([i]);
            set.extend(root.support.iter().filter_map(|&r| label_of(r)));
            let tol = 1e-9 * root.y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
            let found = vertices
                .iter()
                .position(|v| v.point.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= tol);
            let vi = match found {
                Some(vi) => vi,
                None => {
                    vertices.push(MdVertex {
                        value: fs[i].eval(&x),
                        point: x,
                        minimizers: BTreeSet::new(),
                    });
                    vertices.len() - 1
                }
            };
            vertices[vi].minimizers.extend(set);
            root_vertex[ri] = Some(vi);
        }

        for c in &strata.curves {
            let others: BTreeSet<usize> = c.face.iter().filter_map(|&r| label_of(r)).collect();
            if others.iter().next().is_some_and(|&m| m < i) {
                continue;
            }
            let endpoints = match c.ends {
                None => [EdgeEnd::Loop, EdgeEnd::Loop],
                Some([a, b]) => {
                    let end = |r: usize| root_vertex[r].map_or(EdgeEnd::Boundary, EdgeEnd::Vertex);
                    [end(a), end(b)]
                }
            };
            if let [EdgeEnd::Vertex(a), EdgeEnd::Vertex(b)] = endpoints {
                if a == b {
                    continue;
                }
            }
            let mut indices = others;
            indices.insert(i);
            edges.push(MdEdge {
                endpoints,
                indices,
                polyline: c.points.iter().map(|y| y[1..=d].to_vec()).collect(),
            });
        }

        let facet_rows: Vec<ReducedRow> = poly.facets.keys().map(|&r| reference.rows[r].clone()).collect();
        let nonempty = !strata.roots.is_empty()
            || !strata.curves.is_empty()
            || poly.vertices.iter().any(|y| {
                let yp = slice.sphere_point(&y[1..=d], 0.0);
                facet_rows.iter().all(|r| r.relative_residual(&yp) <= 0.0)
            });
        if nonempty {
            cells.push(i);
            cell_rows.push(facet_rows);
        }
    }

    // minimiser indices are reported 1-based for order 1
    if order_k == 1 {
        for v in &mut vertices {
            v.minimizers = v.minimizers.iter().map(|i| i + 1).collect();
        }
        for e in &mut edges {
            e.indices = e.indices.iter().map(|i| i + 1).collect();
        }
    } else {
        vertices.clear();
        edges.clear();
    }
    Ok(MinimizationDiagram {
        vertices,
        edges,
        cells: cells.iter().map(|&i| labels[i].clone()).collect(),
        order_k,
        dimension: d,
        bbox: *bbox,
        cell_rows,
    })
}

impl MinimizationDiagram {
    /// Labels of the cells whose polytope contains `φ(x)`.
    pub fn cells_at(&self, x: &[f64]) -> Vec<&BTreeSet<usize>> {
        let slice = Slice {
            d: self.dimension,
            with_radius: false,
        };
        let y = slice.sphere_point(x, 0.0);
        self.cells
            .iter()
            .zip(&self.cell_rows)
            .filter(|(_, rows)| rows.iter().all(|r| r.relative_residual(&y) <= 1e-12))
            .map(|(l, _)| l)
            .collect()
    }

    /// Union of [`MinimizationDiagram::cells_at`].
    pub fn cell_at(&self, x: &[f64]) -> BTreeSet<usize> {
        self.cells_at(x).into_iter().flatten().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn functional_examples() {
        let f = QuadraticFunction::squared_distance(&[0.0, 0.0]);
        assert_eq!(quadratic_to_functional(&f).avec, vec![-1.0, -1.0, 0.0, 0.0, 0.0]);
        let n = [0.6, 0.8];
        let aff = QuadraticFunction::new(0.0, vec![0.0, 0.0], n.to_vec(), -2.0).unwrap();
        assert_eq!(quadratic_to_functional(&aff).avec, vec![2.0, -2.0, 0.6, 0.8, 0.0]);
        let pw = QuadraticFunction::power(&[1.0, 2.0], 0.5);
        let s = crate::lie_geometry::sphere_to_lie(
            &crate::lie_geometry::OrientedSphere::new(vec![1.0, 2.0], 0.5).unwrap(),
        );
        let expect: Vec<f64> = crate::lie_geometry::mobius_project(&s.coords).iter().map(|v| -2.0 * v).collect();
        let got = quadratic_to_functional(&pw).avec;
        for (a, b) in got.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(&[0.0, 0.0]), vec![0.5, 0.5, 0.0, 0.0, 0.0]);
        let x = [1.5, -0.3];
        let p = crate::lie_geometry::point_to_lie(&crate::lie_geometry::EuclideanPoint::new(x.to_vec()).unwrap());
        assert_eq!(phi(&x), p.coords);
        assert_eq!(phi_inverse(&phi(&x)).unwrap(), x.to_vec());
        assert!(phi_inverse(&[1.0, 0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn order_k_examples() {
        let fs: Vec<_> = [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]
            .iter()
            .map(|p| QuadraticFunction::squared_distance(p))
            .collect();
        assert_eq!(order_k_family(&fs, 2).unwrap().len(), 3);
        let pair = order_k_family(&fs[..2], 2).unwrap();
        assert!((pair[0].eval(&[1.0, 0.0]) - 2.0).abs() < 1e-12);
        assert!(order_k_family(&fs, 0).is_err());
        assert!(order_k_family(&fs, 4).is_err());
        let whole = order_k_diagram(&fs, 3, &BoundingBox::new(4.0).unwrap(), &MdOptions::default()).unwrap();
        assert_eq!(whole.cells, vec![BTreeSet::from([1, 2, 3])]);
        assert_eq!(whole.cell_at(&[3.0, -3.0]), BTreeSet::from([1, 2, 3]));
    }

    #[test]
    fn classical_vertex() {
        let fs: Vec<_> = [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]
            .iter()
            .map(|p| QuadraticFunction::squared_distance(p))
            .collect();
        let md = minimization_diagram(&fs, &BoundingBox::new(8.0).unwrap()).unwrap();
        assert_eq!(md.vertices.len(), 1);
        let v = &md.vertices[0];
        assert!((v.point[0] - 1.0).abs() < 1e-9 && (v.point[1] - 1.0).abs() < 1e-9);
        assert_eq!(v.minimizers, BTreeSet::from([1, 2, 3]));
        assert!((v.value - 2.0).abs() < 1e-9);
        assert_eq!(md.edges.len(), 3);
        assert_eq!(md.cells.len(), 3);
        assert_eq!(md.cell_at(&[0.1, 0.2]), BTreeSet::from([1]));
    }

    #[test]
    fn radical_axis() {
        let fs = vec![QuadraticFunction::power(&[0.0, 0.0], 1.0), QuadraticFunction::power(&[4.0, 1.0], 0.5)];
        let md = minimization_diagram(&fs, &choose_md_box(&fs, 4.0)).unwrap();
        assert!(md.vertices.is_empty());
        assert_eq!(md.edges.len(), 1);
        for x in &md.edges[0].polyline {
            assert!((fs[0].eval(x) - fs[1].eval(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn multiplicative_weights_circle() {
        let fs = vec![QuadraticFunction::weighted(&[0.0, 0.0], 1.0), QuadraticFunction::weighted(&[3.0, 0.0], 2.0)];
        let md = minimization_diagram(&fs, &choose_md_box(&fs, 4.0)).unwrap();
        assert_eq!(md.edges.len(), 1);
        let e = &md.edges[0];
        assert_eq!(e.endpoints, [EdgeEnd::Loop, EdgeEnd::Loop]);
        for x in &e.polyline {
            let r = ((x[0] + 1.0).powi(2) + x[1].powi(2)).sqrt();
            assert!((r - 2.0).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn factorization(a in -3.0f64..3.0, q in prop::collection::vec(-5.0f64..5.0, 2),
                         b in prop::collection::vec(-5.0f64..5.0, 2), c in -5.0f64..5.0,
                         x in prop::collection::vec(-10.0f64..10.0, 2)) {
            let f = QuadraticFunction::new(a, q, b, c).unwrap();
            let v = quadratic_to_functional(&f).eval(&phi(&x));
            let fx = f.eval(&x);
            prop_assert!((fx - v).abs() <= 1e-10 * fx.abs().max(1.0) * 100.0);
        }
    }
}
