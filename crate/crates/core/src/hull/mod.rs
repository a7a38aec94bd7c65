//! Bounded polytopes from the inequality system: bounding box, slice reduction,
//! interior point and halfspace intersection through a dual convex hull.

mod dual_hull;
mod lp;
mod predicates;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{LinearInequality, Site, SiteKind, Tag};
use crate::error::{invalid, GvdError, Result};

pub use lp::{chebyshev_center, feasible_point, FeasiblePoint, EPS_FEAS};

pub const DEFAULT_MARGIN: f64 = 4.0;
/// Relative size of the seeded right-hand-side perturbation.
pub const DEFAULT_JOGGLE: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub half_width: f64,
}

impl BoundingBox {
    pub fn new(half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return invalid(format!("bounding box half-width must be > 0, got {half_width}"));
        }
        Ok(Self { half_width })
    }

    /// Upper bound on the radius. Large enough that any sphere centred in the box
    /// and touching a site inside the box is admitted.
    pub fn radius_cap(&self, d: usize) -> f64 {
        2.0 * (d as f64).sqrt() * self.half_width
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.abs() <= self.half_width)
    }
}

/// `B = margin · max(|center|_∞ + |radius| + |height|)`, at least 1.
pub fn choose_bounding_box(sites: &[Site], margin: f64) -> BoundingBox {
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let extent = sites
        .iter()
        .map(|s| match &s.kind {
            SiteKind::PointOutside(p) | SiteKind::PointInside(p) => inf(p.coords()),
            SiteKind::HalfSpace(h) => h.height().abs(),
            SiteKind::PowerSphere { center, radius }
            | SiteKind::ExteriorSphere { center, radius } => inf(center) + radius.abs(),
        })
        .fold(0.0f64, f64::max);
    BoundingBox {
        half_width: (margin * extent).max(1.0),
    }
}

/// Coordinates on the slice `σ1 + σ2 = 1`: `y = (σ1, σ3, …, σ_{d+2}[, σ_{d+3}])`.
/// Without the radius coordinate the slice is the point-sphere hyperplane `σ_{d+3} = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slice {
    pub d: usize,
    pub with_radius: bool,
}

impl Slice {
    pub fn reduced_dim(&self) -> usize {
        self.d + 1 + usize::from(self.with_radius)
    }

    pub fn lift(&self, y: &[f64]) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.d + 3);
        s.push(y[0]);
        s.push(1.0 - y[0]);
        s.extend_from_slice(&y[1..=self.d]);
        s.push(if self.with_radius { y[self.d + 1] } else { 0.0 });
        s
    }

    pub fn reduce(&self, sigma: &[f64]) -> Vec<f64> {
        let mut y = Vec::with_capacity(self.reduced_dim());
        y.push(sigma[0]);
        y.extend_from_slice(&sigma[2..self.d + 2]);
        if self.with_radius {
            y.push(sigma[self.d + 2]);
        }
        y
    }

    /// `<lift(y), lift(y)> = 1 - 2 y1 + |c|² - r²`.
    pub fn quadric(&self, y: &[f64]) -> f64 {
        let c2: f64 = y[1..=self.d].iter().map(|v| v * v).sum();
        let r2 = if self.with_radius { y[self.d + 1].powi(2) } else { 0.0 };
        1.0 - 2.0 * y[0] + c2 - r2
    }

    pub fn quadric_gradient(&self, y: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.reduced_dim()];
        g[0] = -2.0;
        for i in 1..=self.d {
            g[i] = 2.0 * y[i];
        }
        if self.with_radius {
            g[self.d + 1] = -2.0 * y[self.d + 1];
        }
        g
    }

    /// Diagonal of the (constant) Hessian of [`Slice::quadric`].
    pub fn quadric_hessian(&self) -> Vec<f64> {
        let mut h = vec![2.0; self.reduced_dim()];
        h[0] = 0.0;
        if self.with_radius {
            h[self.d + 1] = -2.0;
        }
        h
    }

    /// Reduced point of the sphere centred at `c` with radius `r` (on the quadric).
    pub fn sphere_point(&self, c: &[f64], r: f64) -> Vec<f64> {
        let c2: f64 = c.iter().map(|v| v * v).sum();
        let mut y = vec![(1.0 + c2 - r * r) / 2.0];
        y.extend_from_slice(c);
        if self.with_radius {
            y.push(r);
        }
        y
    }
}

/// `coeffs · y ≤ bound` on the slice.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedRow {
    pub coeffs: Vec<f64>,
    pub bound: f64,
    pub tag: Tag,
}

impl ReducedRow {
    pub fn residual(&self, y: &[f64]) -> f64 {
        lp::dot(&self.coeffs, y) - self.bound
    }

    fn scale(&self, y: &[f64]) -> f64 {
        let a = self.coeffs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let n = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        (a * n).max(self.bound.abs()).max(1.0)
    }

    /// Residual relative to the magnitudes involved.
    pub fn relative_residual(&self, y: &[f64]) -> f64 {
        self.residual(y) / self.scale(y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    pub slice: Slice,
    pub rows: Vec<ReducedRow>,
}

pub(crate) fn reduce_inequalities(ineqs: &[LinearInequality], slice: Slice) -> ReducedSystem {
    let rows = ineqs
        .iter()
        .map(|q| {
            let c = &q.coeffs;
            let mut coeffs = Vec::with_capacity(slice.reduced_dim());
            coeffs.push(c[0] - c[1]);
            coeffs.extend_from_slice(&c[2..slice.d + 2]);
            if slice.with_radius {
                coeffs.push(c[slice.d + 2]);
            }
            ReducedRow {
                coeffs,
                bound: q.bound - c[1],
                tag: q.tag,
            }
        })
        .collect();
    ReducedSystem { slice, rows }
}

/// Substitutes `σ2 = 1 - σ1` into full-space inequalities over `R^{d+3}`.
pub fn normalize_slice(ineqs: &[LinearInequality]) -> Result<ReducedSystem> {
    let n = ineqs
        .first()
        .map(|q| q.coeffs.len())
        .ok_or_else(|| GvdError::InvalidInput("empty inequality system".into()))?;
    if n < 5 || ineqs.iter().any(|q| q.coeffs.len() != n) {
        return invalid("inequalities must share a length of at least 5");
    }
    Ok(reduce_inequalities(
        ineqs,
        Slice {
            d: n - 3,
            with_radius: true,
        },
    ))
}

impl ReducedSystem {
    /// Bounds on `σ1` that the quadric never reaches inside the box; they close the
    /// polytope in the one direction the box leaves open.
    pub fn with_sigma1_caps(mut self, bbox: &BoundingBox) -> Self {
        let d = self.slice.d as f64;
        let b = bbox.half_width;
        let hi = (1.0 + d * b * b) / 2.0 + 1.0;
        let lo = if self.slice.with_radius {
            let r = bbox.radius_cap(self.slice.d);
            (1.0 - r * r) / 2.0 - 1.0
        } else {
            -0.5
        };
        let dim = self.slice.reduced_dim();
        let mut up = vec![0.0; dim];
        up[0] = 1.0;
        let mut down = vec![0.0; dim];
        down[0] = -1.0;
        self.rows.push(ReducedRow {
            coeffs: up,
            bound: hi,
            tag: Tag::BoundingBox,
        });
        self.rows.push(ReducedRow {
            coeffs: down,
            bound: -lo,
            tag: Tag::BoundingBox,
        });
        self
    }

    /// Seeded perturbation of the right-hand sides by about `magnitude · max(1, |b|)`.
    pub fn joggled(&self, seed: u64, magnitude: f64) -> Self {
        if magnitude == 0.0 {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let u: f64 = rng.gen_range(-1.0..1.0);
                ReducedRow {
                    coeffs: r.coeffs.clone(),
                    bound: r.bound + magnitude * r.bound.abs().max(1.0) * u,
                    tag: r.tag,
                }
            })
            .collect();
        Self {
            slice: self.slice,
            rows,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeEdge {
    pub ends: [usize; 2],
    /// Sorted row indices tight along the edge (`ambient_dim - 1` of them).
    pub support: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Polytope {
    pub ambient_dim: usize,
    pub system: ReducedSystem,
    pub vertices: Vec<Vec<f64>>,
    /// Sorted row indices tight at each vertex (`ambient_dim` of them).
    pub vertex_support: Vec<Vec<usize>>,
    /// Row index to the vertices on that facet; redundant rows are absent.
    pub facets: BTreeMap<usize, Vec<usize>>,
    pub edges: Vec<PolytopeEdge>,
}

impl Polytope {
    pub fn tag(&self, row: usize) -> Tag {
        self.system.rows[row].tag
    }

    pub fn lifted_vertex(&self, v: usize) -> Vec<f64> {
        self.system.slice.lift(&self.vertices[v])
    }

    /// Largest relative violation of any row at any vertex.
    pub fn max_violation(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for y in &self.vertices {
            for r in &self.system.rows {
                worst = worst.max(r.relative_residual(y));
            }
        }
        worst
    }

    /// Largest relative residual of a claimed incidence.
    pub fn max_incidence_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, sup) in self.vertex_support.iter().enumerate() {
            for &i in sup {
                worst = worst.max(self.system.rows[i].relative_residual(&self.vertices[v]).abs());
            }
        }
        worst
    }
}

/// Halfspace intersection with the default insertion seed.
pub fn halfspace_intersection(sys: &ReducedSystem, interior: &[f64]) -> Result<Polytope> {
    halfspace_intersection_seeded(sys, interior, 0)
}

pub fn halfspace_intersection_seeded(
    sys: &ReducedSystem,
    interior: &[f64],
    seed: u64,
) -> Result<Polytope> {
    let dim = sys.slice.reduced_dim();
    if interior.len() != dim {
        return invalid("interior point has the wrong dimension");
    }
    let mut dual = Vec::with_capacity(sys.rows.len());
    for (i, r) in sys.rows.iter().enumerate() {
        let s = r.bound - lp::dot(&r.coeffs, interior);
        if !(s > 0.0) {
            return invalid(format!("interior point is not strictly inside row {i}"));
        }
        dual.push(r.coeffs.iter().map(|a| a / s).collect::<Vec<f64>>());
    }
    // structural rows first: they form a cross-polytope around the origin
    let mut order: Vec<usize> = (0..sys.rows.len())
        .filter(|&i| sys.rows[i].tag.is_structural())
        .collect();
    let mut rest: Vec<usize> = (0..sys.rows.len())
        .filter(|&i| !sys.rows[i].tag.is_structural())
        .collect();
    rest.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.extend(rest);

    let hull = dual_hull::convex_hull(&dual, &order)?;

    let mut vertices = Vec::with_capacity(hull.len());
    let mut vertex_support = Vec::with_capacity(hull.len());
    for f in &hull {
        let z = solve_facet(&dual, &f.verts, dim)?;
        vertices.push(z.iter().zip(interior).map(|(a, b)| a + b).collect());
        let mut s = f.verts.clone();
        s.sort_unstable();
        vertex_support.push(s);
    }
    let mut facets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (v, sup) in vertex_support.iter().enumerate() {
        for &i in sup {
            facets.entry(i).or_default().push(v);
        }
    }
    let mut edges = Vec::new();
    for (fi, f) in hull.iter().enumerate() {
        for (j, &g) in f.neighbors.iter().enumerate() {
            if fi < g {
                let mut support: Vec<usize> = f
                    .verts
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .map(|(_, &v)| v)
                    .collect();
                support.sort_unstable();
                edges.push(PolytopeEdge {
                    ends: [fi, g],
                    support,
                });
            }
        }
    }
    Ok(Polytope {
        ambient_dim: dim,
        system: sys.clone(),
        vertices,
        vertex_support,
        facets,
        edges,
    })
}

/// Solves `p_j · z = 1` over the dual points of one hull facet.
fn solve_facet(dual: &[Vec<f64>], verts: &[usize], dim: usize) -> Result<Vec<f64>> {
    let a = DMatrix::from_fn(dim, dim, |i, j| dual[verts[i]][j]);
    let rhs = DVector::from_element(dim, 1.0);
    if let Some(z) = a.clone().lu().solve(&rhs) {
        if z.iter().all(|v| v.is_finite()) {
            return Ok(z.iter().copied().collect());
        }
    }
    // coplanar dual facet (exactly degenerate input without joggle)
    let z = a
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| GvdError::Degenerate(e.to_string()))?;
    Ok(z.iter().copied().collect())
}

/// Joggle, find an interior point and intersect.
pub fn build_polytope(sys: &ReducedSystem, seed: u64, joggle: f64) -> Result<Polytope> {
    let sys = sys.joggled(seed, joggle);
    let fp = feasible_point(&sys)?;
    halfspace_intersection_seeded(&sys, &fp.point, seed)
}

/// 1-faces carrying at most one box or radius-sign row in their support.
pub fn diagram_edges(p: &Polytope) -> Vec<&PolytopeEdge> {
    p.edges
        .iter()
        .filter(|e| e.support.iter().filter(|&&i| p.tag(i).is_structural()).count() <= 1)
        .collect()
}
