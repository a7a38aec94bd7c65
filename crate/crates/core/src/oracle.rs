//! Brute-force reference answers used to check the engines.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::affine_md::QuadraticFunction;
use crate::dataset::{DataSet, Site, SiteKind};
use crate::lie_geometry::EPS_PRED;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

/// Which side of the radius range a site restricts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusBound {
    /// `r ≤ value`
    Upper(f64),
    /// `r ≥ value`
    Lower(f64),
    /// no radius works
    Empty,
}

/// Closed-form radius restriction imposed by `site` on spheres centred at `x`.
pub fn radius_bound(site: &Site, x: &[f64]) -> RadiusBound {
    match &site.kind {
        SiteKind::PointOutside(p) => RadiusBound::Upper(dist(x, p.coords())),
        SiteKind::PointInside(p) => RadiusBound::Lower(dist(x, p.coords())),
        SiteKind::HalfSpace(h) => RadiusBound::Upper(h.signed_distance(x)),
        SiteKind::PowerSphere { center, radius } => {
            let s = dist(x, center).powi(2) - radius * radius;
            if s < 0.0 {
                RadiusBound::Empty
            } else {
                RadiusBound::Upper(s.sqrt())
            }
        }
        SiteKind::ExteriorSphere { center, radius } => RadiusBound::Upper(dist(x, center) - radius),
    }
}

/// The admissible radii `[lo, hi]` at `x` (with `r ≥ 0`), if any.
pub fn admissible_interval(ds: &DataSet, x: &[f64]) -> Option<(f64, f64)> {
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    for s in ds.sites() {
        match radius_bound(s, x) {
            RadiusBound::Upper(v) => hi = hi.min(v),
            RadiusBound::Lower(v) => lo = lo.max(v),
            RadiusBound::Empty => return None,
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Largest admissible radius at `x` (infinite when only inside points bound it).
pub fn max_radius(x: &[f64], ds: &DataSet) -> Option<f64> {
    admissible_interval(ds, x).map(|(_, hi)| hi)
}

/// Sites whose restriction is tight at either end of the admissible range.
pub fn label(ds: &DataSet, x: &[f64]) -> BTreeSet<usize> {
    let Some((lo, hi)) = admissible_interval(ds, x) else {
        return BTreeSet::new();
    };
    let near = |v: f64, end: f64| end.is_finite() && (v - end).abs() <= EPS_PRED * end.abs().max(1.0);
    ds.sites()
        .iter()
        .filter(|s| match radius_bound(s, x) {
            RadiusBound::Upper(v) | RadiusBound::Lower(v) => near(v, lo) || near(v, hi),
            RadiusBound::Empty => false,
        })
        .map(|s| s.id)
        .collect()
}

/// Relative gap separating the label at `x` from the next site in line, and
/// the width of the admissible range. Large values mean the label is stable.
pub fn label_margin(ds: &DataSet, x: &[f64]) -> f64 {
    let Some((lo, hi)) = admissible_interval(ds, x) else {
        return 0.0;
    };
    let mut uppers = Vec::new();
    let mut lowers = vec![0.0];
    for s in ds.sites() {
        match radius_bound(s, x) {
            RadiusBound::Upper(v) => uppers.push(v),
            RadiusBound::Lower(v) => lowers.push(v),
            RadiusBound::Empty => return 0.0,
        }
    }
    // distance from the extreme value to the next constraint on the same side;
    // ties give zero
    let runner_up = |vals: &[f64], end: f64| {
        let mut gaps: Vec<f64> = vals.iter().map(|v| (v - end).abs()).collect();
        gaps.sort_by(f64::total_cmp);
        gaps.get(1).copied().unwrap_or(f64::INFINITY)
    };
    let mut m = runner_up(&lowers, lo) / lo.abs().max(1.0);
    if hi.is_finite() {
        m = m.min(runner_up(&uppers, hi) / hi.abs().max(1.0));
        m = m.min((hi - lo) / hi.abs().max(1.0));
    }
    m
}

/// 1-based indices of the minimal functions at `x`.
pub fn label_md(fs: &[QuadraticFunction], x: &[f64]) -> BTreeSet<usize> {
    k_smallest(fs, x, 1)
}

/// 1-based indices of the `k` smallest values at `x`, extended by ties with the k-th.
pub fn k_smallest(fs: &[QuadraticFunction], x: &[f64], k: usize) -> BTreeSet<usize> {
    let mut vals: Vec<(f64, usize)> = fs.iter().enumerate().map(|(i, f)| (f.eval(x), i + 1)).collect();
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let Some(&(kth, _)) = vals.get(k.saturating_sub(1)) else {
        return BTreeSet::new();
    };
    let tol = 1e-9 * kth.abs().max(1.0);
    vals.iter().filter(|(v, _)| *v <= kth + tol).map(|&(_, i)| i).collect()
}

/// Relative gap between the k-th and (k+1)-th smallest values at `x`.
pub fn md_margin(fs: &[QuadraticFunction], x: &[f64], k: usize) -> f64 {
    let mut vals: Vec<f64> = fs.iter().map(|f| f.eval(x)).collect();
    vals.sort_by(f64::total_cmp);
    match (vals.get(k.wrapping_sub(1)), vals.get(k)) {
        (Some(a), Some(b)) => (b - a) / a.abs().max(1.0),
        _ => f64::INFINITY,
    }
}

/// A circumsphere of `d+1` input points that is empty of the others.
#[derive(Debug, Clone, PartialEq)]
pub struct EmptySphere {
    pub center: Vec<f64>,
    pub radius: f64,
    pub sites: BTreeSet<usize>,
}

fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    crate::affine_md::k_subsets(m, k)
}

/// Delaunay circumspheres by exhaustive search over `(d+1)`-subsets of the
/// point sites. Co-spherical subsets are merged into one sphere.
pub fn delaunay_vertices_bruteforce(ds: &DataSet) -> Vec<EmptySphere> {
    let d = ds.dimension();
    let pts: Vec<(usize, &[f64])> = ds
        .sites()
        .iter()
        .filter_map(|s| match &s.kind {
            SiteKind::PointOutside(p) => Some((s.id, p.coords())),
            _ => None,
        })
        .collect();
    let mut out: Vec<EmptySphere> = Vec::new();
    for set in subsets(pts.len(), d + 1) {
        let p0 = pts[set[0]].1;
        let mut a = DMatrix::zeros(d, d);
        let mut b = DVector::zeros(d);
        for (row, &i) in set[1..].iter().enumerate() {
            let p = pts[i].1;
            for k in 0..d {
                a[(row, k)] = 2.0 * (p[k] - p0[k]);
            }
            b[row] = p.iter().map(|v| v * v).sum::<f64>() - p0.iter().map(|v| v * v).sum::<f64>();
        }
        let Some(c) = a.lu().solve(&b) else { continue };
        let center: Vec<f64> = c.iter().copied().collect();
        if center.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let radius = dist(&center, p0);
        let tol = 1e-9 * radius.max(1.0);
        if pts.iter().any(|(_, p)| dist(&center, p) < radius - tol) {
            continue;
        }
        let sites: BTreeSet<usize> = pts
            .iter()
            .filter(|(_, p)| (dist(&center, p) - radius).abs() <= tol)
            .map(|(id, _)| *id)
            .collect();
        if !out.iter().any(|e| e.sites == sites) {
            out.push(EmptySphere { center, radius, sites });
        }
    }
    out
}

/// A regular grid of `n^dim` cell-centred sample points filling `[-h, h]^dim`.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub n: usize,
    pub half_width: f64,
    pub dim: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<Vec<f64>> {
        let step = 2.0 * self.half_width / self.n as f64;
        let axis: Vec<f64> = (0..self.n)
            .map(|i| -self.half_width + (i as f64 + 0.5) * step)
            .collect();
        let mut out = vec![Vec::new()];
        for _ in 0..self.dim {
            out = out
                .into_iter()
                .flat_map(|p: Vec<f64>| {
                    axis.iter().map(move |&t| {
                        let mut q = p.clone();
                        q.push(t);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(ps: &[[f64; 2]]) -> DataSet {
        DataSet::new(
            ps.iter()
                .enumerate()
                .map(|(i, p)| Site::point_outside(i + 1, p).unwrap())
                .collect(),
            2,
        )
        .unwrap()
    }

    #[test]
    fn voronoi_labels() {
        let ds = pts(&[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]);
        assert_eq!(label(&ds, &[0.2, 0.1]), BTreeSet::from([1]));
        assert_eq!(label(&ds, &[1.0, -3.0]), BTreeSet::from([1, 2]));
        assert_eq!(label(&ds, &[1.0, 1.0]), BTreeSet::from([1, 2, 3]));
        assert!(label_margin(&ds, &[1.0, 1.0]) < 1e-12);
        assert!(label_margin(&ds, &[0.2, 0.1]) > 0.1);
    }

    #[test]
    fn halfspace_and_inside_bounds() {
        let h = Site::halfspace(1, &[1.0, 0.0], 0.0).unwrap();
        assert_eq!(radius_bound(&h, &[3.0, 1.0]), RadiusBound::Upper(3.0));
        let p = Site::point_inside(2, &[0.0, 0.0]).unwrap();
        assert_eq!(radius_bound(&p, &[3.0, 4.0]), RadiusBound::Lower(5.0));
        let ds = DataSet::new(vec![h, p], 2).unwrap();
        assert_eq!(admissible_interval(&ds, &[3.0, 4.0]), None);
        assert_eq!(admissible_interval(&ds, &[3.0, 0.0]), Some((3.0, 3.0)));
        assert_eq!(label(&ds, &[3.0, 0.0]), BTreeSet::from([1, 2]));
    }

    #[test]
    fn max_radius_examples() {
        let ds = pts(&[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]);
        assert!((max_radius(&[1.0, 1.0], &ds).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let t = DataSet::new(
            vec![
                Site::exterior_sphere(1, &[0.0, 0.0], 1.0).unwrap(),
                Site::point_outside(2, &[5.0, 5.0]).unwrap(),
            ],
            2,
        )
        .unwrap();
        assert_eq!(max_radius(&[0.0, 0.0], &t), None);
        assert!(label(&t, &[0.0, 0.0]).is_empty());
    }

    #[test]
    fn power_site_without_room() {
        let s = Site::power_sphere(1, &[0.0, 0.0], 2.0).unwrap();
        assert_eq!(radius_bound(&s, &[1.0, 0.0]), RadiusBound::Empty);
        assert_eq!(radius_bound(&s, &[0.0, 2.5]), RadiusBound::Upper(1.5));
    }

    #[test]
    fn md_labels() {
        let fs = vec![
            QuadraticFunction::squared_distance(&[0.0, 0.0]),
            QuadraticFunction::squared_distance(&[2.0, 0.0]),
            QuadraticFunction::squared_distance(&[5.0, 0.0]),
        ];
        assert_eq!(label_md(&fs, &[0.5, 0.0]), BTreeSet::from([1]));
        assert_eq!(label_md(&fs, &[1.0, 0.0]), BTreeSet::from([1, 2]));
        assert_eq!(k_smallest(&fs, &[0.5, 0.0], 2), BTreeSet::from([1, 2]));
        assert!((md_margin(&fs, &[0.5, 0.0], 1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn square_delaunay_is_one_cocircular_sphere() {
        let ds = pts(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let v = delaunay_vertices_bruteforce(&ds);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].sites.len(), 4);
        assert!((v[0].radius - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn grid_is_cell_centred() {
        let g = GridSpec { n: 2, half_width: 1.0, dim: 2 }.points();
        assert_eq!(g, vec![vec![-0.5, -0.5], vec![-0.5, 0.5], vec![0.5, -0.5], vec![0.5, 0.5]]);
        assert_eq!(GridSpec { n: 3, half_width: 1.0, dim: 3 }.points().len(), 27);
    }
}
