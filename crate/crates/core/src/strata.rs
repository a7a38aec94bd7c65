//! Intersection of a polytope's low-dimensional faces with the quadric of its slice.
//!
//! Roots on 1-faces become vertices (all-site support) or boundary stubs (one
//! structural row). On every all-site 2-face the quadric cuts a conic; its arcs
//! are traced from root to root with a predictor-corrector walk, and closed
//! ellipses that never touch the face boundary are sampled directly.

use std::collections::BTreeMap;

use nalgebra::Matrix2;

use crate::hull::{Polytope, ReducedRow, Slice};
use crate::lie_geometry::lie_form;

const MAX_STEPS: usize = 200_000;

#[derive(Debug, Clone)]
pub(crate) struct Root {
    pub y: Vec<f64>,
    pub support: Vec<usize>,
    pub boundary: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Curve {
    pub face: Vec<usize>,
    /// Root indices of both ends; `None` for a closed loop.
    pub ends: Option<[usize; 2]>,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Strata {
    pub roots: Vec<Root>,
    pub curves: Vec<Curve>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Parameters `t ∈ [0,1]` where `<x(t), x(t)> = 0` on the lifted segment `v0 → v1`.
pub(crate) fn segment_roots(v0: &[f64], v1: &[f64]) -> Vec<f64> {
    let delta: Vec<f64> = v1.iter().zip(v0).map(|(a, b)| a - b).collect();
    let a = lie_form(&delta, &delta);
    let b = 2.0 * lie_form(v0, &delta);
    let c = lie_form(v0, v0);
    let scale = dot(v0, v0) + dot(v1, v1);
    let mut ts: Vec<f64> = Vec::with_capacity(2);
    if a.abs() <= 1e-14 * scale {
        if b.abs() <= 1e-14 * scale {
            if c.abs() <= 1e-14 * scale {
                // the whole segment lies on the quadric
                ts.extend([0.0, 1.0]);
            }
        } else {
            ts.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            if disc >= -1e-12 * (b * b + (4.0 * a * c).abs()) {
                ts.push(-b / (2.0 * a));
            }
        } else {
            let sq = disc.sqrt();
            let q = -0.5 * (b + b.signum() * sq);
            if q == 0.0 {
                ts.push(0.0);
            } else {
                ts.push(q / a);
                ts.push(c / q);
            }
        }
    }
    let mut out: Vec<f64> = ts
        .into_iter()
        .filter(|t| t.is_finite() && *t >= -1e-10 && *t <= 1.0 + 1e-10)
        .map(|t| t.clamp(0.0, 1.0))
        .collect();
    out.sort_by(|x, y| x.total_cmp(y));
    out.dedup_by(|x, y| (*x - *y).abs() <= 1e-9);
    out
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

pub(crate) fn stratify(p: &Polytope, delta: f64) -> Strata {
    let slice = p.system.slice;
    let structural = |i: usize| p.tag(i).is_structural();
    let mut roots = Vec::new();
    let mut edge_roots: Vec<Vec<usize>> = vec![Vec::new(); p.edges.len()];
    let mut faces: BTreeMap<Vec<usize>, Vec<(usize, usize)>> = BTreeMap::new();
    for (ei, e) in p.edges.iter().enumerate() {
        let ns = e.support.iter().filter(|&&i| structural(i)).count();
        if ns > 1 {
            continue;
        }
        let (y0, y1) = (&p.vertices[e.ends[0]], &p.vertices[e.ends[1]]);
        for t in segment_roots(&slice.lift(y0), &slice.lift(y1)) {
            edge_roots[ei].push(roots.len());
            roots.push(Root {
                y: lerp(y0, y1, t),
                support: e.support.clone(),
                boundary: ns == 1,
            });
        }
        for &j in &e.support {
            if ns == 1 && !structural(j) {
                continue;
            }
            let face: Vec<usize> = e.support.iter().copied().filter(|&i| i != j).collect();
            faces.entry(face).or_default().push((ei, j));
        }
    }
    let mut curves = Vec::new();
    for (face, members) in &faces {
        let tracer = FaceTracer::new(p, face, members, &edge_roots, &roots, delta);
        tracer.trace(&mut curves);
    }
    Strata { roots, curves }
}

struct End {
    root: usize,
    y: Vec<f64>,
    cons: Vec<usize>,
}

struct FaceTracer<'a> {
    slice: Slice,
    rows: &'a [ReducedRow],
    face: &'a [usize],
    poly: Vec<usize>,
    ends: Vec<End>,
    base: Vec<f64>,
    u: [Vec<f64>; 2],
    delta: f64,
}

impl<'a> FaceTracer<'a> {
    fn new(
        p: &'a Polytope,
        face: &'a [usize],
        members: &[(usize, usize)],
        edge_roots: &[Vec<usize>],
        roots: &[Root],
        delta: f64,
    ) -> Self {
        let rows = &p.system.rows;
        let mut poly: Vec<usize> = members.iter().map(|m| m.1).collect();
        poly.sort_unstable();
        poly.dedup();
        let mut ends: Vec<End> = Vec::new();
        for &(ei, j) in members {
            for &ri in &edge_roots[ei] {
                let y = &roots[ri].y;
                let tol = 1e-9 * norm(y).max(1.0);
                if let Some(e) = ends.iter_mut().find(|e| dist(&e.y, y) <= tol) {
                    if !e.cons.contains(&j) {
                        e.cons.push(j);
                    }
                } else {
                    ends.push(End {
                        root: ri,
                        y: y.clone(),
                        cons: vec![j],
                    });
                }
            }
        }
        let base = match ends.first() {
            Some(e) => e.y.clone(),
            None => p.vertices[p.edges[members[0].0].ends[0]].clone(),
        };
        let normals: Vec<&[f64]> = face.iter().map(|&i| rows[i].coeffs.as_slice()).collect();
        let u = plane_basis(&normals, p.ambient_dim);
        Self {
            slice: p.system.slice,
            rows,
            face,
            poly,
            ends,
            base,
            u,
            delta,
        }
    }

    fn at(&self, y: &[f64], w: [f64; 2]) -> Vec<f64> {
        y.iter()
            .enumerate()
            .map(|(i, v)| v + w[0] * self.u[0][i] + w[1] * self.u[1][i])
            .collect()
    }

    fn grad_w(&self, y: &[f64]) -> [f64; 2] {
        let g = self.slice.quadric_gradient(y);
        [dot(&g, &self.u[0]), dot(&g, &self.u[1])]
    }

    /// Length of the centre/radius part of the plane direction `w`.
    fn param_len(&self, w: [f64; 2]) -> f64 {
        let v = self.at(&vec![0.0; self.u[0].len()], w);
        norm(&v[1..])
    }

    fn project(&self, mut y: Vec<f64>) -> Vec<f64> {
        let scale = norm(&y).max(1.0);
        for _ in 0..8 {
            let q = self.slice.quadric(&y);
            if q.abs() <= 1e-15 * scale * scale {
                break;
            }
            let g = self.grad_w(&y);
            let gg = g[0] * g[0] + g[1] * g[1];
            if gg == 0.0 {
                break;
            }
            let s = q / gg;
            y = self.at(&y, [-s * g[0], -s * g[1]]);
        }
        y
    }

    fn violated(&self, y: &[f64], tol: f64) -> Option<usize> {
        let mut worst: Option<(usize, f64)> = None;
        for &j in &self.poly {
            let r = self.rows[j].residual(y);
            if r > tol && worst.is_none_or(|(_, w)| r > w) {
                worst = Some((j, r));
            }
        }
        worst.map(|(j, _)| j)
    }

    fn trace(&self, curves: &mut Vec<Curve>) {
        if self.ends.is_empty() {
            if let Some(points) = self.ellipse_loop() {
                curves.push(Curve {
                    face: self.face.to_vec(),
                    ends: None,
                    points,
                });
            }
            return;
        }
        let mut paired = vec![false; self.ends.len()];
        for a in 0..self.ends.len() {
            if paired[a] {
                continue;
            }
            paired[a] = true;
            if let Some((b, points)) = self.trace_arc(a, &paired) {
                paired[b] = true;
                curves.push(Curve {
                    face: self.face.to_vec(),
                    ends: Some([self.ends[a].root, self.ends[b].root]),
                    points,
                });
            }
        }
    }

    fn choose_end(&self, a: usize, paired: &[bool], y: &[f64], exit: Option<usize>) -> Option<usize> {
        let pick = |f: &dyn Fn(usize) -> bool| {
            (0..self.ends.len())
                .filter(|&b| b != a && f(b))
                .min_by(|&x, &z| dist(&self.ends[x].y, y).total_cmp(&dist(&self.ends[z].y, y)))
        };
        let on_exit = |b: usize| exit.is_none_or(|j| self.ends[b].cons.contains(&j));
        pick(&|b| !paired[b] && on_exit(b))
            .or_else(|| pick(&|b| !paired[b]))
            .or_else(|| pick(&|_| true))
    }

    fn trace_arc(&self, a: usize, paired: &[bool]) -> Option<(usize, Vec<Vec<f64>>)> {
        let ya = &self.ends[a].y;
        let scale = norm(ya).max(1.0);
        let tol = 1e-9 * scale;
        let g = self.grad_w(ya);
        let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
        if gn == 0.0 {
            return None;
        }
        let t0 = [-g[1] / gn, g[0] / gn];
        let outward = |t: [f64; 2]| {
            self.ends[a]
                .cons
                .iter()
                .map(|&j| {
                    let c = &self.rows[j].coeffs;
                    t[0] * dot(c, &self.u[0]) + t[1] * dot(c, &self.u[1])
                })
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let (sp, sm) = (outward(t0), outward([-t0[0], -t0[1]]));
        let mut t = if sp <= sm { t0 } else { [-t0[0], -t0[1]] };
        if sp.min(sm) > 1e-12 * norm(&self.rows[self.ends[a].cons[0]].coeffs) {
            // the conic only touches the face boundary here
            return None;
        }
        let mut pts = vec![ya.clone()];
        let mut y = ya.clone();
        let h_nominal = |t: [f64; 2]| self.delta / self.param_len(t).max(1e-12);
        let mut h = h_nominal(t);
        let mut steps = 0;
        while steps < MAX_STEPS {
            steps += 1;
            let yn = self.project(self.at(&y, [h * t[0], h * t[1]]));
            let g = self.grad_w(&yn);
            let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
            if gn == 0.0 || !gn.is_finite() {
                break;
            }
            let mut tn = [-g[1] / gn, g[0] / gn];
            if tn[0] * t[0] + tn[1] * t[1] < 0.0 {
                tn = [-tn[0], -tn[1]];
            }
            let turn = tn[0] * t[0] + tn[1] * t[1];
            if turn < 0.98 && h > 1e-9 * h_nominal(t) {
                h *= 0.5;
                continue;
            }
            if let Some(j) = self.violated(&yn, tol) {
                let b = self.choose_end(a, paired, &yn, Some(j))?;
                pts.push(self.ends[b].y.clone());
                return Some((b, pts));
            }
            pts.push(yn.clone());
            y = yn;
            t = tn;
            h = (2.0 * h).min(h_nominal(t));
        }
        let b = self.choose_end(a, paired, &y, None)?;
        pts.push(self.ends[b].y.clone());
        Some((b, pts))
    }

    fn ellipse_loop(&self) -> Option<Vec<Vec<f64>>> {
        let h = self.slice.quadric_hessian();
        let m = |a: &[f64], b: &[f64]| 0.5 * a.iter().zip(b).zip(&h).map(|((x, y), z)| x * y * z).sum::<f64>();
        let (m00, m01, m11) = (m(&self.u[0], &self.u[0]), m(&self.u[0], &self.u[1]), m(&self.u[1], &self.u[1]));
        let det = m00 * m11 - m01 * m01;
        if det <= 1e-12 * (m00 * m00 + m11 * m11) {
            return None;
        }
        let g = self.grad_w(&self.base);
        let q0 = self.slice.quadric(&self.base);
        // Q(w) = q0 + g·w + wᵀMw, stationary at 2Mw = -g
        let w0 = [
            -(m11 * g[0] - m01 * g[1]) / (2.0 * det),
            -(-m01 * g[0] + m00 * g[1]) / (2.0 * det),
        ];
        let qmin = q0 + 0.5 * (g[0] * w0[0] + g[1] * w0[1]);
        let eig = Matrix2::new(m00, m01, m01, m11).symmetric_eigen();
        let (l1, l2) = (eig.eigenvalues[0], eig.eigenvalues[1]);
        if qmin * l1 >= 0.0 {
            return None;
        }
        let (r1, r2) = ((-qmin / l1).sqrt(), (-qmin / l2).sqrt());
        let v1 = [eig.eigenvectors[(0, 0)], eig.eigenvectors[(1, 0)]];
        let v2 = [eig.eigenvectors[(0, 1)], eig.eigenvectors[(1, 1)]];
        let reach = self.param_len(v1) * r1 + self.param_len(v2) * r2;
        let n = ((std::f64::consts::TAU * reach / self.delta).ceil() as usize).clamp(64, 20_000);
        let tol = 1e-9 * norm(&self.base).max(1.0);
        let mut pts = Vec::with_capacity(n + 1);
        for k in 0..n {
            let th = std::f64::consts::TAU * k as f64 / n as f64;
            let (c, s) = (th.cos(), th.sin());
            let w = [
                w0[0] + r1 * c * v1[0] + r2 * s * v2[0],
                w0[1] + r1 * c * v1[1] + r2 * s * v2[1],
            ];
            let y = self.project(self.at(&self.base, w));
            if self.violated(&y, tol).is_some() {
                return None;
            }
            pts.push(y);
        }
        pts.push(pts[0].clone());
        Some(pts)
    }
}

/// Orthonormal basis of the directions orthogonal to all `normals`.
fn plane_basis(normals: &[&[f64]], dim: usize) -> [Vec<f64>; 2] {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let push = |v: &[f64], basis: &mut Vec<Vec<f64>>| -> bool {
        let mut w = v.to_vec();
        for _ in 0..2 {
            for b in basis.iter() {
                let t = dot(&w, b);
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= t * y;
                }
            }
        }
        let n = norm(&w);
        if n > 1e-10 * norm(v).max(1e-300) {
            basis.push(w.iter().map(|x| x / n).collect());
            true
        } else {
            false
        }
    };
    for v in normals {
        push(v, &mut basis);
    }
    let mut extra = Vec::new();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        if push(&e, &mut basis) {
            extra.push(basis.last().unwrap().clone());
        }
        if basis.len() == dim {
            break;
        }
    }
    let mut it = extra.into_iter();
    let a = it.next().unwrap_or_else(|| vec![0.0; dim]);
    let b = it.next().unwrap_or_else(|| vec![0.0; dim]);
    [a, b]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_simple_segments() {
        // both ends on the quadric
        let a = vec![0.5, 0.5, 0.0, 0.0, 0.0];
        let b = vec![-7.0, 8.0, 3.0, 1.0, 5.0];
        assert_eq!(segment_roots(&a, &b), vec![0.0, 1.0]);
        // point spheres with negative radius slack stay inside: <x,x> < 0 throughout
        let c = vec![0.5, 0.5, 0.0, 0.0, 1.0];
        let d = vec![1.0, 0.0, 1.0, 0.0, 2.0];
        let ts = segment_roots(&c, &d);
        for k in 0..=100 {
            let x = lerp(&c, &d, k as f64 / 100.0);
            assert!(lie_form(&x, &x) < 0.0);
        }
        assert!(ts.is_empty());
    }

    #[test]
    fn plane_basis_is_orthonormal_complement() {
        let n1 = [1.0, 1.0, 0.0, 0.0];
        let n2 = [0.0, 1.0, 1.0, 0.0];
        let [u, v] = plane_basis(&[&n1, &n2], 4);
        for w in [&u, &v] {
            assert!((norm(w) - 1.0).abs() < 1e-12);
            assert!(dot(w, &n1).abs() < 1e-12 && dot(w, &n2).abs() < 1e-12);
        }
        assert!(dot(&u, &v).abs() < 1e-12);
    }
}
