//! Incremental convex hull in `R^D` with conflict lists.
//!
//! Facets are simplices stored as ordered vertex lists. A point `q` sees facet
//! `F` when `orient(F.verts ++ [q]) > 0`. Neighbor `i` of a facet is the facet
//! across the ridge that omits `verts[i]`.

use std::collections::HashMap;

use super::predicates::Orienter;
use crate::error::{GvdError, Result};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct HullFacet {
    pub verts: Vec<usize>,
    pub neighbors: Vec<usize>,
}

struct Facet {
    verts: Vec<usize>,
    neighbors: Vec<usize>,
    outside: Vec<usize>,
    alive: bool,
}

/// Hull of `pts`, inserting points in `order` (which must list every index once).
pub(crate) fn convex_hull(pts: &[Vec<f64>], order: &[usize]) -> Result<Vec<HullFacet>> {
    let dim = pts.first().map(|p| p.len()).unwrap_or(0);
    if dim == 0 || pts.len() < dim + 1 {
        return Err(GvdError::Degenerate(format!(
            "need at least {} points for a hull in dimension {dim}",
            dim + 1
        )));
    }
    let orient = Orienter::new(pts, dim);
    let simplex = initial_simplex(pts, order, dim)?;

    let mut facets: Vec<Facet> = Vec::new();
    for k in 0..=dim {
        let mut verts: Vec<usize> = (0..=dim).filter(|&i| i != k).map(|i| simplex[i]).collect();
        let mut ids = verts.clone();
        ids.push(simplex[k]);
        if orient.sign(&ids) > 0 {
            verts.swap(0, 1);
        }
        facets.push(Facet {
            verts,
            neighbors: vec![NONE; dim],
            outside: Vec::new(),
            alive: true,
        });
    }
    // the facet opposite simplex[k] has index k
    for k in 0..=dim {
        for j in 0..dim {
            let v = facets[k].verts[j];
            let other = simplex.iter().position(|&s| s == v).unwrap();
            facets[k].neighbors[j] = other;
        }
    }

    let mut point_facet = vec![NONE; pts.len()];
    let in_simplex = |i: usize| simplex.contains(&i);
    for &p in order {
        if in_simplex(p) {
            continue;
        }
        for (fi, f) in facets.iter_mut().enumerate() {
            let mut ids = f.verts.clone();
            ids.push(p);
            if orient.sign(&ids) > 0 {
                f.outside.push(p);
                point_facet[p] = fi;
                break;
            }
        }
    }

    let mut visible_mark: Vec<u32> = vec![0; facets.len()];
    let mut hidden_mark: Vec<u32> = vec![0; facets.len()];
    let mut stamp: u32 = 0;
    let mut ids = Vec::with_capacity(dim + 1);

    for &p in order {
        let start = point_facet[p];
        if start == NONE || in_simplex(p) {
            continue;
        }
        stamp += 1;
        visible_mark.resize(facets.len(), 0);
        hidden_mark.resize(facets.len(), 0);

        let mut visible = vec![start];
        visible_mark[start] = stamp;
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        let mut head = 0;
        while head < visible.len() {
            let f = visible[head];
            head += 1;
            for j in 0..dim {
                let g = facets[f].neighbors[j];
                if visible_mark[g] == stamp {
                    continue;
                }
                let seen = if hidden_mark[g] == stamp {
                    false
                } else {
                    ids.clear();
                    ids.extend_from_slice(&facets[g].verts);
                    ids.push(p);
                    orient.sign(&ids) > 0
                };
                if seen {
                    visible_mark[g] = stamp;
                    visible.push(g);
                } else {
                    hidden_mark[g] = stamp;
                    horizon.push((f, j));
                }
            }
        }

        let first_new = facets.len();
        let mut ridges: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        for &(f, k) in &horizon {
            let g = facets[f].neighbors[k];
            let mut verts = facets[f].verts.clone();
            verts[k] = p;
            let nf = facets.len();
            let gslot = facets[g].neighbors.iter().position(|&x| x == f).ok_or_else(|| {
                GvdError::Degenerate("hull adjacency corrupted".into())
            })?;
            facets[g].neighbors[gslot] = nf;
            let mut neighbors = vec![NONE; dim];
            neighbors[k] = g;
            for j in 0..dim {
                if j == k {
                    continue;
                }
                let mut key: Vec<usize> = (0..dim).filter(|&i| i != j).map(|i| verts[i]).collect();
                key.sort_unstable();
                if let Some((of, oslot)) = ridges.remove(&key) {
                    neighbors[j] = of;
                    facets[of].neighbors[oslot] = nf;
                } else {
                    ridges.insert(key, (nf, j));
                }
            }
            facets.push(Facet {
                verts,
                neighbors,
                outside: Vec::new(),
                alive: true,
            });
        }
        if !ridges.is_empty() {
            return Err(GvdError::Degenerate("unmatched horizon ridge".into()));
        }

        for &f in &visible {
            facets[f].alive = false;
            let orphans = std::mem::take(&mut facets[f].outside);
            for q in orphans {
                if q == p {
                    continue;
                }
                point_facet[q] = NONE;
                for nf in first_new..facets.len() {
                    ids.clear();
                    ids.extend_from_slice(&facets[nf].verts);
                    ids.push(q);
                    if orient.sign(&ids) > 0 {
                        facets[nf].outside.push(q);
                        point_facet[q] = nf;
                        break;
                    }
                }
            }
        }
        point_facet[p] = NONE;
    }

    let mut remap = vec![NONE; facets.len()];
    let mut next = 0;
    for (i, f) in facets.iter().enumerate() {
        if f.alive {
            remap[i] = next;
            next += 1;
        }
    }
    Ok(facets
        .into_iter()
        .filter(|f| f.alive)
        .map(|f| HullFacet {
            verts: f.verts,
            neighbors: f.neighbors.iter().map(|&g| remap[g]).collect(),
        })
        .collect())
}

/// Greedy choice of `dim + 1` affinely independent points, scanning `order`.
fn initial_simplex(pts: &[Vec<f64>], order: &[usize], dim: usize) -> Result<Vec<usize>> {
    let p0 = order[0];
    let scale = order
        .iter()
        .map(|&i| dist(&pts[i], &pts[p0]))
        .fold(0.0f64, f64::max);
    if scale == 0.0 {
        return Err(GvdError::Degenerate("all dual points coincide".into()));
    }
    let mut chosen = vec![p0];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &i in &order[1..] {
        if chosen.len() == dim + 1 {
            break;
        }
        let mut v: Vec<f64> = pts[i].iter().zip(&pts[p0]).map(|(a, b)| a - b).collect();
        for b in &basis {
            let t: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= t * y;
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 * scale {
            basis.push(v.iter().map(|x| x / n).collect());
            chosen.push(i);
        }
    }
    if chosen.len() < dim + 1 {
        return Err(GvdError::Degenerate(format!(
            "dual points span only {} dimensions of {dim}",
            chosen.len() - 1
        )));
    }
    Ok(chosen)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_hull(pts: &[Vec<f64>], facets: &[HullFacet]) {
        let dim = pts[0].len();
        let o = Orienter::new(pts, dim);
        for (fi, f) in facets.iter().enumerate() {
            for q in 0..pts.len() {
                if f.verts.contains(&q) {
                    continue;
                }
                let mut ids = f.verts.clone();
                ids.push(q);
                assert!(o.sign(&ids) < 0, "point {q} sees facet {fi}");
            }
            for (j, &g) in f.neighbors.iter().enumerate() {
                assert!(facets[g].neighbors.contains(&fi));
                let ridge: Vec<_> = f.verts.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, v)| *v).collect();
                assert!(ridge.iter().all(|v| facets[g].verts.contains(v)));
            }
        }
    }

    #[test]
    fn square_in_plane() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![0.5, 0.5]];
        let order: Vec<usize> = (0..pts.len()).collect();
        let h = convex_hull(&pts, &order).unwrap();
        assert_eq!(h.len(), 4);
        check_hull(&pts, &h);
    }

    #[test]
    fn cube_with_degenerate_faces() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(vec![(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]);
        }
        pts.push(vec![0.5, 0.5, 0.5]);
        let order: Vec<usize> = (0..pts.len()).collect();
        let h = convex_hull(&pts, &order).unwrap();
        // each square face is split into two triangles
        assert_eq!(h.len(), 12);
        check_hull(&pts, &h);
    }

    #[test]
    fn random_4d() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec<f64>> = (0..200)
            .map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let order: Vec<usize> = (0..pts.len()).collect();
        let h = convex_hull(&pts, &order).unwrap();
        check_hull(&pts, &h);
    }

    #[test]
    fn flat_input_rejected() {
        let pts = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]];
        assert!(convex_hull(&pts, &[0, 1, 2, 3]).is_err());
    }
}
