//! Diagram extraction: polytope faces meet the Lie quadric, and the result is
//! projected to sphere centres.

use std::collections::BTreeSet;

use crate::dataset::{assemble_system, inequality_for_site, DataSet, Site, Tag};
use crate::error::Result;
use crate::hull::{
    build_polytope, choose_bounding_box, normalize_slice, BoundingBox, Polytope, ReducedRow,
    ReducedSystem, Slice, DEFAULT_JOGGLE, DEFAULT_MARGIN,
};
use crate::lie_geometry::EPS_PRED;
use crate::strata::{segment_roots, stratify, Strata};

/// Quadric roots on the lifted segment `v0 → v1`, as lifted points.
pub fn edge_quadric_roots(v0: &[f64], v1: &[f64]) -> Vec<Vec<f64>> {
    segment_roots(v0, v1)
        .into_iter()
        .map(|t| v0.iter().zip(v1).map(|(a, b)| a + t * (b - a)).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramVertex {
    pub center: Vec<f64>,
    pub radius: f64,
    pub tight_sites: BTreeSet<usize>,
    pub lie_coords: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeEnd {
    Vertex(usize),
    Boundary,
    /// Both ends of a closed curve.
    Loop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramEdge {
    pub endpoints: [EdgeEnd; 2],
    pub defining_sites: BTreeSet<usize>,
    pub sample_polyline: Vec<Vec<f64>>,
    /// Radius of the extremal sphere at each polyline sample.
    pub sample_radii: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GeneralizedDiagram {
    pub vertices: Vec<DiagramVertex>,
    pub edges: Vec<DiagramEdge>,
    pub dimension: usize,
    pub site_table: Vec<Site>,
    /// Sites whose facet meets the quadric.
    pub cells: Vec<usize>,
    pub bbox: BoundingBox,
    envelope: Envelope,
}

/// Facet rows of the polytope, unperturbed, for point queries.
#[derive(Debug, Clone)]
struct Envelope {
    slice: Slice,
    rows: Vec<ReducedRow>,
}

#[derive(Debug, Clone, Copy)]
pub struct DiagramOptions {
    pub margin: f64,
    pub seed: u64,
    pub joggle: f64,
    pub eps: f64,
}

impl Default for DiagramOptions {
    fn default() -> Self {
        Self {
            margin: DEFAULT_MARGIN,
            seed: 0,
            joggle: DEFAULT_JOGGLE,
            eps: EPS_PRED,
        }
    }
}

/// Reduced system with caps for `ds` inside `bbox`.
pub fn reduced_system(ds: &DataSet, bbox: &BoundingBox) -> Result<ReducedSystem> {
    Ok(normalize_slice(&assemble_system(ds, bbox))?.with_sigma1_caps(bbox))
}

pub fn compute_diagram(ds: &DataSet, opts: &DiagramOptions) -> Result<GeneralizedDiagram> {
    let bbox = choose_bounding_box(ds.sites(), opts.margin);
    compute_diagram_in_box(ds, bbox, opts)
}

pub fn compute_diagram_in_box(
    ds: &DataSet,
    bbox: BoundingBox,
    opts: &DiagramOptions,
) -> Result<GeneralizedDiagram> {
    let sys = reduced_system(ds, &bbox)?;
    let poly = build_polytope(&sys, opts.seed, opts.joggle)?;
    Ok(assemble(&poly, ds, bbox, &sys, opts.eps))
}

/// Diagram of a polytope built over `ds`'s system.
pub fn build_diagram(p: &Polytope, ds: &DataSet, bbox: &BoundingBox) -> GeneralizedDiagram {
    assemble(p, ds, *bbox, &p.system, EPS_PRED)
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn assemble(
    p: &Polytope,
    ds: &DataSet,
    bbox: BoundingBox,
    reference: &ReducedSystem,
    eps: f64,
) -> GeneralizedDiagram {
    let d = ds.dimension();
    let slice = p.system.slice;
    let strata: Strata = stratify(p, bbox.half_width / 256.0);
    let site_of = |row: usize| p.tag(row).site();
    let site_ineqs: Vec<_> = ds.sites().iter().map(inequality_for_site).collect();

    let mut vertices: Vec<DiagramVertex> = Vec::new();
    let mut root_vertex: Vec<Option<usize>> = vec![None; strata.roots.len()];
    for (ri, root) in strata.roots.iter().enumerate() {
        if root.boundary {
            continue;
        }
        let sigma = slice.lift(&root.y);
        let mut tight: BTreeSet<usize> = root.support.iter().filter_map(|&i| site_of(i)).collect();
        for q in &site_ineqs {
            let scale = norm(&q.coeffs) * norm(&sigma);
            if q.evaluate(&sigma).abs() <= eps * scale.max(1.0) {
                tight.insert(q.tag.site().unwrap());
            }
        }
        let tol = 1e-9 * norm(&sigma).max(1.0);
        if let Some(vi) = vertices.iter().position(|v| dist(&v.lie_coords, &sigma) <= tol) {
            vertices[vi].tight_sites.extend(tight);
            root_vertex[ri] = Some(vi);
        } else {
            root_vertex[ri] = Some(vertices.len());
            vertices.push(DiagramVertex {
                center: sigma[2..d + 2].to_vec(),
                radius: sigma[d + 2],
                tight_sites: tight,
                lie_coords: sigma,
            });
        }
    }

    let mut edges = Vec::new();
    for c in &strata.curves {
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
        let lifted: Vec<Vec<f64>> = c.points.iter().map(|y| slice.lift(y)).collect();
        edges.push(DiagramEdge {
            endpoints,
            defining_sites: c.face.iter().filter_map(|&i| site_of(i)).collect(),
            sample_polyline: lifted.iter().map(|s| s[2..d + 2].to_vec()).collect(),
            sample_radii: lifted.iter().map(|s| s[d + 2]).collect(),
        });
    }

    let mut cells: BTreeSet<usize> = BTreeSet::new();
    for r in &strata.roots {
        cells.extend(r.support.iter().filter_map(|&i| site_of(i)));
    }
    for c in &strata.curves {
        cells.extend(c.face.iter().filter_map(|&i| site_of(i)));
    }

    let rows = p
        .facets
        .keys()
        .map(|&i| reference.rows[i].clone())
        .collect();
    GeneralizedDiagram {
        vertices,
        edges,
        dimension: d,
        site_table: ds.sites().to_vec(),
        cells: cells.into_iter().collect(),
        bbox,
        envelope: Envelope { slice, rows },
    }
}

/// `α r² + β r + γ ≤ 0` restricted to `r`, tagged with its origin.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RadiusConstraint {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub tag: Tag,
}

impl RadiusConstraint {
    fn roots(&self) -> Vec<f64> {
        let (a, b, c) = (self.alpha, self.beta, self.gamma);
        if a == 0.0 {
            return if b == 0.0 { vec![] } else { vec![-c / b] };
        }
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return vec![];
        }
        let sq = disc.sqrt();
        let q = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
        let mut r = if q == 0.0 { vec![0.0, 0.0] } else { vec![q / a, c / q] };
        r.sort_by(|x, y| x.total_cmp(y));
        r
    }

    /// Admissible set as sorted closed intervals.
    fn admissible(&self) -> Vec<(f64, f64)> {
        let inf = f64::INFINITY;
        let (a, b, c) = (self.alpha, self.beta, self.gamma);
        if a == 0.0 {
            if b == 0.0 {
                return if c <= 0.0 { vec![(-inf, inf)] } else { vec![] };
            }
            let r = -c / b;
            return if b > 0.0 { vec![(-inf, r)] } else { vec![(r, inf)] };
        }
        let roots = self.roots();
        if roots.is_empty() {
            return if a > 0.0 { vec![] } else { vec![(-inf, inf)] };
        }
        if a > 0.0 {
            vec![(roots[0], roots[1])]
        } else {
            vec![(-inf, roots[0]), (roots[1], inf)]
        }
    }
}

fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(l1, h1) in a {
        for &(l2, h2) in b {
            let (l, h) = (l1.max(l2), h1.min(h2));
            if l <= h {
                out.push((l, h));
            }
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// Sites active at either end of the admissible radius range `[0, ∞) ∩ ⋂ constraints`.
pub(crate) fn active_sites(cons: &[RadiusConstraint], eps: f64) -> BTreeSet<usize> {
    let mut set = vec![(0.0, f64::INFINITY)];
    for c in cons {
        set = intersect(&set, &c.admissible());
        if set.is_empty() {
            return BTreeSet::new();
        }
    }
    let lo = set.first().unwrap().0;
    let hi = set.last().unwrap().1;
    let mut out = BTreeSet::new();
    for c in cons {
        let Some(id) = c.tag.site() else { continue };
        for r in c.roots() {
            for end in [lo, hi] {
                if end.is_finite() && (r - end).abs() <= eps * end.abs().max(1.0) {
                    out.insert(id);
                }
            }
        }
    }
    out
}

impl GeneralizedDiagram {
    /// Label of `x` read from the polytope's facets: the sites bounding the
    /// admissible radius range there. Empty outside `Z(D)` or the box.
    pub fn cell_at(&self, x: &[f64]) -> BTreeSet<usize> {
        let d = self.envelope.slice.d;
        let xx: f64 = x.iter().map(|v| v * v).sum();
        let cons: Vec<RadiusConstraint> = self
            .envelope
            .rows
            .iter()
            .map(|row| {
                let a0 = row.coeffs[0];
                let ax: f64 = row.coeffs[1..=d].iter().zip(x).map(|(a, b)| a * b).sum();
                RadiusConstraint {
                    alpha: -a0 / 2.0,
                    beta: row.coeffs[d + 1],
                    gamma: a0 * (1.0 + xx) / 2.0 + ax - row.bound,
                    tag: row.tag,
                }
            })
            .collect();
        active_sites(&cons, EPS_PRED)
    }

    pub fn site(&self, id: usize) -> Option<&Site> {
        self.site_table.iter().find(|s| s.id == id)
    }
}

/// Sites active at the ends of the admissible radius range at `x`, computed from
/// the Lie functionals of the sites. Empty means `x` is not an admissible centre.
pub fn locate(x: &[f64], ds: &DataSet) -> BTreeSet<usize> {
    let xx: f64 = x.iter().map(|v| v * v).sum();
    let d = ds.dimension();
    let cons: Vec<RadiusConstraint> = ds
        .sites()
        .iter()
        .map(|s| {
            let q = inequality_for_site(s);
            let c = &q.coeffs;
            let cx: f64 = c[2..d + 2].iter().zip(x).map(|(a, b)| a * b).sum();
            // σ_{x,r} = ((1+|x|²-r²)/2, (1-|x|²+r²)/2, x, r)
            RadiusConstraint {
                alpha: (c[1] - c[0]) / 2.0,
                beta: c[d + 2],
                gamma: (c[0] * (1.0 + xx) + c[1] * (1.0 - xx)) / 2.0 + cx,
                tag: q.tag,
            }
        })
        .collect();
    active_sites(&cons, EPS_PRED)
}
