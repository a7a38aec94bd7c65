//! Sites and their linear inequalities on the Lie quadric.

use std::collections::BTreeSet;

use crate::error::{invalid, Result};
use crate::hull::BoundingBox;
use crate::lie_geometry::{
    mobius_project, plane_to_lie, point_to_lie, sphere_to_lie, EuclideanPoint, OrientedPlane,
    OrientedSphere,
};

#[derive(Debug, Clone, PartialEq)]
pub enum SiteKind {
    /// The sphere must not contain the point in its interior.
    PointOutside(EuclideanPoint),
    /// The sphere must contain the point (closed ball).
    PointInside(EuclideanPoint),
    /// The sphere must lie in the half-space `n·x ≥ h`.
    HalfSpace(OrientedPlane),
    /// Möbius product with the given sphere must be non-positive.
    PowerSphere { center: Vec<f64>, radius: f64 },
    /// The sphere must not overlap the given ball.
    ExteriorSphere { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub id: usize,
    pub kind: SiteKind,
}

impl Site {
    pub fn new(id: usize, kind: SiteKind) -> Result<Self> {
        match &kind {
            SiteKind::PowerSphere { center, radius } | SiteKind::ExteriorSphere { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return invalid(format!("site {id}: sphere radius must be > 0, got {radius}"));
                }
                OrientedSphere::new(center.clone(), *radius)?;
            }
            _ => {}
        }
        Ok(Self { id, kind })
    }

    pub fn point_outside(id: usize, p: &[f64]) -> Result<Self> {
        Self::new(id, SiteKind::PointOutside(EuclideanPoint::new(p.to_vec())?))
    }

    pub fn point_inside(id: usize, p: &[f64]) -> Result<Self> {
        Self::new(id, SiteKind::PointInside(EuclideanPoint::new(p.to_vec())?))
    }

    pub fn halfspace(id: usize, normal: &[f64], height: f64) -> Result<Self> {
        Self::new(id, SiteKind::HalfSpace(OrientedPlane::new(normal.to_vec(), height)?))
    }

    pub fn power_sphere(id: usize, center: &[f64], radius: f64) -> Result<Self> {
        Self::new(
            id,
            SiteKind::PowerSphere {
                center: center.to_vec(),
                radius,
            },
        )
    }

    pub fn exterior_sphere(id: usize, center: &[f64], radius: f64) -> Result<Self> {
        Self::new(
            id,
            SiteKind::ExteriorSphere {
                center: center.to_vec(),
                radius,
            },
        )
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SiteKind::PointOutside(p) | SiteKind::PointInside(p) => p.dim(),
            SiteKind::HalfSpace(h) => h.normal().len(),
            SiteKind::PowerSphere { center, .. } | SiteKind::ExteriorSphere { center, .. } => {
                center.len()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    sites: Vec<Site>,
    dimension: usize,
}

impl DataSet {
    pub fn new(sites: Vec<Site>, dimension: usize) -> Result<Self> {
        if dimension < 2 {
            return invalid(format!("dimension must be at least 2, got {dimension}"));
        }
        if sites.len() < 2 {
            return invalid(format!("a data set needs at least 2 sites, got {}", sites.len()));
        }
        let mut ids = BTreeSet::new();
        for (i, s) in sites.iter().enumerate() {
            if s.dim() != dimension {
                return invalid(format!(
                    "sites[{i}] has dimension {}, expected {dimension}",
                    s.dim()
                ));
            }
            if !ids.insert(s.id) {
                return invalid(format!("sites[{i}] reuses id {}", s.id));
            }
        }
        Ok(Self { sites, dimension })
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn site(&self, id: usize) -> Option<&Site> {
        self.sites.iter().find(|s| s.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Site(usize),
    BoundingBox,
    RadiusSign,
}

impl Tag {
    pub fn site(self) -> Option<usize> {
        match self {
            Tag::Site(i) => Some(i),
            _ => None,
        }
    }

    pub fn is_structural(self) -> bool {
        !matches!(self, Tag::Site(_))
    }
}

/// `coeffs · σ ≤ bound`, with the Lie signature already folded into `coeffs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearInequality {
    pub coeffs: Vec<f64>,
    pub bound: f64,
    pub tag: Tag,
}

impl LinearInequality {
    /// Residual `coeffs · σ - bound`; non-positive when satisfied.
    pub fn evaluate(&self, sigma: &[f64]) -> f64 {
        self.coeffs.iter().zip(sigma).map(|(a, b)| a * b).sum::<f64>() - self.bound
    }
}

/// Turns the Lie product `<a, σ>` into a plain dot product `c · σ`.
pub fn fold(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut c = a.to_vec();
    c[0] = 0.0 - c[0];
    c[n - 1] = 0.0 - c[n - 1];
    c
}

pub fn inequality_for_site(site: &Site) -> LinearInequality {
    let (a, sign) = match &site.kind {
        SiteKind::PointOutside(p) => (point_to_lie(p).coords, 1.0),
        SiteKind::PointInside(p) => (point_to_lie(p).coords, -1.0),
        // the sphere lies in n·x ≥ h iff <σ, π> = n·q - h - r ≥ 0
        SiteKind::HalfSpace(h) => (plane_to_lie(h).coords, -1.0),
        SiteKind::PowerSphere { center, radius } => {
            let s = OrientedSphere {
                center: center.clone(),
                signed_radius: *radius,
            };
            (mobius_project(&sphere_to_lie(&s).coords), 1.0)
        }
        SiteKind::ExteriorSphere { center, radius } => {
            let s = OrientedSphere {
                center: center.clone(),
                signed_radius: -radius,
            };
            (sphere_to_lie(&s).coords, 1.0)
        }
    };
    let coeffs = fold(&a).into_iter().map(|v| sign * v + 0.0).collect();
    LinearInequality {
        coeffs,
        bound: 0.0,
        tag: Tag::Site(site.id),
    }
}

fn unit(n: usize, i: usize, s: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = s;
    v
}

/// Site inequalities followed by the box on centers, the radius cap and `r ≥ 0`.
pub fn assemble_system(ds: &DataSet, bbox: &BoundingBox) -> Vec<LinearInequality> {
    let d = ds.dimension();
    let n = d + 3;
    let mut out: Vec<LinearInequality> = ds.sites().iter().map(inequality_for_site).collect();
    for i in 0..d {
        for s in [1.0, -1.0] {
            out.push(LinearInequality {
                coeffs: unit(n, 2 + i, s),
                bound: bbox.half_width,
                tag: Tag::BoundingBox,
            });
        }
    }
    out.push(LinearInequality {
        coeffs: unit(n, n - 1, 1.0),
        bound: bbox.radius_cap(d),
        tag: Tag::BoundingBox,
    });
    out.push(LinearInequality {
        coeffs: unit(n, n - 1, -1.0),
        bound: 0.0,
        tag: Tag::RadiusSign,
    });
    out
}
