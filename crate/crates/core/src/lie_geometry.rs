//! Standard Lie coordinates for points, oriented spheres and oriented planes.
//!
//! A Lie vector lives in `R^{d+3}` with the indefinite product
//! `<x,y> = -x1 y1 + x2 y2 + ... + x_{d+2} y_{d+2} - x_{d+3} y_{d+3}`.

use crate::error::{invalid, Result};

/// Default absolute tolerance for [`predicate`] after normalising both vectors.
pub const EPS_PRED: f64 = 1e-9;

/// The improper point `(1, -1, 0, ..., 0)` for dimension `d`.
pub fn improper_point(d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d + 3];
    v[0] = 1.0;
    v[1] = -1.0;
    v
}

fn check_finite(xs: &[f64], what: &str) -> Result<()> {
    if xs.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        invalid(format!("{what} has non-finite entries"))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanPoint {
    coords: Vec<f64>,
}

impl EuclideanPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_finite(&coords, "point")?;
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientedSphere {
    pub center: Vec<f64>,
    /// Positive for inward normals, negative for outward, zero for a point sphere.
    pub signed_radius: f64,
}

impl OrientedSphere {
    pub fn new(center: Vec<f64>, signed_radius: f64) -> Result<Self> {
        check_finite(&center, "sphere center")?;
        if !signed_radius.is_finite() {
            return invalid("sphere radius is not finite");
        }
        Ok(Self {
            center,
            signed_radius,
        })
    }

    /// Same sphere with the opposite orientation.
    pub fn flipped(&self) -> Self {
        Self {
            center: self.center.clone(),
            signed_radius: -self.signed_radius,
        }
    }
}

/// The hyperplane `n·x = h`, oriented by its unit normal `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedPlane {
    normal: Vec<f64>,
    height: f64,
}

impl OrientedPlane {
    pub fn new(normal: Vec<f64>, height: f64) -> Result<Self> {
        check_finite(&normal, "plane normal")?;
        if !height.is_finite() {
            return invalid("plane height is not finite");
        }
        let n = dot(&normal, &normal).sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return invalid(format!("plane normal has norm {n}, expected 1"));
        }
        Ok(Self { normal, height })
    }

    /// Normalises `normal` first, scaling `height` to match.
    pub fn from_unnormalized(normal: Vec<f64>, height: f64) -> Result<Self> {
        let n = dot(&normal, &normal).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return invalid("plane normal must be nonzero");
        }
        Self::new(normal.iter().map(|v| v / n).collect(), height / n)
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    /// Signed distance `n·x - h`.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LieKind {
    Point,
    Sphere,
    Plane,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LieVector {
    pub coords: Vec<f64>,
    pub kind: LieKind,
}

impl LieVector {
    pub fn dim(&self) -> usize {
        self.coords.len() - 3
    }

    pub fn residual(&self) -> f64 {
        lie_form(&self.coords, &self.coords)
    }
}

impl AsRef<[f64]> for LieVector {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

pub fn point_to_lie(p: &EuclideanPoint) -> LieVector {
    let pp = dot(&p.coords, &p.coords);
    let mut c = Vec::with_capacity(p.dim() + 3);
    c.push((1.0 + pp) / 2.0);
    c.push((1.0 - pp) / 2.0);
    c.extend_from_slice(&p.coords);
    c.push(0.0);
    LieVector {
        coords: c,
        kind: LieKind::Point,
    }
}

pub fn sphere_to_lie(s: &OrientedSphere) -> LieVector {
    let qq = dot(&s.center, &s.center);
    let r = s.signed_radius;
    let mut c = Vec::with_capacity(s.center.len() + 3);
    c.push((1.0 + qq - r * r) / 2.0);
    c.push((1.0 - qq + r * r) / 2.0);
    c.extend_from_slice(&s.center);
    c.push(r);
    LieVector {
        coords: c,
        kind: if r == 0.0 {
            LieKind::Point
        } else {
            LieKind::Sphere
        },
    }
}

pub fn plane_to_lie(h: &OrientedPlane) -> LieVector {
    let mut c = Vec::with_capacity(h.normal.len() + 3);
    c.push(h.height);
    c.push(-h.height);
    c.extend_from_slice(&h.normal);
    c.push(1.0);
    LieVector {
        coords: c,
        kind: LieKind::Plane,
    }
}

/// Lie product without length checks.
pub(crate) fn lie_form(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut s = -x[0] * y[0] - x[n - 1] * y[n - 1];
    for i in 1..n - 1 {
        s += x[i] * y[i];
    }
    s
}

pub fn lie_product(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return invalid(format!(
            "Lie product of vectors of lengths {} and {}",
            x.len(),
            y.len()
        ));
    }
    if x.len() < 4 {
        return invalid("Lie vectors need at least 4 coordinates");
    }
    Ok(lie_form(x, y))
}

pub fn mobius_project(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    if let Some(last) = v.last_mut() {
        *last = 0.0;
    }
    v
}

fn require_affine(x: &LieVector) -> Result<()> {
    if x.kind == LieKind::Plane {
        return invalid("plane-kind Lie vector has no center or radius");
    }
    Ok(())
}

pub fn center_of(x: &LieVector) -> Result<EuclideanPoint> {
    require_affine(x)?;
    let n = x.coords.len();
    EuclideanPoint::new(x.coords[2..n - 1].to_vec())
}

pub fn radius_of(x: &LieVector) -> Result<f64> {
    require_affine(x)?;
    Ok(*x.coords.last().unwrap())
}

/// Möbius scalar product `½(r1² + r2² - |q1 - q2|²)`.
pub fn mobius_scalar(s1: &OrientedSphere, s2: &OrientedSphere) -> f64 {
    let d2: f64 = s1
        .center
        .iter()
        .zip(&s2.center)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    0.5 * (s1.signed_radius.powi(2) + s2.signed_radius.powi(2) - d2)
}

/// Geometric relations expressible as sign conditions on the Lie product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// point `x` lies on sphere `y`
    PointOnSphere,
    /// point `x` lies on plane `y`
    PointOnPlane,
    PointInsideSphere,
    PointOutsideSphere,
    /// point `x` lies strictly on the normal side of plane `y`
    PointInPositiveHalfspace,
    /// sphere `x` lies strictly inside the positive half-space of plane `y`
    SphereInPositiveHalfspace,
    /// spheres `x` and `y` (given positively oriented) have disjoint interiors, strictly
    SphereOutsideSphere,
    /// `ρ(x, y) ≤ 0`: orthogonal or further apart
    MobiusNonpositive,
    /// oriented contact of two spheres
    OrientedContact,
    /// oriented contact of a sphere and a plane
    SpherePlaneContact,
    /// unoriented external tangency of two spheres
    ExternallyTangent,
}

fn normalized_product(x: &[f64], y: &[f64]) -> f64 {
    let nx = dot(x, x).sqrt();
    let ny = dot(y, y).sqrt();
    lie_form(x, y) / (nx * ny)
}

fn negate_radius(y: &[f64]) -> Vec<f64> {
    let mut v = y.to_vec();
    let n = v.len();
    v[n - 1] = -v[n - 1];
    v
}

pub fn predicate(x: &LieVector, y: &LieVector, relation: Relation) -> Result<bool> {
    predicate_eps(x, y, relation, EPS_PRED)
}

pub fn predicate_eps(x: &LieVector, y: &LieVector, relation: Relation, eps: f64) -> Result<bool> {
    use LieKind::*;
    use Relation::*;
    if x.coords.len() != y.coords.len() {
        return invalid("Lie vectors of different dimension");
    }
    let sphere_like = |k: LieKind| matches!(k, Point | Sphere);
    let ok = match relation {
        PointOnSphere | PointInsideSphere | PointOutsideSphere => {
            x.kind == Point && sphere_like(y.kind)
        }
        PointOnPlane | PointInPositiveHalfspace => x.kind == Point && y.kind == Plane,
        SphereInPositiveHalfspace | SpherePlaneContact => sphere_like(x.kind) && y.kind == Plane,
        SphereOutsideSphere | MobiusNonpositive | OrientedContact | ExternallyTangent => {
            sphere_like(x.kind) && sphere_like(y.kind)
        }
    };
    if !ok {
        return invalid(format!(
            "relation {relation:?} does not apply to kinds {:?} and {:?}",
            x.kind, y.kind
        ));
    }
    let v = |a: &[f64], b: &[f64]| normalized_product(a, b);
    Ok(match relation {
        PointOnSphere | PointOnPlane | OrientedContact | SpherePlaneContact => {
            v(&x.coords, &y.coords).abs() <= eps
        }
        PointInsideSphere | PointInPositiveHalfspace | SphereInPositiveHalfspace => {
            v(&x.coords, &y.coords) > eps
        }
        PointOutsideSphere => v(&x.coords, &y.coords) < -eps,
        SphereOutsideSphere => v(&x.coords, &negate_radius(&y.coords)) < -eps,
        MobiusNonpositive => v(&mobius_project(&x.coords), &y.coords) <= eps,
        ExternallyTangent => v(&x.coords, &negate_radius(&y.coords)).abs() <= eps,
    })
}
