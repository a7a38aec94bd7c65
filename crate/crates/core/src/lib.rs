//! Generalized Voronoi diagrams from Lie sphere coordinates.
//!
//! Sites become linear inequalities on the Lie quadric; the admissible spheres
//! are the quadric points inside a convex polytope, and the diagram is read off
//! where the polytope's low-dimensional faces meet the quadric.

pub mod affine_md;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod hull;
pub mod lie_geometry;
pub mod oracle;
pub mod quadric;
mod strata;

pub use affine_md::{
    minimization_diagram, order_k_diagram, phi, quadratic_to_functional, LinearFunctional, MinimizationDiagram,
    QuadraticFunction,
};
pub use dataset::{assemble_system, inequality_for_site, DataSet, LinearInequality, Site, SiteKind, Tag};
pub use error::{GvdError, Result};
pub use hull::{BoundingBox, Polytope};
pub use lie_geometry::{LieVector, EPS_PRED};
pub use quadric::{compute_diagram, locate, DiagramOptions, GeneralizedDiagram};
