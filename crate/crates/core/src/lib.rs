//! Patchwork fields.
//!
//! A patchwork field is a signed log-sum-exp combination of linear
//! functions whose zero level set describes a curve (2D) or surface (3D).
//! As the sharpness grows the field converges to a difference of two
//! maxima of linear functions, a tropical polynomial whose zero set is a
//! union of planar polygons. This crate evaluates and differentiates both
//! forms, builds them explicitly from grids or oriented point clouds, fits
//! them by gradient descent with progressive pruning, and extracts the
//! resulting shapes.

pub mod error;
pub mod extract;
pub mod field;
pub mod geom;
pub mod init;
pub mod io;
pub mod mesh;
pub mod metrics;
pub mod pipeline;
pub mod shapes;
pub mod train;

pub use error::{Error, Result};
pub use field::{
    eval_field, eval_tropical, FieldEval, Group, LinearTerm, PatchworkModel, PointEval,
};
pub use geom::{BBox, Vec3};
pub use init::OrientedSampleSet;
pub use mesh::TriMesh;
pub use train::{FitConfig, FitReport};
