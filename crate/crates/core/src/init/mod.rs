//! Explicit model construction.

mod construct;
mod geometric;
pub mod oracle;
mod samples;

pub use construct::{
    construction_beta, digital_curve_grid, digital_curve_hex, digital_surface_grid,
    hex_cell_center, DEFAULT_MAX_TERMS,
};
pub use geometric::{geometric_init, kaiming_init, DEFAULT_BETA, DEFAULT_RHO};
pub use oracle::{OccupancyOracle, ShapeOracle};
pub use samples::{OrientedSampleSet, UNIT_TOL};
