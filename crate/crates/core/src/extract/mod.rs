//! Surface extraction: exact tropical cells and grid-based level sets.

mod complex;
mod grid;
mod lp;
mod marching;
mod polytope;
mod tropical;

pub use complex::{Degeneracy, DegeneracyKind, ExtractedComplex, FacetLabel, InteriorCell};
pub use grid::{sample_grid, sample_grid_capped, sample_grid_tropical, ScalarGrid, DEFAULT_MAX_NODES};
pub use lp::{chebyshev_center, Halfspace, LpResult, LpStatus};
pub use marching::{marching_cubes, marching_squares};
pub use polytope::{Polygon, Polyhedron, Tag};
pub use tropical::{extract_tropical, ExtractOptions};
