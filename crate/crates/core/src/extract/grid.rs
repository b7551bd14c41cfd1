use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{eval_tropical_values, eval_values, PatchworkModel};
use crate::geom::{BBox, Vec3};

/// Largest node count a grid may hold by default (512^3).
pub const DEFAULT_MAX_NODES: usize = 1 << 27;

/// Values on a regular lattice of `res` nodes per axis spanning `bbox`.
/// Storage is row-major with x fastest: `ix + nx * (iy + ny * iz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    pub dim: usize,
    pub res: usize,
    pub bbox: BBox,
    pub values: Vec<f64>,
}

impl ScalarGrid {
    pub fn node_count(dim: usize, res: usize) -> Option<usize> {
        res.checked_pow(dim as u32)
    }

    pub fn spacing(&self) -> Vec3 {
        let mut h = [0.0; 3];
        for (k, slot) in h.iter_mut().enumerate().take(self.dim) {
            *slot = (self.bbox.max[k] - self.bbox.min[k]) / (self.res - 1) as f64;
        }
        h
    }

    /// Largest grid step over all axes.
    pub fn cell_size(&self) -> f64 {
        self.spacing().iter().copied().fold(0.0, f64::max)
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.res * (iy + self.res * iz)
    }

    pub fn node(&self, ix: usize, iy: usize, iz: usize) -> Vec3 {
        node_position(&self.bbox, self.res, self.dim, [ix, iy, iz])
    }

    pub fn value(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.values[self.index(ix, iy, iz)]
    }

    /// Samples `f` at every node.
    pub fn from_fn(
        dim: usize,
        res: usize,
        bbox: &BBox,
        max_nodes: usize,
        f: impl Fn(&Vec3) -> f64 + Sync,
    ) -> Result<Self> {
        Self::build(dim, res, bbox, max_nodes, |pts| pts.par_iter().map(&f).collect())
    }

    fn build(
        dim: usize,
        res: usize,
        bbox: &BBox,
        max_nodes: usize,
        eval: impl Fn(&[Vec3]) -> Vec<f64>,
    ) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidConfig(format!("grid dimension must be 2 or 3, got {dim}")));
        }
        if res < 2 {
            return Err(Error::InvalidConfig("grid resolution must be at least 2".into()));
        }
        if bbox.extent()[..dim].iter().any(|&e| !(e > 0.0)) {
            return Err(Error::DegenerateBBox);
        }
        let count = Self::node_count(dim, res).unwrap_or(usize::MAX);
        if count > max_nodes {
            return Err(Error::MemoryBudgetExceeded {
                requested: count,
                cap: max_nodes,
            });
        }
        let nz = if dim == 3 { res } else { 1 };
        let mut values = Vec::with_capacity(count);
        // one z-slice at a time keeps the point buffer small
        let mut pts = Vec::with_capacity(res * res);
        for iz in 0..nz {
            pts.clear();
            for iy in 0..res {
                for ix in 0..res {
                    pts.push(node_position(bbox, res, dim, [ix, iy, iz]));
                }
            }
            values.extend(eval(&pts));
        }
        Ok(ScalarGrid {
            dim,
            res,
            bbox: *bbox,
            values,
        })
    }
}

fn node_position(bbox: &BBox, res: usize, dim: usize, idx: [usize; 3]) -> Vec3 {
    let mut p = [0.0; 3];
    for k in 0..dim {
        let t = idx[k] as f64 / (res - 1) as f64;
        p[k] = if idx[k] == res - 1 {
            bbox.max[k]
        } else {
            bbox.min[k] + t * (bbox.max[k] - bbox.min[k])
        };
    }
    p
}

/// Samples the smooth field of `model` on a `res`-per-axis grid.
pub fn sample_grid(model: &PatchworkModel, res: usize, bbox: &BBox) -> Result<ScalarGrid> {
    sample_grid_capped(model, res, bbox, DEFAULT_MAX_NODES)
}

pub fn sample_grid_capped(model: &PatchworkModel, res: usize, bbox: &BBox, max_nodes: usize) -> Result<ScalarGrid> {
    model.validate()?;
    ScalarGrid::build(model.dim, res, bbox, max_nodes, |pts| eval_values(model, pts))
}

/// Samples the tropical limit of `model`.
pub fn sample_grid_tropical(model: &PatchworkModel, res: usize, bbox: &BBox) -> Result<ScalarGrid> {
    model.validate()?;
    ScalarGrid::build(model.dim, res, bbox, DEFAULT_MAX_NODES, |pts| {
        eval_tropical_values(model, pts)
    })
}
