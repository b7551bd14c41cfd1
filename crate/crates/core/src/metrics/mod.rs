//! Point-set distances and surface sampling.

mod index;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use index::PointIndex;

use crate::error::{Error, Result};
use crate::geom::{BBox, Vec3};
use crate::mesh::TriMesh;

/// Default number of surface samples per side.
pub const DEFAULT_SAMPLES: usize = 100_000;
/// F-score threshold as a fraction of the largest ground-truth extent.
pub const FSCORE_FRACTION: f64 = 1e-3;

/// Distance from every point of `from` to its nearest neighbour in `to`.
pub fn directed_distances(from: &[Vec3], to: &[Vec3]) -> Result<Vec<f64>> {
    if from.is_empty() || to.is_empty() {
        return Err(Error::EmptyInput("point set"));
    }
    let index = PointIndex::new(to);
    Ok(from.par_iter().map(|p| index.nearest(p).map_or(f64::INFINITY, |(_, d)| d)).collect())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Symmetric Chamfer distance: the average of both directed mean
/// Euclidean nearest-neighbour distances.
pub fn chamfer(a: &[Vec3], b: &[Vec3]) -> Result<f64> {
    let ab = directed_distances(a, b)?;
    let ba = directed_distances(b, a)?;
    Ok(0.5 * (mean(&ab) + mean(&ba)))
}

/// Symmetric Hausdorff distance.
pub fn hausdorff(a: &[Vec3], b: &[Vec3]) -> Result<f64> {
    let ab = directed_distances(a, b)?;
    let ba = directed_distances(b, a)?;
    Ok(ab.iter().chain(&ba).copied().fold(0.0, f64::max))
}

/// F-score in percent at threshold `tau`.
pub fn fscore(pred: &[Vec3], gt: &[Vec3], tau: f64) -> Result<f64> {
    let pg = directed_distances(pred, gt)?;
    let gp = directed_distances(gt, pred)?;
    Ok(fscore_from(&pg, &gp, tau))
}

fn fscore_from(pred_to_gt: &[f64], gt_to_pred: &[f64], tau: f64) -> f64 {
    let frac = |d: &[f64]| d.iter().filter(|&&x| x < tau).count() as f64 / d.len() as f64;
    let (p, r) = (frac(pred_to_gt), frac(gt_to_pred));
    if p + r == 0.0 {
        0.0
    } else {
        100.0 * 2.0 * p * r / (p + r)
    }
}

/// Draws `count` items with probability proportional to `weights`, mapping
/// each chosen index through `make`.
pub fn sample_weighted<R: Rng, T>(
    weights: &[f64],
    count: usize,
    rng: &mut R,
    mut make: impl FnMut(usize, &mut R) -> T,
) -> Vec<T> {
    let Ok(dist) = WeightedIndex::new(weights) else {
        return Vec::new();
    };
    (0..count)
        .map(|_| {
            let k = dist.sample(rng);
            make(k, rng)
        })
        .collect()
}

/// Area-weighted uniform samples on the triangles of `mesh`.
pub fn sample_mesh_surface<R: Rng>(mesh: &TriMesh, count: usize, rng: &mut R) -> Vec<Vec3> {
    let areas: Vec<f64> = (0..mesh.faces.len()).map(|f| mesh.face_area(f)).collect();
    sample_weighted(&areas, count, rng, |f, rng| {
        let [a, b, c] = mesh.triangle(f);
        let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
        let s = r1.sqrt();
        let (u, v, w) = (1.0 - s, s * (1.0 - r2), s * r2);
        [0, 1, 2].map(|k| u * a[k] + v * b[k] + w * c[k])
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub chamfer: f64,
    pub hausdorff: f64,
    pub fscore: f64,
    pub tau: f64,
    pub samples: usize,
}

/// Compares two sampled surfaces; `tau` defaults to 0.1% of the largest
/// ground-truth extent.
pub fn compare_point_sets(pred: &[Vec3], gt: &[Vec3], tau: Option<f64>) -> Result<MetricReport> {
    let tau = match tau {
        Some(t) => t,
        None => {
            let b = BBox::from_points(gt.iter()).ok_or(Error::EmptyInput("ground-truth points"))?;
            let ext = b.max_extent();
            if !(ext > 0.0) {
                return Err(Error::DegenerateBBox);
            }
            FSCORE_FRACTION * ext
        }
    };
    let pg = directed_distances(pred, gt)?;
    let gp = directed_distances(gt, pred)?;
    Ok(MetricReport {
        chamfer: 0.5 * (mean(&pg) + mean(&gp)),
        hausdorff: pg.iter().chain(&gp).copied().fold(0.0, f64::max),
        fscore: fscore_from(&pg, &gp, tau),
        tau,
        samples: pred.len().min(gt.len()),
    })
}

/// Samples both meshes and compares them. Each surface gets its own
/// generator seeded with `seed`, so identical meshes yield identical samples
/// and compare as exactly (0, 0, 100).
pub fn compare_meshes(pred: &TriMesh, gt: &TriMesh, samples: usize, seed: u64) -> Result<MetricReport> {
    if pred.is_empty() {
        return Err(Error::DegenerateMesh("predicted mesh has no faces".into()));
    }
    if gt.is_empty() {
        return Err(Error::DegenerateMesh("reference mesh has no faces".into()));
    }
    let a = sample_mesh_surface(pred, samples, &mut ChaCha8Rng::seed_from_u64(seed));
    let b = sample_mesh_surface(gt, samples, &mut ChaCha8Rng::seed_from_u64(seed));
    let gt_box = gt.bbox().ok_or(Error::DegenerateBBox)?;
    if !(gt_box.max_extent() > 0.0) {
        return Err(Error::DegenerateBBox);
    }
    compare_point_sets(&a, &b, Some(FSCORE_FRACTION * gt_box.max_extent()))
}
