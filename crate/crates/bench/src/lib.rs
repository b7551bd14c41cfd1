//! Shared fixtures for the benchmarks. Everything is seeded so timings
//! compare like with like across runs.

use patchwork_core::extract::Halfspace;
use patchwork_core::geom;
use patchwork_core::init::{kaiming_init, ShapeOracle};
use patchwork_core::pipeline::sample_shape;
use patchwork_core::{OrientedSampleSet, PatchworkModel, Vec3};
use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A model with `n` random terms per group.
pub fn random_model(dim: usize, n: usize, seed: u64) -> PatchworkModel {
    kaiming_init(dim, n, 75.0, &mut rng(seed)).expect("valid model")
}

/// Uniform points in [-1, 1]^dim.
pub fn random_points(dim: usize, m: usize, seed: u64) -> Vec<Vec3> {
    let u = Uniform::new_inclusive(-1.0, 1.0);
    let mut r = rng(seed);
    (0..m)
        .map(|_| {
            let mut p = [0.0; 3];
            for c in p.iter_mut().take(dim) {
                *c = u.sample(&mut r);
            }
            p
        })
        .collect()
}

pub fn sphere_samples(m: usize, seed: u64) -> OrientedSampleSet {
    sample_shape(&ShapeOracle::Sphere { r: 0.8 }, m, &mut rng(seed)).expect("sphere samples")
}

/// Halfspaces tangent to the unit sphere: a bounded polytope for LP timing.
pub fn tangent_halfspaces(count: usize, seed: u64) -> Vec<Halfspace> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let v: Vec3 = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
            Halfspace::new(geom::scale(&v, 1.0 / geom::norm(&v).max(1e-9)), -1.0)
        })
        .chain([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]
            .map(|n| Halfspace::new(n, -2.0)))
        .collect()
}
