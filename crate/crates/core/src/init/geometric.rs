use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::field::{Group, LinearTerm, PatchworkModel};
use crate::geom::{self, Vec3};
use crate::init::samples::{OrientedSampleSet, UNIT_TOL};

pub const DEFAULT_RHO: f64 = 200.0;
pub const DEFAULT_BETA: f64 = 75.0;

/// Closed-form initialization from oriented samples.
///
/// Each sample `(x_j, n_j)` contributes the tangent plane of
/// `h+(x) = rho/2 |x|^2 + sdf(x)` to the Plus group and the tangent plane of
/// `h-(x) = rho/2 |x|^2` to the Minus group, so the tropical field vanishes
/// at `x_j` with gradient `n_j`. Plus terms come first, then Minus terms, in
/// sample order. Weight normalization is enabled.
///
/// Sample `j` attains both group maxima at `x_j` whenever the other samples
/// lie at least `2 / rho` away from it.
pub fn geometric_init(samples: &OrientedSampleSet, rho: f64, beta: f64) -> Result<PatchworkModel> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("oriented sample set"));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidConfig(format!("rho must be positive, got {rho}")));
    }
    for (i, n) in samples.normals.iter().enumerate() {
        let len = geom::norm(n);
        if (len - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnitNormal { index: i, norm: len });
        }
    }
    let m = samples.len();
    let mut terms = Vec::with_capacity(2 * m);
    for (x, n) in samples.points.iter().zip(&samples.normals) {
        let sq = geom::dot(x, x);
        let a = geom::add(&geom::scale(x, rho), n);
        let c = -0.5 * rho * sq - geom::dot(n, x);
        terms.push(LinearTerm::new(a, c, Group::Plus));
    }
    for x in &samples.points {
        let sq = geom::dot(x, x);
        terms.push(LinearTerm::new(geom::scale(x, rho), -0.5 * rho * sq, Group::Minus));
    }
    let mut model = PatchworkModel::new(samples.dim, beta, beta, terms)?;
    model.enable_weight_norm();
    Ok(model)
}

/// Data-independent initialization used to ablate the geometric one:
/// slopes drawn from `N(0, 2 / d)` and offsets from `U(-1/sqrt(d), 1/sqrt(d))`.
pub fn kaiming_init<R: Rng>(dim: usize, per_group: usize, beta: f64, rng: &mut R) -> Result<PatchworkModel> {
    if per_group == 0 {
        return Err(Error::EmptyInput("kaiming init group size"));
    }
    let std = (2.0 / dim as f64).sqrt();
    let bound = 1.0 / (dim as f64).sqrt();
    let mut terms = Vec::with_capacity(2 * per_group);
    for group in [Group::Plus, Group::Minus] {
        for _ in 0..per_group {
            let mut a: Vec3 = [0.0; 3];
            for v in a.iter_mut().take(dim) {
                *v = std * rng.sample::<f64, _>(StandardNormal);
            }
            let c = rng.gen_range(-bound..bound);
            terms.push(LinearTerm::new(a, c, group));
        }
    }
    let mut model = PatchworkModel::new(dim, beta, beta, terms)?;
    model.enable_weight_norm();
    Ok(model)
}
