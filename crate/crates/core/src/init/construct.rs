//! Explicit lattice constructions whose tropical zero set is a digital
//! curve or surface.

use crate::error::{Error, Result};
use crate::field::{Group, LinearTerm, PatchworkModel};
use crate::geom::Vec3;
use crate::init::oracle::OccupancyOracle;

/// Default cap on the number of terms of a 3D grid construction.
pub const DEFAULT_MAX_TERMS: usize = 1 << 21;

/// Sharpness assigned to constructed models. Cells have width `1/N`, so the
/// smooth zero set stays within a small fraction of a cell of the tropical one.
pub fn construction_beta(n: usize) -> f64 {
    100.0 * n as f64
}

fn group_for(inside: bool) -> Group {
    if inside {
        Group::Minus
    } else {
        Group::Plus
    }
}

fn finish(dim: usize, n: usize, terms: Vec<LinearTerm>) -> Result<PatchworkModel> {
    let beta = construction_beta(n);
    PatchworkModel::new(dim, beta, beta, terms)
}

/// Square-grid digital curve of step `1/N` on `[-1,1]^2`.
///
/// Term `(k, l)` has slope `(k, l)` and offset `(1 - k^2 - l^2) / (2N)`, so its
/// candidate polygon is the square of side `1/N` centered at `(k, l)/N`. Cells
/// whose center the oracle reports inside go to the Minus group. Terms are
/// ordered with `k` outer and `l` inner, both ascending from `-N`.
pub fn digital_curve_grid(n: usize, oracle: &dyn OccupancyOracle) -> Result<PatchworkModel> {
    if n == 0 {
        return Err(Error::InvalidConfig("grid size N must be at least 1".into()));
    }
    let ni = n as i64;
    let nf = n as f64;
    let mut terms = Vec::with_capacity((2 * n + 1).pow(2));
    for k in -ni..=ni {
        for l in -ni..=ni {
            let (kf, lf) = (k as f64, l as f64);
            let c = (1.0 - kf * kf - lf * lf) / (2.0 * nf);
            let inside = oracle.inside(&[kf / nf, lf / nf, 0.0]);
            terms.push(LinearTerm::new([kf, lf, 0.0], c, group_for(inside)));
        }
    }
    finish(2, n, terms)
}

/// Center of the hexagonal candidate polygon of term `(k, l)` in the
/// affine honeycomb construction.
pub fn hex_cell_center(k: i64, l: i64, n: usize) -> Vec3 {
    let nf = n as f64;
    [(2 * k + l) as f64 / nf, (k + 2 * l) as f64 / nf, 0.0]
}

/// Affine honeycomb construction.
///
/// Term `(k, l)` has slope `(k, l)` and offset `-(k^2 + l^2 + kl - 1) / N`; its
/// candidate polygon is a centrally symmetric hexagon with sides parallel to
/// `x = 0`, `y = 0` and `x = y`, centered at `((2k + l)/N, (k + 2l)/N)`. The
/// oracle is queried at that center.
pub fn digital_curve_hex(n: usize, oracle: &dyn OccupancyOracle) -> Result<PatchworkModel> {
    if n == 0 {
        return Err(Error::InvalidConfig("lattice size N must be at least 1".into()));
    }
    let ni = n as i64;
    let nf = n as f64;
    let mut terms = Vec::with_capacity((2 * n + 1).pow(2));
    for k in -ni..=ni {
        for l in -ni..=ni {
            let (kf, lf) = (k as f64, l as f64);
            let c = -(kf * kf + lf * lf + kf * lf - 1.0) / nf;
            let inside = oracle.inside(&hex_cell_center(k, l, n));
            terms.push(LinearTerm::new([kf, lf, 0.0], c, group_for(inside)));
        }
    }
    finish(2, n, terms)
}

/// Cubic-grid digital surface of step `1/N` on `[-1,1]^3`.
///
/// Term `(k, l, m)` has slope `(k, l, m)` and offset `(1 - k^2 - l^2 - m^2) / (2N)`;
/// it joins the Minus group when `(k, l, m)/N` is inside. Fails when
/// `(2N+1)^3 > max_terms`.
pub fn digital_surface_grid(
    n: usize,
    oracle: &dyn OccupancyOracle,
    max_terms: usize,
) -> Result<PatchworkModel> {
    if n == 0 {
        return Err(Error::InvalidConfig("grid size N must be at least 1".into()));
    }
    let side = 2 * n + 1;
    let count = side.checked_pow(3).unwrap_or(usize::MAX);
    if count > max_terms {
        return Err(Error::MemoryBudgetExceeded {
            requested: count,
            cap: max_terms,
        });
    }
    let ni = n as i64;
    let nf = n as f64;
    let mut terms = Vec::with_capacity(count);
    for k in -ni..=ni {
        for l in -ni..=ni {
            for m in -ni..=ni {
                let (kf, lf, mf) = (k as f64, l as f64, m as f64);
                let c = (1.0 - kf * kf - lf * lf - mf * mf) / (2.0 * nf);
                let inside = oracle.inside(&[kf / nf, lf / nf, mf / nf]);
                terms.push(LinearTerm::new([kf, lf, mf], c, group_for(inside)));
            }
        }
    }
    finish(3, n, terms)
}
