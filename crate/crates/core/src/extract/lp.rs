//! Low-dimensional linear programming (Seidel's incremental algorithm) and
//! Chebyshev centers of polyhedra.
//!
//! The solver maximizes a lexicographic list of objectives over a box
//! intersected with halfspaces `a . x <= b`. Constraints are visited in a
//! fixed pseudo-random order, so results are deterministic.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Feasibility tolerance for normalized constraints.
const FEAS_TOL: f64 = 1e-10;
/// Coefficients below this are treated as zero during elimination.
const PIVOT_TOL: f64 = 1e-13;
/// Half-width of the artificial bounding box.
const BIG: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
struct Row {
    a: Vec<f64>,
    b: f64,
}

/// Maximizes `objectives` lexicographically subject to `rows` and
/// `lo <= x <= hi`. Returns `None` when infeasible.
fn seidel(rows: &[Row], objectives: &[Vec<f64>], lo: &[f64], hi: &[f64]) -> Option<Vec<f64>> {
    let d = lo.len();
    if d == 1 {
        return solve_1d(rows, objectives, lo[0], hi[0]);
    }
    let mut x: Vec<f64> = (0..d).map(|k| box_pick(objectives, k, lo[k], hi[k])).collect();
    for i in 0..rows.len() {
        let r = &rows[i];
        let lhs: f64 = r.a.iter().zip(&x).map(|(a, x)| a * x).sum();
        if lhs <= r.b + FEAS_TOL {
            continue;
        }
        // the new optimum lies on a . x = b
        let (p, ap) = r
            .a
            .iter()
            .enumerate()
            .map(|(k, &v)| (k, v))
            .fold((0, 0.0f64), |best, (k, v)| if v.abs() > best.1.abs() { (k, v) } else { best });
        if ap.abs() < PIVOT_TOL {
            return None;
        }
        let eliminate = |coef: &[f64]| -> (Vec<f64>, f64) {
            let f = coef[p] / ap;
            let out = (0..d)
                .filter(|&k| k != p)
                .map(|k| coef[k] - f * r.a[k])
                .collect();
            (out, f)
        };
        let mut sub_rows = Vec::with_capacity(i + 2);
        // box on the eliminated coordinate, with x_p = (b - sum a_k x_k) / ap
        for (sgn, bound) in [(1.0, hi[p]), (-1.0, -lo[p])] {
            let a: Vec<f64> = (0..d)
                .filter(|&k| k != p)
                .map(|k| -sgn * r.a[k] / ap)
                .collect();
            sub_rows.push(Row {
                a,
                b: bound - sgn * r.b / ap,
            });
        }
        for q in &rows[..i] {
            let (a, f) = eliminate(&q.a);
            sub_rows.push(Row { a, b: q.b - f * r.b });
        }
        let sub_obj: Vec<Vec<f64>> = objectives.iter().map(|o| eliminate(o).0).collect();
        let sub_lo: Vec<f64> = (0..d).filter(|&k| k != p).map(|k| lo[k]).collect();
        let sub_hi: Vec<f64> = (0..d).filter(|&k| k != p).map(|k| hi[k]).collect();
        let y = seidel(&sub_rows, &sub_obj, &sub_lo, &sub_hi)?;
        let mut it = y.iter();
        let mut acc = r.b;
        let mut tmp = vec![0.0; d];
        for (k, slot) in tmp.iter_mut().enumerate() {
            if k != p {
                *slot = *it.next().expect("dimension");
                acc -= r.a[k] * *slot;
            }
        }
        tmp[p] = acc / ap;
        x = tmp;
    }
    Some(x)
}

fn box_pick(objectives: &[Vec<f64>], k: usize, lo: f64, hi: f64) -> f64 {
    for o in objectives {
        if o[k] > PIVOT_TOL {
            return hi;
        }
        if o[k] < -PIVOT_TOL {
            return lo;
        }
    }
    lo
}

fn solve_1d(rows: &[Row], objectives: &[Vec<f64>], mut lo: f64, mut hi: f64) -> Option<Vec<f64>> {
    for r in rows {
        let a = r.a[0];
        if a > PIVOT_TOL {
            hi = hi.min(r.b / a);
        } else if a < -PIVOT_TOL {
            lo = lo.max(r.b / a);
        } else if r.b < -FEAS_TOL {
            return None;
        }
    }
    if lo > hi + FEAS_TOL {
        return None;
    }
    if lo > hi {
        let mid = 0.5 * (lo + hi);
        lo = mid;
        hi = mid;
    }
    Some(vec![box_pick(objectives, 0, lo, hi)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Chebyshev-center result: center `x` and inscribed radius `y`. A negative
/// radius means the polyhedron is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpResult {
    pub x: Vec3,
    pub y: f64,
    pub status: LpStatus,
}

/// Halfspace `<normal, x> + offset <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec3,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec3, offset: f64) -> Self {
        Halfspace { normal, offset }
    }

    #[inline]
    pub fn eval(&self, x: &Vec3) -> f64 {
        crate::geom::dot(&self.normal, x) + self.offset
    }
}

fn rank(vectors: impl Iterator<Item = Vec3>, dim: usize, tol: f64) -> usize {
    let mut basis: Vec<Vec3> = Vec::with_capacity(dim);
    for v in vectors {
        let n = crate::geom::norm(&v);
        if n == 0.0 {
            continue;
        }
        let mut r = crate::geom::scale(&v, 1.0 / n);
        for b in &basis {
            let p = crate::geom::dot(&r, b);
            r = crate::geom::sub(&r, &crate::geom::scale(b, p));
        }
        let rn = crate::geom::norm(&r);
        if rn > tol {
            basis.push(crate::geom::scale(&r, 1.0 / rn));
            if basis.len() == dim {
                break;
            }
        }
    }
    basis.len()
}

/// Chebyshev center of `{x : <u_j, x> + d_j <= 0}` in `dim` dimensions:
/// maximizes `y` subject to `<u_j, x> + y |u_j| + d_j <= 0`. Among optimal
/// centers the lexicographically smallest `x` is returned.
///
/// Fails with `NumericalDegeneracy` when the constraint normals do not span
/// the space (the center is then not isolated).
pub fn chebyshev_center(halfspaces: &[Halfspace], dim: usize) -> Result<LpResult> {
    if halfspaces.is_empty() {
        return Err(Error::EmptyInput("halfspace list"));
    }
    if rank(halfspaces.iter().map(|h| h.normal), dim, 1e-12) < dim {
        return Err(Error::NumericalDegeneracy(
            "constraint normals are rank-deficient".into(),
        ));
    }
    Ok(chebyshev_unchecked(halfspaces, dim))
}

pub(crate) fn chebyshev_unchecked(halfspaces: &[Halfspace], dim: usize) -> LpResult {
    let d = dim + 1;
    let mut rows = Vec::with_capacity(halfspaces.len());
    for h in halfspaces {
        let n = crate::geom::norm(&h.normal);
        if n < PIVOT_TOL {
            if h.offset > FEAS_TOL {
                return LpResult {
                    x: [0.0; 3],
                    y: f64::NEG_INFINITY,
                    status: LpStatus::Infeasible,
                };
            }
            continue;
        }
        let mut a = Vec::with_capacity(d);
        a.extend(h.normal[..dim].iter().map(|v| v / n));
        a.push(1.0);
        rows.push(Row { a, b: -h.offset / n });
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));
    let rows: Vec<Row> = order.into_iter().map(|i| rows[i].clone()).collect();

    // maximize y, then minimize x_1, x_2, ...
    let mut objectives = Vec::with_capacity(d);
    let mut o = vec![0.0; d];
    o[dim] = 1.0;
    objectives.push(o);
    for k in 0..dim {
        let mut o = vec![0.0; d];
        o[k] = -1.0;
        objectives.push(o);
    }
    let lo = vec![-BIG; d];
    let hi = vec![BIG; d];
    match seidel(&rows, &objectives, &lo, &hi) {
        None => LpResult {
            x: [0.0; 3],
            y: f64::NEG_INFINITY,
            status: LpStatus::Infeasible,
        },
        Some(sol) => {
            let mut x = [0.0; 3];
            x[..dim].copy_from_slice(&sol[..dim]);
            let y = sol[dim];
            let status = if y >= BIG * (1.0 - 1e-9) || x[..dim].iter().any(|v| v.abs() >= BIG * (1.0 - 1e-9)) {
                LpStatus::Unbounded
            } else {
                LpStatus::Optimal
            };
            LpResult { x, y, status }
        }
    }
}
