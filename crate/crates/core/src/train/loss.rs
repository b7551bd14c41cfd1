//! Fitting losses and their analytic gradients.
//!
//! All four losses are evaluated in one streaming sweep over the batch. For
//! each point the kernel yields the group log-sum-exps and softmax-weighted
//! slopes; the upstream derivatives `dL/dF` and `dL/d∇F` are formed from
//! those and pushed back through the softmax in a second sweep over the
//! surviving terms.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::kernel::{Candidates, GroupStat, Mode, PackedGroup, PackedModel};
use crate::field::{Group, ParamGrads, PatchworkModel, PAR_CHUNK};
use crate::geom::{self, BBox, Vec3};
use crate::train::config::LossToggles;

/// `|∇F|` below this is treated as degenerate by the normal loss.
pub const DEGENERATE_GRAD: f64 = 1e-12;

/// Loss values for one batch. `total` is the unweighted sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossValues {
    pub surface: f64,
    pub normal: f64,
    pub occupancy: f64,
    pub prune: f64,
    pub total: f64,
}

impl LossValues {
    fn add(&mut self, o: &LossValues) {
        self.surface += o.surface;
        self.normal += o.normal;
        self.occupancy += o.occupancy;
        self.prune += o.prune;
    }

    fn finish(&mut self) {
        self.total = self.surface + self.normal + self.occupancy + self.prune;
    }

    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
    }
}

/// Double-well potential `4(q - 1/2)^2 - 4|q - 1/2| + 1`, zero at 0 and 1.
pub fn double_well(q: f64) -> f64 {
    4.0 * (q - 0.5).powi(2) - 4.0 * (q - 0.5).abs() + 1.0
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Occupancy penalty `g_dw(sigmoid(-F))^2` and its derivative in `F`.
pub fn occupancy_penalty(f: f64) -> (f64, f64) {
    let q = sigmoid(-f);
    let d = q - 0.5;
    let t = d.abs();
    let gd = (2.0 * t - 1.0).powi(2);
    let sign = if d > 0.0 {
        1.0
    } else if d < 0.0 {
        -1.0
    } else {
        0.0
    };
    let dl_dq = 8.0 * gd * (2.0 * t - 1.0) * sign;
    (gd * gd, dl_dq * (-q * (1.0 - q)))
}

/// Uniform samples in `bbox` (axes of zero extent stay fixed).
pub fn sample_off_surface<R: Rng>(bbox: &BBox, m: usize, rng: &mut R) -> Vec<Vec3> {
    (0..m)
        .map(|_| {
            let mut p = [0.0; 3];
            for k in 0..3 {
                let (lo, hi) = (bbox.min[k], bbox.max[k]);
                p[k] = if hi > lo { rng.gen_range(lo..hi) } else { lo };
            }
            p
        })
        .collect()
}

/// Oriented surface points of one batch.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceBatch<'a> {
    pub points: &'a [Vec3],
    pub normals: &'a [Vec3],
}

/// Losses, gradients and bookkeeping for one batch.
#[derive(Debug, Clone)]
pub struct LossEval {
    pub losses: LossValues,
    pub grads: ParamGrads,
    /// Surface samples skipped by the normal loss.
    pub degenerate_normals: usize,
}

struct GroupGrads {
    a: Vec<Vec3>,
    c: Vec<f64>,
    logs: Vec<f64>,
}

impl GroupGrads {
    fn zeros(n: usize) -> Self {
        GroupGrads {
            a: vec![[0.0; 3]; n],
            c: vec![0.0; n],
            logs: vec![0.0; n],
        }
    }

    fn add(&mut self, o: &GroupGrads) {
        for k in 0..self.c.len() {
            for d in 0..3 {
                self.a[k][d] += o.a[k][d];
            }
            self.c[k] += o.c[k];
            self.logs[k] += o.logs[k];
        }
    }
}

struct Partial {
    losses: LossValues,
    plus: GroupGrads,
    minus: GroupGrads,
    degenerate: usize,
}

struct Engine<'a> {
    packed: PackedModel,
    weights_plus: Vec<f64>,
    weights_minus: Vec<f64>,
    toggles: LossToggles,
    model: &'a PatchworkModel,
}

impl<'a> Engine<'a> {
    fn new(model: &'a PatchworkModel, toggles: LossToggles) -> Self {
        let packed = PackedModel::new(model, Mode::Smooth);
        let w = |p: &PackedGroup| p.index.iter().map(|&i| model.terms[i].weight()).collect();
        Engine {
            weights_plus: w(&packed.plus),
            weights_minus: w(&packed.minus),
            packed,
            toggles,
            model,
        }
    }

    fn empty_partial(&self) -> Partial {
        Partial {
            losses: LossValues::default(),
            plus: GroupGrads::zeros(self.packed.plus.len()),
            minus: GroupGrads::zeros(self.packed.minus.len()),
            degenerate: 0,
        }
    }

    /// Backpropagates `(dL/dF, dL/d∇F)` at `x` into one group, and applies
    /// the prune coverage term when `prune_scale > 0`.
    #[allow(clippy::too_many_arguments)]
    fn backward_group(
        &self,
        group: Group,
        x: &Vec3,
        stat: &GroupStat,
        cand: &Candidates,
        dl_df: f64,
        dl_dgrad: &Vec3,
        prune_scale: f64,
        out: &mut GroupGrads,
        losses: &mut LossValues,
    ) {
        let packed = self.packed.group(group);
        let weights = match group {
            Group::Plus => &self.weights_plus,
            Group::Minus => &self.weights_minus,
        };
        let sign = group.sign();
        let beta = packed.beta;
        let gs = sign * dl_df;
        let us = geom::scale(dl_dgrad, sign);
        let backprop = gs != 0.0 || us != [0.0; 3];

        if prune_scale > 0.0 {
            let mut covered = 0.0;
            packed.for_each_weight(x, stat, cand, |k, w| covered += weights[k] * w);
            let r = 1.0 - covered;
            if r > 0.0 {
                losses.prune += prune_scale * r;
                packed.for_each_weight(x, stat, cand, |k, w| {
                    out.logs[k] -= prune_scale * weights[k] * w;
                });
            }
        }
        if !backprop {
            return;
        }
        let u_dot_g = geom::dot(&us, &stat.grad);
        let inv_beta = 1.0 / beta;
        packed.for_each_weight(x, stat, cand, |k, w| {
            let a = [packed.ax[k] * inv_beta, packed.ay[k] * inv_beta, packed.az[k] * inv_beta];
            let dz = w * (gs * inv_beta + geom::dot(&us, &a) - u_dot_g);
            let ga = &mut out.a[k];
            ga[0] += dz * beta * x[0] + w * us[0];
            ga[1] += dz * beta * x[1] + w * us[1];
            ga[2] += dz * beta * x[2] + w * us[2];
            out.c[k] += dz * beta;
            out.logs[k] += dz;
        });
    }

    fn surface_chunk(&self, points: &[Vec3], normals: &[Vec3], m: f64) -> Partial {
        let mut part = self.empty_partial();
        let mut cp = Candidates::new();
        let mut cm = Candidates::new();
        let t = self.toggles;
        let prune_scale = if t.prune { 1.0 / m } else { 0.0 };
        for (x, n) in points.iter().zip(normals) {
            let sp = self.packed.plus.stat(x, &mut cp);
            let sm = self.packed.minus.stat(x, &mut cm);
            let pe = crate::field::eval::combine(self.model, &sp, &sm);
            let mut dl_df = 0.0;
            let mut dl_dgrad = [0.0; 3];
            if t.surface {
                part.losses.surface += pe.value.abs() / m;
                dl_df += if pe.value > 0.0 {
                    1.0 / m
                } else if pe.value < 0.0 {
                    -1.0 / m
                } else {
                    0.0
                };
            }
            if t.normal {
                let gn = geom::norm(&pe.grad);
                if gn < DEGENERATE_GRAD || !gn.is_finite() {
                    part.degenerate += 1;
                } else {
                    let nn = geom::norm(n);
                    let nh = geom::scale(n, 1.0 / nn);
                    let cos = geom::dot(&pe.grad, &nh) / gn;
                    part.losses.normal += (1.0 - cos) / m;
                    for k in 0..3 {
                        dl_dgrad[k] = -(nh[k] / gn - cos * pe.grad[k] / (gn * gn)) / m;
                    }
                }
            }
            self.backward_group(
                Group::Plus, x, &sp, &cp, dl_df, &dl_dgrad, prune_scale, &mut part.plus, &mut part.losses,
            );
            self.backward_group(
                Group::Minus, x, &sm, &cm, dl_df, &dl_dgrad, prune_scale, &mut part.minus, &mut part.losses,
            );
        }
        part
    }

    fn off_chunk(&self, points: &[Vec3], m: f64) -> Partial {
        let mut part = self.empty_partial();
        let mut cp = Candidates::new();
        let mut cm = Candidates::new();
        for x in points {
            let sp = self.packed.plus.stat(x, &mut cp);
            let sm = self.packed.minus.stat(x, &mut cm);
            let pe = crate::field::eval::combine(self.model, &sp, &sm);
            let (pen, d) = occupancy_penalty(pe.value);
            part.losses.occupancy += pen / m;
            let dl_df = d / m;
            let zero = [0.0; 3];
            self.backward_group(Group::Plus, x, &sp, &cp, dl_df, &zero, 0.0, &mut part.plus, &mut part.losses);
            self.backward_group(Group::Minus, x, &sm, &cm, dl_df, &zero, 0.0, &mut part.minus, &mut part.losses);
        }
        part
    }
}

fn reduce(parts: Vec<Partial>, init: Partial) -> Partial {
    parts.into_iter().fold(init, |mut acc, p| {
        acc.losses.add(&p.losses);
        acc.plus.add(&p.plus);
        acc.minus.add(&p.minus);
        acc.degenerate += p.degenerate;
        acc
    })
}

/// Evaluates the enabled losses on a surface batch and an off-surface batch,
/// with gradients for every active parameter. The prune loss treats the
/// softmax attributions as constants.
pub fn evaluate_losses(
    model: &PatchworkModel,
    surface: SurfaceBatch<'_>,
    off_surface: &[Vec3],
    toggles: LossToggles,
) -> Result<LossEval> {
    if surface.points.len() != surface.normals.len() {
        return Err(Error::InvalidModel("points and normals differ in length".into()));
    }
    let engine = Engine::new(model, toggles);
    let mut total = engine.empty_partial();

    let needs_surface = toggles.surface || toggles.normal || toggles.prune;
    if needs_surface && !surface.points.is_empty() {
        let m = surface.points.len() as f64;
        let parts: Vec<Partial> = surface
            .points
            .par_chunks(PAR_CHUNK)
            .zip(surface.normals.par_chunks(PAR_CHUNK))
            .map(|(p, n)| engine.surface_chunk(p, n, m))
            .collect();
        total = reduce(parts, total);
    }
    if toggles.occupancy && !off_surface.is_empty() {
        let m = off_surface.len() as f64;
        let parts: Vec<Partial> = off_surface
            .par_chunks(PAR_CHUNK)
            .map(|p| engine.off_chunk(p, m))
            .collect();
        total = reduce(parts, total);
    }
    if toggles.prune {
        // weight-shrinking term (1/n) sum_i s_i per group, over active terms
        for (packed, weights, grads) in [
            (&engine.packed.plus, &engine.weights_plus, &mut total.plus),
            (&engine.packed.minus, &engine.weights_minus, &mut total.minus),
        ] {
            let n = packed.len();
            if n == 0 {
                continue;
            }
            let inv = 1.0 / n as f64;
            for k in 0..n {
                total.losses.prune += weights[k] * inv;
                grads.logs[k] += weights[k] * inv;
            }
        }
    }
    total.losses.finish();

    let mut grads = ParamGrads::zeros(model.len());
    for (packed, gg) in [(&engine.packed.plus, &total.plus), (&engine.packed.minus, &total.minus)] {
        for (k, &i) in packed.index.iter().enumerate() {
            grads.slope[i] = gg.a[k];
            if model.dim == 2 {
                grads.slope[i][2] = 0.0;
            }
            grads.offset[i] = gg.c[k];
            grads.log_weight[i] = gg.logs[k];
        }
    }
    if model.weight_norm_enabled() {
        grads.chain_weight_norm(model);
    }
    Ok(LossEval {
        losses: total.losses,
        grads,
        degenerate_normals: total.degenerate,
    })
}

fn single(model: &PatchworkModel, surface: SurfaceBatch<'_>, off: &[Vec3], toggles: LossToggles) -> Result<LossEval> {
    model.validate()?;
    evaluate_losses(model, surface, off, toggles)
}

/// Mean absolute field value over the batch.
pub fn loss_surface(model: &PatchworkModel, points: &[Vec3]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyInput("surface batch"));
    }
    let normals = vec![[1.0, 0.0, 0.0]; points.len()];
    let t = LossToggles {
        surface: true,
        ..LossToggles::none()
    };
    Ok(single(model, SurfaceBatch { points, normals: &normals }, &[], t)?.losses.surface)
}

/// Mean `1 - cos(∇F, n)`. Samples with `|∇F| < 1e-12` are skipped; if every
/// sample is degenerate the call fails.
pub fn loss_normal(model: &PatchworkModel, points: &[Vec3], normals: &[Vec3]) -> Result<(f64, usize)> {
    if points.is_empty() {
        return Err(Error::EmptyInput("surface batch"));
    }
    let t = LossToggles {
        normal: true,
        ..LossToggles::none()
    };
    let ev = single(model, SurfaceBatch { points, normals }, &[], t)?;
    if ev.degenerate_normals == points.len() {
        return Err(Error::DegenerateGradient {
            count: ev.degenerate_normals,
        });
    }
    Ok((ev.losses.normal, ev.degenerate_normals))
}

/// Mean squared double-well penalty of `sigmoid(-F)` at off-surface points.
pub fn loss_occupancy(model: &PatchworkModel, off: &[Vec3]) -> Result<f64> {
    let t = LossToggles {
        occupancy: true,
        ..LossToggles::none()
    };
    let empty = SurfaceBatch { points: &[], normals: &[] };
    Ok(single(model, empty, off, t)?.losses.occupancy)
}

/// Weight-sparsity loss with softmax coverage, summed over both groups.
pub fn loss_prune(model: &PatchworkModel, points: &[Vec3]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyInput("surface batch"));
    }
    let normals = vec![[1.0, 0.0, 0.0]; points.len()];
    let t = LossToggles {
        prune: true,
        ..LossToggles::none()
    };
    Ok(single(model, SurfaceBatch { points, normals: &normals }, &[], t)?.losses.prune)
}
