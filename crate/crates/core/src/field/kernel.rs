//! Packed per-group evaluation kernel.
//!
//! Each group is packed into structure-of-arrays form with the sharpness
//! folded in: `z_i = <beta a_i, x> + (beta c_i + log s_i)`. A point is
//! processed in two passes. The first pass computes the running maximum of
//! `z` and records the few terms that can matter after max-subtraction in
//! a fixed-capacity buffer; the second pass accumulates the exponentials.
//! When the buffer overflows the second pass rescans every term, so the
//! auxiliary memory per point never depends on the number of terms.

use crate::field::model::{Group, PatchworkModel};
use crate::geom::Vec3;

/// Terms with `z < max - LOG_CUTOFF` contribute less than `exp(-40)` relative
/// weight each and are skipped.
pub(crate) const LOG_CUTOFF: f64 = 40.0;

const CHUNK: usize = 64;
pub(crate) const CANDIDATE_CAP: usize = 256;

/// Evaluation mode for packing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    /// `beta (<a,x> + c) + log s`
    Smooth,
    /// `<a,x> + c`, weights and sharpness ignored
    Tropical,
}

#[derive(Debug, Clone)]
pub(crate) struct PackedGroup {
    pub ax: Vec<f64>,
    pub ay: Vec<f64>,
    pub az: Vec<f64>,
    pub bias: Vec<f64>,
    /// Index of each packed term in the model's term list.
    pub index: Vec<usize>,
    pub beta: f64,
}

impl PackedGroup {
    pub fn new(model: &PatchworkModel, group: Group, mode: Mode) -> Self {
        let beta = match mode {
            Mode::Smooth => model.beta(group),
            Mode::Tropical => 1.0,
        };
        let n = model.terms.iter().filter(|t| t.active && t.group == group).count();
        let mut p = PackedGroup {
            ax: Vec::with_capacity(n),
            ay: Vec::with_capacity(n),
            az: Vec::with_capacity(n),
            bias: Vec::with_capacity(n),
            index: Vec::with_capacity(n),
            beta,
        };
        for (i, t) in model.terms.iter().enumerate() {
            if !t.active || t.group != group {
                continue;
            }
            p.ax.push(beta * t.slope[0]);
            p.ay.push(beta * t.slope[1]);
            p.az.push(beta * t.slope[2]);
            p.bias.push(match mode {
                Mode::Smooth => beta * t.offset + t.log_weight,
                Mode::Tropical => t.offset,
            });
            p.index.push(i);
        }
        p
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    #[inline]
    pub fn z(&self, k: usize, x: &Vec3) -> f64 {
        self.ax[k] * x[0] + self.ay[k] * x[1] + self.az[k] * x[2] + self.bias[k]
    }

    /// Plain maximum of `z` over the group (`-inf` when empty).
    pub fn max(&self, x: &Vec3) -> f64 {
        let n = self.len();
        let body = n - n % 8;
        let mut lanes = [f64::NEG_INFINITY; 8];
        let rows = self.ax[..body]
            .chunks_exact(8)
            .zip(self.ay[..body].chunks_exact(8))
            .zip(self.az[..body].chunks_exact(8))
            .zip(self.bias[..body].chunks_exact(8));
        for (((cx, cy), cz), cb) in rows {
            for l in 0..8 {
                let z = cx[l] * x[0] + cy[l] * x[1] + cz[l] * x[2] + cb[l];
                lanes[l] = if z > lanes[l] { z } else { lanes[l] };
            }
        }
        let mut m = lanes.iter().fold(f64::NEG_INFINITY, |a, &b| if b > a { b } else { a });
        for k in body..n {
            let z = self.z(k, x);
            if z > m {
                m = z;
            }
        }
        m
    }

    /// Arg-max with ties resolved toward the smallest packed index.
    pub fn argmax(&self, x: &Vec3) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for k in 0..self.len() {
            let z = self.z(k, x);
            if best.is_none_or(|(_, b)| z > b) {
                best = Some((k, z));
            }
        }
        best
    }

    /// First pass: running maximum plus candidate capture.
    pub fn scan(&self, x: &Vec3, cand: &mut Candidates) -> f64 {
        cand.clear();
        let n = self.len();
        let mut m = f64::NEG_INFINITY;
        let mut buf = [0.0f64; CHUNK];
        let mut start = 0;
        while start < n {
            let end = (start + CHUNK).min(n);
            let len = end - start;
            let ax = &self.ax[start..end];
            let ay = &self.ay[start..end];
            let az = &self.az[start..end];
            let b = &self.bias[start..end];
            let mut lanes = [f64::NEG_INFINITY; 8];
            let body = len - len % 8;
            let rows = ax[..body]
                .chunks_exact(8)
                .zip(ay[..body].chunks_exact(8))
                .zip(az[..body].chunks_exact(8))
                .zip(b[..body].chunks_exact(8))
                .zip(buf[..body].chunks_exact_mut(8));
            for ((((cx, cy), cz), cb), out) in rows {
                for l in 0..8 {
                    let z = cx[l] * x[0] + cy[l] * x[1] + cz[l] * x[2] + cb[l];
                    out[l] = z;
                    lanes[l] = if z > lanes[l] { z } else { lanes[l] };
                }
            }
            for k in body..len {
                let z = ax[k] * x[0] + ay[k] * x[1] + az[k] * x[2] + b[k];
                buf[k] = z;
                lanes[0] = if z > lanes[0] { z } else { lanes[0] };
            }
            let lanes = [
                lanes[0].max(lanes[4]),
                lanes[1].max(lanes[5]),
                lanes[2].max(lanes[6]),
                lanes[3].max(lanes[7]),
            ];
            let cm = lanes[0].max(lanes[1]).max(lanes[2].max(lanes[3]));
            if cm > m {
                m = cm;
            }
            let thr = m - LOG_CUTOFF;
            if cm >= thr && !cand.overflow {
                for (k, &z) in buf[..len].iter().enumerate() {
                    if z >= thr {
                        cand.push((start + k) as u32, z, thr);
                    }
                }
            }
            start = end;
        }
        m
    }

    /// Second pass: log-sum-exp and the softmax-weighted sum of scaled slopes.
    pub fn accumulate(&self, x: &Vec3, max: f64, cand: &Candidates) -> GroupStat {
        if self.len() == 0 || max == f64::NEG_INFINITY {
            return GroupStat::empty();
        }
        let thr = max - LOG_CUTOFF;
        let mut sum = 0.0;
        let mut g = [0.0; 3];
        let mut visit = |k: usize, z: f64| {
            if z >= thr {
                let e = (z - max).exp();
                sum += e;
                g[0] += e * self.ax[k];
                g[1] += e * self.ay[k];
                g[2] += e * self.az[k];
            }
        };
        if cand.overflow {
            for k in 0..self.len() {
                visit(k, self.z(k, x));
            }
        } else {
            for c in 0..cand.len {
                visit(cand.idx[c] as usize, cand.z[c]);
            }
        }
        let inv = 1.0 / (sum * self.beta);
        GroupStat {
            max,
            lse: max + sum.ln(),
            grad: [g[0] * inv, g[1] * inv, g[2] * inv],
        }
    }

    /// Calls `f(packed_index, softmax_weight)` for every term whose weight is
    /// not negligible. `lse` must come from [`accumulate`](Self::accumulate).
    pub fn for_each_weight(
        &self,
        x: &Vec3,
        stat: &GroupStat,
        cand: &Candidates,
        mut f: impl FnMut(usize, f64),
    ) {
        if self.len() == 0 || stat.max == f64::NEG_INFINITY {
            return;
        }
        let thr = stat.max - LOG_CUTOFF;
        if cand.overflow {
            for k in 0..self.len() {
                let z = self.z(k, x);
                if z >= thr {
                    f(k, (z - stat.lse).exp());
                }
            }
        } else {
            for c in 0..cand.len {
                let z = cand.z[c];
                if z >= thr {
                    f(cand.idx[c] as usize, (z - stat.lse).exp());
                }
            }
        }
    }

    /// Convenience: both passes for one point.
    pub fn stat(&self, x: &Vec3, cand: &mut Candidates) -> GroupStat {
        let m = self.scan(x, cand);
        self.accumulate(x, m, cand)
    }
}

/// Per-point, per-group summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GroupStat {
    pub max: f64,
    /// `log sum_i exp(z_i)`
    pub lse: f64,
    /// `sum_i softmax_i a_i` (unscaled slopes)
    pub grad: Vec3,
}

impl GroupStat {
    pub fn empty() -> Self {
        GroupStat {
            max: f64::NEG_INFINITY,
            lse: f64::NEG_INFINITY,
            grad: [0.0; 3],
        }
    }
}

/// Fixed-capacity list of terms that survive max-subtraction.
pub(crate) struct Candidates {
    idx: [u32; CANDIDATE_CAP],
    z: [f64; CANDIDATE_CAP],
    len: usize,
    overflow: bool,
}

impl Candidates {
    pub fn new() -> Self {
        Candidates {
            idx: [0; CANDIDATE_CAP],
            z: [0.0; CANDIDATE_CAP],
            len: 0,
            overflow: false,
        }
    }

    fn clear(&mut self) {
        self.len = 0;
        self.overflow = false;
    }

    #[inline]
    fn push(&mut self, i: u32, z: f64, thr: f64) {
        if self.len == CANDIDATE_CAP {
            // drop entries that fell below the current threshold
            let mut w = 0;
            for r in 0..self.len {
                if self.z[r] >= thr {
                    self.idx[w] = self.idx[r];
                    self.z[w] = self.z[r];
                    w += 1;
                }
            }
            self.len = w;
            if w == CANDIDATE_CAP {
                self.overflow = true;
                return;
            }
        }
        self.idx[self.len] = i;
        self.z[self.len] = z;
        self.len += 1;
    }
}

/// Both groups of a model, packed once per evaluation call.
#[derive(Debug, Clone)]
pub(crate) struct PackedModel {
    pub plus: PackedGroup,
    pub minus: PackedGroup,
}

impl PackedModel {
    pub fn new(model: &PatchworkModel, mode: Mode) -> Self {
        PackedModel {
            plus: PackedGroup::new(model, Group::Plus, mode),
            minus: PackedGroup::new(model, Group::Minus, mode),
        }
    }

    pub fn group(&self, g: Group) -> &PackedGroup {
        match g {
            Group::Plus => &self.plus,
            Group::Minus => &self.minus,
        }
    }
}
