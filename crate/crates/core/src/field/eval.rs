use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::kernel::{Candidates, GroupStat, Mode, PackedGroup, PackedModel};
use crate::field::model::{Group, PatchworkModel};
use crate::geom::Vec3;

/// Field value, spatial gradient and per-term softmax attributions at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldEval {
    pub value: f64,
    pub grad_x: Vec<f64>,
    /// Indexed like `model.terms`; zero outside the Plus group and for disabled terms.
    pub softmax_plus: Vec<f64>,
    pub softmax_minus: Vec<f64>,
}

/// Compact per-point result of streaming evaluation.
///
/// The softmax weight of any term can be recovered from `lse_*`:
/// `w_i = exp(beta (<a_i,x> + c_i) + log s_i - lse)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEval {
    pub value: f64,
    pub grad: Vec3,
    pub lse_plus: f64,
    pub lse_minus: f64,
}

pub(crate) fn combine(model: &PatchworkModel, p: &GroupStat, m: &GroupStat) -> PointEval {
    let value = match (p.lse == f64::NEG_INFINITY, m.lse == f64::NEG_INFINITY) {
        (false, false) => p.lse / model.beta_plus - m.lse / model.beta_minus,
        (true, false) => f64::NEG_INFINITY,
        (false, true) => f64::INFINITY,
        (true, true) => f64::NAN,
    };
    PointEval {
        value,
        grad: [
            p.grad[0] - m.grad[0],
            p.grad[1] - m.grad[1],
            p.grad[2] - m.grad[2],
        ],
        lse_plus: p.lse,
        lse_minus: m.lse,
    }
}

fn softmax_into(packed: &PackedGroup, x: &Vec3, out: &mut [f64]) {
    let Some((_, max)) = packed.argmax(x) else {
        return;
    };
    let mut sum = 0.0;
    for k in 0..packed.len() {
        let e = (packed.z(k, x) - max).exp();
        out[packed.index[k]] = e;
        sum += e;
    }
    for &i in &packed.index {
        out[i] /= sum;
    }
}

/// Evaluates the smooth field at one point, including all softmax weights.
pub fn eval_field(model: &PatchworkModel, x: &[f64]) -> Result<FieldEval> {
    let p = model.check_point(x)?;
    let packed = PackedModel::new(model, Mode::Smooth);
    let mut cand = Candidates::new();
    let sp = packed.plus.stat(&p, &mut cand);
    let sm = packed.minus.stat(&p, &mut cand);
    let pe = combine(model, &sp, &sm);
    let n = model.len();
    let mut softmax_plus = vec![0.0; n];
    let mut softmax_minus = vec![0.0; n];
    softmax_into(&packed.plus, &p, &mut softmax_plus);
    softmax_into(&packed.minus, &p, &mut softmax_minus);
    Ok(FieldEval {
        value: pe.value,
        grad_x: pe.grad[..model.dim].to_vec(),
        softmax_plus,
        softmax_minus,
    })
}

/// Evaluates the tropical limit `max_plus(<a,x>+c) - max_minus(<a,x>+c)`.
pub fn eval_tropical(model: &PatchworkModel, x: &[f64]) -> Result<f64> {
    let p = model.check_point(x)?;
    Ok(TropicalEvaluator::new(model).value(&p))
}

/// Reusable tropical evaluator for many points.
#[derive(Debug, Clone)]
pub struct TropicalEvaluator {
    packed: PackedModel,
}

impl TropicalEvaluator {
    pub fn new(model: &PatchworkModel) -> Self {
        TropicalEvaluator {
            packed: PackedModel::new(model, Mode::Tropical),
        }
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        self.packed.plus.max(x) - self.packed.minus.max(x)
    }

    /// Tropical gradient: difference of the arg-max slopes (ties toward lower index).
    pub fn gradient(&self, x: &Vec3) -> Option<Vec3> {
        let (kp, _) = self.packed.plus.argmax(x)?;
        let (km, _) = self.packed.minus.argmax(x)?;
        let p = &self.packed.plus;
        let m = &self.packed.minus;
        Some([p.ax[kp] - m.ax[km], p.ay[kp] - m.ay[km], p.az[kp] - m.az[km]])
    }

    /// Model term indices attaining each group's maximum.
    pub fn argmax_terms(&self, x: &Vec3) -> (Option<usize>, Option<usize>) {
        let p = self.packed.plus.argmax(x).map(|(k, _)| self.packed.plus.index[k]);
        let m = self.packed.minus.argmax(x).map(|(k, _)| self.packed.minus.index[k]);
        (p, m)
    }
}

/// Reusable smooth evaluator; packing happens once.
#[derive(Debug, Clone)]
pub struct FieldEvaluator<'a> {
    model: &'a PatchworkModel,
    packed: PackedModel,
}

impl<'a> FieldEvaluator<'a> {
    pub fn new(model: &'a PatchworkModel) -> Self {
        FieldEvaluator {
            model,
            packed: PackedModel::new(model, Mode::Smooth),
        }
    }

    pub fn eval(&self, x: &Vec3) -> PointEval {
        let mut cand = Candidates::new();
        self.eval_with(x, &mut cand)
    }

    pub(crate) fn eval_with(&self, x: &Vec3, cand: &mut Candidates) -> PointEval {
        let sp = self.packed.plus.stat(x, cand);
        let sm = self.packed.minus.stat(x, cand);
        combine(self.model, &sp, &sm)
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        self.eval(x).value
    }
}

/// Streams field evaluations through `reduce` without materializing any
/// terms-by-points buffer. Auxiliary memory is constant per point.
pub fn eval_field_batch_streaming<A>(
    model: &PatchworkModel,
    points: &[Vec3],
    init: A,
    mut reduce: impl FnMut(A, usize, &PointEval) -> A,
) -> Result<A> {
    model.validate()?;
    let ev = FieldEvaluator::new(model);
    let mut cand = Candidates::new();
    let mut acc = init;
    for (j, x) in points.iter().enumerate() {
        let pe = ev.eval_with(x, &mut cand);
        acc = reduce(acc, j, &pe);
    }
    Ok(acc)
}

/// Points per parallel work unit. Fixed so results do not depend on the
/// thread count.
pub(crate) const PAR_CHUNK: usize = 256;

/// Parallel batch evaluation returning one [`PointEval`] per point.
pub fn eval_batch(model: &PatchworkModel, points: &[Vec3]) -> Vec<PointEval> {
    let ev = FieldEvaluator::new(model);
    points
        .par_chunks(PAR_CHUNK)
        .flat_map_iter(|chunk| {
            let mut cand = Candidates::new();
            chunk
                .iter()
                .map(|x| ev.eval_with(x, &mut cand))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Parallel batch of field values.
pub fn eval_values(model: &PatchworkModel, points: &[Vec3]) -> Vec<f64> {
    eval_batch(model, points).into_iter().map(|p| p.value).collect()
}

/// Parallel batch of tropical values.
pub fn eval_tropical_values(model: &PatchworkModel, points: &[Vec3]) -> Vec<f64> {
    let ev = TropicalEvaluator::new(model);
    points.par_iter().map(|x| ev.value(x)).collect()
}

/// Gradients of a scalar with respect to every model parameter, indexed like
/// `model.terms`. Disabled terms keep zero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub slope: Vec<Vec3>,
    pub offset: Vec<f64>,
    pub log_weight: Vec<f64>,
    /// Filled by [`ParamGrads::chain_weight_norm`].
    pub wn_g: Vec<f64>,
    pub wn_v: Vec<Vec3>,
}

impl ParamGrads {
    pub fn zeros(n: usize) -> Self {
        ParamGrads {
            slope: vec![[0.0; 3]; n],
            offset: vec![0.0; n],
            log_weight: vec![0.0; n],
            wn_g: vec![0.0; n],
            wn_v: vec![[0.0; 3]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.offset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offset.is_empty()
    }

    pub fn add_assign(&mut self, other: &ParamGrads) {
        for i in 0..self.len() {
            for k in 0..3 {
                self.slope[i][k] += other.slope[i][k];
                self.wn_v[i][k] += other.wn_v[i][k];
            }
            self.offset[i] += other.offset[i];
            self.log_weight[i] += other.log_weight[i];
            self.wn_g[i] += other.wn_g[i];
        }
    }

    pub fn scale(&mut self, s: f64) {
        for i in 0..self.len() {
            for k in 0..3 {
                self.slope[i][k] *= s;
                self.wn_v[i][k] *= s;
            }
            self.offset[i] *= s;
            self.log_weight[i] *= s;
            self.wn_g[i] *= s;
        }
    }

    /// Maps slope gradients onto the `(g, v)` parameterization:
    /// `dg = <da, v/|v|>`, `dv = (g/|v|) (da - <da, v̂> v̂)`.
    pub fn chain_weight_norm(&mut self, model: &PatchworkModel) {
        for (i, t) in model.terms.iter().enumerate() {
            let Some(wn) = &t.weight_norm else { continue };
            let vn = crate::geom::norm(&wn.v);
            let vh = crate::geom::scale(&wn.v, 1.0 / vn);
            let da = self.slope[i];
            let proj = crate::geom::dot(&da, &vh);
            self.wn_g[i] = proj;
            let s = wn.g / vn;
            self.wn_v[i] = [
                s * (da[0] - proj * vh[0]),
                s * (da[1] - proj * vh[1]),
                s * (da[2] - proj * vh[2]),
            ];
        }
    }

    pub fn all_finite(&self) -> bool {
        self.offset.iter().all(|v| v.is_finite())
            && self.log_weight.iter().all(|v| v.is_finite())
            && self.wn_g.iter().all(|v| v.is_finite())
            && self.slope.iter().flatten().all(|v| v.is_finite())
            && self.wn_v.iter().flatten().all(|v| v.is_finite())
    }
}

/// Gradient of `F(x)` with respect to every active parameter.
///
/// `dF/dc_i = ±w_i`, `dF/da_i = ±w_i x`, `dF/dlog s_i = ±w_i / beta`, where
/// `w_i` is the group softmax. Sharpness parameters are constants.
pub fn grad_params(model: &PatchworkModel, x: &[f64]) -> Result<ParamGrads> {
    model.validate()?;
    let p = model.check_point(x)?;
    let fe = eval_field(model, x)?;
    let mut g = ParamGrads::zeros(model.len());
    for (i, t) in model.terms.iter().enumerate() {
        if !t.active {
            continue;
        }
        let w = match t.group {
            Group::Plus => fe.softmax_plus[i],
            Group::Minus => -fe.softmax_minus[i],
        };
        g.offset[i] = w;
        g.slope[i] = [w * p[0], w * p[1], w * p[2]];
        g.log_weight[i] = w / model.beta(t.group);
    }
    if model.weight_norm_enabled() {
        g.chain_weight_norm(model);
    }
    if !g.all_finite() {
        return Err(Error::NonFiniteGradient);
    }
    Ok(g)
}
