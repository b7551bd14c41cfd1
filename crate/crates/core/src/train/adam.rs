use crate::error::{Error, Result};
use crate::field::{ParamGrads, PatchworkModel};
use crate::train::config::AdamConfig;

/// Adam over a flat parameter vector, with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub config: AdamConfig,
    pub step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(config: AdamConfig, len: usize) -> Self {
        Adam {
            config,
            step: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// One update. `mask[i] == false` freezes parameter `i` together with its
    /// moment estimates. Rejects non-finite gradients without touching state.
    pub fn update(&mut self, params: &mut [f64], grads: &[f64], mask: Option<&[bool]>, lr: f64) -> Result<()> {
        assert_eq!(params.len(), self.len());
        assert_eq!(grads.len(), self.len());
        if !grads.iter().all(|g| g.is_finite()) {
            return Err(Error::NonFiniteGradient);
        }
        self.step += 1;
        let AdamConfig { beta1, beta2, epsilon } = self.config;
        let bc1 = 1.0 - beta1.powi(self.step as i32);
        let bc2 = 1.0 - beta2.powi(self.step as i32);
        for i in 0..params.len() {
            if mask.is_some_and(|m| !m[i]) {
                continue;
            }
            let g = grads[i];
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let mh = self.m[i] / bc1;
            let vh = self.v[i] / bc2;
            params[i] -= lr * mh / (vh.sqrt() + epsilon);
        }
        Ok(())
    }
}

/// Trainable scalars per term: three direction (or slope) components, the
/// magnitude (unused without weight normalization), the offset and `log s`.
pub const PARAMS_PER_TERM: usize = 6;

/// Optimizer state for a [`PatchworkModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    inner: Adam,
}

impl AdamState {
    pub fn new(config: AdamConfig, model: &PatchworkModel) -> Self {
        AdamState {
            inner: Adam::new(config, PARAMS_PER_TERM * model.len()),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.inner.step
    }
}

fn gather(model: &PatchworkModel) -> Vec<f64> {
    let mut p = Vec::with_capacity(PARAMS_PER_TERM * model.len());
    for t in &model.terms {
        match &t.weight_norm {
            Some(wn) => p.extend_from_slice(&[wn.v[0], wn.v[1], wn.v[2], wn.g]),
            None => p.extend_from_slice(&[t.slope[0], t.slope[1], t.slope[2], 0.0]),
        }
        p.push(t.offset);
        p.push(t.log_weight);
    }
    p
}

fn gather_grads(model: &PatchworkModel, g: &ParamGrads) -> Vec<f64> {
    let mut out = Vec::with_capacity(PARAMS_PER_TERM * model.len());
    for (i, t) in model.terms.iter().enumerate() {
        if t.weight_norm.is_some() {
            out.extend_from_slice(&[g.wn_v[i][0], g.wn_v[i][1], g.wn_v[i][2], g.wn_g[i]]);
        } else {
            out.extend_from_slice(&[g.slope[i][0], g.slope[i][1], g.slope[i][2], 0.0]);
        }
        out.push(g.offset[i]);
        out.push(g.log_weight[i]);
    }
    out
}

fn scatter(model: &mut PatchworkModel, p: &[f64]) {
    let dim = model.dim;
    for (t, chunk) in model.terms.iter_mut().zip(p.chunks_exact(PARAMS_PER_TERM)) {
        let mut dir = [chunk[0], chunk[1], chunk[2]];
        if dim == 2 {
            dir[2] = 0.0;
        }
        match &mut t.weight_norm {
            Some(wn) => {
                wn.v = dir;
                wn.g = chunk[3];
            }
            None => t.slope = dir,
        }
        t.offset = chunk[4];
        t.log_weight = chunk[5];
    }
    model.sync_slopes();
}

/// Applies one Adam step to every active term's parameters. Sharpness
/// parameters and disabled terms are left untouched.
pub fn adam_step(model: &mut PatchworkModel, grads: &ParamGrads, state: &mut AdamState, lr: f64) -> Result<()> {
    if state.inner.len() != PARAMS_PER_TERM * model.len() || grads.len() != model.len() {
        return Err(Error::InvalidModel("optimizer state does not match the model".into()));
    }
    let mut params = gather(model);
    let g = gather_grads(model, grads);
    let mask: Vec<bool> = model
        .terms
        .iter()
        .flat_map(|t| std::iter::repeat_n(t.active, PARAMS_PER_TERM))
        .collect();
    state.inner.update(&mut params, &g, Some(&mask), lr)?;
    scatter(model, &params);
    Ok(())
}
