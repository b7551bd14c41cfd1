use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};

/// Soft-disable value for pruned terms.
pub const DISABLED_WEIGHT: f64 = 1e-5;

/// Which of the two log-sum-exp groups a term belongs to.
///
/// `Plus` terms carry positive sign in the signed sum, `Minus` terms
/// negative. Minus cells form the interior of the shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Plus,
    Minus,
}

impl Group {
    pub fn sign(self) -> f64 {
        match self {
            Group::Plus => 1.0,
            Group::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Group {
        match self {
            Group::Plus => Group::Minus,
            Group::Minus => Group::Plus,
        }
    }
}

/// Magnitude/direction reparameterization of a slope: `a = g * v / |v|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightNorm {
    pub g: f64,
    pub v: Vec3,
}

impl WeightNorm {
    pub fn from_slope(a: &Vec3, dim: usize) -> Self {
        let g = geom::norm(a);
        if g > 0.0 {
            WeightNorm { g, v: *a }
        } else {
            // zero slope: keep a valid direction and a zero magnitude
            let mut v = [0.0; 3];
            v[0] = 1.0;
            let _ = dim;
            WeightNorm { g: 0.0, v }
        }
    }

    pub fn slope(&self) -> Vec3 {
        let n = geom::norm(&self.v);
        geom::scale(&self.v, self.g / n)
    }
}

/// One linear function `<a, x> + c` with positive weight `s = exp(log_weight)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearTerm {
    pub slope: Vec3,
    pub offset: f64,
    pub log_weight: f64,
    pub group: Group,
    pub active: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_norm: Option<WeightNorm>,
}

impl LinearTerm {
    pub fn new(slope: Vec3, offset: f64, group: Group) -> Self {
        LinearTerm {
            slope,
            offset,
            log_weight: 0.0,
            group,
            active: true,
            weight_norm: None,
        }
    }

    #[inline]
    pub fn value(&self, x: &Vec3) -> f64 {
        geom::dot(&self.slope, x) + self.offset
    }

    pub fn weight(&self) -> f64 {
        self.log_weight.exp()
    }

    /// Marks the term as pruned and pins its weight to [`DISABLED_WEIGHT`].
    pub fn disable(&mut self) {
        self.active = false;
        self.log_weight = DISABLED_WEIGHT.ln();
    }
}

/// A patchwork field: the difference of two log-sum-exp groups of linear terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchworkModel {
    pub dim: usize,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub terms: Vec<LinearTerm>,
}

impl PatchworkModel {
    pub fn new(dim: usize, beta_plus: f64, beta_minus: f64, terms: Vec<LinearTerm>) -> Result<Self> {
        let model = PatchworkModel {
            dim,
            beta_plus,
            beta_minus,
            terms,
        };
        model.validate()?;
        Ok(model)
    }

    /// Checks the structural invariants.
    ///
    /// A group may be empty: its log-sum-exp is `-inf` and the field is
    /// `+inf` or `-inf` everywhere. At least one active term is required.
    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::InvalidModel(format!("dimension {} (expected 2 or 3)", self.dim)));
        }
        for (name, beta) in [("beta_plus", self.beta_plus), ("beta_minus", self.beta_minus)] {
            if !(beta.is_finite() && beta > 0.0) {
                return Err(Error::InvalidModel(format!("{name} must be positive and finite, got {beta}")));
            }
        }
        if !self.terms.iter().any(|t| t.active) {
            return Err(Error::InvalidModel("no active terms".into()));
        }
        for (i, t) in self.terms.iter().enumerate() {
            if !t.slope.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFiniteParameter { term: i, what: "slope" });
            }
            if !t.offset.is_finite() {
                return Err(Error::NonFiniteParameter { term: i, what: "offset" });
            }
            if !t.log_weight.is_finite() {
                return Err(Error::NonFiniteParameter { term: i, what: "log_weight" });
            }
            if self.dim == 2 && t.slope[2] != 0.0 {
                return Err(Error::InvalidModel(format!("term {i} has a z slope in a 2D model")));
            }
            if let Some(wn) = &t.weight_norm {
                let vn = geom::norm(&wn.v);
                if !(vn > 0.0 && vn.is_finite() && wn.g.is_finite()) {
                    return Err(Error::NonFiniteParameter { term: i, what: "weight_norm" });
                }
            }
        }
        Ok(())
    }

    pub fn beta(&self, group: Group) -> f64 {
        match group {
            Group::Plus => self.beta_plus,
            Group::Minus => self.beta_minus,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.terms.iter().filter(|t| t.active).count()
    }

    pub fn active_in_group(&self, group: Group) -> usize {
        self.terms.iter().filter(|t| t.active && t.group == group).count()
    }

    /// Stored parameters after pruning: `d + 1` per active term plus the two betas.
    pub fn parameter_count(&self) -> usize {
        (self.dim + 1) * self.active_count() + 2
    }

    pub fn weight_norm_enabled(&self) -> bool {
        !self.terms.is_empty() && self.terms.iter().all(|t| t.weight_norm.is_some())
    }

    /// Switches every term to the magnitude/direction parameterization.
    /// The represented field is unchanged.
    pub fn enable_weight_norm(&mut self) {
        let dim = self.dim;
        for t in &mut self.terms {
            t.weight_norm = Some(WeightNorm::from_slope(&t.slope, dim));
        }
    }

    pub fn disable_weight_norm(&mut self) {
        for t in &mut self.terms {
            t.weight_norm = None;
        }
    }

    /// Recomputes slopes from `(g, v)` after an optimizer step.
    pub fn sync_slopes(&mut self) {
        for t in &mut self.terms {
            if let Some(wn) = &t.weight_norm {
                t.slope = wn.slope();
            }
        }
    }

    /// Returns the model with every offset shifted so that evaluating at `x`
    /// equals evaluating the original at `x + u`.
    pub fn translated(&self, u: &Vec3) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.offset += geom::dot(&t.slope, u);
        }
        out
    }

    /// Exchanges the two groups (and their sharpness), negating both the
    /// smooth and tropical fields.
    pub fn swapped_groups(&self) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.group = t.group.opposite();
        }
        std::mem::swap(&mut out.beta_plus, &mut out.beta_minus);
        out
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<Vec3> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(geom::pad(x))
    }
}
