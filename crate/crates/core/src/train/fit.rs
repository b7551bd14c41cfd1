use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PatchworkModel;
use crate::geom::{BBox, Vec3};
use crate::init::{geometric_init, kaiming_init, OrientedSampleSet};
use crate::train::adam::{adam_step, AdamState};
use crate::train::config::FitConfig;
use crate::train::loss::{evaluate_losses, sample_off_surface, LossValues, SurfaceBatch};
use crate::train::prune::prune_pass;

/// Consecutive rejected steps before the fit gives up.
pub const MAX_SKIPPED_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub losses: LossValues,
    pub active_terms: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneEvent {
    pub iteration: usize,
    pub disabled: usize,
    pub active_after: usize,
}

/// Telemetry of one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub records: Vec<IterationRecord>,
    pub prune_events: Vec<PruneEvent>,
    pub initial_terms: usize,
    /// `d + 1` per starting term, i.e. `8m` in 3D after geometric init on `m` samples.
    pub initial_parameter_count: usize,
    pub final_active_terms: usize,
    /// `(d + 1)` per active term plus the two sharpness values.
    pub final_parameter_count: usize,
    pub skipped_steps: usize,
    pub degenerate_normals: usize,
    pub wall_time_secs: f64,
}

impl FitReport {
    pub const CSV_HEADER: &'static str = "iteration,surface,normal,occupancy,prune,total,active_terms";

    /// Per-iteration losses and active-term counts. Wall time is not
    /// included so the CSV is a pure function of inputs and seed.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.records.len() + 1));
        s.push_str(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            let l = &r.losses;
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.iteration, l.surface, l.normal, l.occupancy, l.prune, l.total, r.active_terms
            ));
        }
        s
    }

    pub fn final_losses(&self) -> Option<LossValues> {
        self.records.last().map(|r| r.losses)
    }
}

/// Builds the starting model for `config`.
pub fn initial_model(samples: &OrientedSampleSet, config: &FitConfig) -> Result<PatchworkModel> {
    let mut model = if config.geometric_init {
        geometric_init(samples, config.rho, config.beta)?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
        kaiming_init(samples.dim, samples.len(), config.beta, &mut rng)?
    };
    if !config.weight_norm {
        model.disable_weight_norm();
    }
    Ok(model)
}

/// Fits a model to oriented samples. Deterministic for a given seed.
pub fn fit(samples: &OrientedSampleSet, config: &FitConfig) -> Result<(PatchworkModel, FitReport)> {
    fit_with_observer(samples, config, |_, _| {})
}

/// Like [`fit`], calling `observer` after every iteration.
pub fn fit_with_observer(
    samples: &OrientedSampleSet,
    config: &FitConfig,
    observer: impl FnMut(&IterationRecord, &PatchworkModel),
) -> Result<(PatchworkModel, FitReport)> {
    config.validate()?;
    samples.validate()?;
    let model = initial_model(samples, config)?;
    refine(model, samples, config, observer)
}

/// Runs the optimization loop from an explicit starting model instead of
/// the configured initialization.
pub fn refine(
    mut model: PatchworkModel,
    samples: &OrientedSampleSet,
    config: &FitConfig,
    mut observer: impl FnMut(&IterationRecord, &PatchworkModel),
) -> Result<(PatchworkModel, FitReport)> {
    config.validate()?;
    samples.validate()?;
    model.validate()?;
    if model.dim != samples.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            got: samples.dim,
        });
    }
    let start = Instant::now();
    let mut state = AdamState::new(config.adam, &model);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let count = samples.len();
    let batch = config.batch_size.min(count);
    let mut order: Vec<usize> = (0..count).collect();
    if batch < count {
        order.shuffle(&mut rng);
    }
    let mut cursor = 0usize;
    let mut pts: Vec<Vec3> = Vec::with_capacity(batch);
    let mut nrm: Vec<Vec3> = Vec::with_capacity(batch);
    let bbox = BBox::symmetric(samples.dim, 1.0);

    let mut report = FitReport {
        records: Vec::with_capacity(config.iterations),
        prune_events: Vec::new(),
        initial_terms: model.len(),
        initial_parameter_count: (model.dim + 1) * model.len(),
        final_active_terms: 0,
        final_parameter_count: 0,
        skipped_steps: 0,
        degenerate_normals: 0,
        wall_time_secs: 0.0,
    };
    let mut consecutive_skips = 0usize;

    for it in 0..config.iterations {
        let (points, normals): (&[Vec3], &[Vec3]) = if batch == count {
            (&samples.points, &samples.normals)
        } else {
            pts.clear();
            nrm.clear();
            for _ in 0..batch {
                if cursor == count {
                    order.shuffle(&mut rng);
                    cursor = 0;
                }
                let j = order[cursor];
                cursor += 1;
                pts.push(samples.points[j]);
                nrm.push(samples.normals[j]);
            }
            (&pts, &nrm)
        };
        let off = sample_off_surface(&bbox, batch, &mut rng);

        let eval = evaluate_losses(&model, SurfaceBatch { points, normals }, &off, config.losses)?;
        report.degenerate_normals += eval.degenerate_normals;
        let step = if eval.losses.is_finite() || !config.losses.any() {
            adam_step(&mut model, &eval.grads, &mut state, config.learning_rate)
        } else {
            Err(Error::NonFiniteGradient)
        };
        match step {
            Ok(()) => consecutive_skips = 0,
            Err(Error::NonFiniteGradient) => {
                log::warn!("iteration {it}: non-finite gradient, step skipped");
                report.skipped_steps += 1;
                consecutive_skips += 1;
                if consecutive_skips >= MAX_SKIPPED_STEPS {
                    return Err(Error::TooManySkippedSteps(consecutive_skips));
                }
            }
            Err(e) => return Err(e),
        }

        if config.pruning_enabled() && (it + 1) % config.prune_interval == 0 {
            let disabled = prune_pass(&mut model, config.prune_threshold, config.prune_disable_value);
            let active_after = model.active_count();
            log::debug!("iteration {}: pruned {disabled}, {active_after} active", it + 1);
            report.prune_events.push(PruneEvent {
                iteration: it + 1,
                disabled,
                active_after,
            });
        }
        let record = IterationRecord {
            iteration: it,
            losses: eval.losses,
            active_terms: model.active_count(),
        };
        observer(&record, &model);
        report.records.push(record);
    }

    report.final_active_terms = model.active_count();
    report.final_parameter_count = model.parameter_count();
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok((model, report))
}
