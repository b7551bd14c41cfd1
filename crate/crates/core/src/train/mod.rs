//! Fitting a patchwork model to an oriented point cloud.

mod adam;
mod config;
mod fit;
mod loss;
mod prune;

pub use adam::{adam_step, Adam, AdamState, PARAMS_PER_TERM};
pub use config::{AdamConfig, FitConfig, LossToggles};
pub use fit::{
    fit, fit_with_observer, initial_model, refine, FitReport, IterationRecord, PruneEvent,
    MAX_SKIPPED_STEPS,
};
pub use loss::{
    double_well, evaluate_losses, loss_normal, loss_occupancy, loss_prune, loss_surface,
    occupancy_penalty, sample_off_surface, LossEval, LossValues, SurfaceBatch, DEGENERATE_GRAD,
};
pub use prune::prune_pass;
