//! The patchwork field: model types and numerically stable evaluation.

pub(crate) mod eval;
pub(crate) mod kernel;
mod model;

pub use eval::{
    eval_batch, eval_field, eval_field_batch_streaming, eval_tropical, eval_tropical_values,
    eval_values, grad_params, FieldEval, FieldEvaluator, ParamGrads, PointEval,
    TropicalEvaluator,
};
pub(crate) use eval::PAR_CHUNK;
pub use model::{Group, LinearTerm, PatchworkModel, WeightNorm, DISABLED_WEIGHT};
