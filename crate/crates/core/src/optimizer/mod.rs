//! Fitness evaluation, the constrained NSGA-II search loop, baselines and
//! objective normalization.

mod artifacts;
mod baselines;
mod metrics;
mod normalize;
mod pool;
mod run;
mod sbo;

pub use artifacts::{read_records_jsonl, write_hv_series, write_json, write_records_jsonl, write_run_artifacts};
pub use baselines::{empirical_baseline, grid_points, grid_search, presets, GridResult, GridSpec, Preset};
pub use metrics::{accuracy, auc, utility_loss};
pub use normalize::{normalize_objectives, Normalizer, REFERENCE_OFFSET};
pub use pool::evaluate_all;
pub use run::{cmosb_run, feasible_points, RunConfig, RunResult};
pub use sbo::{evaluation_seed, sbo, sbo_or_worst, EvalContext, EvaluationRecord, FAILED_COST};
