use rayon::prelude::*;

use super::sbo::{evaluation_seed, sbo_or_worst, EvalContext, EvaluationRecord};
use crate::error::{Error, Result};
use crate::secureboost::Hyperparameters;

/// Evaluates configurations on a pool of `jobs` threads (0 = one per core).
/// Results come back in input order and do not depend on `jobs`.
pub fn evaluate_all(
    hps: &[Hyperparameters],
    ctx: &EvalContext,
    master_seed: u64,
    jobs: usize,
) -> Result<Vec<EvaluationRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(|| {
        hps.par_iter()
            .map(|hp| sbo_or_worst(hp, ctx, evaluation_seed(master_seed, hp)))
            .collect()
    }))
}
