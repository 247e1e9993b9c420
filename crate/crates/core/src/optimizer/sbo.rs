use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::metrics::utility_loss;
use crate::attack::{instance_clustering_attack, AttackConfig};
use crate::data::{sample_balanced_probe, split_train_test, AttackProbeSet, VerticalDataset};
use crate::error::{Error, Result};
use crate::moo::ObjectiveTriple;
use crate::secureboost::{predict, train_with, CostLedger, Hyperparameters, TrainerConfig};
use crate::seed::{self, stream};

/// Cost assigned to failed evaluations, in seconds.
pub const FAILED_COST: f64 = 1e9;

/// Everything an evaluation needs besides the hyperparameters.
#[derive(Debug, Clone)]
pub struct EvalContext {
    pub train: VerticalDataset,
    pub test: VerticalDataset,
    pub probe: AttackProbeSet,
    pub trainer: TrainerConfig,
    pub attack: AttackConfig,
    /// Attack every `attack_stride`-th federated round (and always the last).
    pub attack_stride: usize,
}

impl EvalContext {
    /// Splits `dataset` and draws a class-balanced probe from the training
    /// part, with default trainer and attack settings.
    pub fn prepare(dataset: &VerticalDataset, train_fraction: f64, probe_per_class: usize, seed: u64) -> Result<Self> {
        let (train, test) = split_train_test(dataset, train_fraction, seed)?;
        let probe = sample_balanced_probe(&train, probe_per_class, seed)?;
        Ok(Self {
            train,
            test,
            probe,
            trainer: TrainerConfig::default(),
            attack: AttackConfig::default(),
            attack_stride: 1,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub solution_id: u64,
    pub generation: usize,
    pub hyperparameters: Hyperparameters,
    pub eps_u: f64,
    pub eps_c: f64,
    pub eps_p: f64,
    /// Leakage after each federated round.
    pub eps_p_trace: Vec<f64>,
    /// Cost of each federated round.
    pub eps_c_trace: Vec<f64>,
    pub seed: u64,
    pub failed: bool,
    /// Seconds spent in the evaluation; not serialized so that artifacts are
    /// reproducible byte for byte.
    #[serde(skip)]
    pub wall_clock_s: f64,
}

impl EvaluationRecord {
    pub fn objectives(&self) -> ObjectiveTriple {
        ObjectiveTriple::new(self.eps_u, self.eps_c, self.eps_p)
    }

    pub fn raw(&self) -> [f64; 3] {
        [self.eps_u, self.eps_c, self.eps_p]
    }

    pub fn failed(hp: Hyperparameters, seed: u64) -> Self {
        Self {
            solution_id: 0,
            generation: 0,
            hyperparameters: hp,
            eps_u: 1.0,
            eps_c: FAILED_COST,
            eps_p: 1.0,
            eps_p_trace: Vec::new(),
            eps_c_trace: Vec::new(),
            seed,
            failed: true,
            wall_clock_s: 0.0,
        }
    }
}

/// Trains one configuration and measures utility loss, training cost and
/// privacy leakage. Leakage is the worst attack accuracy over federated
/// rounds, each attack using every trace tree produced so far; cost is the
/// sum of per-round costs.
pub fn sbo(hp: &Hyperparameters, ctx: &EvalContext, seed: u64) -> Result<EvaluationRecord> {
    if ctx.attack_stride == 0 {
        return Err(Error::InvalidArgument("attack stride must be at least 1".into()));
    }
    let start = Instant::now();
    let out = train_with(hp, &ctx.train, seed, &ctx.trainer)?;
    let attack_seed = seed::derive(seed, &[stream::ATTACK_KNOWN]);
    let known = ctx.attack.known(&ctx.probe, attack_seed)?;

    let mut eps_c_trace = Vec::with_capacity(out.rounds.len());
    let mut eps_p_trace = Vec::with_capacity(out.rounds.len());
    let mut previous = CostLedger::new(ctx.trainer.unit_costs);
    let mut last_p = 1.0 / ctx.probe.num_classes as f64;
    let mut eps_p = f64::NEG_INFINITY;
    for (i, mark) in out.rounds.iter().enumerate() {
        eps_c_trace.push(mark.ledger.since(&previous).cost());
        previous = mark.ledger;
        let attacked = (i + 1) % ctx.attack_stride == 0 || i + 1 == out.rounds.len();
        if attacked {
            let prefix = out.trace.prefix(mark.trace_trees);
            last_p = instance_clustering_attack(
                &prefix,
                &ctx.probe,
                known.as_deref(),
                &ctx.attack.spectral,
                attack_seed,
            )?
            .epsilon_p;
            eps_p = eps_p.max(last_p);
        }
        eps_p_trace.push(last_p);
    }

    let probs = predict(&out.model, ctx.test.active_features(), ctx.test.passive_features())?;
    Ok(EvaluationRecord {
        solution_id: 0,
        generation: 0,
        hyperparameters: *hp,
        eps_u: utility_loss(&probs, ctx.test.labels()),
        eps_c: eps_c_trace.iter().sum(),
        eps_p,
        eps_p_trace,
        eps_c_trace,
        seed,
        failed: false,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

/// Like [`sbo`], but failures yield worst-case objectives and a warning.
pub fn sbo_or_worst(hp: &Hyperparameters, ctx: &EvalContext, seed: u64) -> EvaluationRecord {
    sbo(hp, ctx, seed).unwrap_or_else(|e| {
        log::warn!("evaluation of {hp:?} failed: {e}");
        EvaluationRecord::failed(*hp, seed)
    })
}

/// Evaluation seed derived from the master seed and the decoded
/// hyperparameters, so equal configurations evaluate identically.
pub fn evaluation_seed(master: u64, hp: &Hyperparameters) -> u64 {
    seed::derive(
        master,
        &[
            stream::EVALUATION,
            hp.n_federated as u64,
            hp.n_local as u64,
            hp.max_depth as u64,
            hp.subsample.to_bits(),
            hp.purity_threshold.to_bits(),
            hp.learning_rate.to_bits(),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_synthetic;

    fn ctx(noise: f64) -> EvalContext {
        let ds = gen_synthetic(400, 3, 3, 2, noise, 5).unwrap();
        EvalContext::prepare(&ds, 0.75, 20, 5).unwrap()
    }

    #[test]
    fn accumulation_is_max_and_sum() {
        let c = ctx(1.0);
        let r = sbo(&Hyperparameters::new(4, 0, 3, 0.8, 1.0, 0.3), &c, 1).unwrap();
        assert_eq!(r.eps_p_trace.len(), 4);
        assert_eq!(r.eps_p, r.eps_p_trace.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        assert_eq!(r.eps_c, r.eps_c_trace.iter().sum::<f64>());
        assert!(r.eps_u >= 0.0 && r.eps_u <= 1.0);
    }

    #[test]
    fn full_defense_hits_the_floor() {
        let c = ctx(1.0);
        let r = sbo(&Hyperparameters::new(3, 2, 3, 1.0, 0.1, 0.3), &c, 2).unwrap();
        assert_eq!(r.eps_p, 0.5);
        let enc_only = 3.0 * 2.0 * c.train.len() as f64 * c.trainer.unit_costs.t_enc;
        assert!((r.eps_c - enc_only).abs() < 1e-9);
    }

    #[test]
    fn separable_data_leaks_everything() {
        let c = ctx(0.0);
        let r = sbo(&Hyperparameters::new(3, 0, 3, 1.0, 1.0, 0.3), &c, 3).unwrap();
        assert_eq!(r.eps_u, 0.0);
        assert_eq!(r.eps_p, 1.0, "{:?}", r.eps_p_trace);
    }

    #[test]
    fn deterministic() {
        let c = ctx(1.0);
        let hp = Hyperparameters::new(3, 1, 3, 0.8, 0.9, 0.3);
        let run = || EvaluationRecord {
            wall_clock_s: 0.0,
            ..sbo(&hp, &c, 9).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn stride_carries_values_forward() {
        let mut c = ctx(1.0);
        c.attack_stride = 3;
        let r = sbo(&Hyperparameters::new(5, 0, 3, 0.8, 1.0, 0.3), &c, 4).unwrap();
        assert_eq!(r.eps_p_trace[0], 0.5);
        assert_eq!(r.eps_p_trace[2], r.eps_p_trace[3]);
    }
}
