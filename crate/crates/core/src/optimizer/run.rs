use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::baselines::presets;
use super::normalize::Normalizer;
use super::pool::evaluate_all;
use super::sbo::{EvalContext, EvaluationRecord};
use crate::error::{Error, Result};
use crate::moo::{
    fitness, penalize, select, tournament, vary, Constraints, Genome, SearchSpace, Solution, VariationConfig,
};
use crate::secureboost::Hyperparameters;
use crate::seed::{self, stream};

/// Offspring pairs repeating an evaluated configuration are redrawn, up to
/// this many attempts per population member.
const MAX_DUPLICATE_RETRIES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub generations: usize,
    pub population: usize,
    pub constraints: Constraints,
    pub variation: VariationConfig,
    /// Replace part of the initial population with the framework presets.
    pub inject_presets: bool,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            generations: 40,
            population: 20,
            constraints: Constraints::unbounded(),
            variation: VariationConfig::default(),
            inject_presets: false,
            seed: 42,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.generations == 0 {
            return Err(Error::InvalidArgument("generations must be at least 1".into()));
        }
        if self.population < 2 || self.population % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "population must be even and at least 2, got {}",
                self.population
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// Rank-0 members of the final population, by solution id.
    pub pareto: Vec<Solution>,
    pub final_population: Vec<Solution>,
    /// Every evaluated solution in evaluation order.
    pub records: Vec<EvaluationRecord>,
    /// Normalized hypervolume after each generation, starting with the
    /// initial population.
    pub hv_series: Vec<f64>,
}

/// Raw objectives of the non-failed records that satisfy the constraints.
pub fn feasible_points(records: &[EvaluationRecord], constraints: &Constraints) -> Vec<[f64; 3]> {
    records
        .iter()
        .filter(|r| !r.failed && constraints.is_feasible(&r.objectives()))
        .map(|r| r.raw())
        .collect()
}

fn config_key(hp: &Hyperparameters) -> [u64; 6] {
    [
        hp.n_federated as u64,
        hp.n_local as u64,
        hp.max_depth as u64,
        hp.subsample.to_bits(),
        hp.purity_threshold.to_bits(),
        hp.learning_rate.to_bits(),
    ]
}

struct Evaluator<'a> {
    ctx: &'a EvalContext,
    cfg: &'a RunConfig,
    jobs: usize,
    cache: HashMap<[u64; 6], EvaluationRecord>,
    records: Vec<EvaluationRecord>,
    next_id: u64,
}

impl Evaluator<'_> {
    /// Evaluates decoded genomes, reusing results for configurations seen
    /// before, and returns their solutions.
    fn evaluate(&mut self, hps: &[Hyperparameters], generation: usize) -> Result<Vec<Solution>> {
        let mut fresh: Vec<Hyperparameters> = Vec::new();
        for hp in hps {
            if !self.cache.contains_key(&config_key(hp)) && !fresh.iter().any(|f| config_key(f) == config_key(hp)) {
                fresh.push(*hp);
            }
        }
        for record in evaluate_all(&fresh, self.ctx, self.cfg.seed, self.jobs)? {
            self.cache.insert(config_key(&record.hyperparameters), record);
        }
        let mut out = Vec::with_capacity(hps.len());
        for hp in hps {
            let mut record = self.cache[&config_key(hp)].clone();
            record.solution_id = self.next_id;
            record.generation = generation;
            self.next_id += 1;
            out.push(Solution {
                id: record.solution_id,
                hyperparameters: *hp,
                objectives: penalize(&record.objectives(), &self.cfg.constraints),
                rank: 0,
            });
            self.records.push(record);
        }
        Ok(out)
    }
}

/// Constrained NSGA-II over the hyperparameter genome.
pub fn cmosb_run(cfg: &RunConfig, ctx: &EvalContext, jobs: usize) -> Result<RunResult> {
    cfg.validate()?;
    let space = SearchSpace::for_classes(ctx.train.num_classes());
    let n = cfg.population;
    let mut eval = Evaluator {
        ctx,
        cfg,
        jobs,
        cache: HashMap::new(),
        records: Vec::new(),
        next_id: 0,
    };

    let mut rng = seed::rng(cfg.seed, &[stream::INIT_POPULATION]);
    let mut genomes: Vec<Genome> = (0..n).map(|_| Genome::random(&mut rng)).collect();
    if cfg.inject_presets {
        for (g, p) in genomes.iter_mut().zip(presets()) {
            *g = Genome::encode(&p.hyperparameters, &space);
        }
    }
    let decode = |gs: &[Genome]| gs.iter().map(|g| g.decode(&space)).collect::<Vec<_>>();
    let mut population = eval.evaluate(&decode(&genomes), 0)?;
    let mut generation_of_record = vec![eval.records.len()];

    for generation in 1..=cfg.generations {
        let points: Vec<[f64; 3]> = population.iter().map(|s| s.objectives.penalized).collect();
        let ids: Vec<u64> = population.iter().map(|s| s.id).collect();
        let fit = fitness(&points);
        let mut rng = seed::rng(cfg.seed, &[stream::VARIATION, generation as u64]);
        let mut offspring: Vec<Genome> = Vec::with_capacity(n);
        let mut attempts = 0;
        while offspring.len() < n {
            let a = tournament(&fit, &ids, &mut rng);
            let b = tournament(&fit, &ids, &mut rng);
            let (c1, c2) = vary(&genomes[a], &genomes[b], &cfg.variation, &mut rng);
            attempts += 1;
            let seen = |g: &Genome| {
                let key = config_key(&g.decode(&space));
                eval.cache.contains_key(&key) || offspring.iter().any(|o| config_key(&o.decode(&space)) == key)
            };
            if attempts <= MAX_DUPLICATE_RETRIES * n && (seen(&c1) || seen(&c2)) {
                continue;
            }
            offspring.push(c1);
            offspring.push(c2);
        }
        let children = eval.evaluate(&decode(&offspring), generation)?;

        let merged: Vec<Solution> = population.iter().chain(&children).copied().collect();
        let merged_genomes: Vec<Genome> = genomes.iter().chain(&offspring).copied().collect();
        let points: Vec<[f64; 3]> = merged.iter().map(|s| s.objectives.penalized).collect();
        let ids: Vec<u64> = merged.iter().map(|s| s.id).collect();
        let keep = select(&points, &ids, n)?;
        population = keep.iter().map(|&i| merged[i]).collect();
        genomes = keep.iter().map(|&i| merged_genomes[i]).collect();
        generation_of_record.push(eval.records.len());
    }

    let points: Vec<[f64; 3]> = population.iter().map(|s| s.objectives.penalized).collect();
    let fit = fitness(&points);
    let mut final_population: Vec<Solution> = population
        .iter()
        .zip(&fit.rank)
        .map(|(s, &rank)| Solution { rank, ..*s })
        .collect();
    final_population.sort_by_key(|s| s.id);
    let pareto = final_population.iter().filter(|s| s.rank == 0).copied().collect();

    let all_points = feasible_points(&eval.records, &Constraints::unbounded());
    let norm = Normalizer::fit(&all_points);
    let hv_series = generation_of_record
        .iter()
        .map(|&upto| norm.hypervolume(&feasible_points(&eval.records[..upto], &cfg.constraints)))
        .collect::<Result<Vec<f64>>>()?;

    Ok(RunResult {
        pareto,
        final_population,
        records: eval.records,
        hv_series,
    })
}
