//! Command-line front end.
//!
//! Every subcommand resolves its settings from three layers: built-in
//! defaults, an optional flat JSON file with dotted keys (`--config`), and
//! explicit flags. The resolved map is written to `config.json` in the output
//! directory; feeding it back through `--config` reproduces the run.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::attack::{instance_clustering_attack, AttackConfig, LabelSource};
use crate::data::{generate, load_dataset, save_dataset, AttackProbeSet, SyntheticSpec, VerticalDataset};
use crate::error::{Error, Result};
use crate::moo::{fitness, read_front_csv, Constraints, Solution};
use crate::optimizer::{
    cmosb_run, empirical_baseline, evaluate_all, evaluation_seed, grid_search, presets, sbo, write_json,
    write_run_artifacts, EvalContext, EvaluationRecord, GridSpec, Normalizer, RunConfig,
};
use crate::secureboost::{train_with, Hyperparameters, LeafTrace};
use crate::seed::{self, stream};

#[derive(Debug, Parser)]
#[command(name = "cmosb", version, about = "Vertical federated boosting simulator and hyperparameter search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset CSV and its manifest.
    GenData(GenDataArgs),
    /// Train one configuration and measure utility loss, cost and leakage.
    Train(TrainArgs),
    /// Re-run the clustering attack on a saved leaf trace.
    Attack(AttackArgs),
    /// Constrained multi-objective search over hyperparameters.
    Optimize(OptimizeArgs),
    /// Grid search baseline.
    Grid(GridArgs),
    /// Evaluate the three framework presets.
    Baselines(BaselinesArgs),
    /// Normalized hypervolume of one or more front.csv files.
    Hv(HvArgs),
    /// Sweep one defense parameter and report mean leakage and utility loss.
    DefenseSweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Master seed [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for evaluations (0 = one per core)
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// JSON file of dotted keys; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Dataset CSV written by gen-data; a synthetic set is generated when absent
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub active: Option<usize>,
    #[arg(long)]
    pub passive: Option<usize>,
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub separation: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub probe_per_class: Option<usize>,
    #[arg(long)]
    pub attack_stride: Option<usize>,
    /// Labels the attacker holds per class; 0 (the default) gives it one label
    /// inside every cluster instead
    #[arg(long)]
    pub known_per_class: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct HpArgs {
    #[arg(long)]
    pub n_federated: Option<usize>,
    #[arg(long)]
    pub n_local: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub subsample: Option<f64>,
    #[arg(long)]
    pub theta_p: Option<f64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct GenDataArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub active: Option<usize>,
    #[arg(long)]
    pub passive: Option<usize>,
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub separation: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[command(flatten)]
    pub hp: HpArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Leaf trace CSV (tree_id, leaf_id, instance_id)
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Probe CSV (instance_id, label)
    #[arg(long)]
    pub probe: Option<PathBuf>,
    /// Labels the attacker holds per class; 0 (the default) means one per cluster
    #[arg(long)]
    pub known_per_class: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub population: Option<usize>,
    /// Seed the initial population with the framework presets
    #[arg(long)]
    pub inject_presets: bool,
    #[arg(long)]
    pub phi_u: Option<f64>,
    #[arg(long)]
    pub phi_c: Option<f64>,
    #[arg(long)]
    pub phi_p: Option<f64>,
    /// Penalty coefficient for violated bounds
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
    /// Evaluate a seeded random subset of this many grid points
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BaselinesArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
}

#[derive(Debug, Clone, Args)]
pub struct HvArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// front.csv files; objectives are normalized over their union
    pub fronts: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[command(flatten)]
    pub hp: HpArgs,
    /// n_local or theta_p
    #[arg(long)]
    pub parameter: Option<String>,
    /// Comma-separated parameter values
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    /// Datasets (seed, seed+1, ...) averaged per value
    #[arg(long)]
    pub repeats: Option<usize>,
}

// Resolved settings. Field names are the dotted config keys.

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SynthSettings {
    #[serde(rename = "data.samples")]
    samples: usize,
    #[serde(rename = "data.active")]
    active: usize,
    #[serde(rename = "data.passive")]
    passive: usize,
    #[serde(rename = "data.classes")]
    classes: usize,
    #[serde(rename = "data.noise")]
    noise: f64,
    #[serde(rename = "data.separation")]
    separation: f64,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self {
            samples: 2000,
            active: 5,
            passive: 5,
            classes: 2,
            noise: SyntheticSpec::DEFAULT_NOISE,
            separation: SyntheticSpec::DEFAULT_SEPARATION,
        }
    }
}

impl SynthSettings {
    fn spec(&self, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            separation: self.separation,
            ..SyntheticSpec::new(self.samples, self.active, self.passive, self.classes, self.noise, seed)
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct DataSettings {
    #[serde(rename = "data.path")]
    path: Option<PathBuf>,
    #[serde(flatten)]
    synth: SynthSettings,
}

impl DataSettings {
    fn load(&self, seed: u64) -> Result<VerticalDataset> {
        match &self.path {
            Some(p) => load_dataset(p),
            None => generate(&self.synth.spec(seed)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EvalSettings {
    #[serde(rename = "eval.train_fraction")]
    train_fraction: f64,
    #[serde(rename = "eval.probe_per_class")]
    probe_per_class: usize,
    #[serde(rename = "eval.attack_stride")]
    attack_stride: usize,
    /// Labeled probe instances per class; zero means one known label per
    /// cluster.
    #[serde(rename = "eval.known_per_class")]
    known_per_class: usize,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            probe_per_class: 100,
            attack_stride: 1,
            known_per_class: 0,
        }
    }
}

impl EvalSettings {
    fn context(&self, ds: &VerticalDataset, seed: u64) -> Result<EvalContext> {
        let mut ctx = EvalContext::prepare(ds, self.train_fraction, self.probe_per_class, seed)?;
        ctx.attack_stride = self.attack_stride;
        ctx.attack.labels = label_source(self.known_per_class);
        Ok(ctx)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct HpSettings {
    #[serde(rename = "hp.n_federated")]
    n_federated: usize,
    #[serde(rename = "hp.n_local")]
    n_local: usize,
    #[serde(rename = "hp.max_depth")]
    max_depth: usize,
    #[serde(rename = "hp.subsample")]
    subsample: f64,
    #[serde(rename = "hp.theta_p")]
    theta_p: f64,
    #[serde(rename = "hp.learning_rate")]
    learning_rate: f64,
}

impl Default for HpSettings {
    fn default() -> Self {
        Self::from(presets()[2].hyperparameters)
    }
}

impl From<Hyperparameters> for HpSettings {
    fn from(hp: Hyperparameters) -> Self {
        Self {
            n_federated: hp.n_federated,
            n_local: hp.n_local,
            max_depth: hp.max_depth,
            subsample: hp.subsample,
            theta_p: hp.purity_threshold,
            learning_rate: hp.learning_rate,
        }
    }
}

impl HpSettings {
    fn hyperparameters(&self) -> Hyperparameters {
        Hyperparameters::new(
            self.n_federated,
            self.n_local,
            self.max_depth,
            self.subsample,
            self.theta_p,
            self.learning_rate,
        )
    }
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GenDataSettings {
    seed: u64,
    #[serde(flatten)]
    synth: SynthSettings,
}

impl Default for GenDataSettings {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            synth: SynthSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TrainSettings {
    seed: u64,
    #[serde(flatten)]
    data: DataSettings,
    #[serde(flatten)]
    eval: EvalSettings,
    #[serde(flatten)]
    hp: HpSettings,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            data: DataSettings::default(),
            eval: EvalSettings::default(),
            hp: HpSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AttackSettings {
    seed: u64,
    #[serde(rename = "attack.trace")]
    trace: Option<PathBuf>,
    #[serde(rename = "attack.probe")]
    probe: Option<PathBuf>,
    #[serde(rename = "attack.known_per_class")]
    known_per_class: usize,
}

impl Default for AttackSettings {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            trace: None,
            probe: None,
            known_per_class: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OptimizeSettings {
    seed: u64,
    #[serde(flatten)]
    data: DataSettings,
    #[serde(flatten)]
    eval: EvalSettings,
    #[serde(rename = "run.generations")]
    generations: usize,
    #[serde(rename = "run.population")]
    population: usize,
    #[serde(rename = "run.inject_presets")]
    inject_presets: bool,
    #[serde(rename = "constraints.phi_u")]
    phi_u: Option<f64>,
    #[serde(rename = "constraints.phi_c")]
    phi_c: Option<f64>,
    #[serde(rename = "constraints.phi_p")]
    phi_p: Option<f64>,
    #[serde(rename = "constraints.alpha")]
    alpha: f64,
}

impl Default for OptimizeSettings {
    fn default() -> Self {
        let run = RunConfig::default();
        Self {
            seed: default_seed(),
            data: DataSettings::default(),
            eval: EvalSettings::default(),
            generations: run.generations,
            population: run.population,
            inject_presets: run.inject_presets,
            phi_u: None,
            phi_c: None,
            phi_p: None,
            alpha: 20.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GridSettings {
    seed: u64,
    #[serde(flatten)]
    data: DataSettings,
    #[serde(flatten)]
    eval: EvalSettings,
    #[serde(rename = "grid.budget")]
    budget: Option<usize>,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            data: DataSettings::default(),
            eval: EvalSettings::default(),
            budget: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BaselineSettings {
    seed: u64,
    #[serde(flatten)]
    data: DataSettings,
    #[serde(flatten)]
    eval: EvalSettings,
}

impl Default for BaselineSettings {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            data: DataSettings::default(),
            eval: EvalSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct HvSettings {
    #[serde(rename = "hv.fronts")]
    fronts: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SweepSettings {
    seed: u64,
    #[serde(flatten)]
    data: DataSettings,
    #[serde(flatten)]
    eval: EvalSettings,
    #[serde(flatten)]
    hp: HpSettings,
    #[serde(rename = "sweep.parameter")]
    parameter: String,
    /// Empty means the parameter's default list.
    #[serde(rename = "sweep.values")]
    values: Vec<f64>,
    #[serde(rename = "sweep.repeats")]
    repeats: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            data: DataSettings::default(),
            eval: EvalSettings::default(),
            // The undefended reference configuration.
            hp: HpSettings::from(Hyperparameters::new(20, 0, 7, 0.8, 1.0, 0.1)),
            parameter: "n_local".into(),
            values: Vec::new(),
            repeats: 1,
        }
    }
}

/// Flag values keyed by their config key; `None` means the flag was absent.
type Overrides = Vec<(&'static str, Option<Value>)>;

fn val<T: Serialize>(x: &Option<T>) -> Option<Value> {
    x.as_ref().map(|v| serde_json::to_value(v).expect("flag values serialize"))
}

fn synth_overrides(
    samples: &Option<usize>,
    active: &Option<usize>,
    passive: &Option<usize>,
    classes: &Option<usize>,
    noise: &Option<f64>,
    separation: &Option<f64>,
) -> Overrides {
    vec![
        ("data.samples", val(samples)),
        ("data.active", val(active)),
        ("data.passive", val(passive)),
        ("data.classes", val(classes)),
        ("data.noise", val(noise)),
        ("data.separation", val(separation)),
    ]
}

impl DataArgs {
    fn overrides(&self) -> Overrides {
        let mut o = vec![("data.path", val(&self.data))];
        o.extend(synth_overrides(
            &self.samples,
            &self.active,
            &self.passive,
            &self.classes,
            &self.noise,
            &self.separation,
        ));
        o
    }
}

impl EvalArgs {
    fn overrides(&self) -> Overrides {
        vec![
            ("eval.train_fraction", val(&self.train_fraction)),
            ("eval.probe_per_class", val(&self.probe_per_class)),
            ("eval.attack_stride", val(&self.attack_stride)),
            ("eval.known_per_class", val(&self.known_per_class)),
        ]
    }
}

impl HpArgs {
    fn overrides(&self) -> Overrides {
        vec![
            ("hp.n_federated", val(&self.n_federated)),
            ("hp.n_local", val(&self.n_local)),
            ("hp.max_depth", val(&self.max_depth)),
            ("hp.subsample", val(&self.subsample)),
            ("hp.theta_p", val(&self.theta_p)),
            ("hp.learning_rate", val(&self.learning_rate)),
        ]
    }
}

fn read_config_file(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "expected a JSON object of dotted keys".into(),
        }),
    }
}

/// Layers defaults, the config file and flags, in that order.
fn resolve<T: Default + Serialize + DeserializeOwned>(
    common: &CommonArgs,
    mut overrides: Overrides,
) -> Result<(T, Map<String, Value>)> {
    let Value::Object(mut map) = serde_json::to_value(T::default())? else {
        unreachable!("settings serialize to objects")
    };
    if let Some(path) = &common.config {
        for (key, value) in read_config_file(path)? {
            if !map.contains_key(&key) {
                return Err(Error::InvalidArgument(format!(
                    "unknown config key '{key}' in {}",
                    path.display()
                )));
            }
            map.insert(key, value);
        }
    }
    if map.contains_key("seed") {
        overrides.push(("seed", val(&common.seed)));
    }
    for (key, value) in overrides {
        if let Some(v) = value {
            map.insert(key.to_string(), v);
        }
    }
    let settings = serde_json::from_value(Value::Object(map.clone()))
        .map_err(|e| Error::InvalidArgument(format!("bad configuration: {e}")))?;
    Ok((settings, map))
}

fn prepare_out(common: &CommonArgs, resolved: &Map<String, Value>) -> Result<PathBuf> {
    let dir = common.out.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_json(dir.join("config.json"), resolved)?;
    Ok(dir)
}

fn write_probe_csv(path: &Path, probe: &AttackProbeSet) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["instance_id", "label"])?;
    for (id, label) in probe.ids.iter().zip(&probe.labels) {
        w.write_record([id.to_string(), label.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Deserialize)]
struct ProbeRow {
    instance_id: u64,
    label: usize,
}

fn read_probe_csv(path: &Path) -> Result<AttackProbeSet> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut probe = AttackProbeSet {
        ids: Vec::new(),
        labels: Vec::new(),
        num_classes: 0,
    };
    for (i, row) in r.deserialize::<ProbeRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: e.to_string(),
        })?;
        probe.ids.push(row.instance_id);
        probe.labels.push(row.label);
        probe.num_classes = probe.num_classes.max(row.label + 1);
    }
    if probe.num_classes < 2 {
        return Err(Error::Dataset(format!("{} holds fewer than two classes", path.display())));
    }
    Ok(probe)
}

fn label_source(known_per_class: usize) -> LabelSource {
    match known_per_class {
        0 => LabelSource::PerCluster,
        k => LabelSource::PerClass(k),
    }
}

fn required(path: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    path.clone()
        .ok_or_else(|| Error::InvalidArgument(format!("--{flag} is required")))
}

fn records_to_solutions(records: &[EvaluationRecord]) -> Vec<Solution> {
    let points: Vec<[f64; 3]> = records.iter().map(|r| r.raw()).collect();
    let fit = fitness(&points);
    records
        .iter()
        .zip(&fit.rank)
        .map(|(r, &rank)| Solution {
            id: r.solution_id,
            hyperparameters: r.hyperparameters,
            objectives: r.objectives(),
            rank,
        })
        .collect()
}

fn gen_data(args: &GenDataArgs) -> Result<()> {
    let (s, map): (GenDataSettings, _) = resolve(
        &args.common,
        synth_overrides(
            &args.samples,
            &args.active,
            &args.passive,
            &args.classes,
            &args.noise,
            &args.separation,
        ),
    )?;
    let dir = prepare_out(&args.common, &map)?;
    let spec = s.synth.spec(s.seed);
    let ds = generate(&spec)?;
    save_dataset(&ds, dir.join("data.csv"), Some(&spec))?;
    log::info!("wrote {} rows to {}", ds.len(), dir.join("data.csv").display());
    Ok(())
}

fn train(args: &TrainArgs) -> Result<()> {
    let mut o = args.data.overrides();
    o.extend(args.eval.overrides());
    o.extend(args.hp.overrides());
    let (s, map): (TrainSettings, _) = resolve(&args.common, o)?;
    let ds = s.data.load(s.seed)?;
    let ctx = s.eval.context(&ds, s.seed)?;
    let hp = s.hp.hyperparameters();
    let eval_seed = evaluation_seed(s.seed, &hp);
    let record = sbo(&hp, &ctx, eval_seed)?;
    let out = train_with(&hp, &ctx.train, eval_seed, &ctx.trainer)?;
    let attack_seed = seed::derive(s.seed, &[stream::ATTACK_KNOWN]);
    let known = ctx.attack.known(&ctx.probe, attack_seed)?;
    let report = instance_clustering_attack(
        &out.trace,
        &ctx.probe,
        known.as_deref(),
        &ctx.attack.spectral,
        attack_seed,
    )?;

    let dir = prepare_out(&args.common, &map)?;
    let model = dir.join("model.json");
    std::fs::write(&model, out.model.to_json()? + "\n").map_err(|e| Error::io(&model, e))?;
    out.trace.write_csv(dir.join("trace.csv"))?;
    write_probe_csv(&dir.join("probe.csv"), &ctx.probe)?;
    report.write_json(dir.join("attack.json"))?;
    write_json(dir.join("record.json"), &record)?;
    println!("eps_u={} eps_c={} eps_p={}", record.eps_u, record.eps_c, record.eps_p);
    Ok(())
}

fn attack(args: &AttackArgs) -> Result<()> {
    let o = vec![
        ("attack.trace", val(&args.trace)),
        ("attack.probe", val(&args.probe)),
        ("attack.known_per_class", val(&args.known_per_class)),
    ];
    let (s, map): (AttackSettings, _) = resolve(&args.common, o)?;
    let trace = LeafTrace::read_csv(required(&s.trace, "trace")?)?;
    let probe = read_probe_csv(&required(&s.probe, "probe")?)?;
    let cfg = AttackConfig {
        labels: label_source(s.known_per_class),
        ..AttackConfig::default()
    };
    let attack_seed = seed::derive(s.seed, &[stream::ATTACK_KNOWN]);
    let known = cfg.known(&probe, attack_seed)?;
    let report = instance_clustering_attack(&trace, &probe, known.as_deref(), &cfg.spectral, attack_seed)?;
    let dir = prepare_out(&args.common, &map)?;
    report.write_json(dir.join("attack.json"))?;
    println!("eps_p={} trees={}", report.epsilon_p, report.n_trees);
    Ok(())
}

fn optimize(args: &OptimizeArgs) -> Result<()> {
    let mut o = args.data.overrides();
    o.extend(args.eval.overrides());
    o.extend([
        ("run.generations", val(&args.generations)),
        ("run.population", val(&args.population)),
        ("run.inject_presets", args.inject_presets.then_some(Value::Bool(true))),
        ("constraints.phi_u", val(&args.phi_u)),
        ("constraints.phi_c", val(&args.phi_c)),
        ("constraints.phi_p", val(&args.phi_p)),
        ("constraints.alpha", val(&args.alpha)),
    ]);
    let (s, map): (OptimizeSettings, _) = resolve(&args.common, o)?;
    let mut constraints = Constraints::new(s.phi_u, s.phi_c, s.phi_p, s.alpha);
    constraints.penalize_utility = s.phi_u.is_some();
    let cfg = RunConfig {
        generations: s.generations,
        population: s.population,
        constraints,
        inject_presets: s.inject_presets,
        seed: s.seed,
        ..RunConfig::default()
    };
    cfg.validate()?;
    let ds = s.data.load(s.seed)?;
    let ctx = s.eval.context(&ds, s.seed)?;
    let run = cmosb_run(&cfg, &ctx, args.common.jobs)?;
    let dir = prepare_out(&args.common, &map)?;
    write_run_artifacts(&dir, &run.pareto, Some(&run.hv_series), &run.records)?;
    println!(
        "{} Pareto solutions, final hv {:.4}",
        run.pareto.len(),
        run.hv_series.last().copied().unwrap_or(0.0)
    );
    Ok(())
}

fn grid(args: &GridArgs) -> Result<()> {
    let mut o = args.data.overrides();
    o.extend(args.eval.overrides());
    o.push(("grid.budget", val(&args.budget)));
    let (s, map): (GridSettings, _) = resolve(&args.common, o)?;
    let ds = s.data.load(s.seed)?;
    let ctx = s.eval.context(&ds, s.seed)?;
    let result = grid_search(&GridSpec::default(), &ctx, s.seed, s.budget, args.common.jobs)?;
    let dir = prepare_out(&args.common, &map)?;
    write_run_artifacts(&dir, &result.front, None, &result.records)?;
    println!("{} evaluations, {} on the front", result.records.len(), result.front.len());
    Ok(())
}

fn baselines(args: &BaselinesArgs) -> Result<()> {
    let mut o = args.data.overrides();
    o.extend(args.eval.overrides());
    let (s, map): (BaselineSettings, _) = resolve(&args.common, o)?;
    let ds = s.data.load(s.seed)?;
    let ctx = s.eval.context(&ds, s.seed)?;
    let records = empirical_baseline(&ctx, s.seed, args.common.jobs)?;
    let dir = prepare_out(&args.common, &map)?;
    write_run_artifacts(&dir, &records_to_solutions(&records), None, &records)?;
    for (p, r) in presets().iter().zip(&records) {
        println!("{}: eps_u={} eps_c={} eps_p={}", p.name, r.eps_u, r.eps_c, r.eps_p);
    }
    Ok(())
}

fn hv(args: &HvArgs) -> Result<()> {
    let o = vec![("hv.fronts", (!args.fronts.is_empty()).then(|| val(&Some(&args.fronts))).flatten())];
    let (s, map): (HvSettings, _) = resolve(&args.common, o)?;
    if s.fronts.is_empty() {
        return Err(Error::InvalidArgument("at least one front.csv is required".into()));
    }
    let fronts = s
        .fronts
        .iter()
        .map(|p| Ok(read_front_csv(p)?.iter().map(|s| s.objectives.raw).collect()))
        .collect::<Result<Vec<Vec<[f64; 3]>>>>()?;
    let norm = Normalizer::fit(fronts.iter().flatten());
    let dir = prepare_out(&args.common, &map)?;
    let path = dir.join("hv.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["front", "hv"])?;
    for (file, points) in s.fronts.iter().zip(&fronts) {
        let value = norm.hypervolume(points)?;
        println!("{}\t{value:.6}", file.display());
        w.write_record([file.display().to_string(), format!("{value:?}")])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

fn defense_sweep(args: &SweepArgs) -> Result<()> {
    let mut o = args.data.overrides();
    o.extend(args.eval.overrides());
    o.extend(args.hp.overrides());
    o.extend([
        ("sweep.parameter", val(&args.parameter)),
        ("sweep.values", val(&args.values)),
        ("sweep.repeats", val(&args.repeats)),
    ]);
    let (s, map): (SweepSettings, _) = resolve(&args.common, o)?;
    let values = match (s.parameter.as_str(), s.values.is_empty()) {
        ("n_local", true) => vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
        ("theta_p", true) => vec![1.0, 0.9, 0.8, 0.7],
        ("n_local" | "theta_p", false) => s.values.clone(),
        (other, _) => {
            return Err(Error::InvalidArgument(format!(
                "sweep parameter must be n_local or theta_p, got '{other}'"
            )))
        }
    };
    let base = s.hp.hyperparameters();
    let hps = values
        .iter()
        .map(|&v| {
            let mut hp = base;
            if s.parameter == "n_local" {
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(Error::InvalidArgument(format!("n_local value {v} is not a count")));
                }
                hp.n_local = v as usize;
            } else {
                hp.purity_threshold = v;
            }
            hp.validate()?;
            Ok(hp)
        })
        .collect::<Result<Vec<_>>>()?;
    if s.repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }

    let mut sums = vec![(0.0, 0.0); hps.len()];
    for r in 0..s.repeats as u64 {
        let seed = s.seed + r;
        let ds = s.data.load(seed)?;
        let ctx = s.eval.context(&ds, seed)?;
        for (sum, rec) in sums.iter_mut().zip(evaluate_all(&hps, &ctx, seed, args.common.jobs)?) {
            if rec.failed {
                return Err(Error::InvalidArgument(format!(
                    "evaluation of {:?} failed",
                    rec.hyperparameters
                )));
            }
            sum.0 += rec.eps_p;
            sum.1 += rec.eps_u;
        }
    }
    let dir = prepare_out(&args.common, &map)?;
    let path = dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["parameter", "eps_p", "eps_u"])?;
    let n = s.repeats as f64;
    for (v, (p, u)) in values.iter().zip(&sums) {
        println!("{}={v} eps_p={:.4} eps_u={:.4}", s.parameter, p / n, u / n);
        w.write_record([format!("{v:?}"), format!("{:?}", p / n), format!("{:?}", u / n)])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Train(a) => train(a),
        Command::Attack(a) => attack(a),
        Command::Optimize(a) => optimize(a),
        Command::Grid(a) => grid(a),
        Command::Baselines(a) => baselines(a),
        Command::Hv(a) => hv(a),
        Command::DefenseSweep(a) => defense_sweep(a),
    }
}
