//! Experiment configuration, seeded batch execution, and persistence.
//!
//! A batch runs one configuration over a grid of problem sizes with a fixed
//! number of trials per size. Every trial draws its seed from the master
//! seed, the size, a hash of the run parameters, and the trial index, so
//! results do not depend on the execution order, the parallelism level, or
//! which other sizes are in the sweep. Trials are persisted as one CSV per
//! size plus a JSON manifest tying the files to their configuration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitcore::{derive_seed, MutationOp, NoiseModel};
use crate::ea::{run_trial, EvaluationPolicy, TrialResult};
use crate::stats::{summarize, SampleSummary};
use crate::{Error, Result};

/// Noise family, with the rate supplied separately by a [`QRule`].
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    None,
    OneBit,
    Bitwise,
}

impl NoiseKind {
    pub fn with_q(self, q: f64) -> NoiseModel {
        match self {
            NoiseKind::None => NoiseModel::None,
            NoiseKind::OneBit => NoiseModel::OneBit { q },
            NoiseKind::Bitwise => NoiseModel::Bitwise { q },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::None => "none",
            NoiseKind::OneBit => "one-bit",
            NoiseKind::Bitwise => "bitwise",
        }
    }
}

/// Noise-strength rule, resolved per problem size so a single configuration
/// can span a whole size sweep.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QRule {
    Const { q: f64 },
    OneOverN2,
    LogNOverN2,
    OneOverN,
    One,
}

impl QRule {
    pub fn resolve(self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            QRule::Const { q } => q,
            QRule::OneOverN2 => 1.0 / (nf * nf),
            QRule::LogNOverN2 => nf.ln() / (nf * nf),
            QRule::OneOverN => 1.0 / nf,
            QRule::One => 1.0,
        }
    }

    /// Stable name used in file names and report rows.
    pub fn name(self) -> String {
        match self {
            QRule::Const { q } => format!("const_{q}"),
            QRule::OneOverN2 => "one_over_n2".to_string(),
            QRule::LogNOverN2 => "log_n_over_n2".to_string(),
            QRule::OneOverN => "one_over_n".to_string(),
            QRule::One => "one".to_string(),
        }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Problem sizes, strictly ascending.
    pub sizes: Vec<usize>,
    pub noise: NoiseKind,
    pub q_rule: QRule,
    pub mutation: MutationOp,
    pub policy: EvaluationPolicy,
    pub runs_per_config: usize,
    /// Iteration budget per trial is `round(budget_multiplier * n^2)`.
    pub budget_multiplier: f64,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::invalid("sizes must not be empty"));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("sizes must be strictly ascending"));
        }
        if self.sizes[0] == 0 {
            return Err(Error::invalid("sizes must be positive"));
        }
        if self.runs_per_config == 0 {
            return Err(Error::invalid("runs_per_config must be at least 1"));
        }
        if !(self.budget_multiplier.is_finite() && self.budget_multiplier > 0.0) {
            return Err(Error::invalid("budget_multiplier must be positive"));
        }
        for &n in &self.sizes {
            self.mutation.validate(n)?;
            self.noise.with_q(self.q_rule.resolve(n)).validate(n)?;
        }
        Ok(())
    }

    pub fn budget(&self, n: usize) -> u64 {
        (self.budget_multiplier * (n as f64) * (n as f64)).round() as u64
    }

    /// Base name shared by this configuration's output files.
    pub fn stem(&self) -> String {
        format!("{}_{}_{}", self.policy.name(), self.noise.name(), self.q_rule.name())
    }
}

#[derive(Serialize)]
struct RunIdentity<'a> {
    noise: &'a NoiseKind,
    q_rule: &'a QRule,
    mutation: &'a MutationOp,
    policy: &'a EvaluationPolicy,
    budget_multiplier: f64,
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// Hash of the run parameters that shape a trial's trajectory. The master
/// seed, the size grid, and the trial count are deliberately excluded so
/// extending a sweep with more sizes or runs reproduces the existing trials.
pub fn config_hash(config: &ExperimentConfig) -> u64 {
    let identity = RunIdentity {
        noise: &config.noise,
        q_rule: &config.q_rule,
        mutation: &config.mutation,
        policy: &config.policy,
        budget_multiplier: config.budget_multiplier,
    };
    let json = serde_json::to_string(&identity).expect("run identity serializes");
    fnv1a64(json.as_bytes())
}

/// Seed of one trial, derived from the master seed and the trial coordinates.
pub fn trial_seed(config: &ExperimentConfig, n: usize, trial_index: usize) -> u64 {
    derive_seed(config.master_seed, &[n as u64, config_hash(config), trial_index as u64])
}

/// Results of one configuration at one size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeBatch {
    pub n: usize,
    /// Resolved noise rate at this size.
    pub q: f64,
    pub budget: u64,
    /// One result per trial, ordered by trial index.
    pub trials: Vec<TrialResult>,
    pub completed_count: usize,
    /// Iterations of the trials that found the optimum; absent when none did.
    pub runtime_summary: Option<SampleSummary<f64>>,
    /// Best true fitness divided by n, over all trials.
    pub fitness_summary: SampleSummary<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchResult {
    pub config: ExperimentConfig,
    pub per_size: Vec<SizeBatch>,
}

fn summarize_size(config: &ExperimentConfig, n: usize, trials: Vec<TrialResult>) -> SizeBatch {
    let completed: Vec<f64> = trials
        .iter()
        .filter(|t| t.found_optimum)
        .map(|t| t.iterations_used as f64)
        .collect();
    let fitness: Vec<f64> =
        trials.iter().map(|t| t.best_true_fitness as f64 / n as f64).collect();
    SizeBatch {
        n,
        q: config.q_rule.resolve(n),
        budget: config.budget(n),
        completed_count: completed.len(),
        runtime_summary: if completed.is_empty() {
            None
        } else {
            Some(summarize(&completed).expect("non-empty"))
        },
        fitness_summary: summarize(&fitness).expect("at least one trial"),
        trials,
    }
}

/// Runs every trial of the configuration. `parallelism` bounds the number
/// of worker threads; values of 0 or 1 run sequentially. The output is
/// identical for every parallelism level.
pub fn run_batch(config: &ExperimentConfig, parallelism: usize) -> Result<BatchResult> {
    config.validate()?;
    let mut per_size = Vec::with_capacity(config.sizes.len());
    for &n in &config.sizes {
        let noise = config.noise.with_q(config.q_rule.resolve(n));
        let budget = config.budget(n);
        let seeds: Vec<u64> =
            (0..config.runs_per_config).map(|i| trial_seed(config, n, i)).collect();
        let run_one =
            |&seed: &u64| run_trial(n, &config.mutation, &noise, config.policy, budget, seed);
        let trials: Vec<TrialResult> = if parallelism > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(parallelism)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            pool.install(|| seeds.par_iter().map(run_one).collect::<Result<_>>())?
        } else {
            seeds.iter().map(run_one).collect::<Result<_>>()?
        };
        per_size.push(summarize_size(config, n, trials));
    }
    Ok(BatchResult { config: config.clone(), per_size })
}

pub const TRIALS_CSV_HEADER: &str = "seed,found,iterations,evaluations,best_true,best_noisy";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestSize {
    pub n: usize,
    pub q: f64,
    pub budget: u64,
    pub trials_csv: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub version: String,
    pub generated_unix_secs: u64,
    pub sizes: Vec<ManifestSize>,
}

fn trials_csv(trials: &[TrialResult]) -> String {
    let mut out = String::from(TRIALS_CSV_HEADER);
    out.push('\n');
    for t in trials {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            t.seed,
            t.found_optimum as u8,
            t.iterations_used,
            t.evaluations_used,
            t.best_true_fitness,
            t.best_noisy_fitness
        ));
    }
    out
}

fn parse_trials_csv(text: &str, path: &Path) -> Result<Vec<TrialResult>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRIALS_CSV_HEADER => {}
        _ => {
            return Err(Error::invalid(format!(
                "{} does not start with the trial header",
                path.display()
            )))
        }
    }
    let mut trials = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::invalid(format!(
                "{} row {}: expected 6 fields, got {}",
                path.display(),
                idx + 2,
                fields.len()
            )));
        }
        let num = |i: usize| -> Result<u64> {
            fields[i].parse().map_err(|_| {
                Error::invalid(format!("{} row {}: bad number", path.display(), idx + 2))
            })
        };
        trials.push(TrialResult {
            seed: num(0)?,
            found_optimum: num(1)? == 1,
            iterations_used: num(2)?,
            evaluations_used: num(3)?,
            best_true_fitness: num(4)? as u32,
            best_noisy_fitness: num(5)? as u32,
        });
    }
    Ok(trials)
}

/// Writes one CSV of trials per size plus a manifest; returns the manifest
/// path. The CSV bytes are a pure function of the batch, so re-running the
/// same configuration overwrites them with identical content.
pub fn write_batch(batch: &BatchResult, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let stem = batch.config.stem();
    let mut sizes = Vec::with_capacity(batch.per_size.len());
    for size in &batch.per_size {
        let file = format!("trials_{}_n{}.csv", stem, size.n);
        let mut f = fs::File::create(dir.join(&file))?;
        f.write_all(trials_csv(&size.trials).as_bytes())?;
        sizes.push(ManifestSize {
            n: size.n,
            q: size.q,
            budget: size.budget,
            trials_csv: file,
        });
    }
    let manifest = Manifest {
        config: batch.config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        generated_unix_secs: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        sizes,
    };
    let path = dir.join(format!("manifest_{stem}.json"));
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

/// Reloads a persisted batch from its manifest, recomputing the summaries
/// from the trial rows. CSV paths are resolved relative to the manifest.
pub fn load_batch(manifest_path: &Path) -> Result<BatchResult> {
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(manifest_path)?)?;
    let dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut per_size = Vec::with_capacity(manifest.sizes.len());
    for size in &manifest.sizes {
        let path = dir.join(&size.trials_csv);
        let trials = parse_trials_csv(&fs::read_to_string(&path)?, &path)?;
        per_size.push(summarize_size(&manifest.config, size.n, trials));
    }
    Ok(BatchResult { config: manifest.config, per_size })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ReportKind {
    /// Mean best true fitness divided by n, over all trials.
    Fitness,
    /// Mean iterations divided by n^2, over configurations where every
    /// trial finished.
    Runtime,
}

pub const REPORT_CSV_HEADER: &str = "policy,q_rule,n,mean,std,count,completed_count";

/// Renders batches into a figure-ready CSV, one row per (configuration,
/// size). All batches must cover the same size grid. Runtime rows are
/// restricted to fully completed configurations; fitness rows always appear.
pub fn emit_report(results: &[BatchResult], kind: ReportKind) -> Result<String> {
    if results.is_empty() {
        return Err(Error::GridMismatch("no batches to report on".into()));
    }
    let grid = &results[0].config.sizes;
    for r in &results[1..] {
        if &r.config.sizes != grid {
            return Err(Error::GridMismatch(format!(
                "sizes {:?} do not match {:?}",
                r.config.sizes, grid
            )));
        }
    }
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for batch in results {
        let policy = batch.config.policy.name();
        let q_rule = batch.config.q_rule.name();
        for size in &batch.per_size {
            let count = size.trials.len();
            let row = match kind {
                ReportKind::Fitness => {
                    let s = &size.fitness_summary;
                    Some((s.mean, s.std))
                }
                ReportKind::Runtime => {
                    let nn = (size.n * size.n) as f64;
                    match &size.runtime_summary {
                        Some(s) if size.completed_count == count => {
                            Some((s.mean / nn, s.std / nn))
                        }
                        _ => None,
                    }
                }
            };
            if let Some((mean, std)) = row {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    policy, q_rule, size.n, mean, std, count, size.completed_count
                ));
            }
        }
    }
    Ok(out)
}
