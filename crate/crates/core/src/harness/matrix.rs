//! Runs an experiment grid with one independent random stream per trial.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::records::{TrialResult, TrialWriter};
use crate::algorithms::{Algorithm, RunBudget};
use crate::error::{Error, Result};
use crate::lattice::TargetVector;
use crate::rng::{trial_rng, trial_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrialKey {
    pub n: usize,
    pub r: u64,
    pub repetition: u64,
}

/// Every trial of the grid in canonical order: `n`, then `r`, then repetition.
pub fn trial_plan(config: &ExperimentConfig) -> Vec<TrialKey> {
    let mut plan = Vec::new();
    for &n in &config.n_values {
        for &r in &config.r_values {
            for repetition in 0..config.repetitions {
                plan.push(TrialKey { n, r, repetition });
            }
        }
    }
    plan
}

/// A validated config with its optimizer built once.
#[derive(Debug, Clone)]
pub struct PreparedExperiment {
    config: ExperimentConfig,
    algorithm: Algorithm,
}

impl PreparedExperiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let algorithm = config.algorithm.build()?;
        Ok(Self { config, algorithm })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }
}

/// Runs one trial; the result depends only on the config and the key.
pub fn run_trial(prepared: &PreparedExperiment, key: TrialKey) -> Result<TrialResult> {
    let config = &prepared.config;
    let a = TargetVector::all_r(key.n, key.r as i64)?;
    let mut budget = RunBudget::new(config.max_evaluations)?;
    let mut algorithm = prepared.algorithm.clone();
    if config.clamp {
        budget = budget.with_box_bound(key.r)?;
        algorithm = algorithm.with_box_bound(Some(key.r));
    }
    let seed = trial_seed(config.base_seed, key.n, key.r, key.repetition);
    let mut rng = trial_rng(seed);
    let start = Instant::now();
    let outcome = algorithm.run(&a, &budget, 0, &mut rng);
    let (param1, param2) = config.algorithm.params();
    Ok(TrialResult {
        algorithm: config.algorithm.label().to_string(),
        n: key.n,
        r: key.r,
        param1,
        param2,
        seed,
        evaluations: outcome.evaluations,
        success: outcome.success,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs the grid in parallel. Results reach `sink` one `(n, r)` group at a
/// time, in canonical order, regardless of scheduling.
pub fn run_matrix<F>(config: &ExperimentConfig, mut sink: F) -> Result<usize>
where
    F: FnMut(&TrialResult) -> Result<()>,
{
    let prepared = PreparedExperiment::new(config.clone())?;
    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(w) = config.workers {
            builder = builder.num_threads(w);
        }
        builder
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?
    };
    let plan = trial_plan(config);
    let group = config.repetitions as usize;
    let mut emitted = 0;
    for chunk in plan.chunks(group) {
        let results: Vec<Result<TrialResult>> =
            pool.install(|| chunk.par_iter().map(|&key| run_trial(&prepared, key)).collect());
        for result in results {
            sink(&result?)?;
            emitted += 1;
        }
    }
    Ok(emitted)
}

/// Runs the grid and writes the trial CSV to `path`. The file is created
/// before any trial runs so an unwritable path fails fast.
pub fn run_bench(config: &ExperimentConfig, path: &Path) -> Result<Vec<TrialResult>> {
    config.validate()?;
    let file = File::create(path).map_err(|source| Error::Output {
        path: path.to_path_buf(),
        source,
    })?;
    let mut writer = TrialWriter::new(BufWriter::new(file))?;
    let mut all = Vec::new();
    run_matrix(config, |t| {
        writer.write(t)?;
        all.push(t.clone());
        Ok(())
    })?;
    writer.flush()?;
    Ok(all)
}

/// Convenience: run the grid and collect the results.
pub fn collect_matrix(config: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    let mut out = Vec::new();
    run_matrix(config, |t| {
        out.push(t.clone());
        Ok(())
    })?;
    Ok(out)
}

impl<W: Write> std::fmt::Debug for TrialWriter<W> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrialWriter").finish_non_exhaustive()
    }
}
