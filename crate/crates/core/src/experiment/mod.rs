//! Config-driven experiments: realization loops, aggregation, serialization.
//!
//! Realizations run on a rayon pool, but results are collected in
//! realization order and folded sequentially, so every aggregate is
//! bit-identical for any parallel width.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{moment_distance, haar_moment, DesignAveraging, MomentOperator};
use crate::entanglement::Fluctuation;
use crate::error::{Error, Result};
use crate::krylov::KrylovBasis;
use crate::random::realization_seed;

mod config;
mod emit;
mod simulate;
pub mod table1;

pub use config::{
    ExperimentConfig, Observable, OutputConfig, OutputFormat, DEFAULT_MEMORY_BUDGET_MB,
    DEFAULT_STEPS, DEFAULT_TAIL_FRACTION, PARALLEL_WIDTH_ENV,
};
pub use emit::{emit, read_csv, read_json, write_csv};
pub use simulate::{initial_system_state, series_names, INITIAL_SRE_TOL, TRACE_DRIFT_TOL};

/// Aggregate of one observable at one step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesRecord {
    pub t: usize,
    pub mean: f64,
    pub variance: f64,
    pub n_realizations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub records: Vec<TimeSeriesRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub master_seed: u64,
    pub realization_seeds: Vec<u64>,
    pub version: String,
    pub wall_clock_seconds: f64,
    pub tail_fraction: f64,
    /// Saturation value of every series.
    pub saturation: BTreeMap<String, f64>,
    /// Krylov dimension per realization (Krylov runs only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub krylov_dimensions: Option<Vec<usize>>,
    /// Worst Krylov basis orthonormality defect over realizations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_gram_deviation: Option<f64>,
    /// Largest `|SRE|` of any realization's initial state (SRE runs only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_initial_sre: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub series: Vec<Series>,
    pub manifest: RunManifest,
}

impl ExperimentOutput {
    /// The primary series (first in [`series_names`] order).
    pub fn primary(&self) -> &[TimeSeriesRecord] {
        &self.series[0].records
    }

    pub fn series(&self, name: &str) -> Option<&[TimeSeriesRecord]> {
        self.series
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.records.as_slice())
    }
}

/// Mean of the per-step means over the final `tail_fraction` of records
/// (at least one record).
pub fn saturation_value(series: &[TimeSeriesRecord], tail_fraction: f64) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("empty series".into()));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tail fraction {tail_fraction} outside (0, 1]"
        )));
    }
    let n = ((series.len() as f64 * tail_fraction).ceil() as usize).clamp(1, series.len());
    let tail = &series[series.len() - n..];
    Ok(tail.iter().map(|r| r.mean).sum::<f64>() / n as f64)
}

/// Estimated peak bytes of one realization.
pub fn realization_bytes(config: &ExperimentConfig) -> u64 {
    let spec = &config.circuit;
    let mut reg = spec.register_qubits() as u32;
    if config.observable == Observable::BipartitionProbe && spec.n_aux() == 0 {
        reg += 1;
    }
    let matrix = 16u64 << (2 * reg);
    // Register, one scratch copy, the reduced state and an eigensolver copy.
    let mut bytes = 4 * matrix;
    match config.observable {
        Observable::Krylov => {
            let basis = KrylovBasis::full_basis_bytes(spec.n_system) as u64;
            bytes += if config.krylov.extended_for(spec) {
                2 * basis + 2 * matrix
            } else {
                basis
            };
        }
        Observable::Sre => {
            let q = if config.joint_state { reg } else { spec.n_system as u32 };
            bytes += 8u64 << (2 * q);
        }
        _ => {}
    }
    bytes
}

/// Workers allowed by the width and the memory budget.
fn concurrency(config: &ExperimentConfig) -> Result<usize> {
    let width = config.parallel_width()?;
    let per_run = realization_bytes(config);
    let budget = config.memory_budget_mb.saturating_mul(1 << 20);
    if per_run > budget {
        return Err(Error::ResourceBudget(format!(
            "one realization needs about {} MB, budget is {} MB",
            per_run >> 20,
            config.memory_budget_mb
        )));
    }
    Ok(width.min((budget / per_run) as usize).min(config.realizations).max(1))
}

fn aggregate(
    config: &ExperimentConfig,
    names: &[String],
    runs: &[simulate::RealizationOutput],
) -> Result<Vec<Series>> {
    // Krylov runs may stop at different steps; keep the common prefix.
    let len = runs
        .iter()
        .map(|r| r.values[0].len())
        .min()
        .expect("at least one realization");
    let mut out = Vec::with_capacity(names.len());
    for (s, name) in names.iter().enumerate() {
        let mut records = Vec::with_capacity(len);
        for t in 0..len {
            let mut acc = Fluctuation::new();
            for run in runs {
                acc.push(run.values[s][t]);
            }
            records.push(TimeSeriesRecord {
                t,
                mean: acc.mean(),
                variance: acc.variance(),
                n_realizations: runs.len(),
            });
        }
        out.push(Series {
            name: name.clone(),
            records,
        });
    }
    if config.observable == Observable::Kdesign
        && config.design_averaging == DesignAveraging::PooledMoment
    {
        let d = 1usize << config.part_a()?.len();
        for k in 1..=config.k_max {
            let haar = haar_moment(d, k)?;
            for t in 0..len {
                let pool: Vec<MomentOperator> =
                    runs.iter().map(|r| r.moments[k - 1][t].clone()).collect();
                out[k - 1].records[t].mean =
                    moment_distance(&MomentOperator::average(&pool)?, &haar)?;
            }
        }
    }
    Ok(out)
}

/// Runs every realization and aggregates mean and variance per step.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let start = Instant::now();
    let workers = concurrency(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::ResourceBudget(format!("cannot start worker pool: {e}")))?;
    let runs: Vec<simulate::RealizationOutput> = pool.install(|| {
        (0..config.realizations as u64)
            .into_par_iter()
            .map(|r| simulate::run_realization(config, r))
            .collect::<Result<_>>()
    })?;
    let names = series_names(config);
    let series = aggregate(config, &names, &runs)?;
    let saturation = series
        .iter()
        .map(|s| Ok((s.name.clone(), saturation_value(&s.records, config.tail_fraction)?)))
        .collect::<Result<_>>()?;
    let krylov_dimensions = (config.observable == Observable::Krylov)
        .then(|| runs.iter().map(|r| r.krylov_dimension.unwrap_or(0)).collect());
    let manifest = RunManifest {
        config: config.clone(),
        master_seed: config.master_seed,
        realization_seeds: (0..config.realizations as u64)
            .map(|r| realization_seed(config.master_seed, r))
            .collect(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        tail_fraction: config.tail_fraction,
        saturation,
        krylov_dimensions,
        max_gram_deviation: runs.iter().filter_map(|r| r.gram_deviation).reduce(f64::max),
        max_initial_sre: runs
            .iter()
            .filter_map(|r| r.initial_magic)
            .map(f64::abs)
            .reduce(f64::max),
    };
    Ok(ExperimentOutput { series, manifest })
}

/// Log-negativity time series for the cuts `1:2a`, `2:1a`, `a:12` and the
/// pairwise cuts `1:2`, `1:a`, `2:a`. Qubits `1, 2` are the first gate
/// slot's pair and `a` its auxiliary; for MLORC the pair follows the
/// brickwork and `a` is the current step's auxiliary before discard.
pub fn bipartition_probe(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    if config.observable != Observable::BipartitionProbe {
        let mut c = config.clone();
        c.observable = Observable::BipartitionProbe;
        return run_experiment(&c);
    }
    run_experiment(config)
}
