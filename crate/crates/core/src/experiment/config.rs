use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitClass, CircuitSpec};
use crate::ensemble::{DesignAveraging, MOMENT_DIM_CAP};
use crate::entanglement::NegativityConvention;
use crate::error::{Error, Result};
use crate::krylov::KrylovConfig;
use crate::linalg::QubitSubset;
use crate::magic::PAULI_QUBIT_CAP;
use crate::random::MixtureWeights;

/// Environment variable overriding the configured parallel width.
pub const PARALLEL_WIDTH_ENV: &str = "ORQC_PARALLEL_WIDTH";

/// Step count used when `steps` is omitted (all observables except Krylov).
pub const DEFAULT_STEPS: usize = 30;

pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;

pub const DEFAULT_MEMORY_BUDGET_MB: u64 = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Logneg,
    MutualInfo,
    Sre,
    Krylov,
    Kdesign,
    BipartitionProbe,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory receiving the series and the manifest.
    pub dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

/// One experiment, as read from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub observable: Observable,
    pub circuit: CircuitSpec,
    /// Circuit steps after `t = 0`. Defaults to 30; for Krylov runs the
    /// default is the `krylov` section's `max_steps` with its stall window.
    #[serde(default)]
    pub steps: Option<usize>,
    pub realizations: usize,
    pub master_seed: u64,
    /// Part `A` of the bipartition (logneg, mutual_info) or the measured-out
    /// complement's partner (kdesign). 0-based system qubits.
    #[serde(default)]
    pub part_a: Option<Vec<usize>>,
    #[serde(default)]
    pub negativity_convention: NegativityConvention,
    /// Evaluate SRE on the whole register (system plus MFORC auxiliaries).
    #[serde(default)]
    pub joint_state: bool,
    /// Weights of the Clifford-rotated basis mixtures that seed SRE runs.
    #[serde(default)]
    pub initial_weights: MixtureWeights,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub design_averaging: DesignAveraging,
    #[serde(default)]
    pub krylov: KrylovConfig,
    #[serde(default = "default_tail_fraction")]
    pub tail_fraction: f64,
    #[serde(default)]
    pub parallel_width: Option<usize>,
    #[serde(default = "default_memory_budget")]
    pub memory_budget_mb: u64,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

fn default_k_max() -> usize {
    3
}

fn default_tail_fraction() -> f64 {
    DEFAULT_TAIL_FRACTION
}

fn default_memory_budget() -> u64 {
    DEFAULT_MEMORY_BUDGET_MB
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn new(observable: Observable, circuit: CircuitSpec, realizations: usize, master_seed: u64) -> Self {
        Self {
            observable,
            circuit,
            steps: None,
            realizations,
            master_seed,
            part_a: None,
            negativity_convention: NegativityConvention::default(),
            joint_state: false,
            initial_weights: MixtureWeights::default(),
            k_max: default_k_max(),
            design_averaging: DesignAveraging::default(),
            krylov: KrylovConfig::default(),
            tail_fraction: DEFAULT_TAIL_FRACTION,
            parallel_width: None,
            memory_budget_mb: DEFAULT_MEMORY_BUDGET_MB,
            output: None,
        }
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = Some(steps);
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Steps for a fixed-length run; `None` for a stall-driven Krylov run.
    pub fn fixed_steps(&self) -> Option<usize> {
        match (self.observable, self.steps) {
            (Observable::Krylov, s) => s,
            (_, s) => Some(s.unwrap_or(DEFAULT_STEPS)),
        }
    }

    /// Part `A`: configured, or the largest whole-pair prefix that is at most
    /// half the system (2:2 at n = 4, 2:4 at n = 6, 4:4 at n = 8).
    pub fn part_a(&self) -> Result<QubitSubset> {
        let n = self.circuit.n_system;
        match &self.part_a {
            Some(a) => {
                let s = QubitSubset::new(a.clone()).map_err(|e| Error::Config(e.to_string()))?;
                s.check_within(n).map_err(|e| Error::Config(e.to_string()))?;
                if s.is_empty() || s.len() >= n {
                    return Err(Error::Config(format!(
                        "part_a must be a proper non-empty subset of the {n} system qubits"
                    )));
                }
                Ok(s)
            }
            None if self.observable == Observable::Kdesign => Ok(QubitSubset::range(0..2.min(n - 1))),
            None if n == 2 => Ok(QubitSubset::range(0..1)),
            None => Ok(QubitSubset::range(0..2 * (n / 4).max(1))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.circuit.validate()?;
        let cfg = |msg: String| Err(Error::Config(msg));
        if self.realizations == 0 {
            return cfg("realizations must be at least 1".into());
        }
        if self.steps == Some(0) {
            return cfg("steps must be at least 1".into());
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return cfg(format!("tail_fraction {} outside (0, 1]", self.tail_fraction));
        }
        if self.parallel_width == Some(0) {
            return cfg("parallel_width must be positive".into());
        }
        if self.memory_budget_mb == 0 {
            return cfg("memory_budget_mb must be positive".into());
        }
        let n = self.circuit.n_system;
        match self.observable {
            Observable::Logneg | Observable::MutualInfo => {
                if n < 2 {
                    return cfg("a bipartition needs at least two qubits".into());
                }
                self.part_a()?;
            }
            Observable::Sre => {
                let reg = if self.joint_state {
                    self.circuit.register_qubits()
                } else {
                    n
                };
                if reg > PAULI_QUBIT_CAP {
                    return cfg(format!("SRE on {reg} qubits exceeds the {PAULI_QUBIT_CAP}-qubit cap"));
                }
            }
            Observable::Krylov => {
                self.krylov.validate().map_err(|e| Error::Config(e.to_string()))?;
                if self.steps.is_none() && self.krylov.max_steps == 0 {
                    return cfg("Krylov run has no step budget".into());
                }
            }
            Observable::Kdesign => {
                let a = self.part_a()?;
                if self.k_max == 0 {
                    return cfg("k_max must be at least 1".into());
                }
                let d = 1usize << a.len();
                let fits = (0..self.k_max)
                    .try_fold(1usize, |acc, _| acc.checked_mul(d))
                    .is_some_and(|s| s <= MOMENT_DIM_CAP);
                if !fits {
                    return cfg(format!(
                        "d^k = {d}^{} exceeds the moment cap {MOMENT_DIM_CAP}",
                        self.k_max
                    ));
                }
            }
            Observable::BipartitionProbe => match self.circuit.class {
                CircuitClass::Ruc => {
                    return cfg("the bipartition probe needs an auxiliary (mlorc or mforc)".into())
                }
                CircuitClass::Mlorc if self.circuit.exposure() == 0 => {
                    return cfg("the bipartition probe needs exposure E >= 1".into())
                }
                _ => {}
            },
        }
        if self.observable != Observable::Krylov && self.circuit.same_unitary {
            return cfg("same_unitary only applies to krylov runs".into());
        }
        Ok(())
    }

    /// Worker count: the environment override, then the config, then the
    /// machine's available parallelism.
    pub fn parallel_width(&self) -> Result<usize> {
        if let Ok(v) = std::env::var(PARALLEL_WIDTH_ENV) {
            return match v.trim().parse::<usize>() {
                Ok(w) if w > 0 => Ok(w),
                _ => Err(Error::Config(format!("{PARALLEL_WIDTH_ENV}={v:?} is not a positive integer"))),
            };
        }
        Ok(self.parallel_width.unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }))
    }
}
