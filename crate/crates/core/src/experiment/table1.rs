//! The saturation grid: log-negativity and SRE for every class and size.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{emit, run_experiment, ExperimentConfig, Observable, OutputConfig, OutputFormat};
use crate::circuit::{CircuitClass, CircuitSpec};
use crate::error::Result;

pub const CLASSES: [CircuitClass; 3] = [CircuitClass::Ruc, CircuitClass::Mlorc, CircuitClass::Mforc];

/// Published saturation values, `(n, class, observable)`.
pub fn reference_value(n_system: usize, class: CircuitClass, observable: Observable) -> Option<f64> {
    let row = match n_system {
        4 => [0.11, 1e-5, 0.07, 2.21, 0.34, 1.76],
        6 => [0.17, 1e-6, 0.13, 3.91, 0.50, 3.17],
        8 => [0.24, 1e-6, 0.18, 5.41, 0.61, 5.28],
        _ => return None,
    };
    let col = match class {
        CircuitClass::Ruc => 0,
        CircuitClass::Mlorc => 1,
        CircuitClass::Mforc => 2,
    };
    match observable {
        Observable::Logneg => Some(row[col]),
        Observable::Sre => Some(row[3 + col]),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Options {
    pub sizes: Vec<usize>,
    pub realizations: usize,
    pub steps: usize,
    pub master_seed: u64,
    pub parallel_width: Option<usize>,
}

impl Default for Table1Options {
    fn default() -> Self {
        Self {
            sizes: vec![4, 6, 8],
            realizations: 100,
            steps: 30,
            master_seed: 2024,
            parallel_width: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Entry {
    pub n_system: usize,
    pub class: CircuitClass,
    pub observable: Observable,
    pub saturation: f64,
    /// Standard-convention log-negativity, recorded alongside.
    pub saturation_standard: Option<f64>,
    pub reference: Option<f64>,
    pub realizations: usize,
}

/// The experiment config of one grid cell.
pub fn cell_config(n_system: usize, class: CircuitClass, observable: Observable, opts: &Table1Options) -> ExperimentConfig {
    let spec = match class {
        CircuitClass::Ruc => CircuitSpec::ruc(n_system),
        CircuitClass::Mlorc => CircuitSpec::mlorc(n_system, n_system / 2),
        CircuitClass::Mforc => CircuitSpec::mforc(n_system),
    };
    let mut c = ExperimentConfig::new(observable, spec, opts.realizations, opts.master_seed)
        .with_steps(opts.steps);
    c.parallel_width = opts.parallel_width;
    c
}

/// Runs the grid, writing each cell under `out_dir/n<N>_<class>_<obs>/` and
/// the summary to `out_dir/table1.csv`. `progress` sees each finished cell.
pub fn run_table1(
    opts: &Table1Options,
    out_dir: &Path,
    mut progress: impl FnMut(&Table1Entry),
) -> Result<Vec<Table1Entry>> {
    let mut entries = Vec::new();
    for &n in &opts.sizes {
        for observable in [Observable::Logneg, Observable::Sre] {
            for class in CLASSES {
                let mut config = cell_config(n, class, observable, opts);
                let name = format!(
                    "n{n}_{}_{}",
                    class.name().to_lowercase(),
                    if observable == Observable::Logneg { "logneg" } else { "sre" }
                );
                config.output = Some(OutputConfig {
                    dir: out_dir.join(name),
                    format: OutputFormat::Csv,
                });
                let out = run_experiment(&config)?;
                emit(&out, config.output.as_ref().expect("set above"))?;
                let sat = &out.manifest.saturation;
                let entry = Table1Entry {
                    n_system: n,
                    class,
                    observable,
                    saturation: sat[&out.series[0].name],
                    saturation_standard: sat.get("logneg_standard").copied(),
                    reference: reference_value(n, class, observable),
                    realizations: opts.realizations,
                };
                progress(&entry);
                entries.push(entry);
            }
        }
    }
    write_table(&entries, &out_dir.join("table1.csv"))?;
    Ok(entries)
}

pub fn write_table(entries: &[Table1Entry], path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    for e in entries {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}
