use std::fs;
use std::path::{Path, PathBuf};

use super::{ExperimentOutput, OutputConfig, OutputFormat, TimeSeriesRecord};
use crate::error::Result;

/// Writes `records` as `t,mean,variance,n_realizations` with LF endings.
pub fn write_csv(path: &Path, records: &[TimeSeriesRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<TimeSeriesRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let records = r.deserialize().collect::<std::result::Result<_, _>>()?;
    Ok(records)
}

pub fn read_json(path: &Path) -> Result<ExperimentOutput> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// CSV: one `<series>.csv` per series plus `manifest.json`.
/// JSON: a single `results.json` holding the series and the manifest.
pub fn emit(output: &ExperimentOutput, target: &OutputConfig) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&target.dir)?;
    let mut written = Vec::new();
    match target.format {
        OutputFormat::Csv => {
            for s in &output.series {
                let path = target.dir.join(format!("{}.csv", s.name));
                write_csv(&path, &s.records)?;
                written.push(path);
            }
            let path = target.dir.join("manifest.json");
            fs::write(&path, serde_json::to_string_pretty(&output.manifest)? + "\n")?;
            written.push(path);
        }
        OutputFormat::Json => {
            let path = target.dir.join("results.json");
            fs::write(&path, serde_json::to_string_pretty(output)? + "\n")?;
            written.push(path);
        }
    }
    Ok(written)
}
