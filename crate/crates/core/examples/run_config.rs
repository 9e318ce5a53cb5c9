//! Loads a TOML experiment config, runs it, and writes the configured output.
//!
//! `cargo run --release --example run_config -- configs/logneg_ruc_n4.toml`

use std::path::PathBuf;

use orqc::experiment::{emit, run_experiment, ExperimentConfig};

fn main() -> orqc::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/smoke.toml")));
    let config = ExperimentConfig::load(&path)?;
    let out = run_experiment(&config)?;
    println!("{} realizations in {:.2}s", config.realizations, out.manifest.wall_clock_seconds);
    for (name, v) in &out.manifest.saturation {
        println!("  {name}: {v:.5}");
    }
    if let Some(target) = &config.output {
        for p in emit(&out, target)? {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}
