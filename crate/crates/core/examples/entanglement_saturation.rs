//! Log-negativity and mutual information versus time for the three circuit
//! classes, averaged over realizations.
//!
//! `cargo run --release --example entanglement_saturation -- [n] [realizations]`

use orqc::circuit::CircuitSpec;
use orqc::experiment::{run_experiment, ExperimentConfig, Observable};

fn main() -> orqc::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n = args.first().copied().unwrap_or(4);
    let realizations = args.get(1).copied().unwrap_or(100);
    for spec in [CircuitSpec::ruc(n), CircuitSpec::mlorc(n, n / 2), CircuitSpec::mforc(n)] {
        let name = spec.class.name();
        for observable in [Observable::Logneg, Observable::MutualInfo] {
            let config = ExperimentConfig::new(observable, spec.clone(), realizations, 2024).with_steps(30);
            let out = run_experiment(&config)?;
            let series = &out.series[0];
            let sat = out.manifest.saturation[&series.name];
            let last = series.records.last().expect("non-empty");
            println!(
                "{name:<5} {:<10} saturation {sat:.4}  final variance {:.2e}",
                series.name, last.variance
            );
        }
    }
    Ok(())
}
