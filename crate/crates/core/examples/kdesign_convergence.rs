//! Distance of the projected ensemble on two qubits from a Haar k-design.

use orqc::circuit::CircuitSpec;
use orqc::experiment::{run_experiment, ExperimentConfig, Observable};

fn main() -> orqc::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(6);
    for spec in [CircuitSpec::ruc(n), CircuitSpec::mlorc(n, n / 2), CircuitSpec::mforc(n)] {
        let config = ExperimentConfig::new(Observable::Kdesign, spec.clone(), 10, 2024).with_steps(30);
        let out = run_experiment(&config)?;
        let late: Vec<String> = out
            .series
            .iter()
            .map(|s| format!("{} {:.3}", s.name, out.manifest.saturation[&s.name]))
            .collect();
        println!("{:<5} late {}", spec.class.name(), late.join(", "));
    }
    Ok(())
}
