//! Krylov dimension and complexity of the evolving density matrix.
//!
//! `cargo run --release --example krylov_complexity -- [n] [same]`

use orqc::circuit::{CircuitSpec, CircuitStreams};
use orqc::experiment::{initial_system_state, ExperimentConfig, Observable};
use orqc::krylov::{krylov_run, KrylovConfig};

fn main() -> orqc::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().and_then(|a| a.parse().ok()).unwrap_or(4);
    let same = args.iter().any(|a| a == "same");
    let d2 = 1usize << (2 * n);
    println!("bound D^2 - 1 = {}", d2 - 1);
    for spec in [CircuitSpec::ruc(n), CircuitSpec::mlorc(n, n / 2), CircuitSpec::mforc(n)] {
        let spec = spec.with_same_unitary(same);
        let config = ExperimentConfig::new(Observable::Krylov, spec.clone(), 1, 7);
        let rho = initial_system_state(&config, 0);
        let res = krylov_run(&spec, &rho, &KrylovConfig::default(), CircuitStreams::for_realization(7, 0))?;
        let tail = &res.complexity[res.complexity.len().saturating_sub(32)..];
        let late = tail.iter().sum::<f64>() / tail.len() as f64;
        println!(
            "{:<5} K = {:<5} steps = {:<5} late C_K = {late:.2} (half of K-1: {:.1})",
            spec.class.name(),
            res.dimension,
            res.steps(),
            (res.dimension as f64 - 1.0) / 2.0
        );
    }
    Ok(())
}
