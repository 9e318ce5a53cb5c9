//! Stabilizer Rényi-2 entropy of the system register for each circuit
//! class, starting from stabilizer-mixture pair states.

use orqc::circuit::CircuitSpec;
use orqc::experiment::{run_experiment, ExperimentConfig, Observable};
use orqc::linalg::DensityMatrix;
use orqc::magic::sre2;

fn main() -> orqc::Result<()> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let t_state = DensityMatrix::from_pure(&[
        orqc::linalg::C64::new(s, 0.0),
        orqc::linalg::C64::from_polar(s, std::f64::consts::FRAC_PI_4),
    ])?;
    println!("T state SRE = {:.6} (log2(4/3) = {:.6})", sre2(&t_state)?.magic, (4.0f64 / 3.0).log2());

    let n = 4;
    for spec in [CircuitSpec::ruc(n), CircuitSpec::mlorc(n, n / 2), CircuitSpec::mforc(n)] {
        let config = ExperimentConfig::new(Observable::Sre, spec.clone(), 50, 2024).with_steps(30);
        let out = run_experiment(&config)?;
        let sre = out.series("sre").expect("sre series");
        let path: Vec<String> = [0, 1, 2, 5, 10, 30].iter().map(|&t| format!("{:.2}", sre[t].mean)).collect();
        println!(
            "{:<5} SRE at t = 0,1,2,5,10,30: {}   initial max |SRE| {:.3}",
            spec.class.name(),
            path.join(" "),
            out.manifest.max_initial_sre.unwrap_or(0.0)
        );
    }
    Ok(())
}
