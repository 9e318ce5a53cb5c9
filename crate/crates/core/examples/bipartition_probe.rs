//! Entanglement between the first gate slot's pair and its auxiliary: three
//! one-versus-two cuts and the three pairwise cuts. MFORC is shown on the
//! smallest register, where pair and auxiliary are the whole state.

use orqc::circuit::CircuitSpec;
use orqc::experiment::{bipartition_probe, ExperimentConfig, Observable};

fn main() -> orqc::Result<()> {
    for spec in [CircuitSpec::mlorc(4, 2), CircuitSpec::mforc(2)] {
        let config = ExperimentConfig::new(Observable::BipartitionProbe, spec.clone(), 100, 2024).with_steps(30);
        let out = bipartition_probe(&config)?;
        println!("{} n = {}:", spec.class.name(), spec.n_system);
        for s in &out.series {
            println!("  {:<9} late {:.4}", s.name, out.manifest.saturation[&s.name]);
        }
    }
    Ok(())
}
