//! One realization of each circuit class on four system qubits, tracking
//! the purity of the system register.

use orqc::circuit::{Circuit, CircuitSpec, CircuitStreams, FullState};
use orqc::linalg::DensityMatrix;
use orqc::random::haar_pure_state;

fn main() -> orqc::Result<()> {
    let n = 4;
    for spec in [CircuitSpec::ruc(n), CircuitSpec::mlorc(n, 1), CircuitSpec::mlorc(n, 2), CircuitSpec::mforc(n)] {
        let mut streams = CircuitStreams::for_realization(9, 0);
        let system = DensityMatrix::basis(n, 0);
        let mut state = if spec.n_aux() > 0 {
            let aux: Vec<_> = (0..spec.n_aux()).map(|_| haar_pure_state(1, &mut streams.auxiliaries)).collect();
            FullState::with_auxiliaries(system, &aux)
        } else {
            FullState::system(system)
        };
        let label = match spec.class {
            orqc::circuit::CircuitClass::Mlorc => format!("MLORC E={}", spec.exposure()),
            c => c.name().to_string(),
        };
        let mut circuit = Circuit::new(spec, streams)?;
        let mut purities = Vec::new();
        for t in 1..=8 {
            circuit.step(&mut state, t)?;
            purities.push(state.reduced_system_state().purity());
        }
        let shown: Vec<String> = purities.iter().map(|p| format!("{p:.3}")).collect();
        println!("{label:<10} system purity t=1..8: {}", shown.join(" "));
    }
    Ok(())
}
