//! Property tests for the structural invariants of states, gates and metrics.

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use orqc::circuit::{Circuit, CircuitClass, CircuitSpec, CircuitStreams, FullState};
use orqc::ensemble::{build_projected_ensemble, design_distance};
use orqc::entanglement::{log_negativity, mutual_information, Bipartition};
use orqc::linalg::{apply_gate, hermitian_eigenvalues, partial_trace, ComplexMatrix, DensityMatrix, QubitSubset};
use orqc::magic::{pauli_spectrum, sre2};
use orqc::random::{haar_pure_state, haar_unitary, hs_random_density, SeedHierarchy, StreamLabel, StreamRng};

fn rng(seed: u64) -> StreamRng {
    SeedHierarchy::new(seed, 0, StreamLabel::Gates).rng()
}

fn random_state(n: usize, pure: bool, seed: u64) -> DensityMatrix {
    let mut r = rng(seed);
    if pure {
        haar_pure_state(n, &mut r)
    } else {
        hs_random_density(n, &mut r)
    }
}

/// Distinct targets drawn from `0..n`, in the drawn order.
fn targets(n: usize, k: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(move |v| v[..k].to_vec())
}

fn cliffords() -> [(ComplexMatrix, usize); 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = ComplexMatrix::from_real(2, 2, &[s, s, s, -s]).unwrap();
    let phase = ComplexMatrix::diagonal(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
    let cnot = ComplexMatrix::from_real(
        4,
        4,
        &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.],
    )
    .unwrap();
    [(h, 1), (phase, 1), (cnot, 2)]
}

fn sorted_eigs(m: &ComplexMatrix) -> Vec<f64> {
    let mut e = hermitian_eigenvalues(m).unwrap();
    e.sort_by(f64::total_cmp);
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gates_preserve_trace_hermiticity_and_spectrum(
        seed in any::<u64>(),
        (n, t) in (3usize..=5).prop_flat_map(|n| (Just(n), targets(n, 2))),
    ) {
        let rho = random_state(n, false, seed);
        let u = haar_unitary(4, &mut rng(seed ^ 1)).unwrap();
        let out = apply_gate(&rho, &u, &QubitSubset::new(t).unwrap()).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
        prop_assert!(out.matrix().hermiticity_deviation() < 1e-12);
        let (a, b) = (sorted_eigs(rho.matrix()), sorted_eigs(out.matrix()));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn sre_is_clifford_invariant(
        seed in any::<u64>(),
        pure in any::<bool>(),
        which in 0usize..3,
        t in targets(3, 2),
    ) {
        let rho = random_state(3, pure, seed);
        let (u, k) = &cliffords()[which];
        let out = apply_gate(&rho, u, &QubitSubset::new(&t[..*k]).unwrap()).unwrap();
        let (before, after) = (sre2(&rho).unwrap().magic, sre2(&out).unwrap().magic);
        prop_assert!((before - after).abs() < 1e-8, "{before} vs {after}");
    }

    #[test]
    fn sre_is_additive_and_nonnegative_on_pure_states(seed in any::<u64>(), na in 1usize..=2, nb in 1usize..=2) {
        let a = random_state(na, true, seed);
        let b = random_state(nb, true, seed.wrapping_add(1));
        let (ma, mb) = (sre2(&a).unwrap().magic, sre2(&b).unwrap().magic);
        let joint = sre2(&a.kron(&b)).unwrap().magic;
        prop_assert!((joint - ma - mb).abs() < 1e-9);
        prop_assert!(ma > -1e-12 && mb > -1e-12);
    }

    #[test]
    fn pauli_spectrum_satisfies_parseval(seed in any::<u64>(), n in 1usize..=4) {
        let rho = random_state(n, false, seed);
        let spec = pauli_spectrum(&rho).unwrap();
        let d = (1usize << n) as f64;
        prop_assert!((spec.sum_of_squares() - d * rho.purity()).abs() < 1e-10);
        prop_assert!((spec.coefficients()[0] - 1.0).abs() < 1e-12);
        prop_assert!(spec.coefficients().iter().all(|x| x.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn log_negativity_ignores_local_unitaries(seed in any::<u64>(), local in 0usize..4) {
        let rho = random_state(4, false, seed);
        let bip = Bipartition::split_at(2, 4).unwrap();
        let u = haar_unitary(2, &mut rng(seed ^ 7)).unwrap();
        let out = apply_gate(&rho, &u, &QubitSubset::new([local]).unwrap()).unwrap();
        let (a, b) = (log_negativity(&rho, &bip).unwrap(), log_negativity(&out, &bip).unwrap());
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn product_states_carry_no_correlations(seed in any::<u64>()) {
        let a = random_state(2, false, seed);
        let b = random_state(2, false, seed.wrapping_add(3));
        let bip = Bipartition::split_at(2, 4).unwrap();
        let rho = a.kron(&b);
        prop_assert!(log_negativity(&rho, &bip).unwrap() < 1e-10);
        prop_assert!(mutual_information(&rho, &bip).unwrap().abs() < 1e-9);
    }

    #[test]
    fn partial_traces_compose(seed in any::<u64>()) {
        let rho = random_state(4, false, seed);
        let once = partial_trace(&rho, &QubitSubset::new([1, 3]).unwrap()).unwrap();
        let step = partial_trace(&rho, &QubitSubset::new([0, 1, 3]).unwrap()).unwrap();
        let twice = partial_trace(&step, &QubitSubset::new([1, 2]).unwrap()).unwrap();
        prop_assert!(once.matrix().max_abs_diff(twice.matrix()) < 1e-13);
    }

    #[test]
    fn circuit_steps_keep_the_system_a_state(
        seed in 0u64..1000,
        class in prop_oneof![Just(CircuitClass::Ruc), Just(CircuitClass::Mlorc), Just(CircuitClass::Mforc)],
    ) {
        let spec = CircuitSpec::new(class, 4);
        let mut streams = CircuitStreams::for_realization(seed, 0);
        let aux: Vec<_> = (0..spec.n_aux()).map(|_| haar_pure_state(1, &mut streams.auxiliaries)).collect();
        let mut state = FullState::with_auxiliaries(random_state(4, false, seed), &aux);
        let mut circuit = Circuit::new(spec, streams).unwrap();
        for t in 1..=4 {
            circuit.step(&mut state, t).unwrap();
            let rho = state.reduced_system_state();
            prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
            prop_assert!(rho.matrix().hermiticity_deviation() < 1e-12);
            prop_assert!(rho.eigenvalues().iter().all(|&l| l > -1e-12));
        }
    }

    #[test]
    fn projected_ensembles_are_normalized_and_bounded(seed in any::<u64>(), pure in any::<bool>()) {
        let rho = random_state(4, pure, seed);
        let ens = build_projected_ensemble(&rho, &QubitSubset::range(0..2)).unwrap();
        prop_assert!((ens.total_probability() - 1.0).abs() < 1e-12);
        for k in 1..=3 {
            let d = design_distance(&ens, k).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
        }
    }
}
