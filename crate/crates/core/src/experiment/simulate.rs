//! One realization of an experiment.

use crate::circuit::{layer_plan, Circuit, CircuitClass, CircuitStreams, FullState};
use crate::ensemble::{
    build_projected_ensemble, haar_moment, kth_moment, moment_distance, DesignAveraging,
    MomentOperator,
};
use crate::entanglement::{mutual_information, negativity, Bipartition, NegativityConvention};
use crate::error::{Error, Result};
use crate::krylov::krylov_run;
use crate::linalg::{partial_trace, DensityMatrix, QubitSubset};
use crate::magic::sre2;
use crate::random::{clifford_pair_state, MixtureWeights, haar_pure_state, hs_random_density, SeedHierarchy, StreamLabel};

use super::config::{ExperimentConfig, Observable};

/// Trace drift that counts as a numerical invariant violation.
pub const TRACE_DRIFT_TOL: f64 = 1e-8;

/// Largest `|SRE|` accepted for a stabilizer initial state.
pub const INITIAL_SRE_TOL: f64 = 1e-8;

pub(crate) struct RealizationOutput {
    /// `values[s][t]` for series `s`.
    pub values: Vec<Vec<f64>>,
    /// `moments[k - 1][t]`, filled only for pooled design averaging.
    pub moments: Vec<Vec<MomentOperator>>,
    pub krylov_dimension: Option<usize>,
    pub gram_deviation: Option<f64>,
    /// SRE of the initial state (SRE runs only).
    pub initial_magic: Option<f64>,
}

const PROBE_SERIES: [&str; 6] = ["cut_1_2a", "cut_2_1a", "cut_a_12", "pair_1_2", "pair_1_a", "pair_2_a"];

/// Names of the series an experiment produces, primary first.
pub fn series_names(config: &ExperimentConfig) -> Vec<String> {
    match config.observable {
        Observable::Logneg => match config.negativity_convention {
            NegativityConvention::PlusOne => vec!["logneg".into(), "logneg_standard".into()],
            NegativityConvention::Standard => vec!["logneg".into(), "logneg_plus_one".into()],
        },
        Observable::MutualInfo => vec!["mutual_info".into()],
        Observable::Sre => vec!["sre".into(), "m_tilde".into(), "s2".into()],
        Observable::Krylov => vec!["complexity".into(), "basis_size".into()],
        Observable::Kdesign => (1..=config.k_max).map(|k| format!("delta_k{k}")).collect(),
        Observable::BipartitionProbe => PROBE_SERIES.iter().map(|s| s.to_string()).collect(),
    }
}

/// Product of per-pair initial states: Clifford-rotated basis states (or
/// mixtures, per `initial_weights`) for SRE runs, Hilbert–Schmidt random pairs otherwise.
pub fn initial_system_state(config: &ExperimentConfig, realization: u64) -> DensityMatrix {
    let mut rng = SeedHierarchy::new(config.master_seed, realization, StreamLabel::InitialState).rng();
    let pair = |rng: &mut _| match config.observable {
        Observable::Sre => clifford_pair_state(rng, config.initial_weights),
        _ => hs_random_density(2, rng),
    };
    let mut rho = pair(&mut rng);
    for _ in 1..config.circuit.n_pairs() {
        rho = rho.kron(&pair(&mut rng));
    }
    rho
}

fn check_trace(rho: &DensityMatrix, t: usize) -> Result<()> {
    let drift = (rho.trace() - 1.0).abs();
    if drift.is_nan() || drift > TRACE_DRIFT_TOL {
        return Err(Error::Invariant(format!("trace drifted by {drift:e} at t = {t}")));
    }
    Ok(())
}

/// Evolves one realization, calling `observe(t, state)` for `t = 0..=steps`.
/// Bipartition-probe MLORC runs carry one retained auxiliary.
fn evolve(
    config: &ExperimentConfig,
    realization: u64,
    steps: usize,
    mut observe: impl FnMut(usize, &FullState) -> Result<()>,
) -> Result<()> {
    let spec = &config.circuit;
    let mut streams = CircuitStreams::for_realization(config.master_seed, realization);
    let system = initial_system_state(config, realization);
    let retaining = config.observable == Observable::BipartitionProbe && spec.class == CircuitClass::Mlorc;
    let mut state = match spec.class {
        CircuitClass::Mforc => {
            let aux: Vec<DensityMatrix> = (0..spec.n_aux())
                .map(|_| haar_pure_state(1, &mut streams.auxiliaries))
                .collect();
            FullState::with_auxiliaries(system, &aux)
        }
        // Placeholder; replaced by the first fresh auxiliary before it is read.
        _ if retaining => FullState::with_auxiliaries(system, &[DensityMatrix::basis(1, 0)]),
        _ => FullState::system(system),
    };
    let mut circuit = Circuit::new(spec.clone(), streams)?;
    observe(0, &state)?;
    for t in 1..=steps {
        if retaining {
            circuit.mlorc_step_retaining(&mut state, t)?;
        } else {
            circuit.step(&mut state, t)?;
        }
        observe(t, &state)?;
    }
    Ok(())
}

pub(crate) fn run_realization(config: &ExperimentConfig, realization: u64) -> Result<RealizationOutput> {
    let names = series_names(config);
    let mut values = vec![Vec::new(); names.len()];
    let mut moments = Vec::new();
    let mut krylov_dimension = None;
    let mut gram_deviation = None;
    let mut initial_magic = None;
    match config.observable {
        Observable::Logneg => {
            let bip = Bipartition::from_part_a(config.part_a()?, config.circuit.n_system)?;
            let plus_one_first = config.negativity_convention == NegativityConvention::PlusOne;
            evolve(config, realization, steps(config), |t, state| {
                let rho = state.reduced_system_state();
                check_trace(&rho, t)?;
                let n = negativity(&rho, &bip)?;
                let (plus_one, standard) = (
                    log_neg(n, NegativityConvention::PlusOne),
                    log_neg(n, NegativityConvention::Standard),
                );
                let (a, b) = if plus_one_first { (plus_one, standard) } else { (standard, plus_one) };
                values[0].push(a);
                values[1].push(b);
                Ok(())
            })?;
        }
        Observable::MutualInfo => {
            let bip = Bipartition::from_part_a(config.part_a()?, config.circuit.n_system)?;
            evolve(config, realization, steps(config), |t, state| {
                let rho = state.reduced_system_state();
                check_trace(&rho, t)?;
                values[0].push(mutual_information(&rho, &bip)?);
                Ok(())
            })?;
        }
        Observable::Sre => {
            evolve(config, realization, steps(config), |t, state| {
                let rho = if config.joint_state {
                    state.density()
                } else {
                    state.reduced_system_state()
                };
                check_trace(&rho, t)?;
                let v = sre2(&rho)?;
                if t == 0 {
                    initial_magic = Some(v.magic);
                    // Pure stabilizer inputs must start magic-free; mixtures
                    // and joint states with Haar auxiliaries need not.
                    let asserted = config.initial_weights == MixtureWeights::Vertex && !config.joint_state;
                    if asserted && v.magic.abs() > INITIAL_SRE_TOL {
                        return Err(Error::Invariant(format!(
                            "initial SRE {:.3e} of realization {realization} is not zero",
                            v.magic
                        )));
                    }
                }
                values[0].push(v.magic);
                values[1].push(v.m_tilde);
                values[2].push(v.s2);
                Ok(())
            })?;
        }
        Observable::Kdesign => {
            let part_a = config.part_a()?;
            let d = 1usize << part_a.len();
            let haar: Vec<MomentOperator> =
                (1..=config.k_max).map(|k| haar_moment(d, k)).collect::<Result<_>>()?;
            let pooled = config.design_averaging == DesignAveraging::PooledMoment;
            if pooled {
                moments = vec![Vec::new(); config.k_max];
            }
            evolve(config, realization, steps(config), |t, state| {
                let rho = state.reduced_system_state();
                check_trace(&rho, t)?;
                let ens = build_projected_ensemble(&rho, &part_a)?;
                for (k, h) in haar.iter().enumerate() {
                    let m = kth_moment(&ens, k + 1)?;
                    values[k].push(moment_distance(&m, h)?);
                    if pooled {
                        moments[k].push(m);
                    }
                }
                Ok(())
            })?;
        }
        Observable::BipartitionProbe => {
            let spec = &config.circuit;
            let n = spec.n_system;
            // MLORC probes the first slot's current pair with its fresh
            // auxiliary; MFORC the pair (0, 1) with its persistent one.
            let keep_at = |t: usize| -> Result<QubitSubset> {
                let (p, q) = if spec.class == CircuitClass::Mlorc && t > 0 {
                    layer_plan(spec, t)?.slots[0].pair
                } else {
                    (0, 1)
                };
                QubitSubset::new([p, q, n])
            };
            let cuts: Vec<Bipartition> = (0..3)
                .map(|q| Bipartition::from_part_a(QubitSubset::new([q])?, 3))
                .collect::<Result<_>>()?;
            let pairs = [[0, 1], [0, 2], [1, 2]];
            let pair_cut = Bipartition::split_at(1, 2)?;
            let conv = config.negativity_convention;
            evolve(config, realization, steps(config), |t, state| {
                let three = partial_trace(&state.density(), &keep_at(t)?)?;
                check_trace(&three, t)?;
                for (s, bip) in cuts.iter().enumerate() {
                    values[s].push(log_neg(negativity(&three, bip)?, conv));
                }
                for (s, p) in pairs.iter().enumerate() {
                    let two = partial_trace(&three, &QubitSubset::new(*p)?)?;
                    values[3 + s].push(log_neg(negativity(&two, &pair_cut)?, conv));
                }
                Ok(())
            })?;
        }
        Observable::Krylov => {
            let mut kcfg = config.krylov.clone();
            if let Some(s) = config.steps {
                kcfg.max_steps = s;
                kcfg.stall_window = None;
            }
            let rho = initial_system_state(config, realization);
            let streams = CircuitStreams::for_realization(config.master_seed, realization);
            let res = krylov_run(&config.circuit, &rho, &kcfg, streams)?;
            values[0] = res.complexity.clone();
            values[1] = res.basis_sizes.iter().map(|&k| k as f64).collect();
            krylov_dimension = Some(res.dimension);
            gram_deviation = Some(res.gram_deviation);
        }
    }
    Ok(RealizationOutput {
        values,
        moments,
        krylov_dimension,
        gram_deviation,
        initial_magic,
    })
}

fn log_neg(n: f64, conv: NegativityConvention) -> f64 {
    match conv {
        NegativityConvention::PlusOne => (n + 1.0).log2(),
        NegativityConvention::Standard => (2.0 * n + 1.0).log2(),
    }
}

fn steps(config: &ExperimentConfig) -> usize {
    config.fixed_steps().unwrap_or(super::config::DEFAULT_STEPS)
}
