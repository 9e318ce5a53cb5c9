//! Brickwork scheduling and the three circuit dynamics.
//!
//! * RUC: Haar `U(4)` on every pair of the layer.
//! * MLORC: the first `E` slots of a layer couple their pair to a fresh Haar
//!   pure auxiliary through a Haar `U(8)`; the auxiliary is discarded at
//!   once. Remaining slots get Haar `U(4)` gates.
//! * MFORC: one persistent auxiliary per odd pair. Odd layers couple each pair
//!   to its own auxiliary; even layers pick the left or right neighbour's
//!   auxiliary with a coin toss.
//!
//! Qubits are 0-based here: odd steps act on `(0,1), (2,3), ...`, even steps
//! on `(1,2), (3,4), ..., (n-1, 0)`.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    partial_trace_operator, sandwich_hermitian_in_place, sandwich_hermitian_layer, ComplexMatrix,
    DensityMatrix, QubitSubset, C64,
};
use crate::random::{
    coin_toss, haar_qubit, haar_unitary, Coin, SeedHierarchy, StreamLabel, StreamRng,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitClass {
    Ruc,
    Mlorc,
    Mforc,
}

impl CircuitClass {
    pub fn name(self) -> &'static str {
        match self {
            CircuitClass::Ruc => "RUC",
            CircuitClass::Mlorc => "MLORC",
            CircuitClass::Mforc => "MFORC",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
}

/// Which MLORC slots are exposed when `E < n/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExposureSelection {
    /// The first `E` slots of every layer.
    #[default]
    FixedPrefix,
    /// A uniformly random `E`-subset of slots, redrawn each step.
    RandomPerStep,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub class: CircuitClass,
    pub n_system: usize,
    /// MLORC exposure `E`; defaults to `n_system / 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exposure: Option<usize>,
    #[serde(default)]
    pub exposure_selection: ExposureSelection,
    #[serde(default)]
    pub boundary: Boundary,
    /// Reuse the gates drawn at `t = 1` and `t = 2` on every later step of
    /// the same parity.
    #[serde(default)]
    pub same_unitary: bool,
}

impl CircuitSpec {
    pub fn new(class: CircuitClass, n_system: usize) -> Self {
        Self {
            class,
            n_system,
            exposure: None,
            exposure_selection: ExposureSelection::FixedPrefix,
            boundary: Boundary::Periodic,
            same_unitary: false,
        }
    }

    pub fn ruc(n_system: usize) -> Self {
        Self::new(CircuitClass::Ruc, n_system)
    }

    pub fn mlorc(n_system: usize, exposure: usize) -> Self {
        Self {
            exposure: Some(exposure),
            ..Self::new(CircuitClass::Mlorc, n_system)
        }
    }

    pub fn mforc(n_system: usize) -> Self {
        Self::new(CircuitClass::Mforc, n_system)
    }

    pub fn with_same_unitary(mut self, on: bool) -> Self {
        self.same_unitary = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_system == 0 || !self.n_system.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "n_system must be even and positive, got {}",
                self.n_system
            )));
        }
        match (self.class, self.exposure) {
            (CircuitClass::Mlorc, Some(e)) if e > self.n_system / 2 => Err(Error::Config(format!(
                "exposure {e} out of range 0..={}",
                self.n_system / 2
            ))),
            (CircuitClass::Ruc | CircuitClass::Mforc, Some(_)) => Err(Error::Config(
                "exposure only applies to the mlorc class".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn n_pairs(&self) -> usize {
        self.n_system / 2
    }

    pub fn exposure(&self) -> usize {
        match self.class {
            CircuitClass::Mlorc => self.exposure.unwrap_or(self.n_system / 2),
            _ => 0,
        }
    }

    /// Persistent auxiliaries carried in the register.
    pub fn n_aux(&self) -> usize {
        match self.class {
            CircuitClass::Mforc => self.n_system / 2,
            _ => 0,
        }
    }

    pub fn register_qubits(&self) -> usize {
        self.n_system + self.n_aux()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(t: usize) -> Self {
        if t % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    fn index(self) -> usize {
        match self {
            Parity::Odd => 0,
            Parity::Even => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuxDirective {
    None,
    Fresh,
    /// The pair's own persistent auxiliary (odd MFORC layers).
    Persistent(usize),
    /// Coin toss between the left and right neighbouring auxiliaries.
    PersistentCoin {
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GateSlot {
    pub pair: (usize, usize),
    pub aux: AuxDirective,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerPlan {
    pub parity: Parity,
    pub slots: Vec<GateSlot>,
}

impl LayerPlan {
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.slots.iter().map(|s| s.pair).collect()
    }
}

/// Gate slots of step `t ≥ 1`.
pub fn layer_plan(spec: &CircuitSpec, t: usize) -> Result<LayerPlan> {
    spec.validate()?;
    if t == 0 {
        return Err(Error::InvalidArgument("steps are numbered from 1".into()));
    }
    let n = spec.n_system;
    let half = n / 2;
    let parity = Parity::of(t);
    let exposure = spec.exposure();
    let slots = (0..half)
        .map(|i| {
            let pair = match parity {
                Parity::Odd => (2 * i, 2 * i + 1),
                Parity::Even => (2 * i + 1, (2 * i + 2) % n),
            };
            let aux = match (spec.class, parity) {
                (CircuitClass::Ruc, _) => AuxDirective::None,
                (CircuitClass::Mlorc, _) if i < exposure => AuxDirective::Fresh,
                (CircuitClass::Mlorc, _) => AuxDirective::None,
                (CircuitClass::Mforc, Parity::Odd) => AuxDirective::Persistent(i),
                (CircuitClass::Mforc, Parity::Even) => AuxDirective::PersistentCoin {
                    left: i,
                    right: (i + 1) % half,
                },
            };
            GateSlot { pair, aux }
        })
        .collect();
    Ok(LayerPlan { parity, slots })
}

/// Register operator with its qubit layout: system qubit `i` sits at register
/// index `i`, auxiliary `j` at `n_system + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullState {
    register: ComplexMatrix,
    n_system: usize,
    n_aux: usize,
}

impl FullState {
    pub fn system(rho: DensityMatrix) -> Self {
        let n_system = rho.n_qubits();
        Self {
            register: rho.into_matrix(),
            n_system,
            n_aux: 0,
        }
    }

    pub fn with_auxiliaries(system: DensityMatrix, aux: &[DensityMatrix]) -> Self {
        let n_system = system.n_qubits();
        let mut register = system.into_matrix();
        let mut n_aux = 0;
        for a in aux {
            register = register.kron(a.matrix());
            n_aux += a.n_qubits();
        }
        Self {
            register,
            n_system,
            n_aux,
        }
    }

    /// Wraps an arbitrary square operator on `n_system + n_aux` qubits.
    pub fn from_operator(register: ComplexMatrix, n_system: usize, n_aux: usize) -> Result<Self> {
        if !register.is_square() || register.rows() != 1 << (n_system + n_aux) {
            return Err(Error::DimensionMismatch(format!(
                "register operator {}x{} does not match {} qubits",
                register.rows(),
                register.cols(),
                n_system + n_aux
            )));
        }
        Ok(Self {
            register,
            n_system,
            n_aux,
        })
    }

    pub fn n_system(&self) -> usize {
        self.n_system
    }

    pub fn n_aux(&self) -> usize {
        self.n_aux
    }

    pub fn n_register(&self) -> usize {
        self.n_system + self.n_aux
    }

    pub fn aux_qubit(&self, j: usize) -> usize {
        self.n_system + j
    }

    pub fn register(&self) -> &ComplexMatrix {
        &self.register
    }

    pub fn register_mut(&mut self) -> &mut ComplexMatrix {
        &mut self.register
    }

    pub fn into_register(self) -> ComplexMatrix {
        self.register
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(self.register.clone())
    }

    pub fn reduced_system_operator(&self) -> ComplexMatrix {
        if self.n_aux == 0 {
            return self.register.clone();
        }
        partial_trace_operator(&self.register, &QubitSubset::range(0..self.n_system))
            .expect("system qubits are in range")
    }

    /// Marginal on the system qubits, in order `0..n_system`.
    pub fn reduced_system_state(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(self.reduced_system_operator())
    }
}

/// The per-realization random streams a circuit consumes.
pub struct CircuitStreams {
    pub gates: StreamRng,
    pub auxiliaries: StreamRng,
    pub coin: StreamRng,
}

impl CircuitStreams {
    pub fn for_realization(master_seed: u64, realization: u64) -> Self {
        let seed = SeedHierarchy::new(master_seed, realization, StreamLabel::Gates);
        Self {
            gates: seed.rng(),
            auxiliaries: seed.with_label(StreamLabel::Auxiliaries).rng(),
            coin: seed.with_label(StreamLabel::Coin).rng(),
        }
    }
}

/// Random content of one gate slot.
#[derive(Clone, Debug)]
pub struct SlotDraw {
    pub pair: (usize, usize),
    /// `U(4)` on the pair, or `U(8)` on the pair plus an auxiliary (last).
    pub unitary: ComplexMatrix,
    pub action: SlotAction,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SlotAction {
    Unitary,
    FreshAux([C64; 2]),
    PersistentAux(usize),
}

/// One realization of a circuit: the spec, its streams, and the frozen
/// layers used in same-unitary mode.
pub struct Circuit {
    spec: CircuitSpec,
    streams: CircuitStreams,
    frozen: [Option<Vec<SlotDraw>>; 2],
}

impl Circuit {
    pub fn new(spec: CircuitSpec, streams: CircuitStreams) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec,
            streams,
            frozen: [None, None],
        })
    }

    pub fn spec(&self) -> &CircuitSpec {
        &self.spec
    }

    pub fn streams_mut(&mut self) -> &mut CircuitStreams {
        &mut self.streams
    }

    fn draw_layer(&mut self, t: usize) -> Result<Vec<SlotDraw>> {
        let mut plan = layer_plan(&self.spec, t)?;
        if self.spec.class == CircuitClass::Mlorc
            && self.spec.exposure_selection == ExposureSelection::RandomPerStep
        {
            let chosen = sample(
                &mut self.streams.coin,
                plan.slots.len(),
                self.spec.exposure(),
            );
            for (i, slot) in plan.slots.iter_mut().enumerate() {
                slot.aux = if chosen.iter().any(|c| c == i) {
                    AuxDirective::Fresh
                } else {
                    AuxDirective::None
                };
            }
        }
        plan.slots
            .iter()
            .map(|slot| {
                let (dim, action) = match slot.aux {
                    AuxDirective::None => (4, SlotAction::Unitary),
                    AuxDirective::Fresh => (
                        8,
                        SlotAction::FreshAux(haar_qubit(&mut self.streams.auxiliaries)),
                    ),
                    AuxDirective::Persistent(j) => (8, SlotAction::PersistentAux(j)),
                    AuxDirective::PersistentCoin { left, right } => {
                        let j = match coin_toss(&mut self.streams.coin) {
                            Coin::Heads => left,
                            Coin::Tails => right,
                        };
                        (8, SlotAction::PersistentAux(j))
                    }
                };
                Ok(SlotDraw {
                    pair: slot.pair,
                    unitary: haar_unitary(dim, &mut self.streams.gates)?,
                    action,
                })
            })
            .collect()
    }

    /// The gates of step `t`, consuming the streams exactly as
    /// [`Circuit::step`] would.
    pub fn draw_step(&mut self, t: usize) -> Result<Vec<SlotDraw>> {
        self.layer(t)
    }

    fn layer(&mut self, t: usize) -> Result<Vec<SlotDraw>> {
        if !self.spec.same_unitary {
            return self.draw_layer(t);
        }
        let p = Parity::of(t).index();
        if self.frozen[p].is_none() {
            self.frozen[p] = Some(self.draw_layer(t)?);
        }
        Ok(self.frozen[p].clone().expect("just filled"))
    }

    fn check_state(&self, state: &FullState) -> Result<()> {
        if state.n_system != self.spec.n_system || state.n_aux != self.spec.n_aux() {
            return Err(Error::DimensionMismatch(format!(
                "{} circuit on {} system + {} auxiliary qubits cannot act on a {}+{} register",
                self.spec.class.name(),
                self.spec.n_system,
                self.spec.n_aux(),
                state.n_system,
                state.n_aux
            )));
        }
        Ok(())
    }

    /// Applies step `t` of whichever class the circuit was built for.
    pub fn step(&mut self, state: &mut FullState, t: usize) -> Result<()> {
        self.check_state(state)?;
        let draws = self.layer(t)?;
        let n = state.n_register();
        let n_system = state.n_system;
        // Unitary slots are fused into one layer pass; fresh-auxiliary slots
        // touch disjoint pairs, so they commute with it.
        let targets: Vec<Vec<usize>> = draws
            .iter()
            .map(|d| match d.action {
                SlotAction::PersistentAux(j) => vec![d.pair.0, d.pair.1, n_system + j],
                _ => vec![d.pair.0, d.pair.1],
            })
            .collect();
        let layer: Vec<(&ComplexMatrix, &[usize])> = draws
            .iter()
            .zip(&targets)
            .filter(|(d, _)| !matches!(d.action, SlotAction::FreshAux(_)))
            .map(|(d, t)| (&d.unitary, t.as_slice()))
            .collect();
        if !layer.is_empty() {
            sandwich_hermitian_layer(&mut state.register, n, &layer);
        }
        for d in &draws {
            if let SlotAction::FreshAux(a) = d.action {
                apply_fresh_aux_slot(&mut state.register, n, d.pair, &d.unitary, a);
            }
        }
        Ok(())
    }

    fn require(&self, class: CircuitClass) -> Result<()> {
        if self.spec.class != class {
            return Err(Error::InvalidArgument(format!(
                "{} step requested on a {} circuit",
                class.name(),
                self.spec.class.name()
            )));
        }
        Ok(())
    }

    pub fn ruc_step(&mut self, state: &mut FullState, t: usize) -> Result<()> {
        self.require(CircuitClass::Ruc)?;
        self.step(state, t)
    }

    pub fn mlorc_step(&mut self, state: &mut FullState, t: usize) -> Result<()> {
        self.require(CircuitClass::Mlorc)?;
        self.step(state, t)
    }

    pub fn mforc_step(&mut self, state: &mut FullState, t: usize) -> Result<()> {
        self.require(CircuitClass::Mforc)?;
        self.step(state, t)
    }

    /// MLORC step on a register that carries one extra qubit holding the
    /// auxiliary of the first slot.
    ///
    /// Each step traces out the previous auxiliary and puts the first slot's
    /// fresh one in its place before the slot's gate, so after the layer the
    /// extra qubit is the current step's auxiliary, post-gate and
    /// pre-discard. Other slots act exactly as in [`Circuit::mlorc_step`].
    pub fn mlorc_step_retaining(&mut self, state: &mut FullState, t: usize) -> Result<()> {
        self.require(CircuitClass::Mlorc)?;
        if state.n_system != self.spec.n_system || state.n_aux != 1 {
            return Err(Error::DimensionMismatch(
                "retaining MLORC step needs the system plus one auxiliary qubit".into(),
            ));
        }
        let draws = self.layer(t)?;
        let n = state.n_register();
        let a = state.aux_qubit(0);
        for (i, d) in draws.iter().enumerate() {
            let (p, q) = d.pair;
            match d.action {
                SlotAction::FreshAux(fresh) if i == 0 => {
                    let sys = partial_trace_operator(&state.register, &QubitSubset::range(0..a))?;
                    state.register = sys.kron(&ComplexMatrix::outer(&fresh));
                    sandwich_hermitian_in_place(&mut state.register, n, &d.unitary, &[p, q, a]);
                }
                SlotAction::FreshAux(fresh) => {
                    apply_fresh_aux_slot(&mut state.register, n, (p, q), &d.unitary, fresh)
                }
                SlotAction::Unitary => {
                    sandwich_hermitian_in_place(&mut state.register, n, &d.unitary, &[p, q])
                }
                SlotAction::PersistentAux(_) => unreachable!("MLORC has no persistent auxiliaries"),
            }
        }
        Ok(())
    }
}

/// Kraus operators `K_m = (I ⊗ ⟨m|) U (I ⊗ |a⟩)` of a pair coupled to a fresh
/// auxiliary `|a⟩` through the three-qubit gate `U` (auxiliary last).
fn fresh_aux_kraus(unitary: &ComplexMatrix, aux: [C64; 2]) -> [ComplexMatrix; 2] {
    let mut k = [ComplexMatrix::zeros(4, 4), ComplexMatrix::zeros(4, 4)];
    for (m, km) in k.iter_mut().enumerate() {
        for i in 0..4 {
            for j in 0..4 {
                km[(i, j)] =
                    unitary[(2 * i + m, 2 * j)] * aux[0] + unitary[(2 * i + m, 2 * j + 1)] * aux[1];
            }
        }
    }
    k
}

/// Extend by `|a⟩`, apply `U` on `(pair, aux)`, trace the auxiliary out;
/// evaluated as the equivalent two-term Kraus sum on the pair.
pub(crate) fn apply_fresh_aux_slot(
    register: &mut ComplexMatrix,
    n_qubits: usize,
    pair: (usize, usize),
    unitary: &ComplexMatrix,
    aux: [C64; 2],
) {
    let [k0, k1] = fresh_aux_kraus(unitary, aux);
    let mut other = register.clone();
    sandwich_hermitian_in_place(register, n_qubits, &k0, &[pair.0, pair.1]);
    sandwich_hermitian_in_place(&mut other, n_qubits, &k1, &[pair.0, pair.1]);
    for (a, b) in register.data_mut().iter_mut().zip(other.data()) {
        *a += b;
    }
}

/// Literal extend–apply–trace route for one fresh-auxiliary slot.
pub fn fresh_aux_slot_by_extension(
    register: &ComplexMatrix,
    pair: (usize, usize),
    unitary: &ComplexMatrix,
    aux: [C64; 2],
) -> Result<ComplexMatrix> {
    let n = crate::linalg::qubits_for_dim(register.rows())?;
    let mut ext = register.kron(&ComplexMatrix::outer(&aux));
    sandwich_hermitian_in_place(&mut ext, n + 1, unitary, &[pair.0, pair.1, n]);
    partial_trace_operator(&ext, &QubitSubset::range(0..n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vn_entropy;
    use crate::random::{haar_pure_state, hs_random_density};

    fn streams(r: u64) -> CircuitStreams {
        CircuitStreams::for_realization(11, r)
    }

    #[test]
    fn schedule_for_eight_qubits() {
        let spec = CircuitSpec::ruc(8);
        let odd = layer_plan(&spec, 1).unwrap().pairs();
        assert_eq!(odd, vec![(0, 1), (2, 3), (4, 5), (6, 7)]);
        let even = layer_plan(&spec, 2).unwrap().pairs();
        assert_eq!(even, vec![(1, 2), (3, 4), (5, 6), (7, 0)]);
        let small = CircuitSpec::ruc(4);
        assert_eq!(
            layer_plan(&small, 3).unwrap(),
            layer_plan(&small, 1).unwrap()
        );
        assert!(layer_plan(&spec, 0).is_err());
    }

    #[test]
    fn every_qubit_in_exactly_one_slot() {
        for n in [2, 4, 6, 8] {
            for class in [CircuitClass::Ruc, CircuitClass::Mlorc, CircuitClass::Mforc] {
                let spec = CircuitSpec::new(class, n);
                for t in 1..=4 {
                    let plan = layer_plan(&spec, t).unwrap();
                    let mut seen = vec![0; n];
                    for (p, q) in plan.pairs() {
                        seen[p] += 1;
                        seen[q] += 1;
                    }
                    assert!(seen.iter().all(|&c| c == 1), "n={n} t={t}");
                    assert_eq!(plan, layer_plan(&spec, t + 2).unwrap());
                }
            }
        }
    }

    #[test]
    fn directives_follow_class() {
        let plan = layer_plan(&CircuitSpec::mlorc(8, 2), 1).unwrap();
        let fresh: Vec<bool> = plan
            .slots
            .iter()
            .map(|s| s.aux == AuxDirective::Fresh)
            .collect();
        assert_eq!(fresh, vec![true, true, false, false]);
        let plan = layer_plan(&CircuitSpec::mforc(8), 2).unwrap();
        assert_eq!(
            plan.slots[3].aux,
            AuxDirective::PersistentCoin { left: 3, right: 0 }
        );
        let plan = layer_plan(&CircuitSpec::mforc(2), 2).unwrap();
        assert_eq!(
            plan.slots[0].aux,
            AuxDirective::PersistentCoin { left: 0, right: 0 }
        );
    }

    #[test]
    fn spec_validation() {
        assert!(CircuitSpec::ruc(3).validate().is_err());
        assert!(CircuitSpec::ruc(0).validate().is_err());
        assert!(CircuitSpec::mlorc(4, 3).validate().is_err());
        let mut s = CircuitSpec::ruc(4);
        s.exposure = Some(1);
        assert!(s.validate().is_err());
    }

    #[test]
    fn ruc_step_preserves_purity_of_pure_input() {
        let mut g = streams(0).gates;
        let pure = haar_pure_state(2, &mut g).kron(&haar_pure_state(2, &mut g));
        let mut state = FullState::system(pure);
        let mut c = Circuit::new(CircuitSpec::ruc(4), streams(1)).unwrap();
        for t in 1..=6 {
            c.ruc_step(&mut state, t).unwrap();
            let rho = state.density();
            assert!((rho.trace() - 1.0).abs() < 1e-9);
            assert!((rho.purity() - 1.0).abs() < 1e-9);
        }
        assert!(vn_entropy(&state.density()) < 1e-8);
    }

    #[test]
    fn wrong_class_step_is_rejected() {
        let mut c = Circuit::new(CircuitSpec::ruc(2), streams(0)).unwrap();
        let mut s = FullState::system(DensityMatrix::basis(2, 0));
        assert!(c.mforc_step(&mut s, 1).is_err());
        let mut wrong = FullState::system(DensityMatrix::basis(4, 0));
        assert!(c.step(&mut wrong, 1).is_err());
    }

    #[test]
    fn kraus_slot_matches_extension() {
        let mut g = streams(2).gates;
        let rho = hs_random_density(3, &mut g);
        let u = haar_unitary(8, &mut g).unwrap();
        let a = haar_qubit(&mut g);
        let direct = fresh_aux_slot_by_extension(rho.matrix(), (2, 0), &u, a).unwrap();
        let mut kraus = rho.matrix().clone();
        apply_fresh_aux_slot(&mut kraus, 3, (2, 0), &u, a);
        assert!(direct.max_abs_diff(&kraus) < 1e-13);
    }

    #[test]
    fn mlorc_with_zero_exposure_reproduces_ruc() {
        let mut g = streams(3).gates;
        let rho = hs_random_density(2, &mut g).kron(&hs_random_density(2, &mut g));
        let mut a = FullState::system(rho.clone());
        let mut b = FullState::system(rho);
        let mut ruc = Circuit::new(CircuitSpec::ruc(4), streams(4)).unwrap();
        let mut ml = Circuit::new(CircuitSpec::mlorc(4, 0), streams(4)).unwrap();
        for t in 1..=5 {
            ruc.step(&mut a, t).unwrap();
            ml.step(&mut b, t).unwrap();
        }
        assert_eq!(a, b);
    }

    #[test]
    fn mforc_keeps_global_purity() {
        let mut g = streams(5).gates;
        let sys = haar_pure_state(4, &mut g);
        let aux: Vec<_> = (0..2).map(|_| haar_pure_state(1, &mut g)).collect();
        let mut s = FullState::with_auxiliaries(sys, &aux);
        let mut c = Circuit::new(CircuitSpec::mforc(4), streams(6)).unwrap();
        for t in 1..=8 {
            c.mforc_step(&mut s, t).unwrap();
            assert!((s.density().purity() - 1.0).abs() < 1e-9);
            assert!((s.density().trace() - 1.0).abs() < 1e-9);
        }
        assert!(s.reduced_system_state().purity() < 1.0 - 1e-6);
    }

    #[test]
    fn mforc_two_qubits_degenerate_coin() {
        let mut g = streams(7).gates;
        let mut s = FullState::with_auxiliaries(
            hs_random_density(2, &mut g),
            &[haar_pure_state(1, &mut g)],
        );
        let mut c = Circuit::new(CircuitSpec::mforc(2), streams(8)).unwrap();
        for t in 1..=4 {
            c.step(&mut s, t).unwrap();
        }
        assert!((s.density().trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_state_of_product_is_system_factor() {
        let mut g = streams(9).gates;
        let sys = hs_random_density(2, &mut g);
        let aux = [haar_pure_state(1, &mut g)];
        let s = FullState::with_auxiliaries(sys.clone(), &aux);
        assert!(s.reduced_system_state().matrix().max_abs_diff(sys.matrix()) < 1e-14);
        let plain = FullState::system(sys.clone());
        assert_eq!(plain.reduced_system_state(), sys);
    }

    #[test]
    fn same_unitary_mode_repeats_layers() {
        let spec = CircuitSpec::ruc(4).with_same_unitary(true);
        let mut c = Circuit::new(spec, streams(10)).unwrap();
        let l1 = c.layer(1).unwrap();
        let l3 = c.layer(3).unwrap();
        let l2 = c.layer(2).unwrap();
        let l4 = c.layer(4).unwrap();
        assert_eq!(l1[0].unitary, l3[0].unitary);
        assert_eq!(l2[1].unitary, l4[1].unitary);
        assert_ne!(l1[0].unitary, l2[0].unitary);
    }

    #[test]
    fn retaining_step_matches_plain_system_marginal() {
        let spec = CircuitSpec::mlorc(4, 2);
        let mut rng = streams(5).gates;
        let sys = hs_random_density(4, &mut rng);
        let mut plain = FullState::system(sys.clone());
        let mut kept = FullState::with_auxiliaries(sys, &[DensityMatrix::basis(1, 0)]);
        let mut a = Circuit::new(spec.clone(), streams(3)).unwrap();
        let mut b = Circuit::new(spec, streams(3)).unwrap();
        for t in 1..=4 {
            a.mlorc_step(&mut plain, t).unwrap();
            b.mlorc_step_retaining(&mut kept, t).unwrap();
            let diff = kept.reduced_system_state().matrix().max_abs_diff(plain.density().matrix());
            assert!(diff < 1e-13, "t = {t}: {diff:e}");
        }
    }
}
