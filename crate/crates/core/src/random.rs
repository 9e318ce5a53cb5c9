//! Seeded randomness: stream derivation and the samplers the circuits need.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sandwich_in_place, ComplexMatrix, DensityMatrix, C64, ONE};

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamLabel {
    Gates,
    InitialState,
    Auxiliaries,
    Coin,
    Measurement,
}

impl StreamLabel {
    pub const ALL: [StreamLabel; 5] = [
        StreamLabel::Gates,
        StreamLabel::InitialState,
        StreamLabel::Auxiliaries,
        StreamLabel::Coin,
        StreamLabel::Measurement,
    ];

    fn stream_id(self) -> u64 {
        self as u64
    }
}

/// `(master seed, realization, label)` address of one random stream.
///
/// Each realization gets its own 64-bit seed; each label selects an
/// independent ChaCha stream under that seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedHierarchy {
    pub master_seed: u64,
    pub realization_index: u64,
    pub stream_label: StreamLabel,
}

impl SeedHierarchy {
    pub fn new(master_seed: u64, realization_index: u64, stream_label: StreamLabel) -> Self {
        Self {
            master_seed,
            realization_index,
            stream_label,
        }
    }

    pub fn with_label(self, stream_label: StreamLabel) -> Self {
        Self {
            stream_label,
            ..self
        }
    }

    pub fn realization_seed(&self) -> u64 {
        realization_seed(self.master_seed, self.realization_index)
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.realization_seed());
        rng.set_stream(self.stream_label.stream_id());
        rng
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of realization `index` under `master`.
pub fn realization_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Standard complex normal: real and imaginary parts each N(0, 1/2).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-distributed `dim × dim` unitary (Ginibre → QR → phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::InvalidArgument(
            "unitary dimension must be positive".into(),
        ));
    }
    let g = ginibre(dim, dim, rng).to_nalgebra();
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            ONE
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Ok(ComplexMatrix::from_nalgebra(&q))
}

/// Haar-random unit vector of length `dim` (first column of a Haar unitary).
pub fn haar_state_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Vec<C64>> {
    let u = haar_unitary(dim, rng)?;
    Ok((0..dim).map(|i| u[(i, 0)]).collect())
}

pub fn haar_pure_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> DensityMatrix {
    let psi = haar_state_vector(1 << n_qubits, rng).expect("positive dimension");
    DensityMatrix::from_matrix_unchecked(ComplexMatrix::outer(&psi))
}

/// Hilbert–Schmidt random density matrix `GG† / Tr(GG†)`.
pub fn hs_random_density<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> DensityMatrix {
    let d = 1 << n_qubits;
    let g = ginibre(d, d, rng);
    let mut w = g.matmul(&g.adjoint()).expect("square");
    let tr = w.trace().re;
    w.scale_in_place(1.0 / tr);
    // exact Hermiticity
    for r in 0..d {
        w[(r, r)].im = 0.0;
        for c in r + 1..d {
            let z = w[(r, c)];
            w[(c, r)] = z.conj();
        }
    }
    DensityMatrix::from_matrix_unchecked(w)
}

/// Uniform sample from the probability simplex in `len` dimensions.
pub fn simplex_weights<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..len).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| x / total).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CliffordGate {
    Identity,
    Hadamard,
    /// `diag(1, e^{iπ/4})`.
    PhasePiOver4,
    /// Control on the first qubit of the pair, target on the second.
    ControlledNot,
}

impl CliffordGate {
    pub const ALL: [CliffordGate; 4] = [
        CliffordGate::Identity,
        CliffordGate::Hadamard,
        CliffordGate::PhasePiOver4,
        CliffordGate::ControlledNot,
    ];

    pub fn is_single_qubit(self) -> bool {
        matches!(self, CliffordGate::Hadamard | CliffordGate::PhasePiOver4)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairTarget {
    First,
    Second,
}

/// One draw from the initial-state gate set; `target` is set iff the gate
/// acts on a single qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CliffordDraw {
    gate: CliffordGate,
    target: Option<PairTarget>,
}

impl CliffordDraw {
    pub fn new(gate: CliffordGate, target: Option<PairTarget>) -> Result<Self> {
        if gate.is_single_qubit() != target.is_some() {
            return Err(Error::InvalidArgument(format!(
                "{gate:?} {} a target qubit",
                if gate.is_single_qubit() {
                    "needs"
                } else {
                    "takes no"
                }
            )));
        }
        Ok(Self { gate, target })
    }

    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let gate = CliffordGate::ALL[rng.random_range(0..4)];
        let target = gate.is_single_qubit().then(|| {
            if rng.random_bool(0.5) {
                PairTarget::First
            } else {
                PairTarget::Second
            }
        });
        Self { gate, target }
    }

    pub fn gate(&self) -> CliffordGate {
        self.gate
    }

    pub fn target(&self) -> Option<PairTarget> {
        self.target
    }

    /// The draw as a 4×4 unitary on the pair.
    pub fn unitary(&self) -> ComplexMatrix {
        let s = FRAC_1_SQRT_2;
        let single = match self.gate {
            CliffordGate::Identity => return ComplexMatrix::identity(4),
            CliffordGate::ControlledNot => {
                return ComplexMatrix::from_real(
                    4,
                    4,
                    &[
                        1.0, 0.0, 0.0, 0.0, //
                        0.0, 1.0, 0.0, 0.0, //
                        0.0, 0.0, 0.0, 1.0, //
                        0.0, 0.0, 1.0, 0.0,
                    ],
                )
                .expect("4x4");
            }
            CliffordGate::Hadamard => ComplexMatrix::from_real(2, 2, &[s, s, s, -s]).expect("2x2"),
            CliffordGate::PhasePiOver4 => {
                ComplexMatrix::diagonal(&[ONE, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)])
            }
        };
        let id = ComplexMatrix::identity(2);
        match self.target {
            Some(PairTarget::First) => single.kron(&id),
            _ => id.kron(&single),
        }
    }
}

/// `U (Σ_i w_i |i⟩⟨i|) U†` for a given draw and weights over `|00⟩,|01⟩,|10⟩,|11⟩`.
pub fn clifford_mixture(draw: &CliffordDraw, weights: &[f64; 4]) -> DensityMatrix {
    let diag: Vec<C64> = weights.iter().map(|&w| C64::new(w, 0.0)).collect();
    let mut m = ComplexMatrix::diagonal(&diag);
    sandwich_in_place(&mut m, 2, &draw.unitary(), &[0, 1]);
    DensityMatrix::from_matrix_unchecked(m)
}

/// How the weights of a Clifford-rotated basis mixture are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureWeights {
    /// A uniformly chosen simplex vertex: a pure stabilizer state.
    #[default]
    Vertex,
    /// Uniform on the simplex: a mixed state with non-zero mixed-state SRE.
    Simplex,
}

/// Zero-magic two-qubit initial state: a Clifford-rotated computational
/// basis state.
pub fn magic_free_pair_state<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    clifford_pair_state(rng, MixtureWeights::Vertex)
}

/// Clifford-rotated mixture of computational-basis projectors with weights
/// drawn per `weights`.
pub fn clifford_pair_state<R: Rng + ?Sized>(rng: &mut R, weights: MixtureWeights) -> DensityMatrix {
    let w = match weights {
        MixtureWeights::Vertex => {
            let mut w = [0.0; 4];
            w[rng.random_range(0..4)] = 1.0;
            w
        }
        MixtureWeights::Simplex => {
            let w = simplex_weights(4, rng);
            [w[0], w[1], w[2], w[3]]
        }
    };
    let draw = CliffordDraw::sample(rng);
    clifford_mixture(&draw, &w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coin {
    Heads,
    Tails,
}

pub fn coin_toss<R: Rng + ?Sized>(rng: &mut R) -> Coin {
    if rng.random_bool(0.5) {
        Coin::Heads
    } else {
        Coin::Tails
    }
}

/// Single-qubit Haar pure state as a 2-vector.
pub(crate) fn haar_qubit<R: Rng + ?Sized>(rng: &mut R) -> [C64; 2] {
    let v = haar_state_vector(2, rng).expect("dim 2");
    [v[0], v[1]]
}
