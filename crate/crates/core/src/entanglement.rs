//! Entanglement and correlation observables, plus the realization
//! fluctuation statistic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, partial_trace, partial_transpose, vn_entropy_in, DensityMatrix, LogBase,
    QubitSubset,
};

/// Eigenvalues of the partial transpose above this are counted as zero.
pub const NEGATIVITY_THRESHOLD: f64 = -1e-10;

/// A split `A:B` of a register; the two parts are disjoint and cover it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    part_a: QubitSubset,
    part_b: QubitSubset,
}

impl Bipartition {
    pub fn new(part_a: QubitSubset, part_b: QubitSubset, n_qubits: usize) -> Result<Self> {
        part_a.check_within(n_qubits)?;
        part_b.check_within(n_qubits)?;
        if part_a.is_empty() || part_b.is_empty() {
            return Err(Error::InvalidQubits("both parts must be non-empty".into()));
        }
        if part_a.indices().iter().any(|&q| part_b.contains(q)) {
            return Err(Error::InvalidQubits("parts overlap".into()));
        }
        if part_a.len() + part_b.len() != n_qubits {
            return Err(Error::InvalidQubits(format!(
                "parts cover {} of {n_qubits} qubits",
                part_a.len() + part_b.len()
            )));
        }
        Ok(Self { part_a, part_b })
    }

    /// `A` = the first `n_a` qubits, `B` = the rest.
    pub fn split_at(n_a: usize, n_qubits: usize) -> Result<Self> {
        Self::new(
            QubitSubset::range(0..n_a),
            QubitSubset::range(n_a..n_qubits),
            n_qubits,
        )
    }

    /// `A` = the given qubits, `B` = their complement.
    pub fn from_part_a(part_a: QubitSubset, n_qubits: usize) -> Result<Self> {
        part_a.check_within(n_qubits)?;
        let part_b = part_a.complement(n_qubits);
        Self::new(part_a, part_b, n_qubits)
    }

    pub fn part_a(&self) -> &QubitSubset {
        &self.part_a
    }

    pub fn part_b(&self) -> &QubitSubset {
        &self.part_b
    }

    pub fn n_qubits(&self) -> usize {
        self.part_a.len() + self.part_b.len()
    }

    pub fn swapped(&self) -> Self {
        Self {
            part_a: self.part_b.clone(),
            part_b: self.part_a.clone(),
        }
    }

    fn check(&self, state: &DensityMatrix) -> Result<()> {
        if self.n_qubits() != state.n_qubits() {
            return Err(Error::InvalidQubits(format!(
                "bipartition of {} qubits applied to a {}-qubit state",
                self.n_qubits(),
                state.n_qubits()
            )));
        }
        Ok(())
    }
}

/// How the negativity `𝒩` enters the logarithm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativityConvention {
    /// `log(𝒩 + 1)`.
    #[default]
    PlusOne,
    /// `log(2𝒩 + 1) = log ‖ρ^{T_B}‖₁`.
    Standard,
}

/// `𝒩 = Σ |λ|` over the negative eigenvalues of `ρ^{T_B}`.
pub fn negativity(state: &DensityMatrix, bip: &Bipartition) -> Result<f64> {
    bip.check(state)?;
    let pt = partial_transpose(state, bip.part_b())?;
    Ok(hermitian_eigenvalues(&pt)?
        .into_iter()
        .take_while(|&l| l < NEGATIVITY_THRESHOLD)
        .map(f64::abs)
        .sum())
}

/// Logarithmic negativity `log₂(𝒩 + 1)`.
pub fn log_negativity(state: &DensityMatrix, bip: &Bipartition) -> Result<f64> {
    log_negativity_with(state, bip, NegativityConvention::PlusOne, LogBase::Two)
}

pub fn log_negativity_with(
    state: &DensityMatrix,
    bip: &Bipartition,
    convention: NegativityConvention,
    base: LogBase,
) -> Result<f64> {
    let n = negativity(state, bip)?;
    let arg = match convention {
        NegativityConvention::PlusOne => n + 1.0,
        NegativityConvention::Standard => 2.0 * n + 1.0,
    };
    Ok(base.log(arg).max(0.0))
}

/// `I(A:B) = S(A) + S(B) − S(AB)`, clipped at zero.
pub fn mutual_information(state: &DensityMatrix, bip: &Bipartition) -> Result<f64> {
    mutual_information_in(state, bip, LogBase::Two)
}

pub fn mutual_information_in(
    state: &DensityMatrix,
    bip: &Bipartition,
    base: LogBase,
) -> Result<f64> {
    bip.check(state)?;
    let s_a = vn_entropy_in(&partial_trace(state, bip.part_a())?, base);
    let s_b = vn_entropy_in(&partial_trace(state, bip.part_b())?, base);
    let s_ab = vn_entropy_in(state, base);
    Ok((s_a + s_b - s_ab).max(0.0))
}

/// Mergeable mean/variance accumulator (population variance).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fluctuation {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Fluctuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combines two accumulators as if all samples had been pushed into one.
    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n_a = self.count as f64;
        let n_b = other.count as f64;
        let n = n_a + n_b;
        let delta = other.mean - self.mean;
        self.mean += delta * n_b / n;
        self.m2 += other.m2 + delta * delta * n_a * n_b / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `⟨O²⟩ − ⟨O⟩²`, floored at zero.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        (self.m2 / self.count as f64).max(0.0)
    }
}

impl FromIterator<f64> for Fluctuation {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// Mean and variance of `samples`.
pub fn fluctuation(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument(
            "fluctuation of an empty sample list".into(),
        ));
    }
    let acc: Fluctuation = samples.iter().copied().collect();
    Ok((acc.mean(), acc.variance()))
}
