//! Projected ensembles and state-design distances.
//!
//! Measuring the complement `B` of a subsystem `A` in the computational basis
//! leaves `A` in a conditional state per outcome. The ensemble's k-th moment is
//! compared with the normalized projector onto the symmetric subspace.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{trace_norm, ComplexMatrix, DensityMatrix, QubitSubset, C64};

/// Outcomes with smaller probability are dropped.
pub const OUTCOME_FLOOR: f64 = 1e-12;

/// Default cap on the k-fold tensor dimension `d^k`.
pub const MOMENT_DIM_CAP: usize = 4096;

#[derive(Clone, Debug)]
pub struct EnsembleMember {
    /// Computational-basis outcome on `B`, first qubit of `B` most significant.
    pub outcome: usize,
    pub probability: f64,
    pub state: DensityMatrix,
}

#[derive(Clone, Debug)]
pub struct ProjectedEnsemble {
    dim: usize,
    members: Vec<EnsembleMember>,
}

impl ProjectedEnsemble {
    /// Ensemble from explicit `(p, ρ)` pairs, all of dimension `dim`.
    pub fn from_members(dim: usize, members: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("empty ensemble".into()));
        }
        let mut out = Vec::with_capacity(members.len());
        for (outcome, (p, state)) in members.into_iter().enumerate() {
            if state.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "member of dimension {} in a dimension-{dim} ensemble",
                    state.dim()
                )));
            }
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::InvalidArgument(format!("probability {p}")));
            }
            out.push(EnsembleMember {
                outcome,
                probability: p,
                state,
            });
        }
        Ok(Self { dim, members: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.members.iter().map(|m| m.probability).sum()
    }
}

/// Conditional states of `part_a` after measuring every other qubit.
pub fn build_projected_ensemble(
    state: &DensityMatrix,
    part_a: &QubitSubset,
) -> Result<ProjectedEnsemble> {
    let n = state.n_qubits();
    part_a.check_within(n)?;
    if part_a.is_empty() || part_a.len() >= n {
        return Err(Error::InvalidQubits(format!(
            "subsystem A must be a proper non-empty subset of {n} qubits"
        )));
    }
    let part_b = part_a.complement(n);
    let na = part_a.len();
    let nb = part_b.len();
    let da = 1usize << na;
    let bit = |q: usize| 1usize << (n - 1 - q);
    // Register index contributions of the local A and B basis states.
    let spread = |qubits: &[usize], local: usize| -> usize {
        let k = qubits.len();
        qubits
            .iter()
            .enumerate()
            .filter(|(j, _)| (local >> (k - 1 - j)) & 1 == 1)
            .map(|(_, &q)| bit(q))
            .sum()
    };
    let a_off: Vec<usize> = (0..da).map(|i| spread(part_a.indices(), i)).collect();
    let d = state.dim();
    let rho = state.matrix().data();
    let mut members = Vec::new();
    for b in 0..1usize << nb {
        let b_off = spread(part_b.indices(), b);
        let p: f64 = a_off.iter().map(|&i| rho[(i + b_off) * d + i + b_off].re).sum();
        if p < OUTCOME_FLOOR {
            continue;
        }
        let m = ComplexMatrix::from_fn(da, da, |i, j| {
            rho[(a_off[i] + b_off) * d + a_off[j] + b_off] / p
        });
        members.push(EnsembleMember {
            outcome: b,
            probability: p,
            state: DensityMatrix::from_matrix_unchecked(m),
        });
    }
    Ok(ProjectedEnsemble { dim: da, members })
}

/// A k-th moment operator on `(ℂ^d)^{⊗k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentOperator {
    pub k: usize,
    pub d: usize,
    pub matrix: ComplexMatrix,
}

impl MomentOperator {
    /// Mean of several moments of the same shape.
    pub fn average(moments: &[MomentOperator]) -> Result<Self> {
        let first = moments
            .first()
            .ok_or_else(|| Error::InvalidArgument("no moments to average".into()))?;
        let mut acc = ComplexMatrix::zeros(first.matrix.rows(), first.matrix.cols());
        for m in moments {
            if (m.k, m.d) != (first.k, first.d) {
                return Err(Error::DimensionMismatch("moments of different shape".into()));
            }
            acc.add_scaled(&m.matrix, C64::new(1.0, 0.0))?;
        }
        acc.scale_in_place(1.0 / moments.len() as f64);
        Ok(Self {
            k: first.k,
            d: first.d,
            matrix: acc,
        })
    }
}

fn check_moment_size(d: usize, k: usize, cap: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::InvalidArgument("moment order must be positive".into()));
    }
    let size = (0..k)
        .try_fold(1usize, |acc, _| acc.checked_mul(d))
        .filter(|&s| s <= cap)
        .ok_or_else(|| Error::SizeCap(format!("d^k = {d}^{k} exceeds {cap}")))?;
    Ok(size)
}

/// `Σ_b p_b (ρ_A^(b))^{⊗k}` with the default size cap.
pub fn kth_moment(ens: &ProjectedEnsemble, k: usize) -> Result<MomentOperator> {
    kth_moment_capped(ens, k, MOMENT_DIM_CAP)
}

pub fn kth_moment_capped(ens: &ProjectedEnsemble, k: usize, cap: usize) -> Result<MomentOperator> {
    let size = check_moment_size(ens.dim, k, cap)?;
    let mut acc = ComplexMatrix::zeros(size, size);
    for m in &ens.members {
        let mut power = m.state.matrix().clone();
        for _ in 1..k {
            power = power.kron(m.state.matrix());
        }
        acc.add_scaled(&power, C64::new(m.probability, 0.0))?;
    }
    Ok(MomentOperator {
        k,
        d: ens.dim,
        matrix: acc,
    })
}

/// Every permutation of `0..k`.
fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..k {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Haar k-th moment: the symmetric-subspace projector over `binom(d+k−1, k)`.
pub fn haar_moment(d: usize, k: usize) -> Result<MomentOperator> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let size = check_moment_size(d, k, MOMENT_DIM_CAP)?;
    let perms = permutations(k);
    let weight = 1.0 / (perms.len() as f64 * binomial(d + k - 1, k));
    let mut m = ComplexMatrix::zeros(size, size);
    let mut digits = vec![0usize; k];
    for col in 0..size {
        let mut x = col;
        for slot in digits.iter_mut().rev() {
            *slot = x % d;
            x /= d;
        }
        for p in &perms {
            let row = p.iter().fold(0, |acc, &s| acc * d + digits[s]);
            m.data_mut()[row * size + col] += weight;
        }
    }
    Ok(MomentOperator { k, d, matrix: m })
}

/// `½ ‖a − b‖₁`.
pub fn moment_distance(a: &MomentOperator, b: &MomentOperator) -> Result<f64> {
    Ok(0.5 * trace_norm(&a.matrix.sub(&b.matrix)?)?)
}

/// `Δ^(k) = ½ ‖ρ^(k)_ens − ρ^(k)_Haar‖₁`.
pub fn design_distance(ens: &ProjectedEnsemble, k: usize) -> Result<f64> {
    let moment = kth_moment(ens, k)?;
    moment_distance(&moment, &haar_moment(ens.dim, k)?)
}

/// How distances are averaged over realizations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignAveraging {
    /// Mean of per-realization `Δ^(k)`.
    #[default]
    PerRealization,
    /// `Δ^(k)` of the realization-averaged moment.
    PooledMoment,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace, ONE, ZERO};
    use crate::random::{haar_unitary, hs_random_density, SeedHierarchy, StreamLabel};

    fn bell() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(&[C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)]).unwrap()
    }

    #[test]
    fn bell_conditioning() {
        let ens = build_projected_ensemble(&bell(), &QubitSubset::new([0]).unwrap()).unwrap();
        assert_eq!(ens.len(), 2);
        for (m, idx) in ens.members().iter().zip([0, 1]) {
            assert!((m.probability - 0.5).abs() < 1e-15);
            assert!(m.state.matrix().max_abs_diff(DensityMatrix::basis(1, idx).matrix()) < 1e-15);
        }
    }

    #[test]
    fn product_state_members_equal_marginal() {
        let mut g = SeedHierarchy::new(1, 0, StreamLabel::InitialState).rng();
        let a = hs_random_density(1, &mut g);
        let b = hs_random_density(2, &mut g);
        let ens = build_projected_ensemble(&a.kron(&b), &QubitSubset::new([0]).unwrap()).unwrap();
        assert_eq!(ens.len(), 4);
        for m in ens.members() {
            assert!(m.state.matrix().max_abs_diff(a.matrix()) < 1e-12);
        }
    }

    #[test]
    fn first_moment_is_marginal_for_non_contiguous_subsystem() {
        let mut g = SeedHierarchy::new(2, 0, StreamLabel::InitialState).rng();
        let rho = hs_random_density(4, &mut g);
        let a = QubitSubset::new([2, 0]).unwrap();
        let ens = build_projected_ensemble(&rho, &a).unwrap();
        assert!((ens.total_probability() - 1.0).abs() < 1e-9);
        let m1 = kth_moment(&ens, 1).unwrap();
        let marginal = partial_trace(&rho, &a).unwrap();
        assert!(m1.matrix.max_abs_diff(marginal.matrix()) < 1e-9);
    }

    #[test]
    fn two_member_second_moment_by_hand() {
        let s0 = DensityMatrix::basis(1, 0);
        let plus = DensityMatrix::from_pure(&[C64::new(0.5f64.sqrt(), 0.0); 2]).unwrap();
        let ens = ProjectedEnsemble::from_members(2, vec![(0.25, s0.clone()), (0.75, plus.clone())])
            .unwrap();
        let m2 = kth_moment(&ens, 2).unwrap();
        let mut expected = s0.matrix().kron(s0.matrix()).scale(C64::new(0.25, 0.0));
        expected
            .add_scaled(&plus.matrix().kron(plus.matrix()), C64::new(0.75, 0.0))
            .unwrap();
        assert!(m2.matrix.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn haar_moment_basics() {
        let h1 = haar_moment(3, 1).unwrap();
        assert!(h1.matrix.max_abs_diff(&ComplexMatrix::identity(3).scale(C64::new(1.0 / 3.0, 0.0))) < 1e-15);
        // Rank 3 for d = 2, k = 2: eigenvalues 1/3 (x3) and 0.
        let h2 = haar_moment(2, 2).unwrap();
        let ev = crate::linalg::hermitian_eigenvalues(&h2.matrix).unwrap();
        assert!(ev[0].abs() < 1e-14);
        for e in &ev[1..] {
            assert!((e - 1.0 / 3.0).abs() < 1e-14);
        }
        for (k, dim) in [(1, 4.0), (2, 10.0), (3, 20.0)] {
            let h = haar_moment(4, k).unwrap();
            assert!((h.matrix.trace().re - 1.0).abs() < 1e-10);
            // Projector rank = trace of the unnormalized projector.
            let projector = h.matrix.scale(C64::new(dim, 0.0));
            let p2 = projector.matmul(&projector).unwrap();
            assert!(p2.max_abs_diff(&projector) < 1e-12);
            assert!((projector.trace().re - dim).abs() < 1e-10);
        }
    }

    #[test]
    fn haar_moment_commutes_with_tensor_powers() {
        let mut g = SeedHierarchy::new(3, 0, StreamLabel::Gates).rng();
        let u = haar_unitary(3, &mut g).unwrap();
        let uu = u.kron(&u);
        let h = haar_moment(3, 2).unwrap();
        let lhs = uu.matmul(&h.matrix).unwrap();
        let rhs = h.matrix.matmul(&uu).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-9);
    }

    #[test]
    fn distances() {
        let h = haar_moment(2, 2).unwrap();
        assert!(moment_distance(&h, &h).unwrap() < 1e-15);
        let ens = ProjectedEnsemble::from_members(2, vec![(1.0, DensityMatrix::basis(1, 0))]).unwrap();
        assert!((design_distance(&ens, 1).unwrap() - 0.5).abs() < 1e-14);
        let single = kth_moment(&ens, 3).unwrap();
        let zero = DensityMatrix::basis(3, 0);
        assert!(single.matrix.max_abs_diff(zero.matrix()) < 1e-15);
        assert_eq!(single.matrix[(0, 0)], ONE);
    }

    #[test]
    fn size_cap_and_validation() {
        let ens = ProjectedEnsemble::from_members(4, vec![(1.0, DensityMatrix::basis(2, 0))]).unwrap();
        assert!(matches!(kth_moment(&ens, 7), Err(Error::SizeCap(_))));
        assert!(matches!(kth_moment(&ens, 0), Err(Error::InvalidArgument(_))));
        let rho = DensityMatrix::basis(2, 0);
        assert!(build_projected_ensemble(&rho, &QubitSubset::range(0..2)).is_err());
    }
}
