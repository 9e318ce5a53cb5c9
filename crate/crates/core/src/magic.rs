//! Pauli spectra and the mixed-state stabilizer Rényi-2 entropy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, LogBase, C64};

/// Default largest register accepted by [`pauli_spectrum`].
pub const PAULI_QUBIT_CAP: usize = 12;

/// `Tr(P ρ)` for all `4^n` Pauli strings.
///
/// The string at base-4 index `p` has qubit `k` at digit `n-1-k` (qubit 0 is
/// the most significant digit), with digits `0, 1, 2, 3` for `I, X, Y, Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSpectrum {
    n_qubits: usize,
    coefficients: Vec<f64>,
}

impl PauliSpectrum {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Coefficient of the string given as one digit per qubit.
    pub fn get(&self, paulis: &[u8]) -> f64 {
        let idx = paulis.iter().fold(0usize, |acc, &p| acc * 4 + p as usize);
        self.coefficients[idx]
    }

    /// `Σ_p x_p²`, which equals `d · Tr ρ²`.
    pub fn sum_of_squares(&self) -> f64 {
        self.coefficients.iter().map(|x| x * x).sum()
    }

    pub fn sum_of_fourth_powers(&self) -> f64 {
        self.coefficients.iter().map(|x| (x * x) * (x * x)).sum()
    }
}

pub fn pauli_spectrum(state: &DensityMatrix) -> Result<PauliSpectrum> {
    pauli_spectrum_capped(state, PAULI_QUBIT_CAP)
}

/// Pauli spectrum via a per-qubit 4-point transform on the interleaved
/// `(row bit, column bit)` index, `O(d² log d)` overall.
pub fn pauli_spectrum_capped(state: &DensityMatrix, cap: usize) -> Result<PauliSpectrum> {
    let n = state.n_qubits();
    if n > cap {
        return Err(Error::SizeCap(format!(
            "Pauli spectrum of {n} qubits exceeds the cap of {cap}"
        )));
    }
    let d = state.dim();
    let spread: Vec<usize> = (0..d)
        .map(|x| (0..n).fold(0, |acc, b| acc | (((x >> b) & 1) << (2 * b))))
        .collect();
    let mut buf = vec![C64::new(0.0, 0.0); d * d];
    let m = state.matrix();
    for r in 0..d {
        for (c, &z) in m.row(r).iter().enumerate() {
            buf[(spread[r] << 1) | spread[c]] = z;
        }
    }
    let i = C64::new(0.0, 1.0);
    for b in 0..n {
        let stride = 1usize << (2 * b);
        for block in buf.chunks_exact_mut(4 * stride) {
            for k in 0..stride {
                let a = block[k];
                let bb = block[k + stride];
                let c = block[k + 2 * stride];
                let e = block[k + 3 * stride];
                block[k] = a + e;
                block[k + stride] = bb + c;
                block[k + 2 * stride] = i * (bb - c);
                block[k + 3 * stride] = a - e;
            }
        }
    }
    Ok(PauliSpectrum {
        n_qubits: n,
        coefficients: buf.into_iter().map(|z| z.re).collect(),
    })
}

/// Stabilizer Rényi-2 entropy of a mixed state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SreValue {
    /// `−log(Σ_p x_p⁴ / d)`.
    pub m_tilde: f64,
    /// `−log Tr ρ²`.
    pub s2: f64,
    pub magic: f64,
}

pub fn sre2(state: &DensityMatrix) -> Result<SreValue> {
    sre2_in(state, LogBase::Two)
}

pub fn sre2_in(state: &DensityMatrix, base: LogBase) -> Result<SreValue> {
    let spec = pauli_spectrum(state)?;
    Ok(sre_from_spectrum(&spec, base))
}

pub fn sre_from_spectrum(spec: &PauliSpectrum, base: LogBase) -> SreValue {
    let d = (1usize << spec.n_qubits) as f64;
    let m_tilde = -base.log(spec.sum_of_fourth_powers() / d);
    let s2 = -base.log(spec.sum_of_squares() / d);
    SreValue {
        m_tilde,
        s2,
        magic: m_tilde - s2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    #[test]
    fn zero_state_spectrum() {
        let s = pauli_spectrum(&DensityMatrix::basis(1, 0)).unwrap();
        assert_eq!(s.coefficients(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn maximally_mixed_spectrum_and_magic() {
        let rho = DensityMatrix::maximally_mixed(3);
        let s = pauli_spectrum(&rho).unwrap();
        assert!((s.coefficients()[0] - 1.0).abs() < 1e-15);
        assert!(s.coefficients()[1..].iter().all(|x| x.abs() < 1e-15));
        let v = sre2(&rho).unwrap();
        assert!((v.m_tilde - 3.0).abs() < 1e-12 && v.magic.abs() < 1e-12);
    }

    #[test]
    fn t_state_magic() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phase = C64::from_polar(s, std::f64::consts::FRAC_PI_4);
        let t = DensityMatrix::from_pure(&[C64::new(s, 0.0), phase]).unwrap();
        let spec = pauli_spectrum(&t).unwrap();
        let expected = [1.0, s, s, 0.0];
        for (x, e) in spec.coefficients().iter().zip(expected) {
            assert!((x - e).abs() < 1e-12);
        }
        assert!((sre2(&t).unwrap().magic - (4.0f64 / 3.0).log2()).abs() < 1e-12);
    }

    #[test]
    fn qubit_digit_order() {
        // |0⟩⟨0| ⊗ I/2: only II and ZI survive, with Z on qubit 0.
        let rho = DensityMatrix::basis(1, 0).kron(&DensityMatrix::maximally_mixed(1));
        let s = pauli_spectrum(&rho).unwrap();
        assert!((s.get(&[3, 0]) - 1.0).abs() < 1e-15);
        assert!(s.get(&[0, 3]).abs() < 1e-15);
    }

    #[test]
    fn basis_product_has_no_magic() {
        let rho = DensityMatrix::basis(4, 0b1011);
        assert!(sre2(&rho).unwrap().magic.abs() < 1e-12);
        let psi = [ZERO, C64::new(1.0, 0.0)];
        assert!(
            sre2(&DensityMatrix::from_pure(&psi).unwrap())
                .unwrap()
                .magic
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn cap_is_enforced() {
        let rho = DensityMatrix::basis(3, 0);
        assert!(matches!(
            pauli_spectrum_capped(&rho, 2),
            Err(Error::SizeCap(_))
        ));
    }
}
