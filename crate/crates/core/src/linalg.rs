//! Dense complex matrices and the qubit-register primitives built on them.
//!
//! Qubit `0` is the most significant bit of a basis index, so a register
//! `A ⊗ B` lists the qubits of `A` first. Every register operation works
//! through bit-index arithmetic; embedded gates are never expanded to the
//! full `2^n × 2^n` operator.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerances used by [`DensityMatrix`] validation.
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_FLOOR: f64 = -1e-9;
pub const UNITARY_TOL: f64 = 1e-10;

/// Eigenvalues below this are treated as zero inside `p log p`.
pub const ENTROPY_CLAMP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    #[serde(alias = "2")]
    Two,
    #[serde(alias = "e")]
    Natural,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::Natural => x.ln(),
        }
    }
}

/// Allocations at least this large ask the kernel for transparent huge
/// pages; the strided row access of the gate kernels thrashes the TLB
/// otherwise.
const HUGE_PAGE_THRESHOLD: usize = 1 << 22;

fn storage_with_capacity(len: usize) -> Vec<C64> {
    let v: Vec<C64> = Vec::with_capacity(len);
    let bytes = len * std::mem::size_of::<C64>();
    #[cfg(target_os = "linux")]
    if bytes >= HUGE_PAGE_THRESHOLD {
        const HUGE: usize = 1 << 21;
        let start = v.as_ptr() as usize;
        let aligned = (start + HUGE - 1) & !(HUGE - 1);
        let end = (start + bytes) & !(HUGE - 1);
        if end > aligned {
            // SAFETY: advisory call on a range inside our own allocation.
            unsafe {
                libc::madvise(
                    aligned as *mut libc::c_void,
                    end - aligned,
                    libc::MADV_HUGEPAGE,
                );
            }
        }
    }
    #[cfg(not(target_os = "linux"))]
    let _ = bytes;
    v
}

fn zeroed_storage(len: usize) -> Vec<C64> {
    let mut v = storage_with_capacity(len);
    v.resize(len, ZERO);
    v
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(16) {
            write!(f, "  ")?;
            for c in 0..self.cols.min(16) {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: zeroed_storage(rows * cols),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch("matrix must be non-empty".into()));
        }
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument(
                "matrix has non-finite entries".into(),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real entries given row by row.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_vec(
            rows,
            cols,
            entries.iter().map(|&x| C64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = storage_with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn outer(psi: &[C64]) -> Self {
        let n = psi.len();
        Self::from_fn(n, n, |r, c| psi[r] * psi[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut out = Self::zeros(rows, cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self.data[r1 * self.cols + c1];
                for r2 in 0..rhs.rows {
                    let base = (r1 * rhs.rows + r2) * cols + c1 * rhs.cols;
                    for c2 in 0..rhs.cols {
                        out.data[base + c2] = a * rhs.data[r2 * rhs.cols + c2];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols))
            .map(|i| self.data[i * self.cols + i])
            .sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// `self += s * rhs`
    pub fn add_scaled(&mut self, rhs: &Self, s: C64) -> Result<()> {
        self.check_same_shape(rhs)?;
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += s * b;
        }
        Ok(())
    }

    fn check_same_shape(&self, rhs: &Self) -> Result<()> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(())
    }

    /// Entrywise max |A - B|.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Entrywise max |A - A†|.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                dev = dev.max((self.data[r * n + c] - self.data[c * n + r].conj()).norm());
            }
        }
        dev
    }

    /// Entrywise max |U†U - I|.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += self.data[k * n + i].conj() * self.data[k * n + j];
                }
                if i == j {
                    acc -= ONE;
                }
                dev = dev.max(acc.norm());
            }
        }
        dev
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Ordered list of distinct qubit indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct QubitSubset(Vec<usize>);

impl QubitSubset {
    pub fn new(indices: impl Into<Vec<usize>>) -> Result<Self> {
        let indices = indices.into();
        for (i, q) in indices.iter().enumerate() {
            if indices[..i].contains(q) {
                return Err(Error::InvalidQubits(format!("qubit {q} listed twice")));
            }
        }
        Ok(Self(indices))
    }

    pub fn range(range: std::ops::Range<usize>) -> Self {
        Self(range.collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, q: usize) -> bool {
        self.0.contains(&q)
    }

    pub fn check_within(&self, n_qubits: usize) -> Result<()> {
        match self.0.iter().find(|&&q| q >= n_qubits) {
            Some(q) => Err(Error::InvalidQubits(format!(
                "qubit {q} outside a {n_qubits}-qubit register"
            ))),
            None => Ok(()),
        }
    }

    /// Qubits of an `n`-qubit register not in this subset, ascending.
    pub fn complement(&self, n_qubits: usize) -> Self {
        Self((0..n_qubits).filter(|q| !self.0.contains(q)).collect())
    }
}

impl TryFrom<Vec<usize>> for QubitSubset {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<QubitSubset> for Vec<usize> {
    fn from(s: QubitSubset) -> Self {
        s.0
    }
}

/// Hermitian, unit-trace, positive-semidefinite operator on `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and the PSD floor.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n_qubits = qubits_for_dim(matrix.rows())?;
        if !matrix.is_square() {
            return Err(Error::InvalidState("matrix is not square".into()));
        }
        let herm = matrix.hermiticity_deviation();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min_eig = hermitian_eigenvalues(&matrix)?[0];
        if min_eig < PSD_FLOOR {
            return Err(Error::InvalidState(format!(
                "smallest eigenvalue {min_eig:e} below PSD floor"
            )));
        }
        Ok(Self { n_qubits, matrix })
    }

    /// Wraps a matrix produced by trace-preserving completely-positive maps.
    ///
    /// Only the shape is checked; callers that need the full invariants use
    /// [`DensityMatrix::new`] or [`DensityMatrix::validate`].
    pub fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        let n_qubits = qubits_for_dim(matrix.rows()).expect("power-of-two dimension");
        debug_assert!(matrix.is_square());
        Self { n_qubits, matrix }
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.matrix.clone()).map(|_| ())
    }

    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("state vector norm {norm}")));
        }
        qubits_for_dim(psi.len())?;
        Ok(Self::from_matrix_unchecked(ComplexMatrix::outer(psi)))
    }

    /// `|index⟩⟨index|` on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let d = 1 << n_qubits;
        assert!(index < d);
        let mut m = ComplexMatrix::zeros(d, d);
        m[(index, index)] = ONE;
        Self {
            n_qubits,
            matrix: m,
        }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        Self {
            n_qubits,
            matrix: ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0)),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.data().iter().map(|z| z.norm_sqr()).sum()
    }

    /// `self ⊗ other`
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues_unchecked(&self.matrix)
    }
}

pub(crate) fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Bit position of `qubit` in a basis index of an `n`-qubit register.
#[inline]
fn bit_of(n_qubits: usize, qubit: usize) -> usize {
    n_qubits - 1 - qubit
}

/// Index arithmetic for an operator acting on `targets` of an `n`-qubit
/// register: `offsets[i]` is the register index contribution of local basis
/// state `i`, and `bases` enumerates register indices with all target bits 0.
#[derive(Clone, Debug)]
pub(crate) struct Embedding {
    pub(crate) offsets: Vec<usize>,
    pub(crate) bases: Vec<usize>,
}

impl Embedding {
    pub(crate) fn new(n_qubits: usize, targets: &[usize]) -> Self {
        let k = targets.len();
        let offsets = (0..1usize << k)
            .map(|i| {
                targets
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| (i >> (k - 1 - j)) & 1 == 1)
                    .map(|(_, &q)| 1usize << bit_of(n_qubits, q))
                    .sum()
            })
            .collect();
        let mask: usize = targets.iter().map(|&q| 1usize << bit_of(n_qubits, q)).sum();
        let bases = (0..1usize << n_qubits).filter(|x| x & mask == 0).collect();
        Self { offsets, bases }
    }
}

/// In place `M ← A M` where `A` acts on the embedded targets.
pub(crate) fn left_apply(m: &mut ComplexMatrix, op: &ComplexMatrix, emb: &Embedding) {
    let d = m.cols;
    let g = op.rows;
    let mut scratch = vec![ZERO; g * d];
    for &b in &emb.bases {
        for (i, &off) in emb.offsets.iter().enumerate() {
            let start = (b + off) * d;
            scratch[i * d..(i + 1) * d].copy_from_slice(&m.data[start..start + d]);
        }
        for (j, &off) in emb.offsets.iter().enumerate() {
            let out = &mut m.data[(b + off) * d..(b + off + 1) * d];
            out.fill(ZERO);
            for (i, &a) in op.data[j * g..(j + 1) * g].iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (y, x) in out.iter_mut().zip(&scratch[i * d..(i + 1) * d]) {
                    *y += a * x;
                }
            }
        }
    }
}

/// One gate of a right-multiplication layer, with `conj(A)` split into real
/// and imaginary parts for broadcasting.
struct RightGate<'a> {
    emb: &'a Embedding,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl<'a> RightGate<'a> {
    fn new(op: &ComplexMatrix, emb: &'a Embedding) -> Self {
        Self {
            emb,
            re: op.data.iter().map(|z| z.re).collect(),
            im: op.data.iter().map(|z| -z.im).collect(),
        }
    }
}

/// In place `M ← M A_1† A_2† ⋯ A_k†`, one row pair at a time so the whole
/// layer is applied while those rows are cache resident.
pub(crate) fn right_apply_layer(m: &mut ComplexMatrix, ops: &[(&ComplexMatrix, &Embedding)]) {
    let d = m.cols;
    let gates: Vec<RightGate> = ops
        .iter()
        .map(|(op, emb)| RightGate::new(op, emb))
        .collect();
    #[cfg(target_arch = "x86_64")]
    if m.rows.is_multiple_of(2)
        && std::is_x86_feature_detected!("avx2")
        && std::is_x86_feature_detected!("fma")
    {
        for rows in m.data.chunks_exact_mut(2 * d) {
            let (r0, r1) = rows.split_at_mut(d);
            for gate in &gates {
                // SAFETY: avx2 and fma were detected at runtime.
                unsafe { right_gate_row_pair_avx2(r0, r1, gate) };
            }
        }
        return;
    }
    let mut v = Vec::new();
    for row in m.data.chunks_exact_mut(d) {
        for gate in &gates {
            right_gate_row(row, gate, &mut v);
        }
    }
}

fn right_gate_row(row: &mut [C64], gate: &RightGate, v: &mut Vec<C64>) {
    let g = gate.emb.offsets.len();
    for &b in &gate.emb.bases {
        v.clear();
        v.extend(gate.emb.offsets.iter().map(|&off| row[b + off]));
        for (j, &off) in gate.emb.offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (i, x) in v.iter().enumerate() {
                acc += C64::new(gate.re[j * g + i], gate.im[j * g + i]) * x;
            }
            row[b + off] = acc;
        }
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn right_gate_row_pair_avx2(r0: &mut [C64], r1: &mut [C64], gate: &RightGate) {
    use std::arch::x86_64::*;
    const MAX_G: usize = 8;
    let g = gate.emb.offsets.len();
    if g > MAX_G {
        let mut v = Vec::new();
        right_gate_row(r0, gate, &mut v);
        right_gate_row(r1, gate, &mut v);
        return;
    }
    // C64 is repr(C) { re, im }: each element is one 128-bit lane, and a
    // vector holds the same column of both rows.
    let p0 = r0.as_mut_ptr() as *mut f64;
    let p1 = r1.as_mut_ptr() as *mut f64;
    let offs = &gate.emb.offsets;
    let mut v = [_mm256_setzero_pd(); MAX_G];
    let mut sw = [_mm256_setzero_pd(); MAX_G];
    let mut out = [_mm256_setzero_pd(); MAX_G];
    for &b in &gate.emb.bases {
        for i in 0..g {
            let k = 2 * (b + offs[i]);
            v[i] = _mm256_set_m128d(_mm_loadu_pd(p1.add(k)), _mm_loadu_pd(p0.add(k)));
            sw[i] = _mm256_permute_pd(v[i], 0b0101);
        }
        for j in 0..g {
            let mut acc_re = _mm256_setzero_pd();
            let mut acc_im = _mm256_setzero_pd();
            for i in 0..g {
                let c = j * g + i;
                acc_re = _mm256_fmadd_pd(_mm256_set1_pd(*gate.re.get_unchecked(c)), v[i], acc_re);
                acc_im = _mm256_fmadd_pd(_mm256_set1_pd(*gate.im.get_unchecked(c)), sw[i], acc_im);
            }
            out[j] = _mm256_addsub_pd(acc_re, acc_im);
        }
        for j in 0..g {
            let k = 2 * (b + offs[j]);
            _mm_storeu_pd(p0.add(k), _mm256_castpd256_pd128(out[j]));
            _mm_storeu_pd(p1.add(k), _mm256_extractf128_pd(out[j], 1));
        }
    }
}

/// In place conjugate transpose of a square matrix.
pub(crate) fn adjoint_in_place(m: &mut ComplexMatrix) {
    const B: usize = 32;
    let n = m.rows;
    debug_assert!(m.is_square());
    let data = &mut m.data;
    for r0 in (0..n).step_by(B) {
        for c0 in (r0..n).step_by(B) {
            for r in r0..(r0 + B).min(n) {
                let cs = if c0 == r0 { r } else { c0 };
                for c in cs..(c0 + B).min(n) {
                    let x = data[r * n + c];
                    let y = data[c * n + r];
                    data[r * n + c] = y.conj();
                    data[c * n + r] = x.conj();
                }
            }
        }
    }
}

/// `M ← A M A†` for an arbitrary (not necessarily unitary) `A` on `targets`.
pub(crate) fn sandwich_in_place(
    m: &mut ComplexMatrix,
    n_qubits: usize,
    op: &ComplexMatrix,
    targets: &[usize],
) {
    let emb = Embedding::new(n_qubits, targets);
    left_apply(m, op, &emb);
    right_apply_layer(m, &[(op, &emb)]);
}

/// [`sandwich_in_place`] for Hermitian `M`.
pub(crate) fn sandwich_hermitian_in_place(
    m: &mut ComplexMatrix,
    n_qubits: usize,
    op: &ComplexMatrix,
    targets: &[usize],
) {
    sandwich_hermitian_layer(m, n_qubits, &[(op, targets)]);
}

/// `M ← U M U†` with `U = A_k ⋯ A_1` for Hermitian `M`; the gates may
/// overlap and are applied in the listed order.
///
/// With `X = M U†` the result is `U X = (U X)† = X† U†`, so both halves are
/// row-wise right multiplications around one in-place adjoint.
pub(crate) fn sandwich_hermitian_layer(
    m: &mut ComplexMatrix,
    n_qubits: usize,
    gates: &[(&ComplexMatrix, &[usize])],
) {
    let embs: Vec<Embedding> = gates
        .iter()
        .map(|(_, t)| Embedding::new(n_qubits, t))
        .collect();
    let ops: Vec<(&ComplexMatrix, &Embedding)> = gates
        .iter()
        .zip(&embs)
        .map(|((op, _), e)| (*op, e))
        .collect();
    right_apply_layer(m, &ops);
    adjoint_in_place(m);
    right_apply_layer(m, &ops);
}

fn check_gate(n_qubits: usize, gate: &ComplexMatrix, targets: &QubitSubset) -> Result<()> {
    targets.check_within(n_qubits)?;
    if targets.is_empty() {
        return Err(Error::InvalidQubits(
            "gate needs at least one target".into(),
        ));
    }
    let g = 1usize << targets.len();
    if gate.rows() != g || gate.cols() != g {
        return Err(Error::DimensionMismatch(format!(
            "{}-qubit gate must be {g}x{g}, got {}x{}",
            targets.len(),
            gate.rows(),
            gate.cols()
        )));
    }
    let dev = gate.unitarity_deviation();
    if dev > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation: dev });
    }
    Ok(())
}

/// `U X U†` with `U` embedded on `targets` of the register `op` acts on.
pub fn conjugate_operator(
    op: &ComplexMatrix,
    gate: &ComplexMatrix,
    targets: &QubitSubset,
) -> Result<ComplexMatrix> {
    if !op.is_square() {
        return Err(Error::DimensionMismatch("operator is not square".into()));
    }
    let n = qubits_for_dim(op.rows())?;
    check_gate(n, gate, targets)?;
    let mut out = op.clone();
    sandwich_in_place(&mut out, n, gate, targets.indices());
    Ok(out)
}

/// Applies the unitary `gate` to `targets`: `ρ ↦ U ρ U†`.
pub fn apply_gate(
    state: &DensityMatrix,
    gate: &ComplexMatrix,
    targets: &QubitSubset,
) -> Result<DensityMatrix> {
    let matrix = conjugate_operator(state.matrix(), gate, targets)?;
    Ok(DensityMatrix {
        n_qubits: state.n_qubits,
        matrix,
    })
}

/// Partial trace of a square operator, keeping `keep` in the given order.
pub fn partial_trace_operator(op: &ComplexMatrix, keep: &QubitSubset) -> Result<ComplexMatrix> {
    if !op.is_square() {
        return Err(Error::DimensionMismatch("operator is not square".into()));
    }
    let n = qubits_for_dim(op.rows())?;
    keep.check_within(n)?;
    if keep.is_empty() {
        return Err(Error::InvalidQubits(
            "partial trace needs a non-empty keep set".into(),
        ));
    }
    let traced = keep.complement(n);
    let kept_emb = Embedding::new(n, keep.indices()).offsets;
    let traced_emb = Embedding::new(n, traced.indices()).offsets;
    let dk = kept_emb.len();
    let d = op.rows();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for (i, &ri) in kept_emb.iter().enumerate() {
        for (j, &cj) in kept_emb.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &traced_emb {
                acc += op.data[(ri + t) * d + cj + t];
            }
            out.data[i * dk + j] = acc;
        }
    }
    Ok(out)
}

/// Reduced state on `keep`; qubit order in the result follows `keep`.
pub fn partial_trace(state: &DensityMatrix, keep: &QubitSubset) -> Result<DensityMatrix> {
    let matrix = partial_trace_operator(state.matrix(), keep)?;
    Ok(DensityMatrix {
        n_qubits: keep.len(),
        matrix,
    })
}

/// Partial transpose of a square operator over `transposed`.
pub fn partial_transpose_operator(
    op: &ComplexMatrix,
    transposed: &QubitSubset,
) -> Result<ComplexMatrix> {
    let n = qubits_for_dim(op.rows())?;
    transposed.check_within(n)?;
    let mask: usize = transposed
        .indices()
        .iter()
        .map(|&q| 1usize << bit_of(n, q))
        .sum();
    let d = op.rows();
    let mut out = ComplexMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            let r2 = (r & !mask) | (c & mask);
            let c2 = (c & !mask) | (r & mask);
            out.data[r2 * d + c2] = op.data[r * d + c];
        }
    }
    Ok(out)
}

pub fn partial_transpose(state: &DensityMatrix, transposed: &QubitSubset) -> Result<ComplexMatrix> {
    partial_transpose_operator(state.matrix(), transposed)
}

fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    let dev = h.hermiticity_deviation();
    if dev > 1e-8 {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    Ok(hermitian_eigenvalues_unchecked(h))
}

pub(crate) fn hermitian_eigenvalues_unchecked(h: &ComplexMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = h
        .to_nalgebra()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Ascending eigenvalues with eigenvectors as the matching columns.
pub fn hermitian_eigh(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    check_hermitian(h)?;
    let eig = nalgebra::SymmetricEigen::new(h.to_nalgebra());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = h.rows();
    let vecs = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, vecs))
}

/// `‖H‖₁ = Σ |λ|` for Hermitian `H`.
pub fn trace_norm(h: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(h)?.iter().map(|l| l.abs()).sum())
}

pub fn vn_entropy(state: &DensityMatrix) -> f64 {
    vn_entropy_in(state, LogBase::Two)
}

pub fn vn_entropy_in(state: &DensityMatrix, base: LogBase) -> f64 {
    let s: f64 = state
        .eigenvalues()
        .into_iter()
        .filter(|&p| p > ENTROPY_CLAMP)
        .map(|p| -p * base.log(p))
        .sum();
    s.max(0.0)
}

pub fn renyi2_entropy(state: &DensityMatrix) -> f64 {
    renyi2_entropy_in(state, LogBase::Two)
}

pub fn renyi2_entropy_in(state: &DensityMatrix, base: LogBase) -> f64 {
    (-base.log(state.purity())).max(0.0)
}
