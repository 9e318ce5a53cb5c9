//! Krylov complexity of circuit trajectories.
//!
//! The initial state is made traceless and unit-norm under the normalized
//! Hilbert–Schmidt product `(A|B) = Tr(A†B)/D`, evolved one layer per step,
//! renormalized, and orthogonalized against the basis built so far. `C_K(t)`
//! is the mean basis position of the current trajectory vector.
//!
//! Every trajectory operator is Hermitian, so the basis is stored as real
//! coordinates in which the product above is the Euclidean dot product.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, CircuitClass, CircuitSpec, CircuitStreams, FullState};
use crate::error::{Error, Result};
use crate::linalg::{qubits_for_dim, ComplexMatrix, DensityMatrix, C64};
use crate::random::haar_pure_state;

mod extended;

use extended::ExtendedEngine;

/// Traceless parts with a smaller HS norm count as zero.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// An operator treated as a vector under `(A|B) = Tr(A†B)/D`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorVector {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl OperatorVector {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(
                "operator vector must be square".into(),
            ));
        }
        let n_qubits = qubits_for_dim(matrix.rows())?;
        Ok(Self { n_qubits, matrix })
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

    pub fn norm(&self) -> f64 {
        hs_norm(&self.matrix)
    }
}

fn hs_norm(m: &ComplexMatrix) -> f64 {
    m.frobenius_norm() / (m.rows() as f64).sqrt()
}

/// `(A|B) = Tr(A†B)/D`.
pub fn hs_inner(a: &OperatorVector, b: &OperatorVector) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operators of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let s: C64 = a
        .matrix
        .data()
        .iter()
        .zip(b.matrix.data())
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(s / a.dim() as f64)
}

fn remove_trace(m: &mut ComplexMatrix) {
    let d = m.rows();
    let shift = m.trace() / d as f64;
    let data = m.data_mut();
    for i in 0..d {
        data[i * d + i] -= shift;
    }
}

/// Traceless, unit-norm version of `state`.
pub fn prepare_initial(state: &DensityMatrix) -> Result<OperatorVector> {
    prepare_operator(state.matrix().clone())
}

/// [`prepare_initial`] for an arbitrary square operator.
pub fn prepare_operator(mut m: ComplexMatrix) -> Result<OperatorVector> {
    remove_trace(&mut m);
    let norm = hs_norm(&m);
    if norm < DEGENERATE_NORM {
        return Err(Error::DegenerateInitialState);
    }
    m.scale_in_place(1.0 / norm);
    OperatorVector::new(m)
}

/// Real coordinates of a Hermitian operator: diagonal entries, then `√2 Re`
/// and `√2 Im` of the upper triangle (stored in the upper and lower slots),
/// all divided by `√D`.
fn to_coords(m: &ComplexMatrix, out: &mut [f64]) {
    let d = m.rows();
    let s = 1.0 / (d as f64).sqrt();
    let r2 = std::f64::consts::SQRT_2 * s;
    let a = m.data();
    for i in 0..d {
        out[i * d + i] = a[i * d + i].re * s;
        for j in i + 1..d {
            // Average the two triangles so rounding asymmetry does not leak.
            let z = (a[i * d + j] + a[j * d + i].conj()) * 0.5;
            out[i * d + j] = z.re * r2;
            out[j * d + i] = z.im * r2;
        }
    }
}

fn from_coords(x: &[f64], d: usize) -> ComplexMatrix {
    let sd = (d as f64).sqrt();
    let r = sd / std::f64::consts::SQRT_2;
    ComplexMatrix::from_fn(d, d, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => C64::new(x[i * d + i] * sd, 0.0),
        std::cmp::Ordering::Less => C64::new(x[i * d + j] * r, x[j * d + i] * r),
        std::cmp::Ordering::Greater => C64::new(x[j * d + i] * r, -x[i * d + j] * r),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let (ca, ra) = a.split_at(a.len() - a.len() % 8);
    let (cb, rb) = b.split_at(ca.len());
    for (x, y) in ca.chunks_exact(8).zip(cb.chunks_exact(8)) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    acc.iter().sum::<f64>() + tail
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yk, xk) in y.iter_mut().zip(x) {
        *yk += a * xk;
    }
}

/// Coefficients of one trajectory vector in the basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    /// `φ_n = (K_n|v)` for every basis vector after the update.
    pub coefficients: Vec<f64>,
    /// Residual norm after both orthogonalization passes.
    pub residual: f64,
    pub appended: bool,
}

/// Orthonormal Hermitian operators in order of discovery.
#[derive(Clone, Debug)]
pub struct KrylovBasis {
    dim: usize,
    coords: Vec<f64>,
    len: usize,
}

impl KrylovBasis {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            coords: Vec::new(),
            len: 0,
        }
    }

    /// Storage for a full basis of `D² − 1` vectors on `n` qubits.
    pub fn full_basis_bytes(n_qubits: usize) -> usize {
        let d2 = 1usize << (2 * n_qubits);
        (d2 - 1) * d2 * std::mem::size_of::<f64>()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn width(&self) -> usize {
        self.dim * self.dim
    }

    fn coords(&self, n: usize) -> &[f64] {
        &self.coords[n * self.width()..(n + 1) * self.width()]
    }

    pub fn vector(&self, n: usize) -> OperatorVector {
        OperatorVector::new(from_coords(self.coords(n), self.dim)).expect("square power of two")
    }

    /// Modified Gram–Schmidt with one re-orthogonalization pass; the residual
    /// becomes a new basis vector if its norm exceeds `tol`.
    pub fn expand(&mut self, op: &ComplexMatrix, tol: f64) -> Expansion {
        let w = self.width();
        let mut v = vec![0.0; w];
        to_coords(op, &mut v);
        let mut phi = vec![0.0; self.len + 1];
        for _pass in 0..2 {
            for n in 0..self.len {
                let k = &self.coords[n * w..(n + 1) * w];
                let c = dot(k, &v);
                axpy(&mut v, -c, k);
                phi[n] += c;
            }
        }
        let residual = dot(&v, &v).sqrt();
        let appended = residual > tol;
        if appended {
            let inv = 1.0 / residual;
            v.iter_mut().for_each(|x| *x *= inv);
            self.coords.extend_from_slice(&v);
            self.len += 1;
            phi[self.len - 1] = residual;
        } else {
            phi.pop();
        }
        Expansion {
            coefficients: phi,
            residual,
            appended,
        }
    }

    /// `max |(K_m|K_n) − δ_mn|` over the whole basis.
    pub fn gram_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in 0..self.len {
            for n in m..self.len {
                let g = dot(self.coords(m), self.coords(n));
                let target = if m == n { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }
}

/// Order of trace removal and renormalization after each layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenormalizationOrder {
    #[default]
    TraceThenNormalize,
    NormalizeThenTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KrylovConfig {
    pub max_steps: usize,
    /// Residual norm above which a new basis vector is accepted.
    pub tol: f64,
    /// Stop after this many consecutive steps without basis growth; `None`
    /// runs all `max_steps`.
    pub stall_window: Option<usize>,
    pub renormalization: RenormalizationOrder,
    /// Circuit layers applied per Krylov step. `None` means one layer, or one
    /// full period (two layers) in same-unitary mode.
    pub layers_per_step: Option<usize>,
    pub precision: Precision,
}

/// Arithmetic used for the trajectory and the basis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    /// Extended for same-unitary circuits up to [`EXTENDED_AUTO_MAX_QUBITS`]
    /// system qubits, double otherwise.
    #[default]
    Auto,
    Double,
    /// Double-double register, gates and basis.
    Extended,
}

/// Largest system for which [`Precision::Auto`] picks extended arithmetic.
pub const EXTENDED_AUTO_MAX_QUBITS: usize = 4;

impl Default for KrylovConfig {
    fn default() -> Self {
        Self {
            max_steps: 10_000,
            tol: 1e-10,
            stall_window: Some(64),
            renormalization: RenormalizationOrder::default(),
            layers_per_step: None,
            precision: Precision::Auto,
        }
    }
}

impl KrylovConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol <= 1e-6) {
            return Err(Error::InvalidArgument(format!(
                "Krylov tolerance {} outside (0, 1e-6]",
                self.tol
            )));
        }
        if self.layers_per_step == Some(0) {
            return Err(Error::InvalidArgument(
                "layers_per_step must be positive".into(),
            ));
        }
        if self.stall_window == Some(0) {
            return Err(Error::InvalidArgument(
                "stall window must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn layers_for(&self, spec: &CircuitSpec) -> usize {
        self.layers_per_step
            .unwrap_or(if spec.same_unitary { 2 } else { 1 })
    }

    pub fn extended_for(&self, spec: &CircuitSpec) -> bool {
        match self.precision {
            Precision::Auto => spec.same_unitary && spec.n_system <= EXTENDED_AUTO_MAX_QUBITS,
            Precision::Double => false,
            Precision::Extended => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrylovResult {
    /// Krylov dimension `K` at termination.
    pub dimension: usize,
    /// `C_K(t)` for `t = 0..=steps`.
    pub complexity: Vec<f64>,
    /// `Σ_n |φ_n(t)|²`.
    pub coefficient_norms: Vec<f64>,
    /// HS norm of the traceless evolved operator before renormalization;
    /// the entry for `t = 0` is 1.
    pub pre_norms: Vec<f64>,
    /// Basis size after each step.
    pub basis_sizes: Vec<usize>,
    /// Orthogonalization residual norm at each step.
    pub residuals: Vec<f64>,
    pub tol: f64,
    /// Orthonormality defect of the final basis.
    pub gram_deviation: f64,
}

impl KrylovResult {
    pub fn steps(&self) -> usize {
        self.complexity.len() - 1
    }
}

fn complexity_of(phi: &[f64]) -> (f64, f64) {
    let mass: f64 = phi.iter().map(|x| x * x).sum();
    let weighted: f64 = phi.iter().enumerate().map(|(n, x)| n as f64 * x * x).sum();
    (if mass > 0.0 { weighted / mass } else { 0.0 }, mass)
}

/// One way of evolving the trajectory and growing the basis.
trait Engine {
    fn t(&self) -> usize;
    /// Advances `layers` layers, removes the trace and renormalizes. Returns
    /// the traceless pre-normalization norm and the applied scale factor.
    fn advance(&mut self, layers: usize, order: RenormalizationOrder) -> Result<(f64, f64)>;
    /// Orthogonalizes the current vector against the basis.
    fn expand(&mut self, tol: f64) -> Expansion;
    fn dimension(&self) -> usize;
    /// `max |(K_m|K_n) − δ_mn|` over the basis.
    fn gram_deviation(&self) -> f64;
}

/// Double-precision engine: the full evolving operator (system plus any
/// persistent auxiliaries), the circuit driving it, and the basis.
struct DoubleEngine {
    circuit: Circuit,
    state: FullState,
    t: usize,
    basis: KrylovBasis,
    current: ComplexMatrix,
}

impl DoubleEngine {
    fn new(
        spec: &CircuitSpec,
        initial: &OperatorVector,
        mut streams: CircuitStreams,
    ) -> Result<Self> {
        let mut register = initial.matrix().clone();
        if spec.class == CircuitClass::Mforc {
            for _ in 0..spec.n_aux() {
                register = register.kron(haar_pure_state(1, &mut streams.auxiliaries).matrix());
            }
        }
        let state = FullState::from_operator(register, spec.n_system, spec.n_aux())?;
        Ok(Self {
            circuit: Circuit::new(spec.clone(), streams)?,
            state,
            t: 0,
            basis: KrylovBasis::new(initial.dim()),
            current: initial.matrix().clone(),
        })
    }
}

impl Engine for DoubleEngine {
    fn t(&self) -> usize {
        self.t
    }

    fn advance(&mut self, layers: usize, order: RenormalizationOrder) -> Result<(f64, f64)> {
        for _ in 0..layers {
            self.t += 1;
            self.circuit.step(&mut self.state, self.t)?;
        }
        let mut sys = self.state.reduced_system_operator();
        let (pre, norm) = match order {
            RenormalizationOrder::TraceThenNormalize => {
                remove_trace(&mut sys);
                let n = hs_norm(&sys);
                (n, n)
            }
            RenormalizationOrder::NormalizeThenTrace => {
                let n = hs_norm(&sys);
                remove_trace(&mut sys);
                (hs_norm(&sys), n)
            }
        };
        let scale = 1.0 / norm;
        if scale.is_finite() {
            sys.scale_in_place(scale);
            self.state.register_mut().scale_in_place(scale);
        }
        self.current = sys;
        Ok((pre, scale))
    }

    fn expand(&mut self, tol: f64) -> Expansion {
        self.basis.expand(&self.current, tol)
    }

    fn dimension(&self) -> usize {
        self.basis.len()
    }

    fn gram_deviation(&self) -> f64 {
        self.basis.gram_deviation()
    }
}

/// Runs the trajectory method for one realization.
pub fn krylov_run(
    spec: &CircuitSpec,
    initial: &DensityMatrix,
    config: &KrylovConfig,
    streams: CircuitStreams,
) -> Result<KrylovResult> {
    spec.validate()?;
    config.validate()?;
    if initial.n_qubits() != spec.n_system {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} qubits, circuit has {}",
            initial.n_qubits(),
            spec.n_system
        )));
    }
    let v0 = prepare_initial(initial)?;
    if config.extended_for(spec) {
        drive(ExtendedEngine::new(spec, &v0, streams)?, spec, config)
    } else {
        drive(DoubleEngine::new(spec, &v0, streams)?, spec, config)
    }
}

fn drive(mut engine: impl Engine, spec: &CircuitSpec, config: &KrylovConfig) -> Result<KrylovResult> {
    let layers = config.layers_for(spec);
    let first = engine.expand(config.tol);
    let (c0, m0) = complexity_of(&first.coefficients);
    let mut result = KrylovResult {
        dimension: 0,
        complexity: vec![c0],
        coefficient_norms: vec![m0],
        pre_norms: vec![1.0],
        basis_sizes: vec![engine.dimension()],
        residuals: vec![first.residual],
        tol: config.tol,
        gram_deviation: 0.0,
    };
    let mut stalled = 0;
    for _ in 0..config.max_steps {
        let (pre, scale) = engine.advance(layers, config.renormalization)?;
        if !(pre > DEGENERATE_NORM && scale.is_finite()) {
            return Err(Error::Invariant(format!(
                "Krylov trajectory collapsed to the identity at t = {}",
                engine.t()
            )));
        }
        let exp = engine.expand(config.tol);
        let (c, m) = complexity_of(&exp.coefficients);
        result.complexity.push(c);
        result.coefficient_norms.push(m);
        result.pre_norms.push(pre);
        result.basis_sizes.push(engine.dimension());
        result.residuals.push(exp.residual);
        stalled = if exp.appended { 0 } else { stalled + 1 };
        if config.stall_window.is_some_and(|w| stalled >= w) {
            break;
        }
    }
    result.dimension = engine.dimension();
    result.gram_deviation = engine.gram_deviation();
    Ok(result)
}

/// Plot-ready `(t, C_K(t))` pairs.
pub fn complexity_series(result: &KrylovResult) -> Vec<(usize, f64)> {
    result.complexity.iter().copied().enumerate().collect()
}
