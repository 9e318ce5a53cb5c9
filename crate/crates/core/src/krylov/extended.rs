//! Double-double trajectory engine.
//!
//! A layer reused verbatim makes the Krylov sequence `W^k X₀`, whose span is
//! capped at `D² − D + 1`. Close to that cap the sequence is so ill-conditioned
//! that double-precision rounding opens spurious directions, so this engine
//! keeps the register, the gates and the basis in double-double arithmetic.
//! Gates are drawn in double precision as usual and re-orthonormalized in
//! double-double before use, so the channel is unitary to ~1e-32.

use num_complex::Complex;
use num_traits::Zero;
use twofloat::TwoFloat;

use super::{Engine, Expansion, OperatorVector, RenormalizationOrder};
use crate::circuit::{Circuit, CircuitClass, CircuitSpec, CircuitStreams, SlotAction};
use crate::error::Result;
use crate::linalg::{ComplexMatrix, Embedding, C64};
use crate::random::haar_pure_state;

type Dd = TwoFloat;
type Cdd = Complex<TwoFloat>;

fn dd(x: f64) -> Dd {
    Dd::from_f64(x)
}

fn lift(z: C64) -> Cdd {
    Cdd::new(dd(z.re), dd(z.im))
}

fn norm_sqr(z: Cdd) -> Dd {
    z.re * z.re + z.im * z.im
}

/// Dense square matrix, row-major.
#[derive(Clone, Debug)]
struct Square {
    d: usize,
    data: Vec<Cdd>,
}

impl Square {
    fn zeros(d: usize) -> Self {
        Self {
            d,
            data: vec![Cdd::zero(); d * d],
        }
    }

    fn lift(m: &ComplexMatrix) -> Self {
        Self {
            d: m.rows(),
            data: m.data().iter().copied().map(lift).collect(),
        }
    }

    fn at(&self, i: usize, j: usize) -> Cdd {
        self.data[i * self.d + j]
    }

    fn scale(&mut self, s: Dd) {
        for z in &mut self.data {
            *z = Cdd::new(z.re * s, z.im * s);
        }
    }

    fn trace(&self) -> Cdd {
        (0..self.d).fold(Cdd::zero(), |acc, i| acc + self.at(i, i))
    }

    fn remove_trace(&mut self) {
        let shift = self.trace().re / dd(self.d as f64);
        for i in 0..self.d {
            self.data[i * self.d + i].re -= shift;
        }
    }

    fn hs_norm(&self) -> Dd {
        let s = self.data.iter().fold(Dd::zero(), |acc, &z| acc + norm_sqr(z));
        (s / dd(self.d as f64)).sqrt()
    }

    /// `M ← A M A†` with `A` acting on the embedded targets.
    fn sandwich(&mut self, op: &Square, emb: &Embedding) {
        let d = self.d;
        let g = op.d;
        let mut v = vec![Cdd::zero(); g];
        for &b in &emb.bases {
            for c in 0..d {
                for (i, &off) in emb.offsets.iter().enumerate() {
                    v[i] = self.data[(b + off) * d + c];
                }
                for (j, &off) in emb.offsets.iter().enumerate() {
                    let mut acc = Cdd::zero();
                    for (i, vi) in v.iter().enumerate() {
                        acc += op.at(j, i) * vi;
                    }
                    self.data[(b + off) * d + c] = acc;
                }
            }
        }
        for r in 0..d {
            let row = &mut self.data[r * d..(r + 1) * d];
            for &b in &emb.bases {
                for (i, &off) in emb.offsets.iter().enumerate() {
                    v[i] = row[b + off];
                }
                for (j, &off) in emb.offsets.iter().enumerate() {
                    let mut acc = Cdd::zero();
                    for (i, vi) in v.iter().enumerate() {
                        acc += vi * op.at(j, i).conj();
                    }
                    row[b + off] = acc;
                }
            }
        }
    }

    /// Columns made orthonormal by two modified Gram–Schmidt sweeps.
    fn unitarize(mut self) -> Self {
        let d = self.d;
        for _sweep in 0..2 {
            for j in 0..d {
                for k in 0..j {
                    let c = (0..d).fold(Cdd::zero(), |acc, i| {
                        acc + self.at(i, k).conj() * self.at(i, j)
                    });
                    for i in 0..d {
                        let t = self.at(i, k) * c;
                        self.data[i * d + j] -= t;
                    }
                }
                let n = (0..d)
                    .fold(Dd::zero(), |acc, i| acc + norm_sqr(self.at(i, j)))
                    .sqrt();
                let inv = n.recip();
                for i in 0..d {
                    let z = self.data[i * d + j];
                    self.data[i * d + j] = Cdd::new(z.re * inv, z.im * inv);
                }
            }
        }
        self
    }

    /// Trace over the `n_aux` least significant qubits.
    fn trace_trailing(&self, n_aux: usize) -> Square {
        let a = 1usize << n_aux;
        let ds = self.d / a;
        let mut out = Square::zeros(ds);
        for i in 0..ds {
            for j in 0..ds {
                out.data[i * ds + j] =
                    (0..a).fold(Cdd::zero(), |acc, k| acc + self.at(i * a + k, j * a + k));
            }
        }
        out
    }
}

/// Kraus pair of a fresh-auxiliary slot, built from the re-orthonormalized
/// gate and the normalized auxiliary amplitudes.
fn fresh_kraus(u: &Square, aux: [C64; 2]) -> [Square; 2] {
    let a = [lift(aux[0]), lift(aux[1])];
    let n = (norm_sqr(a[0]) + norm_sqr(a[1])).sqrt().recip();
    let a = a.map(|z| Cdd::new(z.re * n, z.im * n));
    let mut k = [Square::zeros(4), Square::zeros(4)];
    for (m, km) in k.iter_mut().enumerate() {
        for i in 0..4 {
            for j in 0..4 {
                km.data[i * 4 + j] = u.at(2 * i + m, 2 * j) * a[0] + u.at(2 * i + m, 2 * j + 1) * a[1];
            }
        }
    }
    k
}

pub(super) struct ExtendedEngine {
    circuit: Circuit,
    register: Square,
    n_system: usize,
    n_aux: usize,
    t: usize,
    /// Basis in the real coordinates used by the double engine.
    basis: Vec<Vec<Dd>>,
    current: Vec<Dd>,
}

impl ExtendedEngine {
    pub(super) fn new(
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
        let sys = Square::lift(initial.matrix());
        let mut engine = Self {
            circuit: Circuit::new(spec.clone(), streams)?,
            register: Square::lift(&register),
            n_system: spec.n_system,
            n_aux: spec.n_aux(),
            t: 0,
            basis: Vec::new(),
            current: Vec::new(),
        };
        engine.current = coords(&sys);
        Ok(engine)
    }

    fn layer(&mut self) -> Result<()> {
        self.t += 1;
        let n = self.n_system + self.n_aux;
        for draw in self.circuit.draw_step(self.t)? {
            let u = Square::lift(&draw.unitary).unitarize();
            let (p, q) = draw.pair;
            match draw.action {
                SlotAction::Unitary => self.register.sandwich(&u, &Embedding::new(n, &[p, q])),
                SlotAction::PersistentAux(j) => self
                    .register
                    .sandwich(&u, &Embedding::new(n, &[p, q, self.n_system + j])),
                SlotAction::FreshAux(aux) => {
                    let emb = Embedding::new(n, &[p, q]);
                    let [k0, k1] = fresh_kraus(&u, aux);
                    let mut other = self.register.clone();
                    self.register.sandwich(&k0, &emb);
                    other.sandwich(&k1, &emb);
                    for (a, b) in self.register.data.iter_mut().zip(&other.data) {
                        *a += b;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Coordinates matching the double engine: diagonal, then `√2 Re` / `√2 Im`
/// of the upper triangle, all over `√D`.
fn coords(m: &Square) -> Vec<Dd> {
    let d = m.d;
    let s = dd(d as f64).sqrt().recip();
    let r2 = dd(2.0).sqrt() * s;
    let half = dd(0.5);
    let mut out = vec![Dd::zero(); d * d];
    for i in 0..d {
        out[i * d + i] = m.at(i, i).re * s;
        for j in i + 1..d {
            let z = m.at(i, j) + m.at(j, i).conj();
            out[i * d + j] = z.re * half * r2;
            out[j * d + i] = z.im * half * r2;
        }
    }
    out
}

fn dot(a: &[Dd], b: &[Dd]) -> Dd {
    a.iter().zip(b).fold(Dd::zero(), |acc, (x, y)| acc + *x * *y)
}

impl Engine for ExtendedEngine {
    fn t(&self) -> usize {
        self.t
    }

    fn advance(&mut self, layers: usize, order: RenormalizationOrder) -> Result<(f64, f64)> {
        for _ in 0..layers {
            self.layer()?;
        }
        let mut sys = if self.n_aux == 0 {
            self.register.clone()
        } else {
            self.register.trace_trailing(self.n_aux)
        };
        let (pre, norm) = match order {
            RenormalizationOrder::TraceThenNormalize => {
                sys.remove_trace();
                let n = sys.hs_norm();
                (n, n)
            }
            RenormalizationOrder::NormalizeThenTrace => {
                let n = sys.hs_norm();
                sys.remove_trace();
                (sys.hs_norm(), n)
            }
        };
        let scale = norm.recip();
        if scale.hi().is_finite() {
            sys.scale(scale);
            self.register.scale(scale);
        }
        self.current = coords(&sys);
        Ok((pre.hi(), scale.hi()))
    }

    fn expand(&mut self, tol: f64) -> Expansion {
        let mut v = std::mem::take(&mut self.current);
        let mut phi = vec![Dd::zero(); self.basis.len() + 1];
        for _pass in 0..2 {
            for (n, k) in self.basis.iter().enumerate() {
                let c = dot(k, &v);
                for (x, y) in v.iter_mut().zip(k) {
                    *x -= c * *y;
                }
                phi[n] += c;
            }
        }
        let residual = dot(&v, &v).sqrt();
        let appended = residual.hi() > tol;
        if appended {
            let inv = residual.recip();
            v.iter_mut().for_each(|x| *x *= inv);
            self.basis.push(v);
            phi[self.basis.len() - 1] = residual;
        } else {
            phi.pop();
        }
        Expansion {
            coefficients: phi.iter().map(|x| x.hi()).collect(),
            residual: residual.hi(),
            appended,
        }
    }

    fn dimension(&self) -> usize {
        self.basis.len()
    }

    fn gram_deviation(&self) -> f64 {
        let hi: Vec<Vec<f64>> = self.basis.iter().map(|k| k.iter().map(|x| x.hi()).collect()).collect();
        let mut worst = 0.0f64;
        for m in 0..hi.len() {
            for n in m..hi.len() {
                let g: f64 = hi[m].iter().zip(&hi[n]).map(|(a, b)| a * b).sum();
                worst = worst.max((g - if m == n { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }
}
