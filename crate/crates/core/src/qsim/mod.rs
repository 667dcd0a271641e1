//! Dense statevector and density-matrix engine.
//!
//! Qubit `q` of an `n`-qubit register lives in bit `n - 1 - q` of a basis
//! index, so qubit 0 is the most significant bit and `|q0 q1 ... q(n-1)⟩`
//! reads left to right.
//!
//! Gate conventions: `Z_S(α) = exp(iα σ3⊗…⊗σ3)` on the support `S`, and the
//! measurement basis `B_β = {σ3^k Z(-β)|+⟩}`.

mod density;
mod gate;

pub use density::{sigma, DensityMatrix};
pub use gate::{unitarity_deviation, Gate};
pub(crate) use gate::is_quarter_multiple;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde_json::{json, Value};

use crate::{Error, Result};

pub type C64 = Complex64;

/// Largest register the dense engine accepts.
pub const MAX_QUBITS: usize = 23;

const NORM_TOL: f64 = 1e-10;

#[inline]
pub(crate) fn shift(n: usize, q: usize) -> usize {
    n - 1 - q
}

/// How a measurement picks its outcome.
pub enum Directive<'a> {
    Random(&'a mut dyn RngCore),
    Force(u8),
}

impl Directive<'_> {
    fn choose(&mut self, p0: f64) -> Result<u8> {
        match self {
            Directive::Random(rng) => Ok(if rng.random::<f64>() < p0 { 0 } else { 1 }),
            Directive::Force(k) => Ok(*k),
        }
    }
}

/// Outcome of a projective measurement.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub outcome: u8,
    pub probability: f64,
    pub state: StateVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_budget(n)?;
        if index >= 1 << n {
            return Err(Error::InvalidParameter(format!("basis index {index} for {n} qubits")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// `|+⟩^{⊗n}`.
    pub fn plus(n: usize) -> Result<Self> {
        check_budget(n)?;
        let a = C64::new((1u64 << n) as f64, 0.0).sqrt().inv();
        Ok(Self { n, amps: vec![a; 1 << n] })
    }

    /// Wraps amplitudes that must already be normalized.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n = qubits_for_len(amps.len())?;
        let s = Self { n, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!("state norm {norm}")));
        }
        Ok(s)
    }

    /// Normalizes the given amplitudes.
    pub fn from_unnormalized(amps: Vec<C64>) -> Result<Self> {
        let n = qubits_for_len(amps.len())?;
        let mut s = Self { n, amps };
        let norm = s.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("zero vector".into()));
        }
        s.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        check_budget(self.n + other.n)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { n: self.n + other.n, amps })
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|²`; insensitive to global phase. Registers of
    /// different size have fidelity 0.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        if self.n != other.n {
            return 0.0;
        }
        self.inner(other).norm_sqr()
    }

    pub fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::QubitOutOfRange { qubit: q, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn apply(&self, gate: &Gate) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_mut(gate)?;
        Ok(out)
    }

    pub fn apply_mut(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n)?;
        match gate {
            Gate::H(q) => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let m = [[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]];
                self.apply_single(*q, &m);
            }
            Gate::XQuarter { qubit, positive } => {
                let t = if *positive { 1.0 } else { -1.0 } * std::f64::consts::FRAC_PI_4;
                let (c, s) = (t.cos(), t.sin());
                let m = [[C64::new(c, 0.0), C64::new(0.0, s)], [C64::new(0.0, s), C64::new(c, 0.0)]];
                self.apply_single(*qubit, &m);
            }
            Gate::Unitary { qubit, matrix } => self.apply_single(*qubit, matrix),
            Gate::Phase { support, angle } => {
                let mask = support.iter().fold(0usize, |m, &q| m | 1 << shift(self.n, q));
                let even = C64::from_polar(1.0, *angle);
                let odd = even.conj();
                for (i, a) in self.amps.iter_mut().enumerate() {
                    *a *= if (i & mask).count_ones() % 2 == 0 { even } else { odd };
                }
            }
            Gate::Cz(a, b) => {
                let mask = 1 << shift(self.n, *a) | 1 << shift(self.n, *b);
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *amp = -*amp;
                    }
                }
            }
            Gate::Cnot { control, target } => {
                let c = 1 << shift(self.n, *control);
                let t = 1 << shift(self.n, *target);
                for i in 0..self.amps.len() {
                    if i & c != 0 && i & t == 0 {
                        self.amps.swap(i, i | t);
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn apply_single(&mut self, q: usize, m: &[[C64; 2]; 2]) {
        let bit = 1 << shift(self.n, q);
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// Probability of outcome `k` when measuring `q` in `B_β`.
    pub fn basis_probability(&self, q: usize, beta: f64, k: u8) -> Result<f64> {
        self.check_qubit(q)?;
        Ok(self.contract(&[q], &basis_bra(beta, k)).iter().map(|a| a.norm_sqr()).sum())
    }

    /// Projective measurement of `q` in `B_β`; the returned state keeps the
    /// measured qubit, collapsed onto `|φ^k(β)⟩`.
    pub fn measure_basis(&self, q: usize, beta: f64, directive: Directive<'_>) -> Result<Measurement> {
        let (outcome, probability, rest) = self.measure_basis_discard(q, beta, directive)?;
        let ket = basis_ket(beta, outcome);
        let state = rest.insert_qubits(&[q], &ket);
        Ok(Measurement { outcome, probability, state })
    }

    /// Like [`measure_basis`](Self::measure_basis) but drops the measured
    /// qubit from the returned `(n - 1)`-qubit state.
    pub fn measure_basis_discard(
        &self,
        q: usize,
        beta: f64,
        directive: Directive<'_>,
    ) -> Result<(u8, f64, StateVector)> {
        self.check_qubit(q)?;
        if !beta.is_finite() {
            return Err(Error::NonFiniteAngle);
        }
        let bras = [basis_bra(beta, 0), basis_bra(beta, 1)];
        self.measure_with(&[q], &bras, directive)
    }

    /// Computational-basis measurement of `q`; the qubit is dropped.
    pub fn measure_z_discard(&self, q: usize, directive: Directive<'_>) -> Result<(u8, f64, StateVector)> {
        self.check_qubit(q)?;
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        self.measure_with(&[q], &[vec![one, zero], vec![zero, one]], directive)
    }

    /// Measurement of the pair `(a, b)` in the Bell basis `{σ_i ⊗ 1 |Φ+⟩}`,
    /// outcome `i ∈ 0..4`. The returned state keeps both qubits.
    pub fn bell_measure(&self, a: usize, b: usize, directive: Directive<'_>) -> Result<Measurement> {
        let (outcome, probability, rest) = self.bell_measure_discard(a, b, directive)?;
        let ket: Vec<C64> = bell_bra(outcome).iter().map(|c| c.conj()).collect();
        let state = rest.insert_qubits(&[a, b], &ket);
        Ok(Measurement { outcome, probability, state })
    }

    pub fn bell_measure_discard(
        &self,
        a: usize,
        b: usize,
        directive: Directive<'_>,
    ) -> Result<(u8, f64, StateVector)> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::RepeatedQubit(a));
        }
        let bras: Vec<Vec<C64>> = (0..4).map(bell_bra).collect();
        self.measure_with(&[a, b], &bras, directive)
    }

    fn measure_with(
        &self,
        qs: &[usize],
        bras: &[Vec<C64>],
        mut directive: Directive<'_>,
    ) -> Result<(u8, f64, StateVector)> {
        let branches: Vec<Vec<C64>> = bras.iter().map(|b| self.contract(qs, b)).collect();
        let probs: Vec<f64> = branches.iter().map(|v| v.iter().map(|a| a.norm_sqr()).sum()).collect();
        let outcome = match &mut directive {
            Directive::Force(k) => *k,
            Directive::Random(_) if probs.len() == 2 => directive.choose(probs[0])?,
            Directive::Random(rng) => {
                let mut r = rng.random::<f64>();
                let mut pick = probs.len() - 1;
                for (i, p) in probs.iter().enumerate() {
                    if r < *p {
                        pick = i;
                        break;
                    }
                    r -= p;
                }
                pick as u8
            }
        };
        let k = outcome as usize;
        if k >= probs.len() {
            return Err(Error::InvalidParameter(format!("outcome {outcome}")));
        }
        if probs[k] <= 1e-14 {
            return Err(Error::ZeroProbability(outcome));
        }
        let norm = probs[k].sqrt();
        let amps = branches[k].iter().map(|a| a / norm).collect();
        Ok((outcome, probs[k], StateVector { n: self.n - qs.len(), amps }))
    }

    /// Applies `⟨bra|` to the qubits `qs` (first listed is the most
    /// significant bit of the bra index), returning unnormalized amplitudes
    /// over the remaining qubits in their original order.
    pub(crate) fn contract(&self, qs: &[usize], bra: &[C64]) -> Vec<C64> {
        let k = qs.len();
        let rest = self.n - k;
        let shifts: Vec<usize> = qs.iter().map(|&q| shift(self.n, q)).collect();
        let kept: Vec<usize> = (0..self.n).filter(|q| !qs.contains(q)).map(|q| shift(self.n, q)).collect();
        let mut out = vec![C64::new(0.0, 0.0); 1 << rest];
        for (j, o) in out.iter_mut().enumerate() {
            let mut base = 0usize;
            for (pos, &s) in kept.iter().enumerate() {
                if j >> (rest - 1 - pos) & 1 == 1 {
                    base |= 1 << s;
                }
            }
            let mut acc = C64::new(0.0, 0.0);
            for (sub, b) in bra.iter().enumerate() {
                let mut idx = base;
                for (pos, &s) in shifts.iter().enumerate() {
                    if sub >> (k - 1 - pos) & 1 == 1 {
                        idx |= 1 << s;
                    }
                }
                acc += b * self.amps[idx];
            }
            *o = acc;
        }
        out
    }

    /// Inverse of [`contract`](Self::contract) for product kets: places
    /// `ket` on qubit positions `qs` of the enlarged register.
    pub(crate) fn insert_qubits(&self, qs: &[usize], ket: &[C64]) -> StateVector {
        let n = self.n + qs.len();
        let kept: Vec<usize> = (0..n).filter(|q| !qs.contains(q)).collect();
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        for (i, amp) in amps.iter_mut().enumerate() {
            let mut sub = 0;
            for &q in qs {
                sub = sub << 1 | (i >> shift(n, q) & 1);
            }
            let mut j = 0;
            for &q in &kept {
                j = j << 1 | (i >> shift(n, q) & 1);
            }
            *amp = ket[sub] * self.amps[j];
        }
        StateVector { n, amps }
    }

    /// Reduced density matrix of `subset` (rows ordered by `subset`).
    pub fn reduced_density(&self, subset: &[usize]) -> Result<DMatrix<C64>> {
        for &q in subset {
            self.check_qubit(q)?;
        }
        let k = subset.len();
        let rest: Vec<usize> = (0..self.n).filter(|q| !subset.contains(q)).collect();
        let rows = 1 << k;
        let cols = 1 << rest.len();
        let mut m = DMatrix::<C64>::zeros(rows, cols);
        for (i, a) in self.amps.iter().enumerate() {
            let mut r = 0;
            for &q in subset {
                r = r << 1 | (i >> shift(self.n, q) & 1);
            }
            let mut c = 0;
            for &q in &rest {
                c = c << 1 | (i >> shift(self.n, q) & 1);
            }
            m[(r, c)] = *a;
        }
        Ok(&m * m.adjoint())
    }

    /// Von Neumann entropy (base 2) of the reduced state of `subset`.
    pub fn entanglement_entropy(&self, subset: &[usize]) -> Result<f64> {
        let mut uniq = subset.to_vec();
        uniq.sort_unstable();
        uniq.dedup();
        if uniq.is_empty() || uniq.len() >= self.n {
            return Err(Error::TrivialBipartition);
        }
        for &q in &uniq {
            self.check_qubit(q)?;
        }
        let side = if 2 * uniq.len() <= self.n {
            uniq
        } else {
            (0..self.n).filter(|q| !uniq.contains(q)).collect()
        };
        let rho = self.reduced_density(&side)?;
        Ok(von_neumann_entropy(rho))
    }

    /// Debug dump: JSON array of `[re, im]` pairs.
    pub fn to_json(&self) -> Value {
        Value::Array(self.amps.iter().map(|a| json!([a.re, a.im])).collect())
    }
}

/// Entropy in bits of a Hermitian, trace-one matrix.
pub fn von_neumann_entropy(rho: DMatrix<C64>) -> f64 {
    let eig = SymmetricEigen::new(rho);
    eig.eigenvalues
        .iter()
        .filter(|&&l| l > 1e-14)
        .map(|&l| -l * l.log2())
        .sum()
}

/// `⟨φ^k(β)|` with `|φ^k(β)⟩ = σ3^k Z(-β)|+⟩`.
pub fn basis_bra(beta: f64, k: u8) -> Vec<C64> {
    basis_ket(beta, k).iter().map(|c| c.conj()).collect()
}

pub fn basis_ket(beta: f64, k: u8) -> Vec<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if k == 0 { 1.0 } else { -1.0 };
    vec![C64::from_polar(h, -beta), C64::from_polar(sign * h, beta)]
}

/// `⟨Φ_i|` for `|Φ_i⟩ = σ_i ⊗ 1 |Φ+⟩`.
pub fn bell_bra(i: u8) -> Vec<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let r = |x: f64| C64::new(x * h, 0.0);
    let ket = match i {
        0 => vec![r(1.0), z, z, r(1.0)],
        1 => vec![z, r(1.0), r(1.0), z],
        2 => vec![z, C64::new(0.0, -h), C64::new(0.0, h), z],
        _ => vec![r(1.0), z, z, r(-1.0)],
    };
    ket.iter().map(|c| c.conj()).collect()
}

fn check_budget(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        Err(Error::QubitBudget(n))
    } else {
        Ok(())
    }
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("amplitude count {len} is not a power of two")));
    }
    let n = len.trailing_zeros() as usize;
    check_budget(n)?;
    Ok(n)
}
