//! Pauli strings with exact phase tracking and their conjugation by Clifford
//! gates. Shared by the compiler's Pauli frame and the stabilizer tableau.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::qsim::{sigma, Gate, StateVector, C64};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Pauli {
    #[default]
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Index in the `σ_0..σ_3` convention.
    pub fn index(self) -> u8 {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    pub fn from_index(i: u8) -> Pauli {
        match i & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    /// `a·b = i^k c`, returns `(k, c)`.
    pub fn mul(a: Pauli, b: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (a, b) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `i^phase · P_0 ⊗ P_1 ⊗ …`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    phase: u8,
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { phase: 0, letters: vec![Pauli::I; n] }
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.letters[q] = p;
        s
    }

    pub fn from_letters(letters: Vec<Pauli>) -> Self {
        PauliString { phase: 0, letters }
    }

    /// `Z` on every qubit of `support`.
    pub fn z_on(n: usize, support: &[usize]) -> Self {
        let mut s = Self::identity(n);
        for &q in support {
            s.letters[q] = Pauli::Z;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn get(&self, q: usize) -> Pauli {
        self.letters[q]
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        self.letters[q] = p;
    }

    /// Exponent `k` of the overall factor `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, k: u8) -> Self {
        self.phase = k & 3;
        self
    }

    /// Overall sign as a complex number.
    pub fn sign(&self) -> C64 {
        [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][self.phase as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// `self · other`.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.len(), other.len(), "Pauli strings of different length");
        let mut phase = self.phase + other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (k, c) = Pauli::mul(a, b);
                phase += k;
                c
            })
            .collect();
        PauliString { phase: phase & 3, letters }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Sub-string on `qubits`, in the given order, phase dropped.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        PauliString::from_letters(qubits.iter().map(|&q| self.letters[q]).collect())
    }

    /// `U P U†` for a Clifford gate `U`.
    pub fn conjugate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.len())?;
        let n = self.len();
        match gate {
            Gate::H(q) => {
                let images = [self_image(n, *q, Pauli::Z), self_image(n, *q, Pauli::X)];
                self.map_factors(&[*q], |_, x| images[if x { 0 } else { 1 }].clone());
            }
            Gate::Cnot { control, target } => {
                let (c, t) = (*control, *target);
                self.map_factors(&[c, t], |q, x| {
                    let mut img = PauliString::identity(n);
                    if q == c && x {
                        img.letters[c] = Pauli::X;
                        img.letters[t] = Pauli::X;
                    } else if q == t && !x {
                        img.letters[c] = Pauli::Z;
                        img.letters[t] = Pauli::Z;
                    } else {
                        img.letters[q] = if x { Pauli::X } else { Pauli::Z };
                    }
                    img
                });
            }
            Gate::Cz(a, b) => {
                self.conjugate(&Gate::H(*b))?;
                self.conjugate(&Gate::Cnot { control: *a, target: *b })?;
                self.conjugate(&Gate::H(*b))?;
            }
            Gate::Phase { support, angle } => {
                if !gate.is_clifford() {
                    return Err(Error::NonClifford(format!("phase angle {angle}")));
                }
                let k = quarter_turns(*angle);
                self.rotate(&PauliString::z_on(n, support), k);
            }
            Gate::XQuarter { qubit, positive } => {
                let k = if *positive { 1 } else { 7 };
                self.rotate(&PauliString::single(n, *qubit, Pauli::X), k);
            }
            Gate::Unitary { .. } => return Err(Error::NonClifford("general unitary".into())),
        }
        Ok(())
    }

    /// Conjugation by `exp(i k π/4 P)`.
    fn rotate(&mut self, p: &PauliString, k: u8) {
        if self.commutes_with(p) {
            return;
        }
        // exp(2iθP) Q with 2θ = kπ/2
        match k % 4 {
            0 => {}
            1 => *self = p.mul(self).with_phase_add(1),
            2 => self.phase = (self.phase + 2) & 3,
            _ => *self = p.mul(self).with_phase_add(3),
        }
    }

    fn with_phase_add(mut self, k: u8) -> Self {
        self.phase = (self.phase + k) & 3;
        self
    }

    /// Replaces the factors on `qubits` by the product of the images of
    /// their X and Z parts (`Y = iXZ`).
    fn map_factors(&mut self, qubits: &[usize], image: impl Fn(usize, bool) -> PauliString) {
        let n = self.len();
        let mut acc = PauliString::identity(n).with_phase(self.phase);
        for q in 0..n {
            if !qubits.contains(&q) {
                acc.letters[q] = self.letters[q];
            }
        }
        for &q in qubits {
            let l = self.letters[q];
            if l == Pauli::I {
                continue;
            }
            let mut f = PauliString::identity(n);
            if l.has_x() {
                f = f.mul(&image(q, true));
            }
            if l.has_z() {
                f = f.mul(&image(q, false));
            }
            if l == Pauli::Y {
                f.phase = (f.phase + 1) & 3;
            }
            acc = acc.mul(&f);
        }
        *self = acc;
    }

    /// Applies the operator (including its phase) to a state.
    pub fn apply_to(&self, state: &mut StateVector) -> Result<()> {
        if state.n() != self.len() {
            return Err(Error::InvalidParameter(format!(
                "Pauli string on {} qubits applied to {} qubits",
                self.len(),
                state.n()
            )));
        }
        for (q, &l) in self.letters.iter().enumerate() {
            if l != Pauli::I {
                state.apply_single(q, &sigma(l.index()));
            }
        }
        if self.phase != 0 {
            let s = self.sign();
            *state = StateVector::from_amplitudes(state.amplitudes().iter().map(|a| a * s).collect())?;
        }
        Ok(())
    }

    /// Dense matrix, qubit 0 as the most significant tensor factor.
    pub fn to_dense(&self) -> nalgebra::DMatrix<C64> {
        let mut m = nalgebra::DMatrix::<C64>::identity(1, 1) * self.sign();
        for &l in &self.letters {
            let s = sigma(l.index());
            let f = nalgebra::DMatrix::from_fn(2, 2, |r, c| s[r][c]);
            m = m.kronecker(&f);
        }
        m
    }
}

fn self_image(n: usize, q: usize, p: Pauli) -> PauliString {
    PauliString::single(n, q, p)
}

fn quarter_turns(angle: f64) -> u8 {
    let k = (angle / std::f64::consts::FRAC_PI_4).round() as i64;
    k.rem_euclid(8) as u8
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["+", "+i", "-", "-i"][self.phase as usize])?;
        for l in &self.letters {
            write!(f, "{}", l.letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            (0, s.strip_prefix('+').unwrap_or(s))
        };
        let letters = rest
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Malformed(format!("Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString { phase, letters })
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
