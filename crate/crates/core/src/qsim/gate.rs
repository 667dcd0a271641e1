use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

use super::C64;
use crate::{Error, Result};

/// A gate with concrete angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    H(usize),
    /// `exp(iα σ3⊗…⊗σ3)` on `support`.
    Phase { support: Vec<usize>, angle: f64 },
    /// `exp(±iπ/4 σ1)`.
    XQuarter { qubit: usize, positive: bool },
    Cz(usize, usize),
    Cnot { control: usize, target: usize },
    /// Arbitrary single-qubit unitary, only used by verification code.
    Unitary { qubit: usize, matrix: [[C64; 2]; 2] },
}

impl Gate {
    pub fn phase(support: &[usize], angle: f64) -> Gate {
        Gate::Phase { support: support.to_vec(), angle }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) => vec![*q],
            Gate::Phase { support, .. } => support.clone(),
            Gate::XQuarter { qubit, .. } | Gate::Unitary { qubit, .. } => vec![*qubit],
            Gate::Cz(a, b) => vec![*a, *b],
            Gate::Cnot { control, target } => vec![*control, *target],
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let qs = self.qubits();
        for (i, &q) in qs.iter().enumerate() {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
            if qs[..i].contains(&q) {
                return Err(Error::RepeatedQubit(q));
            }
        }
        match self {
            Gate::Phase { support, angle } => {
                if support.is_empty() {
                    return Err(Error::EmptySupport);
                }
                if !angle.is_finite() {
                    return Err(Error::NonFiniteAngle);
                }
            }
            Gate::Unitary { matrix, .. } => {
                let dev = unitarity_deviation(matrix);
                if dev > 1e-10 {
                    return Err(Error::NonUnitary(dev));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// True for every gate except non-Clifford phases and general unitaries.
    pub fn is_clifford(&self) -> bool {
        match self {
            Gate::Phase { angle, .. } => is_quarter_multiple(*angle),
            Gate::Unitary { .. } => false,
            _ => true,
        }
    }
}

pub(crate) fn is_quarter_multiple(angle: f64) -> bool {
    let k = angle / FRAC_PI_4;
    (k - k.round()).abs() < 1e-12
}

/// Max-entry deviation of `U U†` from the identity.
pub fn unitarity_deviation(m: &[[C64; 2]; 2]) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let v = m[i][0] * m[j][0].conj() + m[i][1] * m[j][1].conj();
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((v - target).norm());
        }
    }
    dev
}
