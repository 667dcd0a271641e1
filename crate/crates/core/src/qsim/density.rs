use nalgebra::{DMatrix, SymmetricEigen};

use super::{shift, StateVector, C64};
use crate::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;

/// Mixed state on `n` qubits. Only used where noise or the PPT test needs it.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    m: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn from_pure(psi: &StateVector) -> Self {
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        DensityMatrix { n: psi.n(), m: &v * v.adjoint() }
    }

    /// Checks Hermiticity and unit trace to `1e-12`.
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || !m.nrows().is_power_of_two() {
            return Err(Error::InvalidParameter("density matrix must be square of size 2^n".into()));
        }
        let n = m.nrows().trailing_zeros() as usize;
        let dev = hermitian_deviation(&m);
        if dev > HERMITIAN_TOL {
            return Err(Error::NonHermitian(dev));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > HERMITIAN_TOL || tr.im.abs() > HERMITIAN_TOL {
            return Err(Error::InvalidParameter(format!("trace {tr}")));
        }
        Ok(DensityMatrix { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector) -> f64 {
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        (v.adjoint() * &self.m * &v)[(0, 0)].re
    }

    /// `ρ ↦ U_q ρ U_q†` for a single-qubit matrix.
    pub fn conjugate_single(&mut self, q: usize, u: &[[C64; 2]; 2]) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
        }
        let bit = 1 << shift(self.n, q);
        let dim = self.m.nrows();
        // rows: ρ ← U ρ
        for c in 0..dim {
            for r in 0..dim {
                if r & bit == 0 {
                    let (a0, a1) = (self.m[(r, c)], self.m[(r | bit, c)]);
                    self.m[(r, c)] = u[0][0] * a0 + u[0][1] * a1;
                    self.m[(r | bit, c)] = u[1][0] * a0 + u[1][1] * a1;
                }
            }
        }
        // columns: ρ ← ρ U†
        for r in 0..dim {
            for c in 0..dim {
                if c & bit == 0 {
                    let (a0, a1) = (self.m[(r, c)], self.m[(r, c | bit)]);
                    self.m[(r, c)] = a0 * u[0][0].conj() + a1 * u[0][1].conj();
                    self.m[(r, c | bit)] = a0 * u[1][0].conj() + a1 * u[1][1].conj();
                }
            }
        }
        Ok(())
    }

    /// Local depolarizing channel
    /// `E_p(ρ) = p ρ + (1-p)/4 (ρ + σ1ρσ1 + σ2ρσ2 + σ3ρσ3)` on qubit `q`.
    pub fn depolarize(&mut self, q: usize, p: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("depolarizing parameter {p}")));
        }
        let mut acc = self.m.scale(p + (1.0 - p) / 4.0);
        for pauli in [sigma(1), sigma(2), sigma(3)] {
            let mut term = self.clone();
            term.conjugate_single(q, &pauli)?;
            acc += term.m.scale((1.0 - p) / 4.0);
        }
        self.m = acc;
        Ok(())
    }

    /// Partial transpose over the qubits in `subsystem`.
    pub fn partial_transpose(&self, subsystem: &[usize]) -> Result<DMatrix<C64>> {
        let mut mask = 0usize;
        for &q in subsystem {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
            }
            mask |= 1 << shift(self.n, q);
        }
        let dim = self.m.nrows();
        Ok(DMatrix::from_fn(dim, dim, |r, c| {
            // swap the masked bits between row and column index
            let r2 = (r & !mask) | (c & mask);
            let c2 = (c & !mask) | (r & mask);
            self.m[(r2, c2)]
        }))
    }

    /// Smallest eigenvalue of the partial transpose; negative means NPT.
    pub fn ppt_min_eigenvalue(&self, subsystem: &[usize]) -> Result<f64> {
        let dev = hermitian_deviation(&self.m);
        if dev > 1e-10 {
            return Err(Error::NonHermitian(dev));
        }
        let pt = self.partial_transpose(subsystem)?;
        let eig = SymmetricEigen::new(pt);
        Ok(eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
    }
}

pub(crate) fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let mut dev: f64 = 0.0;
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            dev = dev.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    dev
}

/// Pauli matrix `σ_i`, `i ∈ 0..4`.
pub fn sigma(i: u8) -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let im = C64::new(0.0, 1.0);
    match i {
        0 => [[o, z], [z, o]],
        1 => [[z, o], [o, z]],
        2 => [[z, -im], [im, z]],
        _ => [[o, z], [z, -o]],
    }
}
