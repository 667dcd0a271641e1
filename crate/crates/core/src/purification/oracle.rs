//! Dense reference implementations of the graph-basis noise model and of
//! one two-copy purification round, for cross-checking on small graphs.

use crate::graphstab::Graph;
use crate::pauli::PauliString;
use crate::qsim::{DensityMatrix, Gate, StateVector, C64};
use crate::{Error, Result};

/// Largest graph the two-copy oracle accepts (the simulation uses `2n` qubits).
pub const MAX_ORACLE_VERTICES: usize = 5;

/// `σ3^γ|G⟩` with bit `v` of `γ` on vertex `v`.
pub fn graph_basis(g: &Graph, gamma: usize) -> Result<StateVector> {
    let mut s = g.state()?;
    let zs: Vec<usize> = (0..g.n()).filter(|v| gamma >> v & 1 == 1).collect();
    PauliString::z_on(g.n(), &zs).apply_to(&mut s)?;
    Ok(s)
}

/// Graph-basis weights of a density matrix.
pub fn graph_basis_probs(g: &Graph, rho: &DensityMatrix) -> Result<Vec<f64>> {
    (0..1 << g.n()).map(|gm| Ok(rho.expectation(&graph_basis(g, gm)?))).collect()
}

/// `|G⟩⟨G|` with the depolarizing channel of survival `survival[v]` applied
/// to each vertex, projected on the graph basis.
pub fn dense_noisy_probs(g: &Graph, survival: &[f64]) -> Result<Vec<f64>> {
    if survival.len() != g.n() {
        return Err(Error::ParamCount { expected: g.n(), got: survival.len() });
    }
    let mut rho = DensityMatrix::from_pure(&g.state()?);
    for (q, &p) in survival.iter().enumerate() {
        rho.depolarize(q, p)?;
    }
    graph_basis_probs(g, &rho)
}

/// One purification round on two copies of the graph-diagonal state
/// `probs`, simulated on `2n` qubits.
///
/// Bilateral CNOTs run from copy 2 to copy 1 on `class` and from copy 1 to
/// copy 2 elsewhere. Copy 2 is measured in X on the class and Z elsewhere,
/// the round is kept when every class outcome matches the parity of its
/// neighbours' outcomes, then a local Z fix-up is applied and the edges
/// inside the complement are restored with CZ. Returns the output weights
/// and the success probability.
pub fn dense_round(g: &Graph, probs: &[f64], class: &[usize]) -> Result<(Vec<f64>, f64)> {
    let n = g.n();
    if n > MAX_ORACLE_VERTICES {
        return Err(Error::QubitBudget(2 * n));
    }
    if probs.len() != 1 << n {
        return Err(Error::ParamCount { expected: 1 << n, got: probs.len() });
    }
    g.is_independent(class)?;
    let basis: Vec<StateVector> = (0..1usize << n).map(|gm| graph_basis(g, gm)).collect::<Result<_>>()?;
    let c_mask: usize = class.iter().fold(0, |m, &v| m | 1 << v);
    let rest: Vec<usize> = (0..n).filter(|v| c_mask >> v & 1 == 0).collect();
    let mut out = vec![0.0; 1 << n];
    let mut total = 0.0;
    for mu in 0..1usize << n {
        for nu in 0..1usize << n {
            let w = probs[mu] * probs[nu];
            if w == 0.0 {
                continue;
            }
            let mut s = basis[mu].tensor(&basis[nu])?;
            for v in 0..n {
                let (c, t) = if c_mask >> v & 1 == 1 { (n + v, v) } else { (v, n + v) };
                s.apply_mut(&Gate::Cnot { control: c, target: t })?;
            }
            for &v in class {
                s.apply_mut(&Gate::H(n + v))?;
            }
            // copy 1 occupies the high bits of the index
            for o in 0..1usize << n {
                let bit = |v: usize| (o >> (n - 1 - v)) & 1;
                let accept = class.iter().all(|&c| {
                    let par = g.neighbor_list(c).iter().map(|&u| bit(u)).sum::<usize>() % 2;
                    bit(c) == par
                });
                if !accept {
                    continue;
                }
                let amps: Vec<C64> = (0..1usize << n).map(|i| s.amplitudes()[(i << n) | o]).collect();
                let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
                if norm < 1e-15 {
                    continue;
                }
                let mut phi = StateVector::from_unnormalized(amps)?;
                for &r in &rest {
                    let e: usize = g.neighbor_list(r).iter().filter(|u| c_mask >> **u & 1 == 0).map(|&u| bit(u)).sum();
                    if e % 2 == 1 {
                        PauliString::z_on(n, &[r]).apply_to(&mut phi)?;
                    }
                }
                for &(a, b) in &g.edges() {
                    if c_mask >> a & 1 == 0 && c_mask >> b & 1 == 0 {
                        phi.apply_mut(&Gate::Cz(a, b))?;
                    }
                }
                total += w * norm;
                for (o2, b) in out.iter_mut().zip(&basis) {
                    *o2 += w * norm * phi.fidelity(b);
                }
            }
        }
    }
    if total <= 0.0 {
        return Err(Error::ZeroSuccess);
    }
    Ok((out.iter().map(|x| x / total).collect(), total))
}
