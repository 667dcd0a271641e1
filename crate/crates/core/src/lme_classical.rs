//! Locally maximally entanglable states (LMESs), their generalized
//! stabilizers, single-copy bit extraction, and a classical channel riding
//! on the random `σ3` corrections of remote preparation.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::canonical_form::{Angle, GateSequence, Op};
use crate::compiler::{compile_all_gadgets, run_schedule, Outcomes};
use crate::graphstab::{chromatic_info, color_classes, Graph};
use crate::pauli::Pauli;
use crate::qsim::{Gate, StateVector, C64};
use crate::{Error, Result};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmesGate {
    pub support: Vec<usize>,
    pub angle: f64,
}

/// `U|+⟩^{⊗n}` with `U` a product of phase gates `Z_S(α) = e^{iα σ3^{⊗S}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmesSpec {
    pub n: usize,
    pub gates: Vec<LmesGate>,
}

/// Decomposition of the `k`-qubit π-phase gate `1 - 2|1…1⟩⟨1…1|` on
/// `support` into phase gates, up to a global phase:
/// `Π_{T ⊆ S, T ≠ ∅} Z_T((-1)^{|T|} π / 2^k)`.
pub fn pi_phase_gate(support: &[usize]) -> Vec<LmesGate> {
    let k = support.len();
    (1..1usize << k)
        .map(|m| {
            let t: Vec<usize> = (0..k).filter(|i| m >> i & 1 == 1).map(|i| support[i]).collect();
            let sign = if t.len() % 2 == 0 { 1.0 } else { -1.0 };
            LmesGate { support: t, angle: sign * PI / (1u64 << k) as f64 }
        })
        .collect()
}

impl LmesSpec {
    pub fn new(n: usize, gates: Vec<LmesGate>) -> Result<Self> {
        let s = LmesSpec { n, gates };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > crate::qsim::MAX_QUBITS {
            return Err(Error::UnsupportedQubitCount(self.n));
        }
        for g in &self.gates {
            Gate::phase(&g.support, g.angle).validate(self.n)?;
        }
        Ok(())
    }

    /// Graph state of `g` as a product of controlled-Z gates.
    pub fn graph_state(g: &Graph) -> Result<Self> {
        let gates = g.edges().into_iter().flat_map(|(a, b)| pi_phase_gate(&[a, b])).collect();
        LmesSpec::new(g.n(), gates)
    }

    /// Sum of the gate phases on basis state `x` (qubit 0 is the most
    /// significant bit of `x`).
    pub fn beta(&self, x: usize) -> f64 {
        self.gates
            .iter()
            .map(|g| {
                let parity = g.support.iter().map(|&q| x >> (self.n - 1 - q) & 1).sum::<usize>() % 2;
                if parity == 0 { g.angle } else { -g.angle }
            })
            .sum()
    }

    /// Whether every relative phase `β_x - β_0` is a multiple of π.
    pub fn is_pi_lmes(&self) -> bool {
        let b0 = self.beta(0);
        (0..1usize << self.n).all(|x| {
            let r = (self.beta(x) - b0) / PI;
            (r - r.round()).abs() < TOL
        })
    }

    /// Qubits sharing a gate are adjacent.
    pub fn interaction_graph(&self) -> Graph {
        let mut edges = Vec::new();
        for g in &self.gates {
            for (i, &a) in g.support.iter().enumerate() {
                for &b in &g.support[i + 1..] {
                    edges.push((a, b));
                }
            }
        }
        Graph::from_edges(self.n, &edges).expect("validated supports")
    }

    fn check_qubit(&self, j: usize) -> Result<()> {
        if j >= self.n {
            Err(Error::QubitOutOfRange { qubit: j, n: self.n })
        } else {
            Ok(())
        }
    }

    /// `e^{i(β_{x⊕e_j} - β_x)}`, the diagonal part of `S_j = σ1^{(j)} D_j`.
    pub fn stabilizer_phase(&self, j: usize, x: usize) -> C64 {
        let flip = 1 << (self.n - 1 - j);
        C64::from_polar(1.0, self.beta(x ^ flip) - self.beta(x))
    }

    /// `m_l = ⟨l|U_j|l⟩` for the neighbour bits `l` (in the order of
    /// `interaction_graph().neighbor_list(j)`); `±1` for π-LMESs.
    pub fn neighbor_sign(&self, j: usize, l: &[u8]) -> Result<i8> {
        let nb = self.interaction_graph().neighbor_list(j);
        if l.len() != nb.len() {
            return Err(Error::ParamCount { expected: nb.len(), got: l.len() });
        }
        let x = nb.iter().zip(l).fold(0usize, |x, (&q, &b)| x | (b as usize) << (self.n - 1 - q));
        let d = self.stabilizer_phase(j, x);
        if d.im.abs() > TOL || (d.re.abs() - 1.0).abs() > TOL {
            return Err(Error::NotPiLmes(format!("stabilizer phase {d} on qubit {j}")));
        }
        Ok(if d.re > 0.0 { 1 } else { -1 })
    }

    pub fn gate_sequence(&self) -> Result<GateSequence> {
        let ops = self.gates.iter().enumerate().map(|(i, g)| Op::phase(&g.support, Angle::Slot(i))).collect();
        GateSequence::new(self.n, ops)
    }

    pub fn angles(&self) -> Vec<f64> {
        self.gates.iter().map(|g| g.angle).collect()
    }
}

pub fn build_lmes(spec: &LmesSpec) -> Result<StateVector> {
    spec.validate()?;
    let mut s = StateVector::plus(spec.n)?;
    for g in &spec.gates {
        s.apply_mut(&Gate::phase(&g.support, g.angle))?;
    }
    Ok(s)
}

/// Dense `S_k = U σ1^{(k)} U†`.
pub fn generalized_stabilizer(spec: &LmesSpec, k: usize) -> Result<DMatrix<C64>> {
    spec.check_qubit(k)?;
    if spec.n > 10 {
        return Err(Error::QubitBudget(spec.n));
    }
    let d = 1usize << spec.n;
    let flip = 1 << (spec.n - 1 - k);
    let mut m = DMatrix::zeros(d, d);
    for x in 0..d {
        m[(x ^ flip, x)] = spec.stabilizer_phase(k, x);
    }
    Ok(m)
}

/// Samples a joint outcome of `σ1` on `xs` and `σ3` on `zs` (disjoint) and
/// returns the `0/1` outcome per listed qubit, `xs` first.
fn sample_local(state: &StateVector, xs: &[usize], zs: &[usize], rng: &mut dyn RngCore) -> Result<Vec<u8>> {
    let mut s = state.clone();
    for &q in xs {
        s.apply_mut(&Gate::H(q))?;
    }
    let n = s.n();
    let qs: Vec<usize> = xs.iter().chain(zs).copied().collect();
    let key = |i: usize| qs.iter().fold(0usize, |acc, &q| (acc << 1) | (i >> (n - 1 - q) & 1));
    let mut probs = vec![0.0; 1 << qs.len()];
    for (i, a) in s.amplitudes().iter().enumerate() {
        probs[key(i)] += a.norm_sqr();
    }
    let mut r: f64 = rng.random();
    let mut pick = probs.len() - 1;
    for (i, p) in probs.iter().enumerate() {
        if r < *p {
            pick = i;
            break;
        }
        r -= p;
    }
    Ok((0..qs.len()).map(|i| (pick >> (qs.len() - 1 - i) & 1) as u8).collect())
}

/// Bit `i_j` of a state `σ3^i|Ψ⟩`, read from one copy by measuring `σ1` on
/// `j` and `σ3` on its neighbours.
pub fn extract_bit(spec: &LmesSpec, state: &StateVector, j: usize, rng: &mut dyn RngCore) -> Result<u8> {
    Ok(extract_independent_set(spec, state, &[j], rng)?[0])
}

/// Bits `i_j` for every `j` in an independent set `set`, from one copy.
pub fn extract_independent_set(
    spec: &LmesSpec,
    state: &StateVector,
    set: &[usize],
    rng: &mut dyn RngCore,
) -> Result<Vec<u8>> {
    if !spec.is_pi_lmes() {
        return Err(Error::NotPiLmes("relative phases are not multiples of π".into()));
    }
    if state.n() != spec.n {
        return Err(Error::QubitOutOfRange { qubit: state.n(), n: spec.n });
    }
    let g = spec.interaction_graph();
    g.is_independent(set)?;
    if set.is_empty() {
        return Ok(Vec::new());
    }
    let mut zs: Vec<usize> = set.iter().flat_map(|&j| g.neighbor_list(j)).collect();
    zs.sort_unstable();
    zs.dedup();
    let outcomes = sample_local(state, set, &zs, rng)?;
    let z_bit = |q: usize| outcomes[set.len() + zs.iter().position(|&z| z == q).expect("neighbour measured")];
    set.iter()
        .enumerate()
        .map(|(i, &j)| {
            let m_j: i8 = if outcomes[i] == 0 { 1 } else { -1 };
            let l: Vec<u8> = g.neighbor_list(j).into_iter().map(z_bit).collect();
            let m_l = spec.neighbor_sign(j, &l)?;
            Ok(((1 - m_j * m_l) / 2) as u8)
        })
        .collect()
}

/// Largest colour class of an optimal colouring of the interaction graph.
pub fn default_extraction_set(spec: &LmesSpec) -> Vec<usize> {
    let g = spec.interaction_graph();
    let classes = color_classes(&chromatic_info(&g).1);
    classes.into_iter().max_by_key(|c| (c.len(), std::cmp::Reverse(c.clone()))).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelRun {
    /// Correction bits `i` produced by Alice's measurements.
    pub frame_bits: Vec<u8>,
    pub set: Vec<usize>,
    /// Alice's announcement `i_S ⊕ payload`.
    pub mask: Vec<u8>,
    /// Bits Bob read from his copy, equal to `i_S` on success.
    pub extracted: Vec<u8>,
    pub received: Vec<u8>,
}

/// Remote preparation of the LMES with every phase gate realized by a
/// measured ancilla, followed by payload transfer over the independent set
/// `set` (the default extraction set when `None`).
///
/// The correction bits `i` are uniformly random and known to Alice; Bob
/// learns `i_S` from one copy. Alice announces `i_S ⊕ payload` and Bob
/// unmasks it, so `i_S` acts as a one-time key.
pub fn classical_channel_demo(
    spec: &LmesSpec,
    payload: &[u8],
    set: Option<&[usize]>,
    rng: &mut dyn RngCore,
) -> Result<ChannelRun> {
    if payload.iter().any(|&b| b > 1) {
        return Err(Error::InvalidParameter("payload bits must be 0 or 1".into()));
    }
    let set: Vec<usize> = set.map(<[usize]>::to_vec).unwrap_or_else(|| default_extraction_set(spec));
    if payload.len() > set.len() {
        return Err(Error::PayloadTooLong { payload: payload.len(), capacity: set.len() });
    }
    let set = set[..payload.len()].to_vec();
    let cp = compile_all_gadgets(&spec.gate_sequence()?)?;
    let run = run_schedule(&cp, &spec.angles(), Outcomes::Random(&mut *rng))?;
    if run.final_frame.letters().iter().any(|&l| !matches!(l, Pauli::I | Pauli::Z)) {
        return Err(Error::Malformed(format!("frame {} is not σ3-type", run.final_frame)));
    }
    let frame_bits: Vec<u8> = run.final_frame.letters().iter().map(|&l| (l == Pauli::Z) as u8).collect();
    let mask: Vec<u8> = set.iter().zip(payload).map(|(&j, &b)| frame_bits[j] ^ b).collect();
    let extracted = extract_independent_set(spec, &run.output, &set, rng)?;
    let received = extracted.iter().zip(&mask).map(|(a, b)| a ^ b).collect();
    Ok(ChannelRun { frame_bits, set, mask, extracted, received })
}

/// The 16 three-qubit π-LMESs built from π-phase gates on subsets of the
/// supports `{01, 02, 12, 012}`.
pub fn three_qubit_pi_lmes_family() -> Vec<LmesSpec> {
    let supports: [&[usize]; 4] = [&[0, 1], &[0, 2], &[1, 2], &[0, 1, 2]];
    (0..16usize)
        .map(|m| {
            let gates = (0..4).filter(|i| m >> i & 1 == 1).flat_map(|i| pi_phase_gate(supports[i])).collect();
            LmesSpec { n: 3, gates }
        })
        .collect()
}

/// Summary of the exhaustive single-copy expectation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectationCheck {
    pub states: usize,
    pub comparisons: usize,
    pub max_deviation: f64,
}

/// For every π-LMES of the family, every `i`, `j`, every basis state `k` of
/// the other qubits and `l ∈ {+, -}` on `j` with `⟨l k|Ψ_i⟩ ≠ 0`, compares
/// `⟨Ψ_i|S_j|Ψ_i⟩` with `⟨l k|S_j|l k⟩`.
pub fn verify_single_copy_expectations(family: &[LmesSpec]) -> Result<ExpectationCheck> {
    let mut check = ExpectationCheck { states: 0, comparisons: 0, max_deviation: 0.0 };
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for spec in family {
        if !spec.is_pi_lmes() {
            return Err(Error::NotPiLmes(format!("{spec:?}")));
        }
        check.states += 1;
        let n = spec.n;
        let psi0 = build_lmes(spec)?;
        for j in 0..n {
            let s = generalized_stabilizer(spec, j)?;
            let expect = |v: &DMatrix<C64>| (v.adjoint() * &s * v)[(0, 0)];
            for i in 0..1usize << n {
                let mut psi = psi0.clone();
                let zs: Vec<usize> = (0..n).filter(|q| i >> (n - 1 - q) & 1 == 1).collect();
                crate::pauli::PauliString::z_on(n, &zs).apply_to(&mut psi)?;
                let v = DMatrix::from_column_slice(1 << n, 1, psi.amplitudes());
                let lhs = expect(&v);
                for k in 0..1usize << (n - 1) {
                    for sign in [1.0, -1.0] {
                        // |l⟩ on j, |k⟩ on the other qubits in order
                        let mut w = DMatrix::<C64>::zeros(1 << n, 1);
                        for bj in 0..2usize {
                            let mut x = 0usize;
                            let mut kbit = n - 1;
                            for q in 0..n {
                                let b = if q == j {
                                    bj
                                } else {
                                    kbit -= 1;
                                    k >> kbit & 1
                                };
                                x = (x << 1) | b;
                            }
                            w[(x, 0)] = C64::new(if bj == 0 { h } else { sign * h }, 0.0);
                        }
                        let overlap = (w.adjoint() * &v)[(0, 0)];
                        if overlap.norm() < TOL {
                            continue;
                        }
                        let rhs = expect(&w);
                        check.comparisons += 1;
                        check.max_deviation = check.max_deviation.max((lhs - rhs).norm());
                    }
                }
            }
        }
    }
    Ok(check)
}
