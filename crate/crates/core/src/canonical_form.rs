//! Canonical-form (CF) circuits: phase gates and local Cliffords acting on
//! `|+⟩^{⊗n}`, with only phase gates touching the first qubit.
//!
//! Phase angles are symbolic slots until bound by [`CfParams`]; slot `i`
//! holds `α_{i+1}`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::qsim::{Gate, StateVector, C64};
use crate::{Error, Result};

/// `P_n` by the closed form `2^{n+1} - 3(n+1) + 2^{n-3}`; `P_2 = 1`.
pub fn param_count(n: usize) -> Result<u64> {
    match n {
        0 | 1 => Err(Error::UnsupportedQubitCount(n)),
        2 => Ok(1),
        n if n > 60 => Err(Error::UnsupportedQubitCount(n)),
        n => Ok((1u64 << (n + 1)) + (1u64 << (n - 3)) - 3 * (n as u64 + 1)),
    }
}

/// `P_n` by the recurrence `P_n = 2 P_{n-1} + 3(n-1)`, `P_3 = 5`.
pub fn param_count_recursive(n: usize) -> Result<u64> {
    match n {
        0 | 1 => Err(Error::UnsupportedQubitCount(n)),
        2 => Ok(1),
        3 => Ok(5),
        n if n > 60 => Err(Error::UnsupportedQubitCount(n)),
        n => Ok(2 * param_count_recursive(n - 1)? + 3 * (n as u64 - 1)),
    }
}

/// The `P_n` angles of a CF state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfParams {
    n: usize,
    angles: Vec<f64>,
}

impl CfParams {
    pub fn new(n: usize, angles: Vec<f64>) -> Result<Self> {
        let expected = param_count(n)? as usize;
        if angles.len() != expected {
            return Err(Error::ParamCount { expected, got: angles.len() });
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFiniteAngle);
        }
        Ok(CfParams { n, angles })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![0.0; param_count(n)? as usize])
    }

    /// Three-qubit parameters of the maximally-entangled-set family,
    /// `α3 = α4 = π/4`.
    pub fn mes(a1: f64, a2: f64, a5: f64) -> Result<Self> {
        Self::new(3, vec![a1, a2, FRAC_PI_4, FRAC_PI_4, a5])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}

/// Angle of a phase gate in a [`GateSequence`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Angle {
    Fixed(f64),
    Slot(usize),
}

impl Angle {
    pub fn bind(self, params: &[f64]) -> Result<f64> {
        match self {
            Angle::Fixed(a) => Ok(a),
            Angle::Slot(i) => params.get(i).copied().ok_or(Error::UnboundSlot(i)),
        }
    }
}

/// One gate of the CF alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WireOp", into = "WireOp")]
pub enum Op {
    H(usize),
    XQuarter { qubit: usize, positive: bool },
    Cz(usize, usize),
    Cnot { control: usize, target: usize },
    Phase { support: Vec<usize>, angle: Angle },
}

impl Op {
    pub fn phase(support: &[usize], angle: Angle) -> Op {
        Op::Phase { support: support.to_vec(), angle }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Op::H(q) | Op::XQuarter { qubit: q, .. } => vec![*q],
            Op::Cz(a, b) => vec![*a, *b],
            Op::Cnot { control, target } => vec![*control, *target],
            Op::Phase { support, .. } => support.clone(),
        }
    }

    /// Phase gates whose angle is a slot or a non-Clifford constant.
    pub fn is_non_clifford_phase(&self) -> bool {
        match self {
            Op::Phase { angle: Angle::Slot(_), .. } => true,
            Op::Phase { angle: Angle::Fixed(a), .. } => !crate::qsim::is_quarter_multiple(*a),
            _ => false,
        }
    }

    /// Concrete gate; slots are looked up in `params`.
    pub fn bind(&self, params: &[f64]) -> Result<Gate> {
        Ok(match self {
            Op::H(q) => Gate::H(*q),
            Op::XQuarter { qubit, positive } => Gate::XQuarter { qubit: *qubit, positive: *positive },
            Op::Cz(a, b) => Gate::Cz(*a, *b),
            Op::Cnot { control, target } => Gate::Cnot { control: *control, target: *target },
            Op::Phase { support, angle } => Gate::Phase { support: support.clone(), angle: angle.bind(params)? },
        })
    }
}

/// JSON shape `{kind, qubits, angle | slot}`.
#[derive(Serialize, Deserialize)]
struct WireOp {
    kind: String,
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slot: Option<usize>,
}

impl From<Op> for WireOp {
    fn from(op: Op) -> Self {
        let qubits = op.qubits();
        let (kind, angle, slot) = match op {
            Op::H(_) => ("h", None, None),
            Op::XQuarter { positive: true, .. } => ("x_quarter_plus", None, None),
            Op::XQuarter { positive: false, .. } => ("x_quarter_minus", None, None),
            Op::Cz(..) => ("cz", None, None),
            Op::Cnot { .. } => ("cnot", None, None),
            Op::Phase { angle: Angle::Fixed(a), .. } => ("phase", Some(a), None),
            Op::Phase { angle: Angle::Slot(i), .. } => ("phase", None, Some(i)),
        };
        WireOp { kind: kind.to_string(), qubits, angle, slot }
    }
}

impl TryFrom<WireOp> for Op {
    type Error = Error;

    fn try_from(w: WireOp) -> Result<Op> {
        let arity = |k: usize| {
            if w.qubits.len() == k {
                Ok(())
            } else {
                Err(Error::Malformed(format!("{} expects {k} qubits, got {}", w.kind, w.qubits.len())))
            }
        };
        Ok(match w.kind.as_str() {
            "h" => {
                arity(1)?;
                Op::H(w.qubits[0])
            }
            "x_quarter_plus" | "x_quarter_minus" => {
                arity(1)?;
                Op::XQuarter { qubit: w.qubits[0], positive: w.kind == "x_quarter_plus" }
            }
            "cz" => {
                arity(2)?;
                Op::Cz(w.qubits[0], w.qubits[1])
            }
            "cnot" => {
                arity(2)?;
                Op::Cnot { control: w.qubits[0], target: w.qubits[1] }
            }
            "phase" => {
                let angle = match (w.angle, w.slot) {
                    (Some(a), None) => Angle::Fixed(a),
                    (None, Some(i)) => Angle::Slot(i),
                    _ => return Err(Error::Malformed("phase gate needs exactly one of angle, slot".into())),
                };
                Op::Phase { support: w.qubits, angle }
            }
            other => return Err(Error::Malformed(format!("unknown gate kind {other:?}"))),
        })
    }
}

/// Ordered gate list on `n` wire qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSequence {
    pub n: usize,
    pub gates: Vec<Op>,
}

impl GateSequence {
    pub fn new(n: usize, gates: Vec<Op>) -> Result<Self> {
        let s = GateSequence { n, gates };
        s.validate()?;
        Ok(s)
    }

    /// Range, repetition, support and angle checks.
    pub fn validate(&self) -> Result<()> {
        for op in &self.gates {
            let qs = op.qubits();
            if let Op::Phase { angle, .. } = op {
                if qs.is_empty() {
                    return Err(Error::EmptySupport);
                }
                if let Angle::Fixed(a) = angle {
                    if !a.is_finite() {
                        return Err(Error::NonFiniteAngle);
                    }
                }
            }
            for (i, &q) in qs.iter().enumerate() {
                if q >= self.n {
                    return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
                }
                if qs[..i].contains(&q) {
                    return Err(Error::RepeatedQubit(q));
                }
            }
        }
        Ok(())
    }

    /// Only diagonal gates (phase gates, CZ) may touch qubit 0.
    pub fn check_first_qubit_rule(&self) -> Result<()> {
        for op in &self.gates {
            let offending = match op {
                Op::H(0) | Op::XQuarter { qubit: 0, .. } => true,
                Op::Cnot { control, target } => *control == 0 || *target == 0,
                _ => false,
            };
            if offending {
                return Err(Error::CliffordOnFirstQubit(format!("{op:?}")));
            }
        }
        Ok(())
    }

    /// Number of distinct parameter slots referenced (`max index + 1`).
    pub fn slot_count(&self) -> usize {
        self.gates
            .iter()
            .filter_map(|op| match op {
                Op::Phase { angle: Angle::Slot(i), .. } => Some(i + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn phase_gate_count(&self) -> usize {
        self.gates.iter().filter(|op| op.is_non_clifford_phase()).count()
    }

    pub fn bind(&self, params: &[f64]) -> Result<Vec<Gate>> {
        self.gates.iter().map(|op| op.bind(params)).collect()
    }

    /// Applies the bound sequence to `input`.
    pub fn apply(&self, input: &StateVector, params: &[f64]) -> Result<StateVector> {
        let mut s = input.clone();
        for g in self.bind(params)? {
            s.apply_mut(&g)?;
        }
        Ok(s)
    }
}

/// CF circuit for `n ∈ {2, 3}`.
pub fn cf_circuit(n: usize) -> Result<GateSequence> {
    match n {
        2 => GateSequence::new(2, vec![Op::phase(&[0, 1], Angle::Slot(0))]),
        3 => GateSequence::new(3, cf3_ops(Angle::Slot(2), Angle::Slot(3))),
        _ => Err(Error::UnsupportedQubitCount(n)),
    }
}

/// Three-qubit CF with `α3 = α4 = π/4` frozen to Clifford phases. Slots
/// 0, 1 and 4 remain.
pub fn mes_circuit() -> GateSequence {
    GateSequence { n: 3, gates: cf3_ops(Angle::Fixed(FRAC_PI_4), Angle::Fixed(FRAC_PI_4)) }
}

/// `Z13(α1) Z12(α2) (T2(α3,α4) ⊗ T3) Z23(α5) |+++⟩` in circuit order, with
/// `T3 = e^{-iπ/4 σ1} Z(-π/4) H` and
/// `T2 = e^{iπ/4 σ1} Z(α3) e^{-iπ/4 σ1} Z(α4) H`.
fn cf3_ops(a3: Angle, a4: Angle) -> Vec<Op> {
    vec![
        Op::phase(&[1, 2], Angle::Slot(4)),
        // T2 on qubit 1
        Op::H(1),
        Op::phase(&[1], a4),
        Op::XQuarter { qubit: 1, positive: false },
        Op::phase(&[1], a3),
        Op::XQuarter { qubit: 1, positive: true },
        // T3 on qubit 2
        Op::H(2),
        Op::phase(&[2], Angle::Fixed(-FRAC_PI_4)),
        Op::XQuarter { qubit: 2, positive: false },
        Op::phase(&[0, 1], Angle::Slot(1)),
        Op::phase(&[0, 2], Angle::Slot(0)),
    ]
}

pub fn cf_state(params: &CfParams) -> Result<StateVector> {
    let seq = cf_circuit(params.n())?;
    seq.apply(&StateVector::plus(params.n())?, params.angles())
}

/// Controlled-`Z_S(α)` with control `c` as `Z_S(α/2) · Z_{S∪{c}}(-α/2)`.
pub fn controlled_phase_decompose(control: usize, support: &[usize], alpha: f64) -> Result<(Gate, Gate)> {
    if support.contains(&control) {
        return Err(Error::ControlInSupport(control));
    }
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    if !alpha.is_finite() {
        return Err(Error::NonFiniteAngle);
    }
    let mut with_control = support.to_vec();
    with_control.push(control);
    Ok((Gate::phase(support, alpha / 2.0), Gate::phase(&with_control, -alpha / 2.0)))
}

/// `U = e^{iφ} Z(α1) H Z(α2) H Z(α3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub global_phase: f64,
}

impl EulerAngles {
    /// Rebuilds `e^{iφ} Z(α1) H Z(α2) H Z(α3)`.
    pub fn matrix(&self) -> [[C64; 2]; 2] {
        let m = mat_mul(&mat_mul(&z_mat(self.alpha1), &x_mat(self.alpha2)), &z_mat(self.alpha3));
        let ph = C64::from_polar(1.0, self.global_phase);
        [[m[0][0] * ph, m[0][1] * ph], [m[1][0] * ph, m[1][1] * ph]]
    }
}

fn z_mat(a: f64) -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    [[C64::from_polar(1.0, a), z], [z, C64::from_polar(1.0, -a)]]
}

/// `H Z(a) H = exp(i a σ1)`.
fn x_mat(a: f64) -> [[C64; 2]; 2] {
    let (c, s) = (C64::new(a.cos(), 0.0), C64::new(0.0, a.sin()));
    [[c, s], [s, c]]
}

fn mat_mul(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

pub fn euler_decompose(u: &[[C64; 2]; 2]) -> Result<EulerAngles> {
    let dev = crate::qsim::unitarity_deviation(u);
    if dev > 1e-10 {
        return Err(Error::NonUnitary(dev));
    }
    // Z(a1) X(a2) Z(a3) = [[c e^{i(a1+a3)}, i s e^{i(a1-a3)}], [i s e^{-i(a1-a3)}, c e^{-i(a1+a3)}]]
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let root = det.sqrt();
    let v00 = u[0][0] / root;
    let v01 = u[0][1] / root;
    let alpha2 = v01.norm().atan2(v00.norm());
    let eps = 1e-12;
    let sum = if v00.norm() > eps { v00.arg() } else { 0.0 };
    let diff = if v01.norm() > eps { v01.arg() - FRAC_PI_2 } else { 0.0 };
    let mut e = EulerAngles { alpha1: (sum + diff) / 2.0, alpha2, alpha3: (sum - diff) / 2.0, global_phase: 0.0 };
    let r = e.matrix();
    let overlap: C64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| r[i][j].conj() * u[i][j]).sum();
    e.global_phase = overlap.arg();
    Ok(e)
}

/// `exp(i Σ_k α_k σ_k⊗σ_k)` on qubits (0, 1) as Clifford-conjugated
/// `Z_{01}` phase gates. Zero angles are omitted.
pub fn nonlocal_two_qubit_decompose(a1: f64, a2: f64, a3: f64) -> Result<GateSequence> {
    if !(a1.is_finite() && a2.is_finite() && a3.is_finite()) {
        return Err(Error::NonFiniteAngle);
    }
    let mut gates = Vec::new();
    if a1 != 0.0 {
        gates.extend([Op::H(0), Op::H(1), Op::phase(&[0, 1], Angle::Fixed(a1)), Op::H(0), Op::H(1)]);
    }
    if a2 != 0.0 {
        // exp(iπ/4 σ1) maps σ3 to σ2
        gates.extend([
            Op::XQuarter { qubit: 0, positive: false },
            Op::XQuarter { qubit: 1, positive: false },
            Op::phase(&[0, 1], Angle::Fixed(a2)),
            Op::XQuarter { qubit: 0, positive: true },
            Op::XQuarter { qubit: 1, positive: true },
        ]);
    }
    if a3 != 0.0 {
        gates.push(Op::phase(&[0, 1], Angle::Fixed(a3)));
    }
    GateSequence::new(2, gates)
}
