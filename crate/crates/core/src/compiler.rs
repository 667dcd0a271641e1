//! Compilation of a [`GateSequence`] acting on `|+⟩^{⊗n}` into a stabilizer
//! resource state and an adaptive single-qubit measurement schedule.
//!
//! Every non-Clifford phase gate `Z_S(α)` becomes a fresh `|0⟩` ancilla that
//! receives a CNOT from each wire in `S`. Measuring it in `B_β` with outcome
//! `k` leaves `(σ3^{⊗S})^k Z_S(β)` on the wires. Ancillas occupy qubits
//! `0..P` in schedule order, wires follow at `P..P+n`.

use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::canonical_form::{Angle, GateSequence, Op};
use crate::pauli::{Pauli, PauliString};
use crate::qsim::{Directive, Gate, StateVector, MAX_QUBITS};
use crate::{Error, Result};

/// One adaptive measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementStep {
    /// 1-based position in the schedule.
    pub position: usize,
    pub ancilla: usize,
    pub angle: Angle,
    /// Nominal sign of the measured angle before frame adaptation.
    pub sign: i8,
    /// Resource qubits coupled into the ancilla.
    pub support: Vec<usize>,
    /// Pauli left on the remaining qubits by outcome 1.
    pub byproduct: PauliString,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledProtocol {
    pub qubits: usize,
    /// Clifford construction circuit acting on `|0⟩` ancillas and `|+⟩` wires.
    pub circuit: Vec<Gate>,
    pub schedule: Vec<MeasurementStep>,
    /// Resource qubit holding wire `j`.
    pub output_map: Vec<usize>,
}

impl CompiledProtocol {
    pub fn wires(&self) -> usize {
        self.output_map.len()
    }

    pub fn ancillas(&self) -> usize {
        self.schedule.len()
    }

    /// Construction circuit starting from `|0…0⟩`: Hadamards on the wires
    /// followed by [`circuit`](Self::circuit).
    pub fn full_circuit(&self) -> Vec<Gate> {
        self.output_map.iter().map(|&q| Gate::H(q)).chain(self.circuit.iter().cloned()).collect()
    }

    /// SHA-256 of the serialized construction circuit.
    pub fn circuit_hash(&self) -> String {
        let bytes = serde_json::to_vec(&(self.qubits, &self.circuit, &self.output_map))
            .expect("circuit serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

/// Running byproduct on all resource qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliFrame {
    pub frame: PauliString,
}

impl PauliFrame {
    pub fn identity(n: usize) -> Self {
        PauliFrame { frame: PauliString::identity(n) }
    }
}

/// `U F U†` for a Clifford `U`.
pub fn frame_conjugate(frame: &PauliFrame, gate: &Gate) -> Result<PauliFrame> {
    let mut f = frame.frame.clone();
    f.conjugate(gate)?;
    Ok(PauliFrame { frame: f })
}

/// Sign applied to the nominal angle and bit XORed onto the physical
/// outcome, given the frame present on the step's ancilla.
pub fn effective_measurement(step: &MeasurementStep, frame: &PauliFrame) -> (i8, u8) {
    let p = frame.frame.get(step.ancilla);
    let sign = if p.has_x() { -step.sign } else { step.sign };
    (sign, p.has_z() as u8)
}

/// Compiles `seq`; Clifford-angle phase gates are applied directly.
pub fn compile(seq: &GateSequence) -> Result<CompiledProtocol> {
    compile_inner(seq, false)
}

/// Like [`compile`] but every phase gate, Clifford angle or not, gets its own
/// measured ancilla.
pub fn compile_all_gadgets(seq: &GateSequence) -> Result<CompiledProtocol> {
    compile_inner(seq, true)
}

fn compile_inner(seq: &GateSequence, all_phases: bool) -> Result<CompiledProtocol> {
    seq.validate()?;
    seq.check_first_qubit_rule()?;
    let is_gadget = |op: &Op| matches!(op, Op::Phase { .. }) && (all_phases || op.is_non_clifford_phase());
    let p = seq.gates.iter().filter(|op| is_gadget(op)).count();
    let qubits = p + seq.n;
    if qubits > MAX_QUBITS {
        return Err(Error::QubitBudget(qubits));
    }
    let wire = |q: usize| p + q;
    let mut circuit = Vec::new();
    let mut pending = Vec::new();
    for op in &seq.gates {
        if is_gadget(op) {
            let Op::Phase { support, angle } = op else { unreachable!() };
            let ancilla = pending.len();
            let support: Vec<usize> = support.iter().map(|&q| wire(q)).collect();
            for &w in &support {
                circuit.push(Gate::Cnot { control: w, target: ancilla });
            }
            pending.push((ancilla, *angle, support, circuit.len()));
            continue;
        }
        let g = match op.bind(&[])? {
            Gate::H(q) => Gate::H(wire(q)),
            Gate::XQuarter { qubit, positive } => Gate::XQuarter { qubit: wire(qubit), positive },
            Gate::Cz(a, b) => Gate::Cz(wire(a), wire(b)),
            Gate::Cnot { control, target } => Gate::Cnot { control: wire(control), target: wire(target) },
            Gate::Phase { support, angle } => Gate::Phase { support: support.iter().map(|&q| wire(q)).collect(), angle },
            Gate::Unitary { .. } => unreachable!("sequence ops bind to Clifford-alphabet gates"),
        };
        circuit.push(g);
    }
    let mut schedule = Vec::with_capacity(p);
    for (t, (ancilla, angle, support, after)) in pending.into_iter().enumerate() {
        let mut byproduct = PauliString::z_on(qubits, &support);
        for g in &circuit[after..] {
            byproduct.conjugate(g)?;
        }
        schedule.push(MeasurementStep { position: t + 1, ancilla, angle, sign: 1, support, byproduct });
    }
    Ok(CompiledProtocol { qubits, circuit, schedule, output_map: (0..seq.n).map(wire).collect() })
}

/// Resource state for `|+⟩^{⊗n}` wires.
pub fn resource_state(cp: &CompiledProtocol) -> Result<StateVector> {
    resource_state_with_input(cp, &StateVector::plus(cp.wires())?)
}

/// Resource state with an arbitrary wire input.
pub fn resource_state_with_input(cp: &CompiledProtocol, input: &StateVector) -> Result<StateVector> {
    if cp.qubits > MAX_QUBITS {
        return Err(Error::QubitBudget(cp.qubits));
    }
    if input.n() != cp.wires() {
        return Err(Error::InvalidParameter(format!("input has {} qubits, protocol has {} wires", input.n(), cp.wires())));
    }
    let mut s = StateVector::zero(cp.ancillas())?.tensor(input)?;
    for g in &cp.circuit {
        s.apply_mut(g)?;
    }
    Ok(s)
}

/// Source of measurement outcomes for a schedule.
pub enum Outcomes<'a> {
    Random(&'a mut dyn RngCore),
    /// Physical outcomes, one per step.
    Forced(&'a [u8]),
}

#[derive(Debug, Clone)]
pub struct ScheduleRun {
    /// Physical outcomes in schedule order.
    pub outcomes: Vec<u8>,
    /// Outcomes after frame correction, i.e. the bits selecting byproducts.
    pub effective: Vec<u8>,
    /// Signs used for the measured angles.
    pub signs: Vec<i8>,
    /// Byproduct on the wires; output state = `final_frame · target`.
    pub final_frame: PauliString,
    /// Post-measurement state of the wires.
    pub output: StateVector,
}

impl ScheduleRun {
    /// Output with the frame undone.
    pub fn corrected(&self) -> Result<StateVector> {
        let mut s = self.output.clone();
        self.final_frame.apply_to(&mut s)?;
        Ok(s)
    }
}

pub fn run_schedule(cp: &CompiledProtocol, params: &[f64], outcomes: Outcomes<'_>) -> Result<ScheduleRun> {
    run_schedule_on(cp, resource_state(cp)?, params, outcomes)
}

/// Runs the schedule on a prepared resource (ancillas measured in order,
/// each from position 0 of the shrinking register).
pub fn run_schedule_on(
    cp: &CompiledProtocol,
    resource: StateVector,
    params: &[f64],
    mut outcomes: Outcomes<'_>,
) -> Result<ScheduleRun> {
    let angles: Vec<f64> = cp.schedule.iter().map(|s| s.angle.bind(params)).collect::<Result<_>>()?;
    if let Outcomes::Forced(f) = &outcomes {
        if f.len() != cp.schedule.len() {
            return Err(Error::ParamCount { expected: cp.schedule.len(), got: f.len() });
        }
    }
    let mut frame = PauliFrame::identity(cp.qubits);
    let mut state = resource;
    let mut run = ScheduleRun {
        outcomes: Vec::new(),
        effective: Vec::new(),
        signs: Vec::new(),
        final_frame: PauliString::identity(0),
        output: StateVector::zero(0)?,
    };
    for (t, step) in cp.schedule.iter().enumerate() {
        debug_assert_eq!(step.ancilla, t);
        let (sign, flip) = effective_measurement(step, &frame);
        let directive = match &mut outcomes {
            Outcomes::Random(rng) => Directive::Random(&mut **rng),
            Outcomes::Forced(f) => Directive::Force(f[t]),
        };
        let (k, _, rest) = state.measure_basis_discard(0, sign as f64 * angles[t], directive)?;
        state = rest;
        let k_eff = k ^ flip;
        if k_eff == 1 {
            frame.frame = frame.frame.mul(&step.byproduct);
        }
        run.outcomes.push(k);
        run.effective.push(k_eff);
        run.signs.push(sign);
    }
    run.final_frame = frame.frame.restrict(&cp.output_map);
    run.output = state;
    Ok(run)
}

/// Single-gadget equivalence on an arbitrary input: compiles `Z_S(α)`,
/// runs it with `input` on the wires, undoes the byproduct and compares with
/// the direct gate.
pub fn gadget_check(support: &[usize], angle: f64, input: &StateVector, rng: &mut dyn RngCore) -> Result<bool> {
    let seq = GateSequence::new(input.n(), vec![Op::phase(support, Angle::Fixed(angle))])?;
    let cp = compile_all_gadgets(&seq)?;
    let run = run_schedule_on(&cp, resource_state_with_input(&cp, input)?, &[], Outcomes::Random(rng))?;
    let want = input.apply(&Gate::phase(support, angle))?;
    Ok(run.corrected()?.fidelity(&want) >= 1.0 - 1e-9)
}

/// Gadget on an unknown input that arrives by teleportation: the offline
/// resource holds a Bell pair per input qubit whose second half is coupled
/// into the ancilla; the input is then Bell-measured into the resource.
///
/// Register layout: input `0..m`, Bell halves `m..2m`, outputs `2m..3m`,
/// ancilla `3m`.
pub fn gadget_check_teleported(
    support: &[usize],
    angle: f64,
    input: &StateVector,
    rng: &mut dyn RngCore,
) -> Result<bool> {
    let m = input.n();
    let total = 3 * m + 1;
    if total > MAX_QUBITS {
        return Err(Error::QubitBudget(total));
    }
    Gate::phase(support, angle).validate(m)?;
    let ancilla = 3 * m;
    let mut coupling = Vec::new();
    for &q in support {
        coupling.push(Gate::Cnot { control: 2 * m + q, target: ancilla });
    }
    let mut state = input.tensor(&StateVector::zero(2 * m + 1)?)?;
    for j in 0..m {
        state.apply_mut(&Gate::H(m + j))?;
        state.apply_mut(&Gate::Cnot { control: m + j, target: 2 * m + j })?;
    }
    for g in &coupling {
        state.apply_mut(g)?;
    }
    // Bell measurements; the input pair always sits at the front.
    let mut frame = PauliString::identity(total);
    for j in 0..m {
        let (i, _, rest) = state.bell_measure_discard(0, m - j, Directive::Random(&mut *rng))?;
        state = rest;
        let mut byproduct = PauliString::single(total, 2 * m + j, Pauli::from_index(i));
        for g in &coupling {
            byproduct.conjugate(g)?;
        }
        frame = frame.mul(&byproduct);
    }
    // remaining register: outputs then ancilla
    let p = frame.get(ancilla);
    let sign = if p.has_x() { -1.0 } else { 1.0 };
    let (k, _, rest) = state.measure_basis_discard(m, sign * angle, Directive::Random(rng))?;
    if k ^ (p.has_z() as u8) == 1 {
        let outs: Vec<usize> = support.iter().map(|&q| 2 * m + q).collect();
        frame = frame.mul(&PauliString::z_on(total, &outs));
    }
    let out_frame = frame.restrict(&(2 * m..3 * m).collect::<Vec<_>>());
    let mut corrected = rest;
    out_frame.apply_to(&mut corrected)?;
    let want = input.apply(&Gate::phase(support, angle))?;
    Ok(corrected.fidelity(&want) >= 1.0 - 1e-9)
}
