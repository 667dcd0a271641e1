//! End-to-end remote entanglement preparation: Alice measures the
//! controlling qubits of the compiled resource, announces a classical
//! message, and Bob applies the Pauli correction it encodes.
//!
//! Message formats:
//! - `n ≥ 3` CF: the correction itself, `2n - 1` bits. Qubit 0 contributes one
//!   bit (`I`/`Z`); every other qubit two bits, the Pauli index `0..4`
//!   most significant bit first (`I = 00, X = 01, Y = 10, Z = 11`).
//! - `n = 2` CF and the MES family: the frame-corrected outcome bits in
//!   schedule order. Bob rebuilds the correction from the byproduct table.

use std::f64::consts::FRAC_PI_4;

use rand::RngCore;
use serde::Serialize;

use crate::canonical_form::{cf_circuit, cf_state, mes_circuit, CfParams};
use crate::compiler::{compile, resource_state, run_schedule, CompiledProtocol, Outcomes, ScheduleRun};
use crate::graphstab::{stabilizer_entanglement, tableau_from_circuit};
use crate::pauli::{Pauli, PauliString};
use crate::stats::{chi_square_two_sample, ChiSquare};
use crate::{Error, Result};

/// Which resource a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Full canonical form on `n` qubits.
    Cf(usize),
    /// Three-qubit family with `α3 = α4 = π/4`.
    Mes,
}

impl Family {
    pub fn n(self) -> usize {
        match self {
            Family::Cf(n) => n,
            Family::Mes => 3,
        }
    }

    pub fn compile(self) -> Result<CompiledProtocol> {
        match self {
            Family::Cf(n @ (2 | 3)) => compile(&cf_circuit(n)?),
            Family::Cf(n) => Err(Error::UnsupportedQubitCount(n)),
            Family::Mes => compile(&mes_circuit()),
        }
    }

    /// Whether the message is the correction (`true`) or the outcome bits.
    fn sends_correction(self) -> bool {
        matches!(self, Family::Cf(n) if n >= 3)
    }

    pub fn message_len(self) -> Result<usize> {
        Ok(match self {
            Family::Cf(n) if n >= 3 => 2 * n - 1,
            _ => self.compile()?.ancillas(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepRun {
    pub family: Family,
    pub n: usize,
    pub params: Vec<f64>,
    /// Physical measurement outcomes in schedule order.
    pub outcomes: Vec<u8>,
    pub message: Vec<u8>,
    pub correction: PauliString,
    pub cbits: usize,
    pub ebits: f64,
    pub fidelity: f64,
}

/// A prepared protocol that can be run many times.
#[derive(Debug, Clone)]
pub struct Rep {
    family: Family,
    cp: CompiledProtocol,
    ebits: f64,
}

impl Rep {
    pub fn new(family: Family) -> Result<Self> {
        let cp = family.compile()?;
        let t = tableau_from_circuit(cp.qubits, &cp.full_circuit())?;
        let ebits = stabilizer_entanglement(&t, &cp.output_map)? as f64;
        Ok(Rep { family, cp, ebits })
    }

    pub fn protocol(&self) -> &CompiledProtocol {
        &self.cp
    }

    pub fn ebits(&self) -> f64 {
        self.ebits
    }

    pub fn run(&self, params: &CfParams, outcomes: Outcomes<'_>) -> Result<RepRun> {
        if params.n() != self.family.n() {
            return Err(Error::ParamCount { expected: self.family.n(), got: params.n() });
        }
        if self.family == Family::Mes && (params.angles()[2] != FRAC_PI_4 || params.angles()[3] != FRAC_PI_4) {
            return Err(Error::InvalidParameter("MES runs need α3 = α4 = π/4".into()));
        }
        let run = run_schedule(&self.cp, params.angles(), outcomes)?;
        let message = self.encode(&run)?;
        let correction = self.decode(&message)?;
        debug_assert_eq!(correction.letters(), run.final_frame.letters());
        if !matches!(correction.get(0), Pauli::I | Pauli::Z) {
            return Err(Error::Malformed(format!("correction {correction} acts with X or Y on qubit 0")));
        }
        let mut bob = run.output.clone();
        correction.apply_to(&mut bob)?;
        let fidelity = bob.fidelity(&cf_state(params)?);
        Ok(RepRun {
            family: self.family,
            n: self.family.n(),
            params: params.angles().to_vec(),
            outcomes: run.outcomes,
            cbits: message.len(),
            message,
            correction,
            ebits: self.ebits,
            fidelity,
        })
    }

    /// Alice's message for a finished schedule.
    pub fn encode(&self, run: &ScheduleRun) -> Result<Vec<u8>> {
        if !self.family.sends_correction() {
            return Ok(run.effective.clone());
        }
        let f = &run.final_frame;
        let mut bits = Vec::with_capacity(2 * f.len() - 1);
        match f.get(0) {
            Pauli::I => bits.push(0),
            Pauli::Z => bits.push(1),
            other => return Err(Error::Malformed(format!("letter {other:?} on qubit 0"))),
        }
        for &l in &f.letters()[1..] {
            bits.push(l.index() >> 1);
            bits.push(l.index() & 1);
        }
        Ok(bits)
    }

    /// Bob's correction from a message.
    pub fn decode(&self, message: &[u8]) -> Result<PauliString> {
        let expected = self.family.message_len()?;
        if message.len() != expected || message.iter().any(|&b| b > 1) {
            return Err(Error::Malformed(format!("message must be {expected} bits")));
        }
        if self.family.sends_correction() {
            let mut letters = vec![if message[0] == 1 { Pauli::Z } else { Pauli::I }];
            letters.extend(message[1..].chunks(2).map(|c| Pauli::from_index(2 * c[0] + c[1])));
            return Ok(PauliString::from_letters(letters));
        }
        let mut frame = PauliString::identity(self.cp.qubits);
        for (step, &b) in self.cp.schedule.iter().zip(message) {
            if b == 1 {
                frame = frame.mul(&step.byproduct);
            }
        }
        Ok(frame.restrict(&self.cp.output_map))
    }
}

pub fn run_rep(n: usize, params: &CfParams, rng: &mut dyn RngCore) -> Result<RepRun> {
    if params.n() != n {
        return Err(Error::ParamCount { expected: n, got: params.n() });
    }
    Rep::new(Family::Cf(n))?.run(params, Outcomes::Random(rng))
}

pub fn run_mes_rep(a1: f64, a2: f64, a5: f64, rng: &mut dyn RngCore) -> Result<RepRun> {
    Rep::new(Family::Mes)?.run(&CfParams::mes(a1, a2, a5)?, Outcomes::Random(rng))
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub family: Family,
    pub runs: usize,
    pub chi_square: ChiSquare,
    pub hash_a: String,
    pub hash_b: String,
    /// Same circuit hash and bit-identical resource amplitudes.
    pub resource_identical: bool,
    pub indistinguishable: bool,
}

fn message_index(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// Compares the message distributions produced by two parameter sets and
/// checks that the resource each side is built from is the same.
pub fn obliviousness_audit(
    family: Family,
    params_a: &CfParams,
    params_b: &CfParams,
    runs: usize,
    rng: &mut dyn RngCore,
) -> Result<AuditReport> {
    let mut hist = Vec::new();
    let mut hashes = Vec::new();
    let mut resources = Vec::new();
    for params in [params_a, params_b] {
        // each side compiles its own protocol
        let rep = Rep::new(family)?;
        hashes.push(rep.protocol().circuit_hash());
        resources.push(resource_state(rep.protocol())?);
        let mut counts = vec![0u64; 1 << family.message_len()?];
        for _ in 0..runs {
            let run = rep.run(params, Outcomes::Random(&mut *rng))?;
            counts[message_index(&run.message)] += 1;
        }
        hist.push(counts);
    }
    let chi_square = chi_square_two_sample(&hist[0], &hist[1]);
    Ok(AuditReport {
        family,
        runs,
        indistinguishable: chi_square.p_value > 0.01,
        chi_square,
        resource_identical: hashes[0] == hashes[1] && resources[0] == resources[1],
        hash_a: hashes[0].clone(),
        hash_b: hashes[1].clone(),
    })
}
