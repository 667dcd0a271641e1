//! Simulation and compilation toolkit for remote entanglement preparation.
//!
//! A sender holding the controlling qubits of a stabilizer resource state
//! prepares an arbitrary canonical-form state for spatially separated
//! receivers by local measurements in the bases `B_β` and one-way classical
//! communication of Pauli corrections.
//!
//! Qubit indices are zero-based throughout; index 0 is the most significant
//! bit of a computational-basis index.

pub mod canonical_form;
pub mod compiler;
pub mod error;
pub mod graphstab;
pub mod lme_classical;
pub mod pauli;
pub mod purification;
pub mod qsim;
pub mod rep_protocol;
pub mod stats;

pub use error::{Error, Result};
