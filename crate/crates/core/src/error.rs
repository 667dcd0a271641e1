use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit {qubit} out of range for a {n}-qubit register")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("qubit {0} appears more than once in a gate")]
    RepeatedQubit(usize),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("forced outcome {0} has zero probability")]
    ZeroProbability(u8),

    #[error("bipartition must be a non-empty proper subset of the qubits")]
    TrivialBipartition,

    #[error("unsupported qubit count {0}")]
    UnsupportedQubitCount(usize),

    #[error("register of {0} qubits exceeds the simulation budget")]
    QubitBudget(usize),

    #[error("phase gate support must be non-empty")]
    EmptySupport,

    #[error("angle is not finite")]
    NonFiniteAngle,

    #[error("control qubit {0} lies inside the phase-gate support")]
    ControlInSupport(usize),

    #[error("expected {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },

    #[error("local Clifford on the first qubit: {0}")]
    CliffordOnFirstQubit(String),

    #[error("angle slot {0} is not bound")]
    UnboundSlot(usize),

    #[error("gate is not Clifford: {0}")]
    NonClifford(String),

    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("orbit exceeded {limit} members (partial orbit has {found})")]
    OrbitTooLarge { limit: usize, found: usize },

    #[error("vertex set is not independent: edge {0}-{1}")]
    NotIndependent(usize, usize),

    #[error("purification step has zero success probability")]
    ZeroSuccess,

    #[error("threshold predicate is not monotone: {0}")]
    NonMonotone(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state is not a pi-LMES: {0}")]
    NotPiLmes(String),

    #[error("payload of {payload} bits exceeds the {capacity} extractable bits")]
    PayloadTooLong { payload: usize, capacity: usize },

    #[error("malformed input: {0}")]
    Malformed(String),
}
