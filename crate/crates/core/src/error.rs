use thiserror::Error;

#[derive(Debug, Error)]
pub enum VbsError {
    #[error("{what}: requested {requested}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },
    #[error("unsupported spin 2S = {0}")]
    UnsupportedSpin(u32),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operator `{label}` is not unitary (deviation {deviation:.3e})")]
    NonUnitary { label: String, deviation: f64 },
    #[error("operator `{label}` is not Hermitian (deviation {deviation:.3e})")]
    NonHermitian { label: String, deviation: f64 },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("outcome {outcome} on qubit {qubit} has probability {probability:.3e}")]
    ImpossibleOutcome {
        qubit: usize,
        outcome: u8,
        probability: f64,
    },
    #[error("state norm vanished ({norm_sq:.3e})")]
    VanishingNorm { norm_sq: f64 },
    #[error("qubit {qubit} out of range for {n_qubits} qubits")]
    InvalidQubit { qubit: usize, n_qubits: usize },
    #[error("qubit {0} addressed twice by one operation")]
    DuplicateQubit(usize),
    #[error("qubit {0} is not in a definite state and cannot be reset")]
    IndefiniteReset(usize),
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("lattice is not bipartite: odd cycle through site {site}")]
    OddCycle { site: usize },
    #[error("site {0} has no ancilla")]
    MissingAncilla(usize),
    #[error("encoding mismatch: {0}")]
    EncodingMismatch(String),
    #[error("no declared cost for `{label}` on coupling `{coupling}`")]
    MissingDeclaredCost { label: String, coupling: String },
    #[error("coupling map is disconnected")]
    DisconnectedCoupling,
    #[error("routing failed: {0}")]
    Routing(String),
    #[error("opaque gate `{0}` has no basis expansion")]
    UnexpandableOpaque(String),
    #[error("qasm parse error at line {line}: {msg}")]
    QasmParse { line: usize, msg: String },
    #[error("wrong ancilla count: expected {expected}, got {got}")]
    WrongAncillaCount { expected: usize, got: usize },
    #[error("rank deficiency: {0}")]
    RankDeficient(String),
    #[error("embedding scale {n} outside (0, {bound})")]
    EmbeddingScale { n: f64, bound: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, VbsError>;
