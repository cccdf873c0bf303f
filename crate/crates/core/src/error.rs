use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("orbital index {index} out of range for {size} orbitals")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("index sets of a Hamiltonian term overlap or repeat (orbital {0})")]
    OverlappingIndexSets(usize),

    #[error("dense construction limited to {max} orbitals, got {got}")]
    DenseSizeGuard { got: usize, max: usize },

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("Jastrow parameters are not symmetric (max deviation {0:.3e})")]
    AsymmetricTheta(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no measurement record group for basis {0}")]
    MissingBasisGroup(String),

    #[error("record content hash mismatch: header says {expected}, content hashes to {actual}")]
    HashMismatch { expected: String, actual: String },

    #[error("invalid bracket [{0}, {1}]")]
    InvalidBracket(f64, f64),

    #[error("no default chemical potential for lattice {0}")]
    NoDefaultMu(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
