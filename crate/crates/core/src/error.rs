use thiserror::Error;

/// Errors produced by the rebit toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("qubit index {index} out of range 1..={n}")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("duplicate qubit index {0} in gate support")]
    DuplicateSupport(usize),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("operator is not R-unitary (residual {0:.3e})")]
    NotRUnitary(f64),

    #[error("operator is not partial antiunitary")]
    NotPartialAntiunitary,

    #[error("operator is not an R-Clifford")]
    NotRClifford,

    #[error("matrix is not orthogonal (residual {0:.3e})")]
    NotOrthogonal(f64),

    #[error("width {width} exceeds the supported bound {bound} for {what}")]
    WidthExceeded {
        what: &'static str,
        width: usize,
        bound: usize,
    },

    #[error("measurement set violates completeness (residual {0:.3e})")]
    CompletenessViolation(f64),

    #[error("state is not normalized (|norm - 1| = {0:.3e})")]
    Unnormalized(f64),

    #[error("invalid stabilizer group: {0}")]
    InvalidStabilizerGroup(String),

    #[error("unsupported gate kind {kind} for {context}")]
    UnsupportedGate { kind: String, context: &'static str },

    #[error("function is not R-linear (residual {0:.3e})")]
    NotRLinear(f64),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Other(String),
}
