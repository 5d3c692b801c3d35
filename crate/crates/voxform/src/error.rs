use thiserror::Error;

/// Every failure surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum VoxError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("series variable mismatch: '{0}' vs '{1}'")]
    VariableMismatch(String, String),
    #[error("ratio {0} is not contractive (|R| <= 1), convergence cannot be certified")]
    NonContractive(String),
    #[error("evaluation point is at the origin")]
    PoleAtOrigin,
    #[error("points outside the convergence region: {0}")]
    OutOfRegion(String),
    #[error("evaluation points are not pairwise distinct")]
    DuplicatePoints,
    #[error("state exceeds the truncation head-room: {0}")]
    CutoffOverflow(String),
    #[error("bilinear form block at weight {0} is singular")]
    DegenerateForm(u32),
    #[error("no rational function of the requested ansatz fits the samples: {0}")]
    InconsistentSamples(String),
    #[error("coordinate change has vanishing linear coefficient")]
    NotAnAutomorphism,
    #[error("invalid sewing configuration: {0}")]
    InvalidConfig(String),
    #[error("singular linear system")]
    Singular,
    #[error("value is not exactly representable: {0}")]
    NotExact(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, VoxError>;
