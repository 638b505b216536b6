use thiserror::Error;

/// Errors raised by the toricurve core.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix is not unimodular (determinant {det})")]
    NotUnimodular { det: String },
    #[error("malformed fan: {0}")]
    MalformedFan(String),
    #[error("fan is not complete: 2-face ({0}, {1}) lies in {2} maximal cone(s)")]
    NotComplete(usize, usize, usize),
    #[error("cone {0:?} is not a maximal cone of the fan")]
    ConeNotInFan(Vec<usize>),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("fan is not projective: no divisor has positive degree on every wall curve")]
    NotProjective,
    #[error("divisor is not ample")]
    NotAmple,
    #[error("ray matrix has no strictly positive kernel vector")]
    NoPositiveKernel,
    #[error("divisor has degree {0}, expected 0")]
    NotDegreeZero(i64),
    #[error("xi vector is not a valid coefficient vector: {0}")]
    XiMismatch(String),
    #[error("resultant degree {degree} exceeds cap {cap} on chart {chart}")]
    DegreeOverflow { chart: usize, degree: usize, cap: usize },
    #[error("torus element has a zero entry")]
    InvalidTorus,
    #[error("coordinate {coord} of chart {chart} has a pole at {point} inside the chart")]
    IrregularChart { chart: usize, coord: usize, point: String },
    #[error("verification undecided: {0}")]
    Undecided(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
