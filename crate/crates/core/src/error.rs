use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("step h = {step} must divide the domain length {length} (length / h = {ratio} is not an integer)")]
    NonDivisibleStep { length: f64, step: f64, ratio: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid has {0} points but the Nyquist carrier needs an even point count")]
    OddPointCount(usize),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("tabulated potential is bound to a grid with {expected} points, got a grid with {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("x = {x} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("the three-point stencil needs at least 3 grid points, got {0}")]
    TooFewPoints(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("mass matrix is not positive definite (Cholesky pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("implicit QL iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("dense eigensolver supports at most {max} points, got {got}")]
    TooLarge { got: usize, max: usize },

    #[error("requested {k} eigenpairs from an operator of size {n}")]
    InvalidCount { k: usize, n: usize },

    #[error("largest-magnitude selection is ambiguous: |{negative}| exceeds the selected eigenvalue {selected}")]
    MagnitudeOrdering { negative: f64, selected: f64 },

    #[error("eigenpair failed certification: residual {residual:e} exceeds {tolerance:e}")]
    Uncertified { residual: f64, tolerance: f64 },

    #[error("vector is identically zero")]
    ZeroVector,

    #[error("rank {rank} is out of range 1..={available}")]
    RankOutOfRange { rank: usize, available: usize },

    #[error("the envelope problem has no bound states to compare against")]
    NoBoundStates,

    #[error("lambda = {lambda} is too close to the potential: WKB needs lambda > {bound}")]
    TurningPoint { lambda: f64, bound: f64 },

    #[error("mode is under-resolved: wavelength {wavelength} is shorter than 10 h = {minimum}")]
    Unresolved { wavelength: f64, minimum: f64 },

    #[error("{field}: {message}")]
    Config { field: String, message: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }

    /// Process exit status for this error: 3 for solver failures, 2 for
    /// everything the caller can fix.
    pub fn exit_code(&self) -> i32 {
        if self.is_solver_failure() {
            3
        } else {
            2
        }
    }

    /// Failures that point at the numerics rather than at the caller's input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::NoConvergence { .. }
                | Error::MagnitudeOrdering { .. }
                | Error::Uncertified { .. }
        )
    }
}
