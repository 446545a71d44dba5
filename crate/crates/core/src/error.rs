use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument lies outside the range where the formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The curvature budget violates a standing hypothesis (e.g. δ²κ < π²/4).
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("point ({x:.6}, {y:.6}) lies outside the metric domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("geodesic left the metric domain after arc length {arc_length:.6}")]
    PathExitsDomain { arc_length: f64 },

    #[error("distance solver did not converge after {iterations} iterations ({detail})")]
    NoConvergence { iterations: usize, detail: String },

    #[error("polar Jacobian became non-positive at rho = {rho:.6}, theta = {theta:.6}")]
    FocalPoint { rho: f64, theta: f64 },

    #[error("degenerate triangle: side length {side:.3e} below {min:.3e}")]
    DegenerateTriangle { side: f64, min: f64 },

    #[error("mesh resolution too coarse: {0}")]
    ResolutionTooCoarse(String),

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("gradient of the Green's function degenerates at ({x:.6}, {y:.6})")]
    DegenerateGradient { x: f64, y: f64 },

    #[error("harmonic conjugate failed: {0}")]
    Conjugate(String),

    #[error("unknown {what}: {name}")]
    Unknown { what: &'static str, name: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed chart file: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
