use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("probe not in the weak-probe regime: intensity ratio {ratio:.3e} exceeds 0.1")]
    WeakProbeRegime { ratio: f64 },

    #[error("{quantity} = {value} outside valid range [{min}, {max}]")]
    Range {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("non-finite integrand at quadrature node {node} (velocity {velocity:.6e} m/s)")]
    NonFiniteIntegrand { node: usize, velocity: f64 },

    #[error("spectrum shape: {0}")]
    Shape(String),

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("infeasible calibration target {target}: requested {requested:.6e}, scan covers [{min:.6e}, {max:.6e}]")]
    InfeasibleTarget {
        target: &'static str,
        requested: f64,
        min: f64,
        max: f64,
    },

    #[error("calibration did not converge: {0}")]
    NotConverged(String),

    #[error("pulse window too short: boundary amplitude {ratio:.3e} of peak")]
    BoundaryLeak { ratio: f64 },

    #[error("pulse spectrum escapes the response grid by {offset:.6e} rad/s")]
    Coverage { offset: f64 },

    #[error("pulse grids do not match: {0}")]
    Alignment(String),

    #[error("degenerate pulse: {0}")]
    DegeneratePulse(String),

    #[error("normalization failed: {0}")]
    Normalization(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid value for `{field}`: {constraint}")]
    Validation { field: String, constraint: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Configuration problems map to exit status 2, everything else to 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation { .. } | Error::Io(_) => 2,
            _ => 3,
        }
    }

    pub fn validation(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            constraint: constraint.into(),
        }
    }
}
