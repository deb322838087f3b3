use thiserror::Error;

/// Errors raised by the model, the sub-solvers and the experiment pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {field} {reason}")]
    InvalidScenario { field: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected} slots, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("trajectory is infeasible (worst step violation {violation:.3e})")]
    InfeasibleTrajectory { violation: f64 },

    #[error("profile violates energy causality (worst residual {residual:.3e})")]
    InfeasibleProfile { residual: f64 },

    #[error("initial trajectory does not fit the reach of the UAV: {0}")]
    InfeasibleInitialization(String),

    #[error("{stage} did not converge within {iterations} iterations")]
    IterationLimit { stage: &'static str, iterations: usize },

    #[error("numerical failure in {stage}: {detail}")]
    Numerical { stage: &'static str, detail: String },

    #[error("degenerate dual variables: {0}")]
    DegenerateDual(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
