use thiserror::Error;

/// Errors surfaced by geometry, discretization and solver layers.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A point lies outside the validity region of its chart.
    #[error("point ({0}, {1}) outside chart validity region: {2}")]
    InvalidPoint(f64, f64, &'static str),

    /// Chart/geometry combination that does not exist.
    #[error("chart {chart} is not defined for {geometry} geometry")]
    InvalidChart { geometry: &'static str, chart: &'static str },

    /// Discretization parameters out of range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Mesh construction produced no interior nodes.
    #[error("domain has empty interior: {0}")]
    EmptyDomain(String),

    /// Requested analysis needs a physical boundary but the mesh has none.
    #[error("mesh has no physical boundary")]
    NoPhysicalBoundary,

    /// Sparse factorization hit a zero pivot even after shift jitter.
    #[error("factorization breakdown at shift {shift}: {detail}")]
    Factorization { shift: f64, detail: String },

    /// Solver failed to produce any converged pair where required.
    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
