//! Crate-wide error type. Variants are matchable so callers can distinguish
//! recoverable geometry degeneracies from hard numerical failures.

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Robot center inside the Minkowski disk: the tangent construction has no
    /// solution (asin argument >= 1). Callers substitute a flee halfplane.
    #[error("degenerate velocity cone: center distance {dist} <= combined radius {r_sum}")]
    DegenerateCone { dist: f64, r_sum: f64 },

    /// Non-finite objective or gradient encountered at a feasible point.
    /// Carries the iterate at which evaluation blew up, for diagnostics.
    #[error("numerical failure: {context}")]
    NumericalFailure { context: String, iterate: Vec<f64> },

    #[error("enumeration cap exceeded: {pairs} obstacle-step pairs (2^{pairs} assignments) > cap {cap}; the oracle is desk-scale by design")]
    EnumerationCap { pairs: usize, cap: usize },

    #[error("scenario field `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("failed to parse scenario: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
