use thiserror::Error;

/// Errors surfaced by the geometry, flow, and spectral layers.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Metric rejected: conformal factor non-finite or below the degeneracy floor.
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    /// An input field or parameter violated a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Poisson right-hand side is not mean-zero against the volume form.
    #[error("unsolvable Poisson problem: |∫ rhs ω| = {mean:.3e} exceeds tolerance {tol:.3e}")]
    Unsolvable { mean: f64, tol: f64 },

    /// Requested derivative order is not supported.
    #[error("unsupported derivative order (r, s) = ({r}, {s}); need r + s <= {max}")]
    UnsupportedOrder { r: usize, s: usize, max: usize },

    /// Time step exceeds the explicit stability limit.
    #[error("time step {dt:.3e} exceeds stability limit {limit:.3e}")]
    StepSize { dt: f64, limit: f64 },

    /// The flow produced a degenerate or non-finite metric.
    #[error("flow blew up at t = {t:.6}: {reason}")]
    BlowUp { t: f64, reason: String },

    /// Discrete holomorphic kernel has the wrong dimension.
    #[error("holomorphic kernel dimension {found}, expected {expected}: discretization failure")]
    KernelDegeneracy { found: usize, expected: usize },

    /// A dense eigensolve failed to converge.
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    /// A linear solve or quadrature produced an untrustworthy result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Curvature tensor failed a symmetry identity.
    #[error("curvature symmetry violated: {identity} (residual {residual:.3e})")]
    SymmetryViolation { identity: String, residual: f64 },

    /// Precondition on a curvature bound check failed.
    #[error("bound-check precondition failed: {0}")]
    BoundPrecondition(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
