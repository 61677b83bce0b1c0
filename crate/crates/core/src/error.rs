use thiserror::Error;

/// Errors shared across the estimator, quadrature, and optimizer modules.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Every sample carried an infinite objective value (or none were
    /// retained), so the self-normalized weights are undefined.
    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),

    /// The importance proposal assigned non-finite log-density to a sample
    /// it produced; the weight ratio is undefined there.
    #[error("proposal support violation at sample {index} (log-density {logpdf})")]
    ProposalSupport { index: usize, logpdf: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Evaluation outside the mathematical domain of an operation,
    /// e.g. a nonpositive argument to the Poisson Bregman divergence.
    #[error("domain error: {0}")]
    Domain(String),

    /// A Bregman proximal update produced a nonpositive denominator; the
    /// step size is too large for the current iterate.
    #[error("step size error: {0}")]
    StepSize(String),

    /// Grid refinement hit its cap before successive ratios stabilized.
    /// Carries the last two iterates so callers can still inspect the
    /// grid-resolution-limited estimate.
    #[error(
        "quadrature did not converge at {points_per_dim} intervals per dim \
         (last two iterates {prev:?} -> {last:?})"
    )]
    QuadNonConvergence {
        last: Vec<f64>,
        prev: Vec<f64>,
        points_per_dim: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
