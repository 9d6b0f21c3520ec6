use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The metric `Sigma (x) Sigma + Omega (x) Omega / 4` cannot be inverted,
    /// which happens when some mode of the state is pure.
    #[error("singular metric: state has a pure mode (min occupation eigenvalue {min_eigenvalue:e}); add a thermal floor")]
    SingularMetric { min_eigenvalue: f64 },

    #[error("closed-form coefficient is singular at phase difference {dphi}")]
    Singularity { dphi: f64 },

    #[error("quadrature did not converge: P({m},{n}) changed by {relative_change:e} (relative) when the radial nodes were doubled")]
    Convergence {
        m: usize,
        n: usize,
        relative_change: f64,
    },
}
