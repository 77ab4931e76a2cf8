//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid scenario geometry or geometry operation input.
    #[error("geometry: {0}")]
    Geometry(String),

    /// Invalid antenna layout or steering construction input.
    #[error("array: {0}")]
    Array(String),

    /// Invalid constellation or target construction input.
    #[error("targets: {0}")]
    Targets(String),

    /// A linear system was singular or inconsistent beyond recovery.
    #[error("linear algebra: {0}")]
    Linalg(String),

    /// Closed-form design failure (singular KKT system, inconsistent
    /// constraints, missing eavesdropper columns).
    #[error("closed-form design: {0}")]
    ClosedForm(String),

    /// The group-sparse program is infeasible for the given tolerance.
    /// Carries the minimal achievable eavesdropper mismatch as certificate.
    #[error(
        "sparse design infeasible: minimal achievable eavesdropper mismatch \
         {min_residual} exceeds alpha = {alpha}"
    )]
    Infeasible { alpha: f64, min_residual: f64 },

    /// The convex subproblem solver did not meet its convergence contract.
    #[error(
        "sparse solver did not converge within {iterations} iterations \
         (primal residual {primal_residual:.3e}, dual residual {dual_residual:.3e}, \
         duality gap {gap:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        primal_residual: f64,
        dual_residual: f64,
        gap: f64,
    },

    /// Sparse design produced an empty surviving antenna set.
    #[error("sparse design: no antenna group norm reached the pruning floor {gamma}")]
    EmptySurvivorSet { gamma: f64 },

    /// Configuration parse or validation failure (key-precise message).
    #[error("config: {0}")]
    Config(String),

    /// BER simulation input failure.
    #[error("ber: {0}")]
    Ber(String),

    /// A study stage failed; wraps the failing stage name.
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 config, 3 solver, 4 infeasible.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Geometry(_) | Error::Array(_) | Error::Targets(_) => 2,
            Error::Infeasible { .. } | Error::EmptySurvivorSet { .. } => 4,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 3,
        }
    }
}
