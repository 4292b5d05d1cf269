use thiserror::Error;

/// Errors produced by the solvers and assembly routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max deviation {max_dev:.3e} exceeds {tol:.3e}")]
    NonHermitian { max_dev: f64, tol: f64 },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error(
        "overlap matrix is not positive definite: smallest eigenvalue {min_eig:.6e} \
         (largest {max_eig:.6e}); the basis is over-complete or leaks outside the grid"
    )]
    NotPositiveDefinite { min_eig: f64, max_eig: f64 },

    #[error("linear system is singular to tolerance: condition estimate {condition:.3e}")]
    SingularSystem { condition: f64 },

    #[error("line fit needs at least 3 points, got {got}")]
    TooFewPoints { got: usize },

    #[error("coordinate {x} outside the model domain: {reason}")]
    DomainError { x: f64, reason: &'static str },

    #[error("degenerate fiber at grid point {point} (index {index}): gap {gap:.3e} below floor")]
    DegenerateFiber { point: f64, index: usize, gap: f64 },

    #[error("grid too coarse near avoided crossing: neighbor overlap {overlap:.3} at point {point}")]
    GridTooCoarse { point: f64, overlap: f64 },

    #[error(
        "quadrature support mismatch: node at {node} outside grid window [{lo}, {hi}] \
         with non-negligible basis weight {weight:.3e}"
    )]
    SupportMismatch { node: f64, lo: f64, hi: f64, weight: f64 },

    #[error("effective mass tensor not positive definite at grid point {point}")]
    MassTensorNotPositive { point: f64 },

    #[error("state norm deviates from 1 by {deviation:.3e}")]
    Unnormalized { deviation: f64 },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
