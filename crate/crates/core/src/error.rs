use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (deviation {deviation:.3e} exceeds {tol:.3e})")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error(
        "matrix is not positive semidefinite (eigenvalue {min_eigenvalue:.3e} below -{tol:.3e})"
    )]
    NotPsd { min_eigenvalue: f64, tol: f64 },

    #[error("base matrix of the geometric mean is zero")]
    SingularBase,

    #[error("matrix is not an orthogonal projection (deviation {deviation:.3e})")]
    InvalidProjection { deviation: f64 },

    #[error("matrix is ill-conditioned (condition number {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("dimension {dim} exceeds the amplification limit {max_dim}")]
    ResourceGuard { dim: usize, max_dim: usize },

    #[error("two evaluation routes disagree: {first} vs {second}")]
    RouteMismatch { first: f64, second: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
