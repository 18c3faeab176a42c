use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("letter {letter} outside alphabet 1..={n}")]
    LetterOutOfRange { letter: u32, n: usize },

    #[error("class table has no value for class {0}")]
    MissingClass(String),

    #[error("matrix {index} is not an orthogonal projection (deviation {deviation:.3e})")]
    NotProjection { index: usize, deviation: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:.3e} below -{tol:.1e}")]
    NotPsd { min_eigenvalue: f64, tol: f64 },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
