//! Error type shared by every module in the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not Hermitian: ||H - H†||_max = {deviation:.3e} exceeds {tol:.1e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    NotPsd { min_eig: f64 },

    #[error("matrix is not unitary: ||U†U - I||_max = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("normalization too small: alpha = {alpha:.6e} < required {norm:.6e}")]
    AlphaTooSmall { alpha: f64, norm: f64 },

    #[error("{what} out of domain: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("budget exceeded for {what}: needs {needed}, available {available}")]
    Budget {
        what: &'static str,
        needed: u64,
        available: u64,
    },

    #[error("register layout error: {0}")]
    Register(String),

    #[error("sparsity/Hermiticity violation at row {row}, col {col}: {detail}")]
    Sparsity {
        row: usize,
        col: usize,
        detail: String,
    },

    #[error("propagator did not converge after {steps} steps: last delta {delta:.3e}")]
    NoConvergence { steps: u64, delta: f64 },

    #[error("invalid plan: {0}")]
    Plan(String),

    #[error("model error: {0}")]
    Model(String),
}

impl Error {
    pub fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }
}
