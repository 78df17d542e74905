use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("cell ({i}, {j}, {k}) is outside a {nx}x{ny}x{nz} grid")]
    CellOutOfRange {
        i: usize,
        j: usize,
        k: usize,
        nx: usize,
        ny: usize,
        nz: usize,
    },

    #[error("tensor is not symmetric: |a[{p}][{q}] - a[{q}][{p}]| = {defect:e}")]
    NotSymmetric { p: usize, q: usize, defect: f64 },

    #[error("tensor is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("singular Jacobian (|det| = {det:e})")]
    SingularJacobian { det: f64 },

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("invalid cloak specification: {0}")]
    InvalidCloak(String),

    #[error("invalid boundary configuration: {0}")]
    InvalidBoundary(String),

    #[error("invalid source configuration: {0}")]
    InvalidSource(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("spectral radius estimate did not converge after {iterations} iterations (last spectral radius estimate {last_estimate:e}, relative change {relative_change:e})")]
    CflNotConverged {
        iterations: usize,
        last_estimate: f64,
        relative_change: f64,
    },

    #[error("non-finite field value in {component} at step {step}")]
    NonFinite { component: String, step: u64 },

    #[error("size guard: {0}")]
    SizeGuard(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
