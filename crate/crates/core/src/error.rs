use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lambda must be positive and finite, got {0}")]
    InvalidLambda(f64),

    #[error("point {z} is off the curve (residual {residual:e})")]
    OffCurve { z: Complex64, residual: f64 },

    #[error("vertex {z} lies within {delta:e} of branch point {branch}")]
    BranchTooClose {
        z: Complex64,
        branch: Complex64,
        delta: f64,
    },

    #[error("sheet choice still ambiguous near {z} after {depth} bisections")]
    AmbiguousSheet { z: Complex64, depth: u32 },

    #[error("integrand is singular at {0}")]
    SingularPoint(Complex64),

    #[error("quadrature stopped at {subintervals} subintervals with error estimate {estimate:e}")]
    QuadratureFailure { subintervals: usize, estimate: f64 },

    #[error("no admissible route to {0}")]
    PathBlocked(Complex64),

    #[error("sample lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("square-root branch is ambiguous at {0}")]
    BranchAmbiguity(Complex64),

    #[error("slice at height {height} has {found} points, need at least {needed}")]
    InsufficientSlicePoints {
        height: f64,
        found: usize,
        needed: usize,
    },

    #[error("division by zero in curvature formula")]
    DivisionByZero,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o failure: {0}")]
    IoFailure(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::IoFailure(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
