use thiserror::Error;

/// Failures reported by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("coefficient {field}[{element}] = {value} outside declared bounds [{lower}, {upper}]")]
    CoefficientOutOfBounds {
        field: &'static str,
        element: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular or indefinite system: {0}")]
    SingularSystem(String),

    #[error("eigenvalue iteration failed: {0}")]
    EigenSolve(String),

    #[error("frequency s = {re} + {im}i is not in the open right half-plane")]
    FrequencyNotInRightHalfPlane { re: f64, im: f64 },

    #[error("complex solve broke down at s = {re} + {im}i, eps = {eps}")]
    ComplexSolveBreakdown { re: f64, im: f64, eps: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("window start {eta} must lie in [0, {horizon})")]
    WindowOutOfRange { eta: f64, horizon: f64 },

    #[error("instance too large for the brute-force oracle: {0}")]
    InstanceTooLarge(String),

    #[error("gamma estimate is not positive ({value}) on a {grid} grid")]
    GammaNotPositive { value: f64, grid: String },

    #[error("truncation tail {tail:e} exceeds 10% of the line integral {integral:e}")]
    TailTooLarge { tail: f64, integral: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
