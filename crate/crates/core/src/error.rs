use thiserror::Error;

/// Errors raised by the numerical routines and the configuration layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point} left the domain [{lo}, {hi}]")]
    DomainEscape { point: f64, lo: f64, hi: f64 },

    #[error("orbit limits differ: {a} vs {b}")]
    LimitMismatch { a: f64, b: f64 },

    #[error("orbit of b hits orbit of a (b = tau^{steps}(a)); finite-dimensional case is not supported")]
    CoincidentOrbits { steps: i64 },

    #[error("degenerate orbit step at x = {x}: tau(x) = x")]
    DegenerateStep { x: f64 },

    #[error("limit point not found after {iterations} iterations (last iterate {last})")]
    NotConverged { iterations: usize, last: f64 },

    #[error("series tail not converged: last increment {tail:e}")]
    TailNotConverged { tail: f64 },

    #[error("product factor vanishes at index {index}")]
    FactorZero { index: usize },

    #[error("factor at index {index} is not a positive real ({value}); complex logarithm branch is not supported")]
    NonPositiveFactor { index: usize, value: String },

    #[error("grid functions live on different grids or the target grid is not the image grid")]
    GridMismatch,

    #[error("weight vanishes at index {index}; split the orbit instead")]
    ZeroWeight { index: usize },

    #[error("zero divisor in {what} at index {index}")]
    ZeroDivisor { what: &'static str, index: usize },

    #[error("weight recurrences disagree by {mismatch:e} (Pearson equation violated upstream)")]
    InconsistentWeights { mismatch: f64 },

    #[error("Riccati seed recursion hit a zero denominator at index {index}")]
    RiccatiBlowup { index: usize },

    #[error("coefficient alpha vanishes at index {index}")]
    ZeroAlpha { index: usize },

    #[error("lifted function is numerically zero (kernel of the ladder operator)")]
    ZeroLift,

    #[error("cannot descend with zero eigenvalue")]
    ZeroEigenvalue,

    #[error("regularity at the limit point fails: {0}")]
    SingularLimit(String),

    #[error("resolvent matrix is singular at index {index}")]
    SingularResolvent { index: usize },

    #[error("system is not upper triangular (c != 0 at index {index})")]
    NotTriangular { index: usize },

    #[error("gauge matrix is singular at index {index}")]
    SingularGauge { index: usize },

    #[error("step matrix is singular at index {index}")]
    DegenerateSystem { index: usize },

    #[error("negative base {base} raised to non-integer exponent {exponent}")]
    NegativeBaseRealExponent { base: f64, exponent: f64 },

    #[error("particular solution residual {residual:e} exceeds tolerance")]
    ParticularNotSolution { residual: f64 },

    #[error("degenerate quadruple: zero denominator in cross-ratio")]
    DegenerateQuadruple,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("expression error: {0}")]
    Expr(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the configuration or the file system rather than the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Expr(_) | Error::Json(_) | Error::Io(_) | Error::Csv(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
