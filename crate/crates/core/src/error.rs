use thiserror::Error;

/// Errors raised by the period-space library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("quadratic form is degenerate")]
    Degenerate,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("basis vectors are linearly dependent")]
    LinearlyDependent,

    #[error("non-positive plane")]
    NonPositivePlane,

    #[error("subspace is not positive definite")]
    NonPositiveSubspace,

    #[error("null line: vector has zero norm")]
    NullLine,

    #[error("line is not spanned by a negative vector")]
    NonNegativeLine,

    #[error("vector is not positive (q(v,v) = {norm:e})")]
    NonPositiveVector { norm: f64 },

    #[error("not a positive null vector: q(v,v) = {null_residual:e}, q(v,v̄) = {positivity:e}")]
    NotPositiveNull { null_residual: f64, positivity: f64 },

    #[error("wrong ambient signature: expected ({expected_pos},{expected_neg}), found ({found_pos},{found_neg})")]
    WrongSignature {
        expected_pos: usize,
        expected_neg: usize,
        found_pos: usize,
        found_neg: usize,
    },

    #[error("frame is not adapted: {0}")]
    BadFrame(String),

    #[error("tangent vectors are attached to different base planes")]
    MismatchedBase,

    #[error("step size {0:e} is too small")]
    StepUnderflow(f64),

    #[error("chart left the positive region")]
    LeftChart,

    #[error("not of Fujiki type: {0}")]
    NotFujikiType(String),

    #[error("functional is not homogeneous of degree {degree}")]
    NotHomogeneous { degree: usize },

    #[error("vanishing denominator in the explicit form")]
    VanishingDenominator,

    #[error("disc contained in divisor")]
    DiscContainedInDivisor,

    #[error("disc lift is not a positive null curve at t = {t_re}+{t_im}i")]
    BadDisc { t_re: f64, t_im: f64 },

    #[error("unknown lattice `{0}`")]
    UnknownLattice(String),

    #[error("zero vector")]
    ZeroVector,

    #[error("enumeration of {0} box points exceeds the configured limit")]
    EnumerationTooLarge(u128),

    #[error("not a complex structure")]
    NotComplexStructure,

    #[error("not in the requested locus")]
    NotInLocus,

    #[error("symplectic form is degenerate or not antisymmetric")]
    BadSymplectic,

    #[error("metric is not positive definite")]
    BadMetric,

    #[error("not an isometry (residual {0:e})")]
    NotIsometry(f64),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
