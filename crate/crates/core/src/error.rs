use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeblurError {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("reference vector has zero norm")]
    ZeroReference,
    #[error("image contains non-finite values")]
    NonFinite,
    #[error("image must have at least one row and one column")]
    EmptyImage,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed file: {0}")]
    MalformedFile(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("spread must be positive and finite, got {0}")]
    InvalidSpread(f64),
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("kernel of length {kernel} does not fit dimension {dim}")]
    KernelTooWide { kernel: usize, dim: usize },
    #[error("operator variant {variant} is incompatible with {bc} boundary conditions")]
    IncompatibleVariant { variant: String, bc: String },
    #[error("dense size {0} exceeds the limit of {1}")]
    TooLarge(usize, usize),
    #[error("operator is not separable")]
    NotSeparable,
    #[error("operator has the wrong representation: {0}")]
    WrongVariant(String),

    #[error("signal has zero norm")]
    ZeroSignal,
    #[error("negative intensity {0} cannot be Poisson sampled")]
    NegativeIntensity(f64),
    #[error("fraction must lie in (0, 1), got {0}")]
    BadFraction(f64),
    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),

    #[error("operator is singular: needed singular value is zero")]
    SingularOperator,
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("bad size: {0}")]
    BadSize(String),
    #[error("null spaces of the operator and regularization matrix intersect")]
    NullSpaceOverlap,
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bad lambda grid: {0}")]
    BadGrid(String),
    #[error("too few points: {0}")]
    TooFewPoints(String),
    #[error("L-curve has no positive curvature")]
    FlatCurve,
    #[error("target residual {target} outside attainable range [{low}, {high}]")]
    NotBracketed { target: f64, low: f64, high: f64 },

    #[error("dimension {0} is odd")]
    OddDimension(usize),
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("depth {depth} too deep for size {size} (coarsest level must be at least 4x4)")]
    TooDeep { depth: usize, size: usize },
}

pub type Result<T> = std::result::Result<T, DeblurError>;
