use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no coefficients")]
    NoCoefficients,
    #[error("degenerate: no non-zero coefficients")]
    DegenerateHistogram,
    #[error("unsupported model mass at level {level}")]
    UnsupportedModelMass { level: i64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("calibration degenerate")]
    CalibrationDegenerate,
    #[error("insufficient fit data")]
    InsufficientFitData,
    #[error("flat rate model")]
    FlatRateModel,
    #[error("no slope information")]
    NoSlopeInformation,
    #[error("empty GOP")]
    EmptyGop,
    #[error("no allocatable frames")]
    NoAllocatableFrames,
    #[error("non-square matrix: {rows} rows but row {row} has {len} entries")]
    NonSquare { rows: usize, row: usize, len: usize },
    #[error("size mismatch: expected {expected} bytes, found {actual} bytes")]
    SizeMismatch { expected: u64, actual: u64 },
    #[error("missing reference for B slice")]
    MissingReference,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("line {line}: cannot parse {content:?} as an integer level")]
    Parse { line: usize, content: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
