use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {re}{im:+}i is not on the unit circle (|z| - 1 = {deviation:e})")]
    NotOnUnitCircle { re: f64, im: f64, deviation: f64 },

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("scale must be at least 2, got {0}")]
    InvalidScale(usize),

    #[error("loop is not certified paraunitary")]
    UncertifiedLoop,

    #[error("filter system is not a verified QMF system")]
    UnverifiedFilters,

    #[error("scalar QMF condition violated: residual {0:e}")]
    ScalarQmfViolation(f64),

    #[error("fir2 completion requires scale 2, got {0}")]
    Fir2RequiresScaleTwo(usize),

    #[error("grid size {grid} must be a positive multiple of the scale {n}")]
    InvalidGrid { grid: usize, n: usize },

    #[error("band mismatch: {0}")]
    BandMismatch(String),

    #[error("invalid band [{0}, {1}]")]
    InvalidBand(i64, i64),

    #[error("generator index {index} out of range for scale {n}")]
    InvalidIndex { index: usize, n: usize },

    #[error("vector has support outside the interior band")]
    OutsideInterior,

    #[error("truncated operator product disagrees with its symbol: residual {0:e}")]
    SymbolMismatch(f64),

    #[error("low-pass condition m_0(1) = 1 fails: m_0(1) = {re}{im:+}i")]
    NotLowPass { re: f64, im: f64 },

    #[error("cascade diverged: sup |phi| = {0:e} exceeds guard")]
    CascadeDiverged(f64),

    #[error("cascade not converged: successive-iterate difference {0:e}")]
    CascadeNotConverged(f64),

    #[error("grid incompatibility: {0}")]
    GridIncompatible(String),

    #[error("graded kernels are not mutually orthogonal: overlap {0:e}")]
    KernelOverlap(f64),

    #[error("corner witness failed coefficient-level verification: residual {0:e}")]
    WitnessRejected(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
