use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid amplitude: {0}")]
    InvalidAmplitude(String),

    #[error("tail has no declared convergence class: {0}")]
    UndeclaredTailClass(String),

    #[error("product is not quasi-convergent: {0}")]
    NotQuasiConvergent(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("factor {index} has zero norm")]
    ZeroNormFactor { index: usize },

    #[error("sector verdict is inconclusive: {0}")]
    InconclusiveSector(String),

    #[error("infinite product classification is inconclusive: {0}")]
    InconclusiveProduct(String),

    #[error("generator is not Hermitian at factor {index} (max deviation {deviation:e})")]
    NonHermitianGenerator { index: usize, deviation: f64 },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("fraction {num}/{den} times N={n} is not an integer")]
    NonIntegralFraction { num: u64, den: u64, n: usize },

    #[error("dense expansion needs {needed} amplitudes, budget is {budget}")]
    DimensionBudgetExceeded { needed: u128, budget: usize },

    #[error("unsupported tail: {0}")]
    UnsupportedTail(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable code, used in CLI error documents.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::InvalidAmplitude(_) => "InvalidAmplitude",
            Error::UndeclaredTailClass(_) => "UndeclaredTailClass",
            Error::NotQuasiConvergent(_) => "NotQuasiConvergent",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::ZeroNormFactor { .. } => "ZeroNormFactor",
            Error::InconclusiveSector(_) => "InconclusiveSector",
            Error::InconclusiveProduct(_) => "InconclusiveProduct",
            Error::NonHermitianGenerator { .. } => "NonHermitianGenerator",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::NonIntegralFraction { .. } => "NonIntegralFraction",
            Error::DimensionBudgetExceeded { .. } => "DimensionBudgetExceeded",
            Error::UnsupportedTail(_) => "UnsupportedTail",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
