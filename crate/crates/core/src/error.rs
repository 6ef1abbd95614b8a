use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown family `{0}` (expected Z^d, F_k or H3)")]
    UnknownFamily(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot parse group element `{text}`: {reason}")]
    ParseElement { text: String, reason: String },

    #[error("ball of radius {radius} exceeds the vertex cap of {limit}")]
    BallTooLarge { radius: u32, limit: usize },

    #[error("search budget of {budget} exhausted")]
    BudgetExceeded { budget: u64 },

    #[error("{solver} solver did not converge after {iterations} iterations (gradient norm {gradient_norm:.3e})")]
    SolverFailure {
        solver: &'static str,
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("cannot build a null sequence: {0}")]
    CannotSubsample(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for this error: 2 usage, 3 resource or budget,
    /// 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BallTooLarge { .. } | Error::BudgetExceeded { .. } => 3,
            Error::SolverFailure { .. } | Error::CannotSubsample(_) | Error::Invariant(_) => 4,
            _ => 2,
        }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnknownFamily(_) => "unknown-family",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::ParseElement { .. } => "parse-element",
            Error::BallTooLarge { .. } => "ball-too-large",
            Error::BudgetExceeded { .. } => "budget-exceeded",
            Error::SolverFailure { .. } => "solver-failure",
            Error::CannotSubsample(_) => "cannot-subsample",
            Error::InvalidInput(_) => "invalid-input",
            Error::Invariant(_) => "invariant",
            Error::UnknownSuite(_) => "unknown-suite",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
