use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("resonant parameters: {0}")]
    Resonance(String),

    #[error("series diverges at |t| = {modulus} (needs |t| < 1)")]
    Divergent { modulus: f64 },

    #[error("lower parameter b[{index}] = {value} is a non-positive integer")]
    LowerParameterPole { index: usize, value: String },

    #[error("series did not converge within {cap} terms")]
    SeriesCapExceeded { cap: usize },

    #[error("series truncated too early: tail term {tail:.3e} exceeds tolerance")]
    InsufficientDepth { tail: f64 },

    #[error("t = {t} is a singular point of the system")]
    SingularTime { t: f64 },

    #[error("coordinate chart breaks down: {0}")]
    ChartBreakdown(String),

    #[error("step size underflow at t = {t} (h = {h:.3e}); probable movable pole near t = {t}")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integration exceeded {max_steps} steps at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("generator r_{generator}: vanishing denominator {what}")]
    VanishingDenominator { generator: usize, what: String },

    #[error("t = {t} is outside the principal-branch domain t > 0")]
    BranchDomain { t: f64 },

    #[error("letter {position} of word: {source}")]
    WordStep {
        position: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("gauge transformation leaves non-Fuchsian term at ({row}, {col})")]
    NotFuchsian { row: usize, col: usize },

    #[error("no admissible sample after {attempts} attempts")]
    SamplingExhausted { attempts: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
