use thiserror::Error;

/// Errors raised anywhere in the engine.
///
/// Each variant carries a module-qualified code so the CLI can surface
/// where a failure originated; `exit_code` maps the variant onto the
/// process exit status.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("[exact] invalid argument: {0}")]
    InvalidArgument(String),

    #[error("[exact] overlapping intervals {0} and {1}")]
    Overlap(String, String),

    #[error("[{module}] capacity exceeded: {detail}")]
    Capacity { module: &'static str, detail: String },

    #[error("[synth] appropriate-sequence violation: {0}")]
    Inappropriate(String),

    #[error("[synth] m_k too small: {0}")]
    MTooSmall(String),

    #[error("[synth] invariant corruption: {0}")]
    InvariantCorruption(String),

    #[error("[family] {0}")]
    Family(String),

    #[error("[family] level {level} starved: parent {parent} has no admissible child")]
    LevelStarved { level: usize, parent: String },

    #[error("[measure] series diverges: exponent {0} must exceed 2")]
    Divergent(String),

    #[error("[measure] {0}")]
    Measure(String),

    #[error("[path] undecided comparison after precision escalation: {0}")]
    Undecided(String),

    #[error("[path] {0}")]
    Path(String),

    #[error("[config] {0}")]
    Config(String),

    #[error("[io] {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn capacity(module: &'static str, detail: impl Into<String>) -> Self {
        Error::Capacity {
            module,
            detail: detail.into(),
        }
    }

    /// Process exit status: 2 for configuration problems, 3 for capacity
    /// limits, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) | Error::Inappropriate(_) => 2,
            Error::Capacity { .. } => 3,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
