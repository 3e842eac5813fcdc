use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error in {what:?}: {reason}")]
    Parse { what: String, reason: String },

    #[error("invalid rule set: {0}")]
    InvalidRules(String),

    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("action {action} has arity {got}, rule {rule} expects {expected}")]
    ArityMismatch {
        rule: String,
        action: String,
        expected: usize,
        got: usize,
    },

    #[error("rule {rule} has more than one deictic binding in the current state")]
    AmbiguousDeictic { rule: String },

    #[error("rules {first} and {second} of action {action} both trigger")]
    OverlappingRules {
        action: String,
        first: String,
        second: String,
    },

    #[error("outcome index {index} out of range for rule {rule} ({n} explicit outcomes)")]
    IndexOutOfRange { rule: String, index: usize, n: usize },

    #[error("the noise outcome of rule {rule} cannot be applied deterministically")]
    NoiseNotApplicable { rule: String },

    #[error("no rule of action {action} triggers in the current state")]
    NoRuleTriggers { action: String },

    #[error("no applicable action in the current state")]
    NoApplicableAction,

    #[error("empty sample: estimate requires at least one observation")]
    EmptySample,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("Dirichlet parameters must be positive, got {0}")]
    NonPositiveAlpha(f64),

    #[error("state space expansion exceeded {cap} nodes")]
    StateSpaceExplosion { cap: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Runtime(String),
}

impl Error {
    /// Errors caused by bad input files or parameters rather than by a
    /// failure while running.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::InvalidRules(_)
                | Error::InvalidEnvironment(_)
                | Error::Config(_)
                | Error::InvalidParameter(_)
                | Error::ArityMismatch { .. }
                | Error::Json { .. }
                | Error::Io { .. }
        )
    }

    pub(crate) fn parse(what: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            what: what.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
