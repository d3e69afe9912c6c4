//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("truncated file: needed {needed} more bytes for {what}")]
    Truncated { what: &'static str, needed: usize },

    #[error("unrepresentable dimension {value} for {what} (limit {limit})")]
    UnrepresentableDim {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("channel {channel} has zero variance")]
    DegenerateChannel { channel: usize },

    #[error("degenerate trajectory: {0}")]
    DegenerateTrajectory(&'static str),

    #[error("unstable filter design: {0}")]
    UnstableFilter(String),

    #[error("class {class} has {got} trials, need at least {need}")]
    InsufficientTrials {
        class: usize,
        got: usize,
        need: usize,
    },

    #[error("curve fit did not converge after {iterations} iterations")]
    FitDidNotConverge { iterations: usize },

    #[error("degenerate cca: {0}")]
    DegenerateCca(String),

    #[error("window out of bounds: [{start}, {end}) outside trial of {len} samples")]
    WindowOutOfBounds { start: i64, end: i64, len: usize },

    #[error("shape mismatch at layer {layer} ({name}): expected {expected}, found {found}")]
    LayerShape {
        layer: usize,
        name: &'static str,
        expected: String,
        found: String,
    },

    #[error("non-finite {what} in layer {layer} ({name})")]
    NonFinite {
        layer: usize,
        name: &'static str,
        what: &'static str,
    },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    InBank {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach a bank/fold context to an error bubbling out of a sub-step.
    pub fn in_context(self, context: impl Into<String>) -> Self {
        Error::InBank {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}
