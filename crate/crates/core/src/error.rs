//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across the engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A primitive was applied to the wrong number of arguments.
    #[error("arity mismatch for `{name}`: expected {expected} arguments, got {got}")]
    ArityMismatch {
        name: &'static str,
        expected: usize,
        got: usize,
    },

    /// A primitive received a NaN or infinite argument.
    #[error("non-finite argument passed to `{name}`")]
    NonFiniteInput { name: &'static str },

    /// A primitive overflowed to a non-finite value.
    #[error("non-finite result from `{name}`")]
    NonFiniteResult { name: &'static str },

    /// An expression referenced a feature index the table does not have.
    #[error("feature index {index} out of range: table has {n_features} features")]
    FeatureOutOfRange { index: usize, n_features: usize },

    /// No display name available for a feature index.
    #[error("missing feature name for index {index}")]
    MissingFeatureName { index: usize },

    /// A feature was requested by a name the table does not contain.
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    /// Expression text failed to parse. Position is 1-based in tokens.
    #[error("parse error at token {position}: {message}")]
    Parse { position: usize, message: String },

    /// Invalid configuration (bad field value, unknown key, infeasible setting).
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed or inconsistent input data.
    #[error("data error: {0}")]
    Data(String),

    /// Inputs whose lengths/shapes do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An operation was invoked on a value in the wrong state
    /// (e.g. selection over unevaluated individuals).
    #[error("state error: {0}")]
    State(String),

    /// Model fitting failed (e.g. single-class labels).
    #[error("fit error: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the error is caused by user-supplied input (files, flags,
    /// configuration) rather than a failure at runtime. CLI layers map this
    /// to the usage exit status.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Config(_)
                | Error::Data(_)
                | Error::UnknownFeature(_)
                | Error::Csv(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
