use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate:e}, error bound {error_bound:e})"
    )]
    QuadratureNonConvergence {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error("non-finite function value at x = {at:e}")]
    NotFinite { at: f64 },

    #[error("{0} overflows; use the exponentially scaled form")]
    Overflow(&'static str),

    #[error("empty realization: no devices inside the access window")]
    EmptyRealization,

    #[error("no non-empty realizations in {n_total} iterations")]
    NoNonEmptyRealizations { n_total: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of the numerical kernels, as opposed to usage or I/O.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::QuadratureNonConvergence { .. }
            | Error::NotFinite { .. }
            | Error::Overflow(_)
            | Error::EmptyRealization
            | Error::NoNonEmptyRealizations { .. } => true,
            Error::Context { source, .. } => source.is_numeric(),
            _ => false,
        }
    }

    /// The innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| Error::Context {
            context: ctx(),
            source: Box::new(e),
        })
    }
}
