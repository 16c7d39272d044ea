use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the requested quantity.
    #[error("domain error: {0}")]
    Domain(String),

    /// Double-exponential quadrature ran out of levels before the
    /// successive-level difference met the tolerance.
    #[error(
        "quadrature did not converge after {levels} levels \
         (last two level values {last:e} and {previous:e})"
    )]
    NonConvergence { levels: usize, last: f64, previous: f64 },

    /// The integrand or objective produced a non-finite value where a finite
    /// one was required.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("invalid family specification: {0}")]
    Family(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Whether the failure is a numerical one (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::Numerical(_))
    }
}
