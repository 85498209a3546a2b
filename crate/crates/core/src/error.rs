use thiserror::Error;

/// Errors raised by grid construction, operator assembly and the checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value {value} at (t, tau) = ({t}, {tau})")]
    NonFiniteKernel { t: f64, tau: f64, value: String },

    #[error("function is not finite at eigenvalue {eigenvalue}")]
    NonFiniteAtEigenvalue { eigenvalue: f64 },

    #[error("resolvent is singular: z = {z} lies within {distance:e} of eigenvalue {eigenvalue}")]
    SingularResolvent {
        z: String,
        eigenvalue: f64,
        distance: f64,
    },

    #[error("symmetric eigensolver did not converge for a {0}x{0} matrix")]
    NoConvergence(usize),

    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad user input rather than by the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidArgument(_) | Error::Config { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
