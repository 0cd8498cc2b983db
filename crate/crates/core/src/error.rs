use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An operator that should be positive semidefinite has a clearly negative eigenvalue.
    #[error("operator is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("invalid value for {name}: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    /// The closed-form ideal cost was evaluated outside the range where it describes an optimum.
    #[error(
        "k = {k} is outside the validity range of the ideal nonprojective cost at theta = {theta}"
    )]
    OutOfRange { theta: f64, k: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
