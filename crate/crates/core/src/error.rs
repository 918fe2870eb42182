use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} = {value} is outside the validated range ({limit})")]
    Range {
        what: &'static str,
        value: f64,
        limit: String,
    },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error(
        "finite section is numerically singular (sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e}); \
         pass a positive regularization"
    )]
    Singular { sigma_min: f64, sigma_max: f64 },

    #[error("section has {count} points, the dense-matrix cap is {cap}")]
    TooManyPoints { count: usize, cap: usize },

    #[error("point set is empty inside the requested radius")]
    EmptySet,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("all ladder rungs fall inside zero-exclusion disks at theta = {theta}")]
    AllRungsExcluded { theta: f64 },

    #[error("Gram section is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
