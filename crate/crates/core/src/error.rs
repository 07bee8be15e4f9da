use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The array carries no angular information (E_Ȧ = 0), so the θ entry of the
    /// FIM is zero.
    #[error("singular information: array has zero angular information (E_Adot = {e_adot})")]
    SingularInformation { e_adot: f64 },

    /// The closed-form MCRB denominator vanishes (fully destructive paths).
    #[error("degenerate bound: squared denominator {denominator:e} below threshold {threshold:e}")]
    DegenerateBound { denominator: f64, threshold: f64 },

    #[error("error-score matrix is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
