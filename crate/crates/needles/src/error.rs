//! Error type shared by all solvers and samplers.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the numerical routines.
///
/// Validation failures ([`Error::InvalidParameter`]) are distinguished from
/// numerical failures (everything else) so callers can map them to different
/// exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter failed validation; `name` identifies the offending field.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Rejection sampling exceeded its attempt budget (density too high).
    #[error("sampling saturated after {attempts} attempts (occupied fraction too high)")]
    Saturation { attempts: u64 },

    /// An iterative solver stopped before reaching its tolerance.
    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    /// A time integration left its validity regime (blow-up or negativity).
    #[error("numerical instability in {what}: {detail}")]
    Instability { what: &'static str, detail: String },
}

impl Error {
    /// Shorthand for an [`Error::InvalidParameter`].
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
