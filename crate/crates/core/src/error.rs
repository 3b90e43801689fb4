use thiserror::Error;

/// Errors shared by every module. The CLI maps `Budget` to exit code 3 and
/// everything else (preconditions, config, I/O) to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("region too small to sew at this r ({centers} center(s) found)")]
    RegionTooSmall { centers: usize },
    #[error("stripe violates admissibility: {0}")]
    StripeInadmissible(String),
    #[error("mass cap too small: {0}")]
    MassCap(String),
    #[error("inadmissible profile: {0}")]
    Inadmissible(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("numerical budget exceeded: {0}")]
    Budget(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Budget(_) => 3,
            _ => 2,
        }
    }

    /// Prefix the message with `ctx`, keeping the variant (and exit code).
    pub fn context(self, ctx: impl std::fmt::Display) -> Self {
        let p = |m: String| format!("{ctx}: {m}");
        match self {
            Error::Domain(m) => Error::Domain(p(m)),
            Error::StripeInadmissible(m) => Error::StripeInadmissible(p(m)),
            Error::MassCap(m) => Error::MassCap(p(m)),
            Error::Inadmissible(m) => Error::Inadmissible(p(m)),
            Error::Refused(m) => Error::Refused(p(m)),
            Error::Invalid(m) => Error::Invalid(p(m)),
            Error::Budget(m) => Error::Budget(p(m)),
            Error::Config(m) => Error::Config(p(m)),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
