use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the filter, the diagnostics and the model constructors.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A particle or sample count was below one.
    InvalidCount { what: &'static str, value: usize },
    /// A model or policy parameter violates its invariant.
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    /// Every particle received zero (or non-finite) likelihood at time `t`.
    DegenerateWeights { t: usize },
    /// The model has no closed-form observation CDF.
    UnsupportedModel,
    /// A rank statistic fell outside `{0, ..., k}`.
    OutOfDomain { value: u64, k: u32 },
    /// Not enough samples for the requested statistic.
    TooShort { len: usize, needed: usize },
    /// One of the correlated slices has zero variance.
    DegenerateVariance,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidCount { what, value } => {
                write!(f, "invalid {what}: {value} (must be at least 1)")
            }
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::DegenerateWeights { t } => {
                write!(
                    f,
                    "all particle weights are zero or non-finite at t = {t} (filter divergence)"
                )
            }
            Error::UnsupportedModel => f.write_str("model has no closed-form observation CDF"),
            Error::OutOfDomain { value, k } => write!(f, "rank statistic {value} outside 0..={k}"),
            Error::TooShort { len, needed } => write!(
                f,
                "sequence of length {len} is too short (need at least {needed})"
            ),
            Error::DegenerateVariance => f.write_str("zero variance in correlation input"),
        }
    }
}

impl core::error::Error for Error {}
