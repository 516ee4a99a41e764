use thiserror::Error;

/// Errors raised by the pricing and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input fell outside the region where the model is defined.
    #[error("{name} must be {requirement} (got {value})")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid drift distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    /// The off-ratio search exhausted its drift bracket without finding a loss.
    #[error("no drift with negative average gain found in [{lo}, {hi}]")]
    WitnessNotFound { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require(
    ok: bool,
    name: &'static str,
    requirement: &'static str,
    value: f64,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            requirement,
            value,
        })
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    require(value.is_finite() && value > 0.0, name, "finite and > 0", value)
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<()> {
    require(value.is_finite() && value >= 0.0, name, "finite and >= 0", value)
}

pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<()> {
    require(value.is_finite(), name, "finite", value)
}
