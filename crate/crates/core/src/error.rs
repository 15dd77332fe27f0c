use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("unphysical regime: {0}")]
    Unphysical(String),

    #[error("no valid post-selection gain: {0}")]
    NoValidGain(String),

    #[error("invalid populations: {0}")]
    InvalidPopulations(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("quadrature grid failed: {0}")]
    Quadrature(String),

    #[error("unsupported regime: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    ok: bool,
    reason: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, reason })
    }
}
