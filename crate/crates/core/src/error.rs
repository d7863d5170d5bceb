use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two inputs that must agree in length or shape do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A construction ran out of indices before meeting its targets.
    #[error("supply exhausted: {0}")]
    SupplyExhausted(String),

    /// An exact computation would exceed its configured size cap.
    #[error("size cap exceeded: {what} needs {needed}, cap is {cap}")]
    SizeCap { what: String, needed: u128, cap: u128 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    /// Short machine-readable tag used in JSON error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Shape(_) => "shape",
            Error::SupplyExhausted(_) => "supply_exhausted",
            Error::SizeCap { .. } => "size_cap",
        }
    }
}
