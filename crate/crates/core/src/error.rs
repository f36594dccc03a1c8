use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A numeric parameter is outside the domain the routine accepts.
    #[error("parameter out of domain: {0}")]
    Parameter(String),

    /// A spectral or basis index is invalid for the manifold.
    #[error("invalid index: {0}")]
    Index(String),

    /// An evaluation point lies outside the admissible window.
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Quadrature or time sampling cannot resolve the requested quantity.
    #[error("insufficient resolution: {0}")]
    Precision(String),

    #[error("mismatched operands: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// A value computed on a discretisation that may not resolve it exactly.
///
/// Under-resolved results are returned rather than rejected; the flag travels
/// with the value so callers can decide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checked<T> {
    pub value: T,
    pub under_resolved: bool,
}

impl<T> Checked<T> {
    pub fn exact(value: T) -> Self {
        Checked {
            value,
            under_resolved: false,
        }
    }

    pub fn flagged(value: T, under_resolved: bool) -> Self {
        Checked {
            value,
            under_resolved,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Checked<U> {
        Checked {
            value: f(self.value),
            under_resolved: self.under_resolved,
        }
    }

    /// Returns the value, or a precision error if it was flagged.
    pub fn strict(self, what: &str) -> Result<T> {
        if self.under_resolved {
            Err(Error::Precision(format!("{what}: quadrature does not resolve the integrand")))
        } else {
            Ok(self.value)
        }
    }
}
