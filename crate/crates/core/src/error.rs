use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// The generic two-root formulas divide by zero for these parameters.
    #[error("parameters require the dedicated {0} path")]
    SpecialCaseRequired(&'static str),

    #[error("generating function is singular at u = {0}")]
    Singular(Complex64),

    /// |z+| and |z-| agree; the evaluation point sits on a branch point.
    #[error("root moduli tie at u = {0}")]
    TieBreak(Complex64),

    #[error("inverted coefficient {value} at t = {t} leaves [0, 1] by more than the clamp threshold")]
    Inversion { t: u64, value: f64 },

    #[error("t = {t} exceeds the inversion cap of {max_terms} terms")]
    TooManyTerms { t: u64, max_terms: u64 },

    #[error("integrity check failed: {0}")]
    Integrity(String),
}
