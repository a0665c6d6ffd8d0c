use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arithmetic produced a non-finite value")]
    Overflow,
    #[error("matrix is singular (|det| = {0:e})")]
    SingularMatrix(f64),
    #[error("leading coefficient of quadratic is zero within tolerance")]
    DegenerateLeadingCoefficient,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("boundary maps do not compose to zero: |d{index} d{next}| = {norm:e}", next = index + 1)]
    NotAComplex { index: usize, norm: f64 },
    #[error("chain complex is not acyclic")]
    NotAcyclic,
    #[error("cannot parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },
    #[error("parameter s is zero within tolerance")]
    SingularParameter,
    #[error("point is off the representation variety (residual {0:e})")]
    OffVariety(f64),
    #[error("u = {re} + {im}i is degenerate (u^2 (u^2 - 5) vanishes)")]
    DegenerateU { re: f64, im: f64 },
    #[error("invalid surgery slope {p}/{q}: p and q must be coprime and not both zero")]
    InvalidSlope { p: i64, q: i64 },
    #[error("Newton iteration did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Parse {
            what,
            detail: detail.into(),
        }
    }
}
