use thiserror::Error;

use crate::expr::ExprError;
use crate::quadrature::QuadError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{context}: {source}")]
    Expr {
        context: String,
        #[source]
        source: ExprError,
    },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("t = {t} lies outside the time window [{lo}, {hi}]")]
    OutOfWindow { t: f64, lo: f64, hi: f64 },
    #[error("|{name}| = {value:e} at t = {t} is below the minimum {min:e}")]
    BelowMinimum {
        name: &'static str,
        t: f64,
        value: f64,
        min: f64,
    },
    #[error("point ({x}, {y}) at t = {t} lies inside the excluded disc of radius {r_min} around the symmetry centre")]
    ExcludedDisc { x: f64, y: f64, t: f64, r_min: f64 },
    #[error("potentials unavailable: {0}")]
    PotentialsUnavailable(String),
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("trajectory left the spatial window at t = {t}: ({x}, {y})")]
    LeftWindow { t: f64, x: f64, y: f64 },
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn expr(context: impl Into<String>, source: ExprError) -> Error {
        Error::Expr {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
