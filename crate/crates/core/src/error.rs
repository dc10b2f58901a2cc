use thiserror::Error;

use crate::expr::ExprError;
use crate::jet::JetError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("Levi form degenerate at {at:?}: rho11 = {rho11:e}")]
    LeviRankViolation { at: Vec<f64>, rho11: f64 },
    #[error("2-nondegeneracy fails at {at:?}: S = {s:e}")]
    TwoDegeneracyViolation { at: Vec<f64>, s: f64 },
    #[error("Newton iteration for {what} did not converge; residual trace {trace:?}")]
    NewtonNoConvergence { what: &'static str, trace: Vec<f64> },
    #[error("Newton derivative {derivative:e} vanishes at {at}")]
    SingularJacobian { at: f64, derivative: f64 },
    #[error("argument {sigma} is outside the monotone branch of p'")]
    RangeError { sigma: f64 },
    #[error("normalization {what} violated: {value:e}")]
    Normalization { what: &'static str, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition failed: {0}")]
    PreconditionFailure(String),
    #[error("trial left its admissible domain: {0}")]
    TrialDomainError(String),
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }
}
