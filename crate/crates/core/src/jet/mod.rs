//! Truncated Taylor arithmetic ("jets") in one and two variables.
//!
//! Coefficients are stored normalized by factorials, so a jet of `f` at `a`
//! holds `f^(k)(a) / k!`. Every operation truncates at total order
//! [`ORDER`]. Analytic functions are applied by composing their own Taylor
//! series about the constant term with the nilpotent part of the argument.

mod jet1;
mod jet2;
mod series;

pub use jet1::Jet1;
pub use jet2::{Axis, Jet2, JET2_LEN};
pub use series::compose;

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::Scalar;

/// Maximal total order carried by every jet.
pub const ORDER: usize = 5;

/// Default absolute threshold below which a divisor's constant term is singular.
pub const DEFAULT_DIV_EPS: f64 = 1e-300;

/// Tolerance for matching an outer jet's expansion point to an inner value.
pub const EXPANSION_POINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("division by a jet with constant term {constant:e}")]
    DivisionBySingularJet { constant: f64 },
    #[error("{function} is undefined for constant term {constant:e}")]
    DomainError { function: &'static str, constant: f64 },
    #[error("outer jet expanded at {expected:e} composed with inner value {found:e}")]
    ExpansionPointMismatch { expected: f64, found: f64 },
    #[error("jet coefficient {index} is not finite")]
    NonFinite { index: usize },
}

/// Operations common to [`Jet1`] and [`Jet2`]; the analytic functions are
/// provided on top of these.
pub trait Jet<T: Scalar>:
    Copy + std::fmt::Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// Constant jet of the same arity.
    fn constant_like(&self, c: T) -> Self;

    /// Constant term.
    fn value(&self) -> T;

    /// Same jet with its constant term replaced.
    fn with_value(&self, c: T) -> Self;

    fn scale(&self, s: T) -> Self;

    fn is_finite(&self) -> bool;

    fn add_scalar(&self, c: T) -> Self {
        self.with_value(self.value() + c)
    }

    /// Quotient with the default singularity threshold.
    fn try_div(&self, rhs: &Self) -> Result<Self, JetError> {
        self.try_div_eps(rhs, T::lit(DEFAULT_DIV_EPS))
    }

    /// The constant term is the correctly rounded quotient of the constant terms.
    fn try_div_eps(&self, rhs: &Self, eps: T) -> Result<Self, JetError> {
        let q = *self * series::recip(rhs, eps)?;
        Ok(q.with_value(self.value() / rhs.value()))
    }

    fn recip(&self) -> Result<Self, JetError> {
        series::recip(self, T::lit(DEFAULT_DIV_EPS))
    }

    fn exp(&self) -> Self {
        series::exp(self)
    }

    fn ln(&self) -> Result<Self, JetError> {
        series::ln(self)
    }

    fn sqrt(&self) -> Result<Self, JetError> {
        series::sqrt(self)
    }

    fn powf(&self, r: T) -> Result<Self, JetError> {
        series::powf(self, r)
    }

    /// Integer power by repeated multiplication; negative exponents go through
    /// the reciprocal.
    fn powi(&self, n: i32) -> Result<Self, JetError> {
        let base = if n < 0 { self.recip()? } else { *self };
        let mut acc = self.constant_like(T::one());
        for _ in 0..n.unsigned_abs() {
            acc = acc * base;
        }
        Ok(acc)
    }

    fn sin(&self) -> Self {
        series::sin(self)
    }

    fn cos(&self) -> Self {
        series::cos(self)
    }
}

/// Rejects non-finite coefficients.
pub fn check_finite<T: Scalar>(coeffs: &[T]) -> Result<(), JetError> {
    match coeffs.iter().position(|c| !c.is_finite()) {
        Some(index) => Err(JetError::NonFinite { index }),
        None => Ok(()),
    }
}
