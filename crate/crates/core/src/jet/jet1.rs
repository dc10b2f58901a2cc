use std::ops::{Add, Mul, Neg, Sub};

use super::{check_finite, Jet, JetError, ORDER};
use crate::scalar::{factorial, Scalar};

/// Univariate jet: `coeffs[k] = f^(k)(a) / k!` for `k = 0..=5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet1<T> {
    pub coeffs: [T; ORDER + 1],
}

impl<T: Scalar> Jet1<T> {
    pub fn from_coeffs(coeffs: [T; ORDER + 1]) -> Result<Self, JetError> {
        check_finite(&coeffs)?;
        Ok(Self { coeffs })
    }

    /// Builds a jet from raw derivatives `f(a), f'(a), ..., f^(5)(a)`.
    pub fn from_derivatives(derivs: [T; ORDER + 1]) -> Result<Self, JetError> {
        Self::from_coeffs(std::array::from_fn(|k| derivs[k] / factorial::<T>(k)))
    }

    pub fn constant(c: T) -> Self {
        let mut coeffs = [T::zero(); ORDER + 1];
        coeffs[0] = c;
        Self { coeffs }
    }

    /// The identity function expanded at `a`.
    pub fn variable(a: T) -> Self {
        let mut j = Self::constant(a);
        j.coeffs[1] = T::one();
        j
    }

    /// `f^(k)(a)`.
    pub fn derivative(&self, k: usize) -> T {
        self.coeffs[k] * factorial::<T>(k)
    }

    pub fn derivatives(&self) -> [T; ORDER + 1] {
        std::array::from_fn(|k| self.derivative(k))
    }

    /// Jet of `f'` at the same point. The top coefficient is unknown and set to 0,
    /// so the result is exact only to order 4.
    pub fn differentiate(&self) -> Self {
        let mut coeffs = [T::zero(); ORDER + 1];
        for (k, c) in coeffs.iter_mut().take(ORDER).enumerate() {
            *c = T::lit((k + 1) as f64) * self.coeffs[k + 1];
        }
        Self { coeffs }
    }

    /// Jet of the antiderivative taking the value `at_point` at the expansion point.
    /// The order-5 coefficient of `self` is dropped.
    pub fn integrate(&self, at_point: T) -> Self {
        let mut coeffs = [T::zero(); ORDER + 1];
        coeffs[0] = at_point;
        for k in 0..ORDER {
            coeffs[k + 1] = self.coeffs[k] / T::lit((k + 1) as f64);
        }
        Self { coeffs }
    }

    /// Evaluates the truncated polynomial at offset `h` from the expansion point.
    pub fn eval_offset(&self, h: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * h + c)
    }
}

impl<T: Scalar> Jet<T> for Jet1<T> {
    fn constant_like(&self, c: T) -> Self {
        Self::constant(c)
    }

    fn value(&self) -> T {
        self.coeffs[0]
    }

    fn with_value(&self, c: T) -> Self {
        let mut j = *self;
        j.coeffs[0] = c;
        j
    }

    fn scale(&self, s: T) -> Self {
        Self { coeffs: self.coeffs.map(|c| c * s) }
    }

    fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

impl<T: Scalar> Add for Jet1<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { coeffs: std::array::from_fn(|k| self.coeffs[k] + rhs.coeffs[k]) }
    }
}

impl<T: Scalar> Sub for Jet1<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self { coeffs: std::array::from_fn(|k| self.coeffs[k] - rhs.coeffs[k]) }
    }
}

impl<T: Scalar> Neg for Jet1<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { coeffs: self.coeffs.map(|c| -c) }
    }
}

impl<T: Scalar> Mul for Jet1<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut coeffs = [T::zero(); ORDER + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == T::zero() {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate().take(ORDER + 1 - i) {
                coeffs[i + j] = coeffs[i + j] + a * b;
            }
        }
        Self { coeffs }
    }
}

impl<T: Scalar> Mul<T> for Jet1<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        self.scale(rhs)
    }
}

impl<T: Scalar> Add<T> for Jet1<T> {
    type Output = Self;
    fn add(self, rhs: T) -> Self {
        self.add_scalar(rhs)
    }
}

impl<T: Scalar> Sub<T> for Jet1<T> {
    type Output = Self;
    fn sub(self, rhs: T) -> Self {
        self.add_scalar(-rhs)
    }
}
