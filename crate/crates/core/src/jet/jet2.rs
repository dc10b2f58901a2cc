use std::ops::{Add, Mul, Neg, Sub};

use super::{check_finite, Jet, JetError, ORDER};
use crate::scalar::{factorial, Scalar};

/// Number of coefficients with total degree at most [`ORDER`].
pub const JET2_LEN: usize = (ORDER + 1) * (ORDER + 2) / 2;

/// Coordinate direction of a bivariate jet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    T1,
    T2,
}

/// Bivariate jet: the coefficient of `h1^j h2^k` is
/// `d^(j+k) f / dt1^j dt2^k (a) / (j! k!)` for `j + k <= 5`.
///
/// Storage is grouped by total degree `d`, then by `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2<T> {
    pub coeffs: [T; JET2_LEN],
}

#[inline]
const fn base(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Storage slot of the `h1^j h2^k` coefficient.
#[inline]
pub const fn index(j: usize, k: usize) -> usize {
    base(j + k) + k
}

impl<T: Scalar> Jet2<T> {
    pub fn from_coeffs(coeffs: [T; JET2_LEN]) -> Result<Self, JetError> {
        check_finite(&coeffs)?;
        Ok(Self { coeffs })
    }

    pub fn zero() -> Self {
        Self { coeffs: [T::zero(); JET2_LEN] }
    }

    pub fn constant(c: T) -> Self {
        let mut j = Self::zero();
        j.coeffs[0] = c;
        j
    }

    /// The coordinate function along `axis`, expanded where that coordinate equals `a`.
    pub fn variable(a: T, axis: Axis) -> Self {
        let mut j = Self::constant(a);
        match axis {
            Axis::T1 => j.coeffs[index(1, 0)] = T::one(),
            Axis::T2 => j.coeffs[index(0, 1)] = T::one(),
        }
        j
    }

    /// Normalized coefficient `c_{jk}`.
    pub fn coeff(&self, j: usize, k: usize) -> T {
        self.coeffs[index(j, k)]
    }

    pub fn set_coeff(&mut self, j: usize, k: usize, c: T) {
        self.coeffs[index(j, k)] = c;
    }

    /// `d^(j+k) f / dt1^j dt2^k` at the expansion point.
    pub fn partial(&self, j: usize, k: usize) -> T {
        self.coeff(j, k) * factorial::<T>(j) * factorial::<T>(k)
    }

    /// Jet of the partial derivative along `axis`. Valid to one order less than `self`;
    /// the unknown top-degree coefficients are zero.
    pub fn differentiate(&self, axis: Axis) -> Self {
        let mut out = Self::zero();
        for d in 0..ORDER {
            for k in 0..=d {
                let j = d - k;
                out.coeffs[index(j, k)] = match axis {
                    Axis::T1 => T::lit((j + 1) as f64) * self.coeff(j + 1, k),
                    Axis::T2 => T::lit((k + 1) as f64) * self.coeff(j, k + 1),
                };
            }
        }
        out
    }

    pub fn d1(&self) -> Self {
        self.differentiate(Axis::T1)
    }

    pub fn d2(&self) -> Self {
        self.differentiate(Axis::T2)
    }

    /// Evaluates the truncated polynomial at offset `(h1, h2)`.
    pub fn eval_offset(&self, h1: T, h2: T) -> T {
        let mut acc = T::zero();
        for d in 0..=ORDER {
            for k in 0..=d {
                acc = acc + self.coeff(d - k, k) * h1.powi((d - k) as i32) * h2.powi(k as i32);
            }
        }
        acc
    }

    /// Iterates `(j, k, c_jk)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..=ORDER).flat_map(move |d| (0..=d).map(move |k| (d - k, k, self.coeff(d - k, k))))
    }
}

impl<T: Scalar> Jet<T> for Jet2<T> {
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

impl<T: Scalar> Add for Jet2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { coeffs: std::array::from_fn(|i| self.coeffs[i] + rhs.coeffs[i]) }
    }
}

impl<T: Scalar> Sub for Jet2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self { coeffs: std::array::from_fn(|i| self.coeffs[i] - rhs.coeffs[i]) }
    }
}

impl<T: Scalar> Neg for Jet2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { coeffs: self.coeffs.map(|c| -c) }
    }
}

impl<T: Scalar> Mul for Jet2<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = [T::zero(); JET2_LEN];
        for d1 in 0..=ORDER {
            for k1 in 0..=d1 {
                let a = self.coeffs[base(d1) + k1];
                if a == T::zero() {
                    continue;
                }
                for d2 in 0..=(ORDER - d1) {
                    for k2 in 0..=d2 {
                        let slot = base(d1 + d2) + k1 + k2;
                        out[slot] = out[slot] + a * rhs.coeffs[base(d2) + k2];
                    }
                }
            }
        }
        Self { coeffs: out }
    }
}

impl<T: Scalar> Mul<T> for Jet2<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        self.scale(rhs)
    }
}

impl<T: Scalar> Add<T> for Jet2<T> {
    type Output = Self;
    fn add(self, rhs: T) -> Self {
        self.add_scalar(rhs)
    }
}

impl<T: Scalar> Sub<T> for Jet2<T> {
    type Output = Self;
    fn sub(self, rhs: T) -> Self {
        self.add_scalar(-rhs)
    }
}
