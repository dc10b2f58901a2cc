//! Outer-function Taylor series and their composition with a jet.

use super::{Jet, Jet1, JetError, EXPANSION_POINT_TOL, ORDER};
use crate::scalar::{factorial, Scalar};

/// Composes a univariate Taylor series of some `f` expanded at `outer_at`
/// with `inner`, whose constant term must equal `outer_at`.
///
/// Evaluates `sum_k outer[k] * (inner - outer_at)^k` by Horner's rule; the
/// shifted inner jet is nilpotent so truncation is exact.
pub fn compose<T: Scalar, J: Jet<T>>(outer: &Jet1<T>, outer_at: T, inner: &J) -> Result<J, JetError> {
    let x0 = inner.value();
    let tol = T::lit(EXPANSION_POINT_TOL) * T::one().max(outer_at.abs());
    if (x0 - outer_at).abs() > tol {
        return Err(JetError::ExpansionPointMismatch { expected: outer_at.to_f64_lossy(), found: x0.to_f64_lossy() });
    }
    Ok(horner(&outer.coeffs, inner))
}

fn horner<T: Scalar, J: Jet<T>>(outer: &[T; ORDER + 1], inner: &J) -> J {
    let h = inner.with_value(T::zero());
    let mut acc = inner.constant_like(outer[ORDER]);
    for k in (0..ORDER).rev() {
        acc = (acc * h).add_scalar(outer[k]);
    }
    acc
}

fn from_fn<T: Scalar>(f: impl Fn(usize) -> T) -> [T; ORDER + 1] {
    std::array::from_fn(f)
}

pub(super) fn recip<T: Scalar, J: Jet<T>>(x: &J, eps: T) -> Result<J, JetError> {
    let x0 = x.value();
    if !(x0.abs() >= eps) {
        return Err(JetError::DivisionBySingularJet { constant: x0.to_f64_lossy() });
    }
    let inv = x0.recip();
    // 1/(x0 + h) = sum (-1)^k h^k / x0^(k+1)
    let mut c = [T::zero(); ORDER + 1];
    let mut term = inv;
    for ck in c.iter_mut() {
        *ck = term;
        term = -term * inv;
    }
    Ok(horner(&c, x))
}

pub(super) fn exp<T: Scalar, J: Jet<T>>(x: &J) -> J {
    let e = x.value().exp();
    horner(&from_fn(|k| e / factorial::<T>(k)), x)
}

pub(super) fn ln<T: Scalar, J: Jet<T>>(x: &J) -> Result<J, JetError> {
    let x0 = x.value();
    if !(x0 > T::zero()) {
        return Err(JetError::DomainError { function: "log", constant: x0.to_f64_lossy() });
    }
    let inv = x0.recip();
    let c = from_fn(|k| match k {
        0 => x0.ln(),
        _ => {
            let sign = if k % 2 == 1 { T::one() } else { -T::one() };
            sign * inv.powi(k as i32) / T::lit(k as f64)
        }
    });
    Ok(horner(&c, x))
}

/// Generalized binomial series `(x0 + h)^r = x0^r sum binom(r, k) (h/x0)^k`.
fn binomial_series<T: Scalar>(x0: T, r: T, head: T) -> [T; ORDER + 1] {
    let inv = x0.recip();
    let mut c = [T::zero(); ORDER + 1];
    let mut binom = T::one();
    let mut scale = head;
    for (k, ck) in c.iter_mut().enumerate() {
        *ck = binom * scale;
        binom = binom * (r - T::lit(k as f64)) / T::lit((k + 1) as f64);
        scale = scale * inv;
    }
    c
}

pub(super) fn sqrt<T: Scalar, J: Jet<T>>(x: &J) -> Result<J, JetError> {
    let x0 = x.value();
    if !(x0 > T::zero()) {
        return Err(JetError::DomainError { function: "sqrt", constant: x0.to_f64_lossy() });
    }
    let half = T::lit(0.5);
    Ok(horner(&binomial_series(x0, half, x0.sqrt()), x))
}

pub(super) fn powf<T: Scalar, J: Jet<T>>(x: &J, r: T) -> Result<J, JetError> {
    let x0 = x.value();
    if !(x0 > T::zero()) {
        return Err(JetError::DomainError { function: "pow", constant: x0.to_f64_lossy() });
    }
    Ok(horner(&binomial_series(x0, r, x0.powf(r)), x))
}

pub(super) fn sin<T: Scalar, J: Jet<T>>(x: &J) -> J {
    let (s, c) = x.value().sin_cos();
    let cycle = [s, c, -s, -c];
    horner(&from_fn(|k| cycle[k % 4] / factorial::<T>(k)), x)
}

pub(super) fn cos<T: Scalar, J: Jet<T>>(x: &J) -> J {
    let (s, c) = x.value().sin_cos();
    let cycle = [c, -s, -c, s];
    horner(&from_fn(|k| cycle[k % 4] / factorial::<T>(k)), x)
}
