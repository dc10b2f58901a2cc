//! Pointwise differential quantities and residuals of a graphing function
//! `rho(t1, t2)` supplied as an order-5 bivariate jet.
//!
//! Three conditions are evaluated:
//!
//! * the homogeneous Monge–Ampère equation `rho11 rho22 - rho12^2 = 0`;
//! * the curvature condition
//!   `2 sqrt(rho11) [rho12 A_1 - rho11 A_2] - 2 sqrt(rho11) [rho12 B_1 - rho11 B_2]
//!    - 11 S_1 rho11 - S rho111 = 0` with `A = S_1 / (sqrt(rho11) S)`,
//!   `B = rho111 / rho11^(3/2)` and `S = (rho12 / rho11)_1`;
//! * the Monge equation in `t1`:
//!   `9 rho^(V) rho11^2 - 45 rho^(IV) rho111 rho11 + 40 rho111^3 = 0`.
//!
//! Every residual is reported raw and normalized. The normalization divides by
//! the sum of the absolute values of the formula's terms plus a reference term
//! of the same homogeneity under `rho -> lambda rho`, so exact zeros built from
//! vanishing terms do not turn into `0/0`.

use crate::error::{Error, Result};
use crate::jet::{Jet, Jet2};
use crate::scalar::Scalar;

/// Default threshold for the `rho11 > 0` and `S != 0` guards.
pub const DEFAULT_RANK_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint<T> {
    pub t1: T,
    pub t2: T,
    pub rho: Jet2<T>,
}

impl<T: Scalar> SurfacePoint<T> {
    pub fn new(t1: T, t2: T, rho: Jet2<T>) -> Result<Self> {
        crate::jet::check_finite(&rho.coeffs)?;
        Ok(Self { t1, t2, rho })
    }

    fn at(&self) -> Vec<f64> {
        vec![self.t1.to_f64_lossy(), self.t2.to_f64_lossy()]
    }
}

/// A residual together with the scale it is normalized by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual<T> {
    pub raw: T,
    pub scale: T,
}

impl<T: Scalar> Residual<T> {
    /// Sums `terms` and uses `sum |term| + reference` as the scale.
    pub fn from_terms(terms: &[T], reference: T) -> Self {
        let raw = terms.iter().fold(T::zero(), |a, &t| a + t);
        let scale = terms.iter().fold(reference.abs(), |a, &t| a + t.abs());
        Self { raw, scale }
    }

    pub fn normalized(&self) -> T {
        if self.scale > T::zero() {
            self.raw / self.scale
        } else {
            T::zero()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointQuantities<T> {
    pub rho11: T,
    pub rho12: T,
    pub rho22: T,
    pub rho111: T,
    pub rho4: T,
    pub rho5: T,
    pub s: T,
    pub s1: T,
    pub monge_ampere: Residual<T>,
    pub theta21: Residual<T>,
    pub monge_t1: Residual<T>,
}

/// Jets of the second derivatives and of `S`, shared by the rank checks and
/// the curvature residual.
struct Derived<T> {
    rho11: Jet2<T>,
    rho12: Jet2<T>,
    s: Jet2<T>,
}

fn derived<T: Scalar>(p: &SurfacePoint<T>) -> Result<Derived<T>> {
    let rho1 = p.rho.d1();
    let rho11 = rho1.d1();
    let rho12 = rho1.d2();
    if !(rho11.value() != T::zero()) {
        return Err(Error::LeviRankViolation { at: p.at(), rho11: rho11.value().to_f64_lossy() });
    }
    let s = rho12.try_div(&rho11)?.d1();
    Ok(Derived { rho11, rho12, s })
}

/// `rho11 rho22 - rho12^2`.
pub fn monge_ampere_residual<T: Scalar>(p: &SurfacePoint<T>) -> T {
    monge_ampere(p).raw
}

fn monge_ampere<T: Scalar>(p: &SurfacePoint<T>) -> Residual<T> {
    let r11 = p.rho.partial(2, 0);
    let r12 = p.rho.partial(1, 1);
    let r22 = p.rho.partial(0, 2);
    Residual::from_terms(&[r11 * r22, -r12 * r12], r11 * r11)
}

/// Left-hand side of the Monge equation in `t1`.
pub fn monge_residual_t1<T: Scalar>(p: &SurfacePoint<T>) -> Residual<T> {
    let r11 = p.rho.partial(2, 0);
    let r111 = p.rho.partial(3, 0);
    let r4 = p.rho.partial(4, 0);
    let r5 = p.rho.partial(5, 0);
    Residual::from_terms(
        &[T::lit(9.0) * r5 * r11 * r11, -T::lit(45.0) * r4 * r111 * r11, T::lit(40.0) * r111 * r111 * r111],
        r11 * r11 * r11,
    )
}

/// Computes every pointwise quantity and fails if `rho11 <= eps` or `|S| <= eps`.
pub fn check_rank_conditions<T: Scalar>(p: &SurfacePoint<T>, eps: T) -> Result<PointQuantities<T>> {
    let d = derived(p)?;
    let rho11 = d.rho11.value();
    if !(rho11 > eps) {
        return Err(Error::LeviRankViolation { at: p.at(), rho11: rho11.to_f64_lossy() });
    }
    let s = d.s.value();
    if !(s.abs() > eps) {
        return Err(Error::TwoDegeneracyViolation { at: p.at(), s: s.to_f64_lossy() });
    }
    let theta21 = theta21_from(&d)?;
    Ok(PointQuantities {
        rho11,
        rho12: d.rho12.value(),
        rho22: p.rho.partial(0, 2),
        rho111: p.rho.partial(3, 0),
        rho4: p.rho.partial(4, 0),
        rho5: p.rho.partial(5, 0),
        s,
        s1: d.s.d1().value(),
        monge_ampere: monge_ampere(p),
        theta21,
        monge_t1: monge_residual_t1(p),
    })
}

/// Left-hand side of the curvature condition; requires `rho11 > eps` and `|S| > eps`.
pub fn theta21_residual<T: Scalar>(p: &SurfacePoint<T>, eps: T) -> Result<Residual<T>> {
    Ok(check_rank_conditions(p, eps)?.theta21)
}

fn theta21_from<T: Scalar>(d: &Derived<T>) -> Result<Residual<T>> {
    // Valid orders of the jets below, starting from order 5 for rho:
    // rho11, rho12: 3; S, rho111, B: 2; S1, A: 1.
    let rho11 = d.rho11;
    let rho111 = rho11.d1();
    let s1 = d.s.d1();
    let root = rho11.sqrt()?;
    let a = s1.try_div(&(root * d.s))?;
    let b = rho111.try_div(&(root * rho11))?;

    let two_root = T::lit(2.0) * root.value();
    let r11 = rho11.value();
    let r12 = d.rho12.value();
    let (a1, a2) = (a.d1().value(), a.d2().value());
    let (b1, b2) = (b.d1().value(), b.d2().value());
    let terms = [
        two_root * r12 * a1,
        -two_root * r11 * a2,
        -two_root * r12 * b1,
        two_root * r11 * b2,
        -T::lit(11.0) * s1.value() * r11,
        -d.s.value() * rho111.value(),
    ];
    Ok(Residual::from_terms(&terms, d.s.value() * r11))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Params};

    fn point(src: &str, t1: f64, t2: f64, params: &[(&str, f64)]) -> SurfacePoint<f64> {
        let e = parse(src, &["t1", "t2"]).unwrap();
        let params: Params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        SurfacePoint::new(t1, t2, e.eval_jet2(t1, t2, &params).unwrap()).unwrap()
    }

    const FLAT: &str = "t1^2/(2*(1-t2))";
    const LOG_SURFACE: &str = "(t1+C)*log((t1+C)/(C-t2)) - (t1+t2)";

    #[test]
    fn monge_ampere_examples() {
        assert!((monge_ampere_residual(&point("t1^2 + t2^2", 0.0, 0.0, &[])) - 4.0).abs() < 1e-15);
        assert!(monge_ampere_residual(&point(FLAT, 0.1, 0.1, &[])).abs() < 1e-15);
        for &(t1, t2) in &[(0.0, 0.0), (0.15, -0.1), (-0.2, 0.2)] {
            let p = point(LOG_SURFACE, t1, t2, &[("C", 1.0)]);
            assert!(monge_ampere_residual(&p).abs() < 1e-10);
        }
    }

    #[test]
    fn rank_conditions() {
        let q = check_rank_conditions(&point(FLAT, 0.0, 0.0, &[]), 1e-8).unwrap();
        assert!((q.rho11 - 1.0).abs() < 1e-15);
        assert!((q.s - 1.0).abs() < 1e-15);
        let q = check_rank_conditions(&point(LOG_SURFACE, 0.0, 0.0, &[("C", 1.0)]), 1e-8).unwrap();
        assert!((q.rho11 - 1.0).abs() < 1e-14);
        assert!((q.s - 1.0).abs() < 1e-14);
        match check_rank_conditions(&point("t1^2 + t2^2", 0.1, 0.0, &[]), 1e-8) {
            Err(Error::TwoDegeneracyViolation { at, .. }) => assert_eq!(at, vec![0.1, 0.0]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            check_rank_conditions(&point("t2^2 - t1^2", 0.0, 0.0, &[]), 1e-8),
            Err(Error::LeviRankViolation { .. })
        ));
    }

    #[test]
    fn flat_tube_has_vanishing_residuals() {
        for &(t1, t2) in &[(0.0, 0.0), (0.2, -0.2), (-0.13, 0.17)] {
            let q = check_rank_conditions(&point(FLAT, t1, t2, &[]), 1e-8).unwrap();
            assert!(q.theta21.raw.abs() < 1e-12);
            assert!(q.monge_t1.raw.abs() < 1e-12);
        }
    }

    #[test]
    fn log_surface_residuals() {
        let p = point(LOG_SURFACE, 0.0, 0.0, &[("C", 1.0)]);
        let q = check_rank_conditions(&p, 1e-8).unwrap();
        assert!((q.rho111 + 1.0).abs() < 1e-13);
        assert!((q.rho4 - 2.0).abs() < 1e-12);
        assert!((q.rho5 + 6.0).abs() < 1e-11);
        assert!((q.monge_t1.raw + 4.0).abs() < 1e-10);
        for &(t1, t2) in &[(0.0, 0.0), (0.2, 0.2), (-0.2, 0.1), (0.05, -0.2)] {
            let q = check_rank_conditions(&point(LOG_SURFACE, t1, t2, &[("C", 1.0)]), 1e-8).unwrap();
            assert!(q.theta21.normalized().abs() < 1e-10, "{t1} {t2}: {:?}", q.theta21);
        }
    }

    #[test]
    fn scale_covariance() {
        let base = point(LOG_SURFACE, 0.07, -0.04, &[("C", 1.0)]);
        let ma = monge_ampere_residual(&point("t1^2*exp(t2) + t2^3", 0.1, 0.2, &[]));
        for lambda in [2.0, 10.0] {
            let scaled = SurfacePoint::new(base.t1, base.t2, base.rho.scale(lambda)).unwrap();
            let m0 = monge_residual_t1(&base).raw;
            let m1 = monge_residual_t1(&scaled).raw;
            assert!((m1 - lambda.powi(3) * m0).abs() <= 1e-10 * m1.abs());
            let p = point("t1^2*exp(t2) + t2^3", 0.1, 0.2, &[]);
            let scaled = SurfacePoint::new(p.t1, p.t2, p.rho.scale(lambda)).unwrap();
            let ma1 = monge_ampere_residual(&scaled);
            assert!((ma1 - lambda * lambda * ma).abs() <= 1e-10 * ma1.abs());
        }
    }

    #[test]
    fn works_in_single_precision() {
        let t1 = crate::jet::Jet2::<f32>::variable(0.1, crate::jet::Axis::T1);
        let t2 = crate::jet::Jet2::<f32>::variable(0.0, crate::jet::Axis::T2);
        let rho = (t1 * t1).try_div(&(-t2).add_scalar(1.0).scale(2.0)).unwrap();
        let q = check_rank_conditions(&SurfacePoint::new(0.1f32, 0.0, rho).unwrap(), 1e-6).unwrap();
        assert!((q.s - 1.0).abs() < 1e-5);
        assert!(q.theta21.raw.abs() < 1e-5);
    }
}
