//! Solutions of the homogeneous Monge–Ampère equation parametrized by a pair
//! of univariate functions `(p, q)`.
//!
//! In coordinates `v = rho_1(t1, t2)`, `w = t2` the solution satisfies
//! `t1 = q(v) - w p'(v)`, `rho_2 = p(v)` and
//! `rho = v q(v) - \int_0^v q + w (p(v) - v p'(v))`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Params;
use crate::jet::{compose, Axis, Jet, Jet2};
use crate::scalar::Scalar;
use crate::surface::{Residual, SurfacePoint};
use crate::univariate::{ExprFn, UnivariateFn};

/// Tolerance on `p(0) = 0` and `q(0) = 0`.
pub const NORMALIZATION_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 50;
const SINGULAR_DERIVATIVE: f64 = 1e-10;
/// Jet-Newton passes; each one fixes at least one more order.
const JET_NEWTON_PASSES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VwPoint {
    pub v: f64,
    pub w: f64,
}

#[derive(Debug, Clone)]
pub struct PqFamily {
    p: Arc<dyn UnivariateFn>,
    q: Arc<dyn UnivariateFn>,
}

/// Result of checking whether `q'/p''` is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstCur {
    pub is_const: bool,
    pub ratio: f64,
    pub max_dev: f64,
}

impl PqFamily {
    pub fn new(p: Arc<dyn UnivariateFn>, q: Arc<dyn UnivariateFn>) -> Result<Self> {
        let p0 = p.value(0.0)?;
        if p0.abs() > NORMALIZATION_TOL {
            return Err(Error::Normalization { what: "p(0) = 0", value: p0 });
        }
        let q0 = q.value(0.0)?;
        if q0.abs() > NORMALIZATION_TOL {
            return Err(Error::Normalization { what: "q(0) = 0", value: q0 });
        }
        Ok(Self { p, q })
    }

    /// Family with `p` and `q` given as expressions in `v`.
    pub fn from_exprs(p: &str, q: &str, params: &Params) -> Result<Self> {
        Self::new(Arc::new(ExprFn::parse(p, params)?), Arc::new(ExprFn::parse(q, params)?))
    }

    pub fn p(&self) -> &Arc<dyn UnivariateFn> {
        &self.p
    }

    pub fn q(&self) -> &Arc<dyn UnivariateFn> {
        &self.q
    }

    pub fn describe(&self) -> String {
        format!("p(v) = {}, q(v) = {}", self.p.describe(), self.q.describe())
    }

    pub fn t_from_vw(&self, pt: VwPoint) -> Result<(f64, f64)> {
        let q = self.q.value(pt.v)?;
        let dp = self.p.jet(pt.v)?.coeffs[1];
        Ok((q - pt.w * dp, pt.w))
    }

    /// Linearization of the inverse map at the origin.
    pub fn default_guess(&self, t1: f64, t2: f64) -> Result<f64> {
        let p = self.p.jet(0.0)?;
        let q = self.q.jet(0.0)?;
        let slope = q.coeffs[1] - t2 * 2.0 * p.coeffs[2];
        if slope.abs() < SINGULAR_DERIVATIVE {
            return Ok(0.0);
        }
        Ok((t1 + t2 * p.coeffs[1]) / slope)
    }

    /// Solves `q(v) - t2 p'(v) = t1` for `v` by damped Newton iteration.
    pub fn vw_from_t(&self, t1: f64, t2: f64, v_guess: Option<f64>) -> Result<VwPoint> {
        self.vw_from_t_within(t1, t2, v_guess, f64::INFINITY)
    }

    /// Like [`Self::vw_from_t`], with every iterate confined to `|v| <= bound`.
    pub fn vw_from_t_within(&self, t1: f64, t2: f64, v_guess: Option<f64>, bound: f64) -> Result<VwPoint> {
        let v_guess = match v_guess {
            Some(v) => v,
            None => self.default_guess(t1, t2)?,
        };
        let residual = |v: f64| -> Result<(f64, f64)> {
            let p = self.p.jet(v)?;
            let q = self.q.jet(v)?;
            let f = q.coeffs[0] - t2 * p.coeffs[1] - t1;
            let df = q.coeffs[1] - t2 * 2.0 * p.coeffs[2];
            Ok((f, df))
        };
        let tol = 1e-12 * (1.0 + t1.abs());
        let mut v = v_guess;
        let (mut f, mut df) = residual(v)?;
        let mut trace = vec![f];
        for _ in 0..NEWTON_MAX_ITER {
            if f.abs() <= tol {
                return Ok(VwPoint { v, w: t2 });
            }
            if df.abs() < SINGULAR_DERIVATIVE {
                return Err(Error::SingularJacobian { at: v, derivative: df });
            }
            let step = f / df;
            let mut lambda = 1.0;
            loop {
                let candidate = v - lambda * step;
                if candidate.abs() > bound {
                    if lambda < 1e-6 {
                        return Err(Error::NewtonNoConvergence {
                            what: "t1 = q(v) - t2 p'(v) inside the v-window",
                            trace,
                        });
                    }
                    lambda *= 0.5;
                    continue;
                }
                let attempt = residual(candidate);
                let improved = matches!(&attempt, Ok((fc, _)) if fc.abs() < f.abs());
                if improved || lambda < 1e-6 {
                    (f, df) = attempt?;
                    v = candidate;
                    break;
                }
                lambda *= 0.5;
            }
            trace.push(f);
        }
        if f.abs() <= tol {
            return Ok(VwPoint { v, w: t2 });
        }
        Err(Error::NewtonNoConvergence { what: "t1 = q(v) - t2 p'(v)", trace })
    }

    /// `rho` at `(t1(v, w), w)`.
    pub fn rho_value(&self, pt: VwPoint) -> Result<f64> {
        let VwPoint { v, w } = pt;
        let p = self.p.jet(v)?;
        let q = self.q.value(v)?;
        Ok(v * q - self.q.integral(v)? + w * (p.coeffs[0] - v * p.coeffs[1]))
    }

    /// Order-5 jet of `rho` at `(t1, t2)`, assembled from `rho_1 = v` and `rho_2 = p(v)`
    /// after inverting `t1 = q(v) - t2 p'(v)` in jet arithmetic.
    pub fn rho_jet(&self, t1: f64, t2: f64, v_guess: Option<f64>) -> Result<(VwPoint, SurfacePoint<f64>)> {
        let pt = self.vw_from_t(t1, t2, v_guess)?;
        let v0 = pt.v;
        let pj = self.p.jet(v0)?;
        let dpj = pj.differentiate();
        let qj = self.q.jet(v0)?;
        let slope = qj.coeffs[1] - t2 * dpj.coeffs[1];
        if !(slope > 0.0) {
            return Err(Error::LeviRankViolation { at: vec![t1, t2], rho11: 1.0 / slope });
        }
        let t1j = Jet2::variable(t1, Axis::T1);
        let t2j = Jet2::variable(t2, Axis::T2);
        let mut vj = Jet2::constant(v0);
        for _ in 0..JET_NEWTON_PASSES {
            let g = compose(&qj, v0, &vj)? - t2j * compose(&dpj, v0, &vj)? - t1j;
            vj = (vj - g.scale(slope.recip())).with_value(v0);
        }
        let pv = compose(&pj, v0, &vj)?;

        let mut rho = Jet2::constant(self.rho_value(pt)?);
        for (j, k, _) in Jet2::<f64>::zero().iter() {
            if j >= 1 {
                rho.set_coeff(j, k, vj.coeff(j - 1, k) / j as f64);
            } else if k >= 1 {
                rho.set_coeff(0, k, pv.coeff(0, k - 1) / k as f64);
            }
        }
        Ok((pt, SurfacePoint::new(t1, t2, rho)?))
    }

    pub fn final1_residuals(&self, v: f64) -> Result<[Residual<f64>; 4]> {
        let p = self.p.jet(v)?.derivatives();
        let q = self.q.jet(v)?.derivatives();
        Ok(final1_from_derivatives(&p, &q))
    }

    /// Checks whether `q'/p''` is constant over `samples`.
    pub fn firstcur_check(&self, samples: &[f64]) -> Result<FirstCur> {
        let mut ratios = Vec::with_capacity(samples.len());
        for &v in samples {
            let p2 = self.p.jet(v)?.derivative(2);
            if p2.abs() <= crate::surface::DEFAULT_RANK_EPS {
                return Err(Error::TwoDegeneracyViolation { at: vec![v], s: p2 });
            }
            ratios.push(self.q.jet(v)?.coeffs[1] / p2);
        }
        if ratios.is_empty() {
            return Err(Error::InvalidParameter("firstcur_check needs at least one sample".into()));
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let max_dev = ratios.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max);
        Ok(FirstCur { is_const: max_dev < 1e-9 * (1.0 + mean.abs()), ratio: mean, max_dev })
    }
}

/// The four ODE residuals obtained by collecting powers of `w` in the Monge
/// equation written in `(v, w)`. `p[k]` and `q[k]` are the `k`-th derivatives.
///
/// Order: Monge equation in `p`, the two mixed equations, Monge equation in a
/// primitive of `q`.
pub fn final1_from_derivatives<T: Scalar>(p: &[T; 6], q: &[T; 6]) -> [Residual<T>; 4] {
    let c = T::lit;
    let (p2, p3, p4, p5) = (p[2], p[3], p[4], p[5]);
    let (q1, q2, q3, q4) = (q[1], q[2], q[3], q[4]);
    let zero = T::zero();
    [
        Residual::from_terms(&[c(9.0) * p5 * p2 * p2, -c(45.0) * p4 * p3 * p2, c(40.0) * p3 * p3 * p3], zero),
        Residual::from_terms(
            &[
                c(6.0) * p5 * p2 * q1,
                c(3.0) * p2 * p2 * q4,
                -c(15.0) * p4 * p3 * q1,
                -c(15.0) * p4 * p2 * q2,
                -c(15.0) * p3 * p2 * q3,
                c(40.0) * p3 * p3 * q2,
            ],
            zero,
        ),
        Residual::from_terms(
            &[
                c(3.0) * p5 * q1 * q1,
                c(6.0) * p2 * q4 * q1,
                -c(15.0) * p4 * q2 * q1,
                -c(15.0) * p3 * q3 * q1,
                -c(15.0) * p2 * q3 * q2,
                c(40.0) * p3 * q2 * q2,
            ],
            zero,
        ),
        Residual::from_terms(&[c(9.0) * q4 * q1 * q1, -c(45.0) * q3 * q2 * q1, c(40.0) * q2 * q2 * q2], zero),
    ]
}

/// Recombines the four ODE residuals into the Monge residual in `t1` at `(v, w)`:
/// `-(q' - w p'')^(-9) [R4 - 3 w R3 + 3 w^2 R2 - w^3 R1]`.
pub fn monge_t1_from_final1<T: Scalar>(r: &[Residual<T>; 4], q1: T, p2: T, w: T) -> T {
    let c = T::lit;
    let a1 = q1 - w * p2;
    let bracket = r[3].raw - c(3.0) * w * r[2].raw + c(3.0) * w * w * r[1].raw - w * w * w * r[0].raw;
    -bracket / a1.powi(9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{check_rank_conditions, monge_ampere_residual, monge_residual_t1};

    fn fam(p: &str, q: &str, c: Option<f64>) -> PqFamily {
        let mut params = Params::new();
        if let Some(c) = c {
            params.insert("C".into(), c);
        }
        PqFamily::from_exprs(p, q, &params).unwrap()
    }

    #[test]
    fn normalization_is_checked() {
        assert!(matches!(
            PqFamily::from_exprs("exp(v)", "v", &Params::new()),
            Err(Error::Normalization { what: "p(0) = 0", .. })
        ));
        assert!(matches!(
            PqFamily::from_exprs("v^2/2", "v + 1", &Params::new()),
            Err(Error::Normalization { what: "q(0) = 0", .. })
        ));
    }

    #[test]
    fn coordinate_maps() {
        let f = fam("v^2/2", "v", None);
        let (t1, t2) = f.t_from_vw(VwPoint { v: 0.3, w: 0.1 }).unwrap();
        assert!((t1 - 0.27).abs() < 1e-16 && t2 == 0.1);
        let pt = f.vw_from_t(0.27, 0.1, None).unwrap();
        assert!((pt.v - 0.3).abs() < 1e-12);
        let pt = f.vw_from_t(0.11, -0.17, None).unwrap();
        assert!((pt.v - 0.11 / 1.17).abs() < 1e-12);

        let ex = fam("exp(v)-1", "C*(exp(v)-1)", Some(1.0));
        let (t1, _) = ex.t_from_vw(VwPoint { v: 0.2, w: -0.1 }).unwrap();
        assert!((t1 - (1.1 * 0.2f64.exp() - 1.0)).abs() < 1e-15);
        for &(t1, t2) in &[(0.1, 0.2), (-0.2, -0.2), (0.0, 0.15)] {
            let pt = ex.vw_from_t(t1, t2, None).unwrap();
            assert!((pt.v - ((t1 + 1.0) / (1.0 - t2)).ln()).abs() < 1e-12);
            let (b1, b2) = ex.t_from_vw(pt).unwrap();
            assert!((b1 - t1).abs() < 1e-12 && b2 == t2);
        }
    }

    #[test]
    fn newton_failures() {
        // t1 = v^3 has a double-degenerate derivative at 0
        let f = fam("v^2/2", "v^3", None);
        assert!(f.vw_from_t(0.0, 0.0, Some(0.0)).is_ok());
        assert!(matches!(f.vw_from_t(1e-3, 0.0, Some(0.0)), Err(Error::SingularJacobian { .. })));
        // no real root: q(v) = v^2 >= 0
        let f = fam("v^2/2", "v^2", None);
        assert!(f.vw_from_t(-1.0, 0.0, Some(0.5)).is_err());
    }

    #[test]
    fn rho_values() {
        let f = fam("v^2/2", "v", None);
        for &(v, w) in &[(0.3, 0.1), (-0.25, -0.2)] {
            let r = f.rho_value(VwPoint { v, w }).unwrap();
            assert!((r - v * v * (1.0 - w) / 2.0).abs() < 1e-15);
        }
        assert_eq!(f.rho_value(VwPoint { v: 0.0, w: 0.3 }).unwrap(), 0.0);
        let ex = fam("exp(v)-1", "C*(exp(v)-1)", Some(1.0));
        for &(v, w) in &[(0.3, 0.1), (-0.25, -0.2)] {
            let r = ex.rho_value(VwPoint { v, w }).unwrap();
            let expect = (w - 1.0) * ((1.0 - v) * f64::exp(v) - 1.0);
            assert!((r - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn jet_matches_closed_form_partials() {
        let f = fam("v^2/2", "v", None);
        let (_, sp) = f.rho_jet(0.0, 0.0, None).unwrap();
        let r = &sp.rho;
        assert!((r.partial(2, 0) - 1.0).abs() < 1e-15);
        for (j, k) in [(1, 1), (3, 0), (4, 0), (5, 0)] {
            assert!(r.partial(j, k).abs() < 1e-14);
        }

        let ex = fam("exp(v)-1", "C*(exp(v)-1)", Some(1.0));
        let (_, sp) = ex.rho_jet(0.0, 0.0, None).unwrap();
        let r = &sp.rho;
        assert!((r.partial(2, 0) - 1.0).abs() < 1e-14);
        assert!((r.partial(3, 0) + 1.0).abs() < 1e-13);
        assert!((r.partial(4, 0) - 2.0).abs() < 1e-12);
        assert!((r.partial(5, 0) + 6.0).abs() < 1e-11);

        // every closed form at a generic point
        let g = fam("exp(v)-1 + v^3/3", "v + sin(v)^2", None);
        let (pt, sp) = g.rho_jet(0.12, -0.09, None).unwrap();
        let (v, w) = (pt.v, pt.w);
        let p = g.p().jet(v).unwrap().derivatives();
        let q = g.q().jet(v).unwrap().derivatives();
        let a = |k: usize| q[k] - w * p[k + 1];
        let r = &sp.rho;
        let close = |x: f64, y: f64| assert!((x - y).abs() < 1e-11 * (1.0 + y.abs()), "{x} vs {y}");
        close(r.partial(1, 0), v);
        close(r.partial(0, 1), p[0]);
        close(r.partial(2, 0), 1.0 / a(1));
        close(r.partial(1, 1), p[1] / a(1));
        close(r.partial(0, 2), p[1] * p[1] / a(1));
        close(r.partial(3, 0), -a(2) / a(1).powi(3));
        close(r.partial(4, 0), -(a(3) * a(1) - 3.0 * a(2) * a(2)) / a(1).powi(5));
        let rho5 = -(((a(4) * a(1) - 5.0 * a(2) * a(3)) * a(1)) - 5.0 * (a(3) * a(1) - 3.0 * a(2) * a(2)) * a(2))
            / a(1).powi(7);
        close(r.partial(5, 0), rho5);
        let quantities = check_rank_conditions(&sp, 1e-8).unwrap();
        close(quantities.s, p[2] / a(1));
        close(quantities.s1, (p[3] * q[1] - p[2] * q[2]) / a(1).powi(3));
        assert!(monge_ampere_residual(&sp).abs() < 1e-12);
    }

    #[test]
    fn curvature_residual_detects_nonconstant_ratio() {
        let f = fam("exp(v)-1", "v", None);
        let (_, sp) = f.rho_jet(0.0, 0.0, None).unwrap();
        let q = check_rank_conditions(&sp, 1e-8).unwrap();
        assert!((q.s1 - 1.0).abs() < 1e-12);
        assert!(q.theta21.raw.abs() > 0.1);
    }

    #[test]
    fn final1_examples() {
        let r = fam("v^2/2", "v", None).final1_residuals(0.3).unwrap();
        assert!(r.iter().all(|x| x.raw == 0.0));
        let r = fam("exp(v)-1", "exp(v)-1", None).final1_residuals(0.0).unwrap();
        for x in r {
            assert!((x.raw - 4.0).abs() < 1e-12);
        }
        // q'/p'' constant: everything collapses to the first equation times powers of C
        let r = fam("exp(v)-1", "C*(exp(v)-1)", Some(2.5)).final1_residuals(0.1).unwrap();
        let e3 = (0.3f64).exp();
        assert!((r[0].raw - 4.0 * e3).abs() < 1e-12);
        assert!((r[1].raw - 2.5 * 4.0 * e3).abs() < 1e-11);
        assert!((r[2].raw - 2.5 * 2.5 * 4.0 * e3).abs() < 1e-11);
    }

    #[test]
    fn w_expansion_identity() {
        let g = fam("exp(v)-1 + v^3/3", "v + sin(v)^2", None);
        for &(t1, t2) in &[(0.12, -0.09), (-0.1, 0.2), (0.0, 0.0)] {
            let (pt, sp) = g.rho_jet(t1, t2, None).unwrap();
            let r = g.final1_residuals(pt.v).unwrap();
            let p2 = g.p().jet(pt.v).unwrap().derivative(2);
            let q1 = g.q().jet(pt.v).unwrap().derivative(1);
            let direct = monge_residual_t1(&sp).raw;
            let recombined = monge_t1_from_final1(&r, q1, p2, pt.w);
            assert!((direct - recombined).abs() < 1e-9 * (1.0 + direct.abs()), "{direct} vs {recombined}");
        }
    }

    #[test]
    fn firstcur() {
        let ex = fam("exp(v)-1", "C*(exp(v)-1)", Some(1.7));
        let fc = ex.firstcur_check(&[-0.3, -0.1, 0.0, 0.2, 0.3]).unwrap();
        assert!(fc.is_const && (fc.ratio - 1.7).abs() < 1e-12);
        let f = fam("exp(v)-1", "v", None);
        let fc = f.firstcur_check(&[-0.3, 0.0, 0.3]).unwrap();
        assert!(!fc.is_const);
        let flat = fam("v^3", "v", None);
        assert!(matches!(flat.firstcur_check(&[0.1, 0.0]), Err(Error::TwoDegeneracyViolation { .. })));
    }
}
