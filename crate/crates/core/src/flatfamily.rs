//! The family `q = C (p' - p'(0))`, on which the curvature condition holds for
//! every `p` while the Monge condition in `t1` holds only when `p` solves the
//! Monge equation, together with its closed form through `zeta = (p'(0) - p')^(-1)`:
//!
//! `rho = (t1 + p'(0) t2) chi((t1 + p'(0) t2) / (t2 - C))`, `chi(tau) = (1/tau) \int_0^tau zeta`.

use std::sync::Arc;

use crate::conic::monge1d_residual;
use crate::error::{Error, Result};
use crate::expr::{parse, Expression, Params};
use crate::jet::{compose, Axis, Jet, Jet1, Jet2, JetError};
use crate::parametrize::{PqFamily, NORMALIZATION_TOL};
use crate::quadrature::integrate_width;
use crate::surface::{SurfacePoint, DEFAULT_RANK_EPS};
use crate::univariate::{ExprFn, UnivariateFn};

/// Below this `|tau|` the removable singularity of `chi` is replaced by its linear term.
pub const TAU_SWITCH: f64 = 1e-6;
/// Panel width for `\int_0^tau zeta`.
pub const ZETA_PANEL_WIDTH: f64 = 0.05;
/// Smallest `|t2 - C|` accepted by the closed form.
pub const POLE_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 100;
const JET_NEWTON_PASSES: usize = 6;

/// The closed form of the surface for `p = e^v - 1`.
pub const EXAMPLE31_RHO: &str = "(t1+C)*log((t1+C)/(C-t2)) - (t1+t2)";

#[derive(Debug, Clone)]
pub struct CounterexampleSpec {
    p: Arc<dyn UnivariateFn>,
    c: f64,
    pprime0: f64,
    psecond0: f64,
}

/// `q(v) = C (p'(v) - p'(0))`. Its jet is exact to order 4, which is all the
/// order-5 jet of `rho` needs.
#[derive(Debug, Clone)]
pub struct ShiftedDerivative {
    p: Arc<dyn UnivariateFn>,
    c: f64,
    pprime0: f64,
}

impl UnivariateFn for ShiftedDerivative {
    fn jet(&self, v: f64) -> Result<Jet1<f64>> {
        Ok(self.p.jet(v)?.differentiate().add_scalar(-self.pprime0).scale(self.c))
    }

    fn integral(&self, v: f64) -> Result<f64> {
        Ok(self.c * (self.p.value(v)? - self.pprime0 * v))
    }

    fn describe(&self) -> String {
        format!("{:?} * (p'(v) - {:?}) with p(v) = {}", self.c, self.pprime0, self.p.describe())
    }
}

/// What the surface of a family is expected to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpectedProperties {
    pub theta21_flat: bool,
    pub monge_flat: bool,
    pub monge_ampere: bool,
}

/// Everything needed to reproduce the example `p = e^v - 1`.
#[derive(Debug, Clone)]
pub struct Example31 {
    pub c: f64,
    pub rho: Expression,
    pub params: Params,
    pub family: PqFamily,
    pub spec: CounterexampleSpec,
    pub expected: ExpectedProperties,
}

impl CounterexampleSpec {
    pub fn new(p: Arc<dyn UnivariateFn>, c: f64) -> Result<Self> {
        let j = p.jet(0.0)?;
        if j.coeffs[0].abs() > NORMALIZATION_TOL {
            return Err(Error::Normalization { what: "p(0) = 0", value: j.coeffs[0] });
        }
        let psecond0 = j.derivative(2);
        if !(psecond0.abs() > DEFAULT_RANK_EPS) {
            return Err(Error::TwoDegeneracyViolation { at: vec![0.0], s: psecond0 });
        }
        if !(c * psecond0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "C p''(0) must be positive, got C = {c}, p''(0) = {psecond0}"
            )));
        }
        Ok(Self { p, c, pprime0: j.coeffs[1], psecond0 })
    }

    /// Spec with `p` given as an expression in `v`.
    pub fn from_expr(p: &str, c: f64, params: &Params) -> Result<Self> {
        Self::new(Arc::new(ExprFn::parse(p, params)?), c)
    }

    pub fn p(&self) -> &Arc<dyn UnivariateFn> {
        &self.p
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn pprime0(&self) -> f64 {
        self.pprime0
    }

    pub fn describe(&self) -> String {
        format!("p(v) = {}, C = {:?}", self.p.describe(), self.c)
    }

    pub fn q(&self) -> ShiftedDerivative {
        ShiftedDerivative { p: self.p.clone(), c: self.c, pprime0: self.pprime0 }
    }

    /// The `(p, q)` family with `q = C (p' - p'(0))`.
    pub fn family(&self) -> Result<PqFamily> {
        PqFamily::new(self.p.clone(), Arc::new(self.q()))
    }

    /// Checks `|p''| > eps` with the sign of `C` at every sample.
    pub fn check_domain(&self, samples: &[f64]) -> Result<()> {
        for &v in samples {
            let p2 = self.p.jet(v)?.derivative(2);
            if !(p2 * self.c.signum() > DEFAULT_RANK_EPS) {
                return Err(Error::TwoDegeneracyViolation { at: vec![v], s: p2 });
            }
        }
        Ok(())
    }

    /// Largest normalized Monge residual of `p` over `samples`.
    pub fn monge1d_max(&self, samples: &[f64]) -> Result<f64> {
        let mut max = 0.0f64;
        for &v in samples {
            max = max.max(monge1d_residual(&self.p.jet(v)?).normalized().abs());
        }
        Ok(max)
    }

    /// `rho(t1(v, w), w) = (w - C)(p(v) - v p'(v))`.
    pub fn rho_prop31(&self, v: f64, w: f64) -> Result<f64> {
        let j = self.p.jet(v)?;
        Ok((w - self.c) * (j.coeffs[0] - v * j.coeffs[1]))
    }

    /// The root near `0` of `p'(0) - p'(v) = sigma`.
    pub fn zeta(&self, sigma: f64) -> Result<f64> {
        let eval = |v: f64| -> Result<(f64, f64)> {
            let j = self.p.jet(v)?;
            Ok((self.pprime0 - j.coeffs[1] - sigma, j.derivative(2)))
        };
        let mut v = -sigma / self.psecond0;
        let (mut g, mut p2) = eval(v).map_err(|_| Error::RangeError { sigma })?;
        let mut trace = vec![g];
        for _ in 0..NEWTON_MAX_ITER {
            if !(p2 * self.psecond0.signum() > DEFAULT_RANK_EPS) {
                return Err(Error::RangeError { sigma });
            }
            let step = g / p2;
            let mut lambda = 1.0;
            let next = loop {
                let candidate = v + lambda * step;
                match eval(candidate) {
                    Ok((gc, p2c)) if gc.abs() < g.abs() || lambda < 1e-6 => break Some((candidate, gc, p2c)),
                    Ok(_) | Err(_) if lambda >= 1e-6 => lambda *= 0.5,
                    _ => break None,
                }
            };
            let Some((candidate, gc, p2c)) = next else {
                return Err(Error::RangeError { sigma });
            };
            let moved = (candidate - v).abs();
            v = candidate;
            g = gc;
            p2 = p2c;
            trace.push(g);
            if g.abs() <= 1e-12 && moved <= 1e-15 * (1.0 + v.abs()) {
                return Ok(v);
            }
            if g == 0.0 {
                return Ok(v);
            }
        }
        if g.abs() <= 1e-12 {
            return Ok(v);
        }
        Err(Error::NewtonNoConvergence { what: "p'(0) - p'(v) = sigma", trace })
    }

    /// Jet of `zeta` at `tau`, exact to order 4.
    pub fn zeta_jet(&self, tau: f64) -> Result<Jet1<f64>> {
        let v0 = self.zeta(tau)?;
        let g = self.p.jet(v0)?.differentiate().scale(-1.0).add_scalar(self.pprime0);
        let slope = g.coeffs[1];
        let target = Jet1::variable(tau);
        let mut z = Jet1::constant(v0);
        for _ in 0..JET_NEWTON_PASSES {
            let r = compose(&g, v0, &z)? - target;
            z = (z - r.scale(slope.recip())).with_value(v0);
        }
        Ok(z)
    }

    /// `\int_0^tau zeta` by Gauss–Legendre quadrature.
    pub fn big_z(&self, tau: f64) -> Result<f64> {
        integrate_width(|s| self.zeta(s), 0.0, tau, ZETA_PANEL_WIDTH)
    }

    /// Order-5 jet of `\int_0^tau zeta`.
    pub fn big_z_jet(&self, tau: f64) -> Result<Jet1<f64>> {
        Ok(self.zeta_jet(tau)?.integrate(self.big_z(tau)?))
    }

    /// `chi'(0) = -1 / (2 p''(0))`.
    pub fn chi_slope0(&self) -> f64 {
        -0.5 / self.psecond0
    }

    pub fn chi(&self, tau: f64) -> Result<f64> {
        if tau.abs() <= TAU_SWITCH {
            return Ok(self.chi_slope0() * tau);
        }
        Ok(self.big_z(tau)? / tau)
    }

    fn tau(&self, t1: f64, t2: f64) -> Result<(f64, f64)> {
        let den = t2 - self.c;
        if den.abs() < POLE_TOL {
            return Err(JetError::DomainError { function: "1/(t2 - C)", constant: den }.into());
        }
        let s = t1 + self.pprime0 * t2;
        Ok((s, s / den))
    }

    /// `(t1 + p'(0) t2) chi((t1 + p'(0) t2) / (t2 - C))`.
    pub fn tilde_rho(&self, t1: f64, t2: f64) -> Result<f64> {
        let (s, tau) = self.tau(t1, t2)?;
        Ok(s * self.chi(tau)?)
    }

    /// Order-5 jet of the closed form, written as `(t2 - C) Z(tau)`.
    pub fn tilde_rho_jet(&self, t1: f64, t2: f64) -> Result<SurfacePoint<f64>> {
        let (_, tau0) = self.tau(t1, t2)?;
        let z = self.big_z_jet(tau0)?;
        let t1j = Jet2::variable(t1, Axis::T1);
        let t2j = Jet2::variable(t2, Axis::T2);
        let den = t2j.add_scalar(-self.c);
        let tau = (t1j + t2j.scale(self.pprime0)).try_div(&den)?;
        let rho = den * compose(&z, tau0, &tau)?;
        SurfacePoint::new(t1, t2, rho)
    }
}

/// The example `p = e^v - 1`, `q = C (e^v - 1)` for `C > 0`.
pub fn example31(c: f64) -> Result<Example31> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("example 3.1 needs C > 0, got {c}")));
    }
    let params: Params = [("C".to_string(), c)].into_iter().collect();
    let rho = parse(EXAMPLE31_RHO, &["t1", "t2"])?;
    let family = PqFamily::from_exprs("exp(v) - 1", "C*(exp(v) - 1)", &params)?;
    let spec = CounterexampleSpec::from_expr("exp(v) - 1", c, &params)?;
    let expected = ExpectedProperties { theta21_flat: true, monge_flat: false, monge_ampere: true };
    Ok(Example31 { c, rho, params, family, spec, expected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{check_rank_conditions, monge_residual_t1, theta21_residual};

    fn exp_spec(c: f64) -> CounterexampleSpec {
        CounterexampleSpec::from_expr("exp(v) - 1", c, &Params::new()).unwrap()
    }

    fn chi_exact(tau: f64) -> f64 {
        (tau - 1.0) / tau * (1.0 - tau).ln() - 1.0
    }

    #[test]
    fn spec_validation() {
        let none = Params::new();
        assert!(CounterexampleSpec::from_expr("exp(v)", 1.0, &none).is_err());
        assert!(CounterexampleSpec::from_expr("exp(v) - 1", -1.0, &none).is_err());
        assert!(CounterexampleSpec::from_expr("v^3", 1.0, &none).is_err());
        assert!(CounterexampleSpec::from_expr("1 - exp(v)", -2.0, &none).is_ok());
    }

    #[test]
    fn rho_on_the_family() {
        let spec = exp_spec(1.0);
        assert_eq!(spec.rho_prop31(0.0, 0.3).unwrap(), 0.0);
        let fam = spec.family().unwrap();
        for (v, w) in [(0.1, -0.2), (-0.3, 0.15), (0.25, 0.05)] {
            let expected = (w - 1.0) * ((1.0 - v) * f64::exp(v) - 1.0);
            assert!((spec.rho_prop31(v, w).unwrap() - expected).abs() < 1e-15);
            let got = fam.rho_value(crate::parametrize::VwPoint { v, w }).unwrap();
            assert!((got - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn zeta_of_exponential() {
        let spec = exp_spec(1.0);
        assert_eq!(spec.zeta(0.0).unwrap(), 0.0);
        for sigma in [-0.4, -0.1, 0.05, 0.3, 0.9] {
            assert!((spec.zeta(sigma).unwrap() - (1.0 - sigma).ln()).abs() < 1e-14);
        }
        assert!(matches!(spec.zeta(1.0), Err(Error::RangeError { .. })));
        assert!(matches!(spec.zeta(2.5), Err(Error::RangeError { .. })));
        let h = 1e-5;
        let fd = (spec.zeta(h).unwrap() - spec.zeta(-h).unwrap()) / (2.0 * h);
        assert!((fd + 1.0).abs() < 1e-9);
    }

    #[test]
    fn zeta_jet_is_log() {
        let spec = exp_spec(1.0);
        let tau = 0.2;
        let j = spec.zeta_jet(tau).unwrap();
        let x: f64 = 1.0 - tau;
        for k in 1..=4 {
            // d^k/dtau^k log(1 - tau) = -(k-1)! / (1 - tau)^k
            let exact = -((1..k).product::<usize>() as f64) / x.powi(k as i32);
            assert!((j.derivative(k) - exact).abs() < 1e-11 * exact.abs(), "{k}");
        }
    }

    #[test]
    fn chi_matches_closed_form() {
        let spec = exp_spec(1.0);
        assert_eq!(spec.chi(0.0).unwrap(), 0.0);
        assert_eq!(spec.chi_slope0(), -0.5);
        assert!((spec.chi(0.5).unwrap() - (2f64.ln() - 1.0)).abs() < 1e-12);
        for tau in [-0.4, -0.13, 0.01, 0.27, 0.4] {
            assert!((spec.chi(tau).unwrap() - chi_exact(tau)).abs() < 1e-13);
        }
        for tau in [TAU_SWITCH, -TAU_SWITCH] {
            let series = spec.chi(tau).unwrap();
            let quad = spec.big_z(tau).unwrap() / tau;
            assert!((series - quad).abs() < 1e-10);
        }
    }

    #[test]
    fn big_z_matches_primitive() {
        // \int_0^tau zeta = p(zeta) - zeta p'(zeta)
        let spec = CounterexampleSpec::from_expr("v^2/2 + v^3/6", 1.0, &Params::new()).unwrap();
        for tau in [-0.3, 0.1, 0.35] {
            let v = spec.zeta(tau).unwrap();
            let exact = v * v / 2.0 + v.powi(3) / 6.0 - v * (v + v * v / 2.0);
            assert!((spec.big_z(tau).unwrap() - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn tilde_rho_closed_form() {
        let ex = example31(1.0).unwrap();
        assert_eq!(ex.spec.tilde_rho(0.0, 0.0).unwrap(), 0.0);
        for (t1, t2) in [(0.1, 0.05), (-0.2, 0.2), (0.17, -0.11)] {
            let exact: f64 = ex.rho.eval_point(&[t1, t2], &ex.params).unwrap();
            assert!((ex.spec.tilde_rho(t1, t2).unwrap() - exact).abs() < 1e-13);
            let jet = ex.spec.tilde_rho_jet(t1, t2).unwrap().rho;
            let oracle = ex.rho.eval_jet2(t1, t2, &ex.params).unwrap();
            for (j, k, c) in oracle.iter() {
                assert!((jet.coeff(j, k) - c).abs() < 1e-10 * (1.0 + c.abs()), "({j},{k})");
            }
        }
        assert!(ex.spec.tilde_rho(0.0, 1.0).is_err());
    }

    #[test]
    fn closed_form_equals_parametrized_rho() {
        let spec = CounterexampleSpec::from_expr("v^2/2 + v^3/6", 1.0, &Params::new()).unwrap();
        let fam = spec.family().unwrap();
        for (t1, t2) in [(0.1, 0.05), (-0.15, 0.2), (0.2, -0.2)] {
            let (vw, pt) = fam.rho_jet(t1, t2, None).unwrap();
            let direct = spec.rho_prop31(vw.v, vw.w).unwrap();
            assert!((spec.tilde_rho(t1, t2).unwrap() - direct).abs() < 1e-12);
            let tilde = spec.tilde_rho_jet(t1, t2).unwrap().rho;
            for (j, k, c) in pt.rho.iter() {
                assert!((tilde.coeff(j, k) - c).abs() < 1e-9 * (1.0 + c.abs()), "({j},{k})");
            }
            // first partial of the closed form is zeta of its argument
            let tau = (t1 + spec.pprime0() * t2) / (t2 - 1.0);
            assert!((tilde.partial(1, 0) - spec.zeta(tau).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn example31_residuals() {
        let ex = example31(1.0).unwrap();
        let pt = SurfacePoint::new(0.0, 0.0, ex.rho.eval_jet2(0.0, 0.0, &ex.params).unwrap()).unwrap();
        let quantities = check_rank_conditions(&pt, DEFAULT_RANK_EPS).unwrap();
        assert!((quantities.monge_t1.raw + 4.0).abs() < 1e-12);
        assert!(theta21_residual(&pt, DEFAULT_RANK_EPS).unwrap().normalized().abs() < 1e-12);
        for v in [-0.2f64, 0.0, 0.2] {
            let r = ex.family.final1_residuals(v).unwrap();
            let exact = 4.0 * (3.0 * v).exp();
            assert!((r[0].raw - exact).abs() < 1e-10 * exact);
        }
        let (_, p) = ex.family.rho_jet(0.1, -0.1, None).unwrap();
        assert!(monge_residual_t1(&p).normalized().abs() > 1e-3);
        assert!(example31(0.0).is_err());
        assert!(example31(-1.0).is_err());
    }
}
