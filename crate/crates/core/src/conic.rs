//! Explicit solutions of the Monge equation `9 f^(V) f''^2 - 45 f^(IV) f''' f'' + 40 f'''^3 = 0`
//! through quadratic polynomials: `p'' = ±P^(-3/2)` and `q' = Q^(-3/2)`,
//! and the polynomial identities satisfied by a pair `(P, Q)`.

use crate::error::{Error, Result};
use crate::jet::{Jet, Jet1, JetError};
use crate::parametrize::final1_from_derivatives;
use crate::quadrature::integrate_many;
use crate::scalar::Scalar;
use crate::surface::Residual;
use crate::univariate::UnivariateFn;

/// Maximal panel width for the antiderivatives of `p''` and `q'`.
pub const PANEL_WIDTH: f64 = 0.05;

/// `P(tau) = a0 + a1 tau + a2 tau^2` with `a0 > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicPoly<T> {
    pub a0: T,
    pub a1: T,
    pub a2: T,
}

impl<T: Scalar> ConicPoly<T> {
    pub fn new(a0: T, a1: T, a2: T) -> Result<Self> {
        if !(a0 > T::zero()) {
            return Err(Error::InvalidParameter(format!("conic polynomial needs P(0) > 0, got {a0}")));
        }
        Ok(Self { a0, a1, a2 })
    }

    pub fn constant(a0: T) -> Result<Self> {
        Self::new(a0, T::zero(), T::zero())
    }

    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::new(c * self.a0, c * self.a1, c * self.a2)
    }

    pub fn eval(&self, tau: T) -> T {
        self.a0 + tau * (self.a1 + tau * self.a2)
    }

    pub fn deriv(&self, tau: T) -> T {
        self.a1 + T::lit(2.0) * self.a2 * tau
    }

    pub fn second(&self) -> T {
        T::lit(2.0) * self.a2
    }

    /// `(P, P', P'')` at `tau`.
    pub fn values(&self, tau: T) -> [T; 3] {
        [self.eval(tau), self.deriv(tau), self.second()]
    }

    pub fn jet(&self, tau: T) -> Jet1<T> {
        let z = T::zero();
        Jet1 { coeffs: [self.eval(tau), self.deriv(tau), self.a2, z, z, z] }
    }

    /// Jet of `P^(-3/2)` at `tau`.
    pub fn inv_pow_jet(&self, tau: T) -> Result<Jet1<T>, JetError> {
        let j = self.jet(tau);
        if !(j.value() > T::zero()) {
            return Err(JetError::DomainError { function: "P^(-3/2)", constant: j.value().to_f64_lossy() });
        }
        j.powf(T::lit(-1.5))
    }
}

impl ConicPoly<f64> {
    fn inv_pow(&self, tau: f64) -> Result<f64> {
        let value = self.eval(tau);
        if !(value > 0.0) {
            return Err(JetError::DomainError { function: "P^(-3/2)", constant: value }.into());
        }
        Ok(value.powf(-1.5))
    }
}

impl std::fmt::Display for ConicPoly<f64> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} + {:?}*v + {:?}*v^2", self.a0, self.a1, self.a2)
    }
}

/// `p` with `p'' = sign P^(-3/2)`, `p(0) = 0` and `p'(0) = pprime0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicP {
    pub poly: ConicPoly<f64>,
    pub sign: f64,
    pub pprime0: f64,
}

/// `q` with `q' = Q^(-3/2)` and `q(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicQ {
    pub poly: ConicPoly<f64>,
}

pub fn p_from_conic(poly: ConicPoly<f64>, sign: f64, pprime0: f64) -> Result<ConicP> {
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::InvalidParameter(format!("branch sign must be +1 or -1, got {sign}")));
    }
    Ok(ConicP { poly, sign, pprime0 })
}

pub fn q_from_conic(poly: ConicPoly<f64>) -> ConicQ {
    ConicQ { poly }
}

/// `\int_0^v (v - s)^k / k! P(s)^(-3/2) ds` for `k = 0, 1, 2`, the repeated
/// antiderivatives of `P^(-3/2)` vanishing at `0`.
fn moments(poly: &ConicPoly<f64>, v: f64) -> Result<[f64; 3]> {
    integrate_many(
        |s| {
            let g = poly.inv_pow(s)?;
            let d = v - s;
            Ok::<_, Error>([g, d * g, 0.5 * d * d * g])
        },
        0.0,
        v,
        PANEL_WIDTH,
    )
}

impl ConicP {
    pub fn second_derivative(&self, v: f64) -> Result<f64> {
        Ok(self.sign * self.poly.inv_pow(v)?)
    }

    pub fn first_derivative(&self, v: f64) -> Result<f64> {
        Ok(self.pprime0 + self.sign * moments(&self.poly, v)?[0])
    }
}

impl UnivariateFn for ConicP {
    fn jet(&self, v: f64) -> Result<Jet1<f64>> {
        let p2 = self.poly.inv_pow_jet(v)?.scale(self.sign);
        let [m0, m1, _] = moments(&self.poly, v)?;
        let mut c = [0.0; 6];
        c[0] = self.pprime0 * v + self.sign * m1;
        c[1] = self.pprime0 + self.sign * m0;
        for m in 0..4 {
            c[m + 2] = p2.coeffs[m] / ((m + 1) * (m + 2)) as f64;
        }
        Ok(Jet1::from_coeffs(c)?)
    }

    fn value(&self, v: f64) -> Result<f64> {
        Ok(self.pprime0 * v + self.sign * moments(&self.poly, v)?[1])
    }

    fn integral(&self, v: f64) -> Result<f64> {
        Ok(0.5 * self.pprime0 * v * v + self.sign * moments(&self.poly, v)?[2])
    }

    fn describe(&self) -> String {
        let sign = if self.sign > 0.0 { "" } else { "-" };
        format!("p'' = {sign}({})^(-3/2), p'(0) = {:?}", self.poly, self.pprime0)
    }
}

impl UnivariateFn for ConicQ {
    fn jet(&self, v: f64) -> Result<Jet1<f64>> {
        let q1 = self.poly.inv_pow_jet(v)?;
        let mut c = [0.0; 6];
        c[0] = self.value(v)?;
        for m in 0..5 {
            c[m + 1] = q1.coeffs[m] / (m + 1) as f64;
        }
        Ok(Jet1::from_coeffs(c)?)
    }

    fn value(&self, v: f64) -> Result<f64> {
        Ok(moments(&self.poly, v)?[0])
    }

    fn integral(&self, v: f64) -> Result<f64> {
        Ok(moments(&self.poly, v)?[1])
    }

    fn describe(&self) -> String {
        format!("q' = ({})^(-3/2)", self.poly)
    }
}

/// Monge residual `9 f^(V) f''^2 - 45 f^(IV) f''' f'' + 40 f'''^3` of a jet.
pub fn monge1d_residual<T: Scalar>(f: &Jet1<T>) -> Residual<T> {
    let d = f.derivatives();
    let (f2, f3, f4, f5) = (d[2], d[3], d[4], d[5]);
    Residual::from_terms(
        &[T::lit(9.0) * f5 * f2 * f2, -T::lit(45.0) * f4 * f3 * f2, T::lit(40.0) * f3 * f3 * f3],
        T::zero(),
    )
}

/// The two polynomial identities obtained from the mixed ODEs when
/// `p'' = ±P^(-3/2)` and `q' = Q^(-3/2)`. Their difference is `8 (P Q' - P' Q)^3`.
pub fn pq_identity_residuals<T: Scalar>(p: &ConicPoly<T>, q: &ConicPoly<T>, tau: T) -> (Residual<T>, Residual<T>) {
    let c = T::lit;
    let [pp, p1, p2] = p.values(tau);
    let [qq, q1, q2] = q.values(tau);
    let cube = |x: T| x * x * x;
    let sq = |x: T| x * x;
    let r1 = Residual::from_terms(
        &[
            c(7.0) * cube(pp) * cube(q1),
            -c(6.0) * cube(pp) * q2 * q1 * qq,
            -cube(p1) * cube(qq),
            c(9.0) * sq(p1) * pp * q1 * sq(qq),
            -c(6.0) * p2 * p1 * pp * cube(qq),
            -c(15.0) * p1 * sq(pp) * sq(q1) * qq,
            c(6.0) * p1 * sq(pp) * q2 * sq(qq),
            c(6.0) * p2 * sq(pp) * q1 * sq(qq),
        ],
        T::zero(),
    );
    let r2 = Residual::from_terms(
        &[
            c(7.0) * cube(p1) * cube(qq),
            -c(6.0) * p2 * p1 * pp * cube(qq),
            -cube(pp) * cube(q1),
            c(9.0) * p1 * sq(pp) * sq(q1) * qq,
            -c(6.0) * cube(pp) * q2 * q1 * qq,
            -c(15.0) * sq(p1) * pp * q1 * sq(qq),
            c(6.0) * p2 * sq(pp) * q1 * sq(qq),
            c(6.0) * p1 * sq(pp) * q2 * sq(qq),
        ],
        T::zero(),
    );
    (r1, r2)
}

/// The four ODE residuals of the pair `p'' = sign P^(-3/2)`, `q' = Q^(-3/2)` at `v`,
/// from the analytic jets of `p''` and `q'`.
pub fn final1_from_conics<T: Scalar>(p: &ConicPoly<T>, q: &ConicPoly<T>, sign: T, v: T) -> Result<[Residual<T>; 4]> {
    let p2 = p.inv_pow_jet(v)?.scale(sign).derivatives();
    let q1 = q.inv_pow_jet(v)?.derivatives();
    let z = T::zero();
    let pd = [z, z, p2[0], p2[1], p2[2], p2[3]];
    let qd = [z, q1[0], q1[1], q1[2], q1[3], q1[4]];
    Ok(final1_from_derivatives(&pd, &qd))
}
