//! Univariate analytic functions that can produce their order-5 jet at a point.

use std::fmt;

use crate::error::Result;
use crate::expr::{parse, Expression, Params};
use crate::jet::{Jet, Jet1};
use crate::quadrature::integrate_width;

/// Panel width used for default antiderivatives.
pub const INTEGRAL_PANEL_WIDTH: f64 = 0.1;

pub trait UnivariateFn: Send + Sync + fmt::Debug {
    /// Taylor coefficients of the function at `v` up to order 5.
    fn jet(&self, v: f64) -> Result<Jet1<f64>>;

    fn value(&self, v: f64) -> Result<f64> {
        Ok(self.jet(v)?.value())
    }

    /// `\int_0^v f`.
    fn integral(&self, v: f64) -> Result<f64> {
        integrate_width(|s| self.value(s), 0.0, v, INTEGRAL_PANEL_WIDTH)
    }

    fn describe(&self) -> String;
}

/// A function of `v` given by an expression.
#[derive(Debug, Clone)]
pub struct ExprFn {
    expr: Expression,
    params: Params,
}

impl ExprFn {
    pub fn new(expr: Expression, params: Params) -> Result<Self> {
        expr.check_bound(&params)?;
        Ok(Self { expr, params })
    }

    pub fn parse(src: &str, params: &Params) -> Result<Self> {
        Self::new(parse(src, &["v"])?, params.clone())
    }
}

impl UnivariateFn for ExprFn {
    fn jet(&self, v: f64) -> Result<Jet1<f64>> {
        Ok(self.expr.eval_jet1(v, &self.params)?)
    }

    fn value(&self, v: f64) -> Result<f64> {
        Ok(self.expr.eval_point(&[v], &self.params)?)
    }

    fn describe(&self) -> String {
        self.expr.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_function() {
        let f = ExprFn::parse("exp(v) - 1", &Params::new()).unwrap();
        assert!((f.value(0.3).unwrap() - (0.3f64.exp() - 1.0)).abs() < 1e-16);
        assert!((f.jet(0.3).unwrap().derivative(4) - 0.3f64.exp()).abs() < 1e-14);
        let int = f.integral(0.35).unwrap();
        assert!((int - (0.35f64.exp() - 1.0 - 0.35)).abs() < 1e-15);
        assert!(ExprFn::parse("C*v", &Params::new()).is_err());
    }
}
