use super::{Ast, BinOp, ExprError, Expression, Func, Node, Params};
use crate::jet::{Axis, Jet, Jet1, Jet2, JetError};

/// Integer exponents up to this magnitude are expanded into products.
const MAX_PRODUCT_EXPONENT: f64 = 8.0;

fn domain(offset: usize) -> impl Fn(JetError) -> ExprError {
    move |source| ExprError::Domain { offset, source }
}

fn param(name: &str, offset: usize, params: &Params) -> Result<f64, ExprError> {
    params.get(name).copied().ok_or_else(|| ExprError::UnboundParam { name: name.to_string(), offset })
}

fn small_integer(x: f64) -> Option<i32> {
    (x.fract() == 0.0 && x.abs() <= MAX_PRODUCT_EXPONENT).then_some(x as i32)
}

impl Expression {
    /// Evaluates the expression in jet arithmetic. `vars[i]` is the jet of the
    /// `i`-th declared variable at the expansion point.
    pub fn eval<J: Jet<f64>>(&self, vars: &[J], params: &Params) -> Result<J, ExprError> {
        if vars.len() != self.vars.len() {
            return Err(ExprError::DimensionMismatch { expected: self.vars.len(), found: vars.len() });
        }
        self.check_bound(params)?;
        // constants take their arity from the first variable
        let proto = vars.first().copied().ok_or(ExprError::DimensionMismatch { expected: 1, found: 0 })?;
        eval_jet(&self.root, vars, proto, params)
    }

    /// Univariate jet at `v`.
    pub fn eval_jet1(&self, v: f64, params: &Params) -> Result<Jet1<f64>, ExprError> {
        self.eval(&[Jet1::variable(v)], params)
    }

    /// Bivariate jet at `(t1, t2)`.
    pub fn eval_jet2(&self, t1: f64, t2: f64, params: &Params) -> Result<Jet2<f64>, ExprError> {
        self.eval(&[Jet2::variable(t1, Axis::T1), Jet2::variable(t2, Axis::T2)], params)
    }

    /// Plain pointwise evaluation, independent of the jet code path.
    pub fn eval_point(&self, point: &[f64], params: &Params) -> Result<f64, ExprError> {
        if point.len() != self.vars.len() {
            return Err(ExprError::DimensionMismatch { expected: self.vars.len(), found: point.len() });
        }
        self.check_bound(params)?;
        eval_scalar(&self.root, point, params)
    }
}

fn eval_jet<J: Jet<f64>>(ast: &Ast, vars: &[J], proto: J, params: &Params) -> Result<J, ExprError> {
    let off = ast.offset;
    Ok(match &ast.node {
        Node::Number(x) => proto.constant_like(*x),
        Node::Var(i) => vars[*i],
        Node::Param(name) => proto.constant_like(param(name, off, params)?),
        Node::Neg(a) => -eval_jet(a, vars, proto, params)?,
        Node::Binary(op, a, b) => {
            if *op == BinOp::Pow {
                return power(a, b, off, vars, proto, params);
            }
            let x = eval_jet(a, vars, proto, params)?;
            let y = eval_jet(b, vars, proto, params)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x.try_div(&y).map_err(domain(off))?,
                BinOp::Pow => unreachable!(),
            }
        }
        Node::Call(Func::Pow, args) => return power(&args[0], &args[1], off, vars, proto, params),
        Node::Call(func, args) => {
            let x = eval_jet(&args[0], vars, proto, params)?;
            match func {
                Func::Exp => x.exp(),
                Func::Log => x.ln().map_err(domain(off))?,
                Func::Sqrt => x.sqrt().map_err(domain(off))?,
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Pow => unreachable!(),
            }
        }
    })
}

fn power<J: Jet<f64>>(
    base: &Ast,
    exponent: &Ast,
    off: usize,
    vars: &[J],
    proto: J,
    params: &Params,
) -> Result<J, ExprError> {
    let x = eval_jet(base, vars, proto, params)?;
    if exponent.has_var() {
        // x^y = exp(y log x)
        let y = eval_jet(exponent, vars, proto, params)?;
        return Ok((y * x.ln().map_err(domain(off))?).exp());
    }
    let r = eval_scalar(exponent, &[], params)?;
    match small_integer(r) {
        Some(n) => x.powi(n).map_err(domain(off)),
        None => x.powf(r).map_err(domain(off)),
    }
}

fn scalar_domain(function: &'static str, constant: f64, offset: usize) -> ExprError {
    ExprError::Domain { offset, source: JetError::DomainError { function, constant } }
}

fn eval_scalar(ast: &Ast, point: &[f64], params: &Params) -> Result<f64, ExprError> {
    let off = ast.offset;
    Ok(match &ast.node {
        Node::Number(x) => *x,
        Node::Var(i) => point[*i],
        Node::Param(name) => param(name, off, params)?,
        Node::Neg(a) => -eval_scalar(a, point, params)?,
        Node::Binary(op, a, b) => {
            let x = eval_scalar(a, point, params)?;
            let y = eval_scalar(b, point, params)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return Err(ExprError::Domain {
                            offset: off,
                            source: JetError::DivisionBySingularJet { constant: y },
                        });
                    }
                    x / y
                }
                BinOp::Pow => scalar_pow(x, y, b.has_var(), off)?,
            }
        }
        Node::Call(func, args) => {
            let x = eval_scalar(&args[0], point, params)?;
            match func {
                Func::Exp => x.exp(),
                Func::Log if x > 0.0 => x.ln(),
                Func::Log => return Err(scalar_domain("log", x, off)),
                Func::Sqrt if x > 0.0 => x.sqrt(),
                Func::Sqrt => return Err(scalar_domain("sqrt", x, off)),
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Pow => {
                    let y = eval_scalar(&args[1], point, params)?;
                    scalar_pow(x, y, args[1].has_var(), off)?
                }
            }
        }
    })
}

/// Mirrors the operation order of the jet path so both agree at order 0.
fn scalar_pow(x: f64, y: f64, variable_exponent: bool, off: usize) -> Result<f64, ExprError> {
    if !variable_exponent {
        if let Some(n) = small_integer(y) {
            if n < 0 && x == 0.0 {
                return Err(ExprError::Domain { offset: off, source: JetError::DivisionBySingularJet { constant: x } });
            }
            let base = if n < 0 { x.recip() } else { x };
            return Ok((0..n.unsigned_abs()).fold(1.0, |acc, _| acc * base));
        }
    }
    if !(x > 0.0) {
        return Err(scalar_domain("pow", x, off));
    }
    if variable_exponent {
        Ok((y * x.ln()).exp())
    } else {
        Ok(x.powf(y))
    }
}
