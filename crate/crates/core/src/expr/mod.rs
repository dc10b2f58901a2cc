//! A small analytic expression language evaluated in jet arithmetic.
//!
//! Grammar (`^` is right-associative and binds tighter than unary minus):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Identifiers that are neither declared variables nor function names are
//! named parameters, bound to reals at evaluation time.

mod eval;
mod lexer;
mod parser;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::jet::JetError;

/// Named real parameters, e.g. `C`.
pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("parse error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Parse { offset: usize, expected: Vec<String>, found: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("function `{name}` at byte {offset} takes {expected} argument(s), got {found}")]
    ArityMismatch { name: String, offset: usize, expected: usize, found: usize },
    #[error("parameter `{name}` at byte {offset} is not bound")]
    UnboundParam { name: String, offset: usize },
    #[error("expression has {expected} variable(s) but was evaluated at a {found}-dimensional point")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("evaluation failed at byte {offset}: {source}")]
    Domain { offset: usize, source: JetError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Pow,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "pow" => Func::Pow,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Number(f64),
    /// Index into the declared variable list.
    Var(usize),
    Param(String),
    Neg(Box<Ast>),
    Binary(BinOp, Box<Ast>, Box<Ast>),
    Call(Func, Vec<Ast>),
}

/// Expression tree node with the byte offset of the source token that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Ast {
    pub node: Node,
    pub offset: usize,
}

impl Ast {
    pub(crate) fn new(node: Node, offset: usize) -> Self {
        Self { node, offset }
    }

    fn has_var(&self) -> bool {
        match &self.node {
            Node::Var(_) => true,
            Node::Number(_) | Node::Param(_) => false,
            Node::Neg(a) => a.has_var(),
            Node::Binary(_, a, b) => a.has_var() || b.has_var(),
            Node::Call(_, args) => args.iter().any(Ast::has_var),
        }
    }

    fn collect_params<'a>(&'a self, out: &mut Vec<(&'a str, usize)>) {
        match &self.node {
            Node::Param(name) => out.push((name, self.offset)),
            Node::Number(_) | Node::Var(_) => {}
            Node::Neg(a) => a.collect_params(out),
            Node::Binary(_, a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            Node::Call(_, args) => args.iter().for_each(|a| a.collect_params(out)),
        }
    }
}

/// A parsed expression together with its variable declaration.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Ast,
    vars: Vec<String>,
}

/// Parses `src` with the given variable names (e.g. `["t1", "t2"]` or `["v"]`).
pub fn parse(src: &str, vars: &[&str]) -> Result<Expression, ExprError> {
    let root = parser::Parser::new(src, vars)?.parse_all()?;
    Ok(Expression { root, vars: vars.iter().map(|s| s.to_string()).collect() })
}

impl Expression {
    pub fn root(&self) -> &Ast {
        &self.root
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Distinct parameter names in first-occurrence order.
    pub fn param_names(&self) -> Vec<String> {
        let mut all = Vec::new();
        self.root.collect_params(&mut all);
        let mut names: Vec<String> = Vec::new();
        for (n, _) in all {
            if !names.iter().any(|m| m == n) {
                names.push(n.to_string());
            }
        }
        names
    }

    /// Fails on the first parameter missing from `params`.
    pub fn check_bound(&self, params: &Params) -> Result<(), ExprError> {
        let mut all = Vec::new();
        self.root.collect_params(&mut all);
        match all.into_iter().find(|(n, _)| !params.contains_key(*n)) {
            Some((name, offset)) => Err(ExprError::UnboundParam { name: name.to_string(), offset }),
            None => Ok(()),
        }
    }
}

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(ast: &Ast) -> u8 {
    match &ast.node {
        Node::Binary(BinOp::Add | BinOp::Sub, ..) => PREC_ADD,
        Node::Binary(BinOp::Mul | BinOp::Div, ..) => PREC_MUL,
        Node::Binary(BinOp::Pow, ..) => PREC_POW,
        Node::Neg(_) => PREC_NEG,
        Node::Number(x) if *x < 0.0 => PREC_NEG,
        _ => PREC_ATOM,
    }
}

struct Printer<'a> {
    ast: &'a Ast,
    vars: &'a [String],
}

impl Printer<'_> {
    fn child<'b>(&'b self, ast: &'b Ast) -> Printer<'b> {
        Printer { ast, vars: self.vars }
    }

    fn wrap(&self, f: &mut fmt::Formatter<'_>, ast: &Ast, paren: bool) -> fmt::Result {
        if paren {
            write!(f, "({})", self.child(ast))
        } else {
            write!(f, "{}", self.child(ast))
        }
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.ast.node {
            Node::Number(x) => write!(f, "{x:?}"),
            Node::Var(i) => write!(f, "{}", self.vars[*i]),
            Node::Param(name) => write!(f, "{name}"),
            Node::Neg(a) => {
                write!(f, "-")?;
                self.wrap(f, a, precedence(a) < PREC_NEG)
            }
            Node::Binary(op, a, b) => {
                let (sym, prec) = match op {
                    BinOp::Add => (" + ", PREC_ADD),
                    BinOp::Sub => (" - ", PREC_ADD),
                    BinOp::Mul => ("*", PREC_MUL),
                    BinOp::Div => ("/", PREC_MUL),
                    BinOp::Pow => ("^", PREC_POW),
                };
                if *op == BinOp::Pow {
                    self.wrap(f, a, precedence(a) <= PREC_POW)?;
                    write!(f, "{sym}")?;
                    self.wrap(f, b, precedence(b) < PREC_NEG)
                } else {
                    self.wrap(f, a, precedence(a) < prec)?;
                    write!(f, "{sym}")?;
                    self.wrap(f, b, precedence(b) <= prec)
                }
            }
            Node::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", self.child(a))?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Printer { ast: &self.root, vars: &self.vars })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pretty_print_is_stable() {
        for src in [
            "exp(v)-1",
            "t1^2/(2*(1-t2))",
            "-(v+1)^2",
            "2^-v^2",
            "(-v)^3",
            "a-(b-c)",
            "(a-b)-c",
            "a/(b*c)",
            "pow(v, 1.5) + sqrt(v)*log(v)",
            "(t1+C)*log((t1+C)/(C-t2)) - (t1+t2)",
        ] {
            let vars: &[&str] = if src.contains('t') { &["t1", "t2"] } else { &["v"] };
            let once = parse(src, vars).unwrap();
            let printed = once.to_string();
            let twice = parse(&printed, vars).unwrap();
            assert_eq!(once.root.node_shape(), twice.root.node_shape(), "{src} -> {printed}");
            assert_eq!(printed, twice.to_string());
        }
    }

    #[test]
    fn params_are_collected() {
        let e = parse("(t1+C)*log((t1+C)/(C-t2)) - k*t2", &["t1", "t2"]).unwrap();
        assert_eq!(e.param_names(), vec!["C".to_string(), "k".to_string()]);
        let mut p = Params::new();
        p.insert("C".into(), 1.0);
        match e.check_bound(&p) {
            Err(ExprError::UnboundParam { name, .. }) => assert_eq!(name, "k"),
            other => panic!("{other:?}"),
        }
    }

    impl Ast {
        /// Structure without source offsets.
        fn node_shape(&self) -> String {
            match &self.node {
                Node::Number(x) => format!("{x:?}"),
                Node::Var(i) => format!("x{i}"),
                Node::Param(n) => n.clone(),
                Node::Neg(a) => format!("neg({})", a.node_shape()),
                Node::Binary(op, a, b) => format!("{op:?}({},{})", a.node_shape(), b.node_shape()),
                Node::Call(func, args) => {
                    format!("{}({})", func.name(), args.iter().map(Ast::node_shape).collect::<Vec<_>>().join(","))
                }
            }
        }
    }
}
