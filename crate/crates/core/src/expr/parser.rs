use super::lexer::{tokenize, Spanned, Tok};
use super::{Ast, BinOp, ExprError, Func, Node};

pub(crate) struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    vars: &'a [&'a str],
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &str, vars: &'a [&'a str]) -> Result<Self, ExprError> {
        if src.trim().is_empty() {
            return Err(ExprError::Parse {
                offset: 0,
                expected: vec!["expression".into()],
                found: "empty input".into(),
            });
        }
        Ok(Self { toks: tokenize(src)?, pos: 0, vars })
    }

    pub(crate) fn parse_all(mut self) -> Result<Ast, ExprError> {
        let ast = self.expr()?;
        match self.peek() {
            Tok::End => Ok(ast),
            _ => Err(self.unexpected(&["operator", "end of input"])),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ExprError {
        ExprError::Parse {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ExprError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[what]))
        }
    }

    fn expr(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let (_, offset) = self.bump();
            let rhs = self.term()?;
            lhs = Ast::new(Node::Binary(op, Box::new(lhs), Box::new(rhs)), offset);
        }
    }

    fn term(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let (_, offset) = self.bump();
            let rhs = self.unary()?;
            lhs = Ast::new(Node::Binary(op, Box::new(lhs), Box::new(rhs)), offset);
        }
    }

    fn unary(&mut self) -> Result<Ast, ExprError> {
        if *self.peek() == Tok::Minus {
            let (_, offset) = self.bump();
            let inner = self.unary()?;
            return Ok(Ast::new(Node::Neg(Box::new(inner)), offset));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast, ExprError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            let (_, offset) = self.bump();
            let exponent = self.unary()?;
            return Ok(Ast::new(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)), offset));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast, ExprError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                Ok(Ast::new(Node::Number(x), offset))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    return self.call(name, offset);
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Ast::new(Node::Var(i), offset));
                }
                if Func::from_name(&name).is_some() {
                    return Err(self.unexpected(&["`(`"]));
                }
                Ok(Ast::new(Node::Param(name), offset))
            }
            _ => Err(self.unexpected(&["number", "identifier", "`(`", "`-`"])),
        }
    }

    fn call(&mut self, name: String, offset: usize) -> Result<Ast, ExprError> {
        let func = Func::from_name(&name).ok_or(ExprError::UnknownFunction { name: name.clone(), offset })?;
        self.expect(Tok::LParen, "`(`")?;
        let mut args = vec![self.expr()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        if args.len() != func.arity() {
            return Err(ExprError::ArityMismatch { name, offset, expected: func.arity(), found: args.len() });
        }
        Ok(Ast::new(Node::Call(func, args), offset))
    }
}
