use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ExprError;
use crate::exact::Rational;

/// Untyped expression tree shared by every expression family.
#[derive(Debug, Clone, PartialEq)]
pub enum Ast {
    Num(Rational),
    Var(String),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, Box<Ast>),
    Call(String, Vec<Ast>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let t: String = cs[st..i].iter().collect();
            out.push((st, Tok::Num(t.parse().unwrap())));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push((st, Tok::Ident(cs[st..i].iter().collect())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ExprError::Parse { pos: i, msg: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

/// Names that take arguments; any other identifier followed by `(` is a
/// product, unless it is a registered sequence name.
const FUNCTIONS: &[&str] = &[
    "C", "H", "AltH", "q", "B", "E", "kron", "sqrt", "log", "zeta", "beta", "Gamma", "sum",
];

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    i: usize,
    seqs: &'a [String],
    len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.len, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Parse { pos: self.pos(), msg: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn starts_primary(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Op('(')))
    }

    fn term(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Ast::Div(Box::new(lhs), Box::new(self.unary()?));
            } else if self.starts_primary() {
                // juxtaposition, as in 2k+1 or (k+1)(2k+1)
                lhs = Ast::Mul(Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Ast, ExprError> {
        if self.eat('-') {
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast, ExprError> {
        let base = self.primary()?;
        if self.eat('^') {
            let e = self.unary()?;
            return Ok(Ast::Pow(Box::new(base), Box::new(e)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Ast, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.i += 1;
                Ok(Ast::Num(Rational::from_integer(n)))
            }
            Some(Tok::Ident(name)) => {
                self.i += 1;
                let is_fn = FUNCTIONS.contains(&name.as_str()) || self.seqs.iter().any(|s| s == &name);
                if is_fn && self.peek() == Some(&Tok::Op('(')) {
                    self.i += 1;
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    Ok(Ast::Call(name, args))
                } else if is_fn {
                    self.err(format!("function '{name}' needs arguments"))
                } else {
                    Ok(Ast::Var(name))
                }
            }
            Some(Tok::Op('(')) => {
                self.i += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => self.err("expected a number, name or '('"),
        }
    }
}

/// Parse an expression. `seqs` lists user-defined sequence names that may be
/// applied like functions.
pub fn parse_ast(s: &str, seqs: &[String]) -> Result<Ast, ExprError> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err(ExprError::Parse { pos: 0, msg: "empty expression".into() });
    }
    let mut p = Parser { toks, i: 0, seqs, len: s.len() };
    let e = p.expr()?;
    if p.i != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

impl Ast {
    pub fn num(r: Rational) -> Ast {
        Ast::Num(r)
    }

    /// Replace named parameters by values.
    pub fn substitute(&self, env: &BTreeMap<String, Rational>) -> Ast {
        let s = |a: &Ast| Box::new(a.substitute(env));
        match self {
            Ast::Var(v) => env.get(v).map_or_else(|| self.clone(), |r| Ast::Num(r.clone())),
            Ast::Num(_) => self.clone(),
            Ast::Neg(a) => Ast::Neg(s(a)),
            Ast::Add(a, b) => Ast::Add(s(a), s(b)),
            Ast::Sub(a, b) => Ast::Sub(s(a), s(b)),
            Ast::Mul(a, b) => Ast::Mul(s(a), s(b)),
            Ast::Div(a, b) => Ast::Div(s(a), s(b)),
            Ast::Pow(a, b) => Ast::Pow(s(a), s(b)),
            Ast::Call(f, args) => Ast::Call(f.clone(), args.iter().map(|a| a.substitute(env)).collect()),
        }
    }

    /// Value of a variable-free rational expression.
    pub fn const_value(&self) -> Option<Rational> {
        match self {
            Ast::Num(r) => Some(r.clone()),
            Ast::Var(_) | Ast::Call(..) => None,
            Ast::Neg(a) => Some(-a.const_value()?),
            Ast::Add(a, b) => Some(a.const_value()? + b.const_value()?),
            Ast::Sub(a, b) => Some(a.const_value()? - b.const_value()?),
            Ast::Mul(a, b) => Some(a.const_value()? * b.const_value()?),
            Ast::Div(a, b) => {
                let d = b.const_value()?;
                if d.is_zero() {
                    None
                } else {
                    Some(a.const_value()? / d)
                }
            }
            Ast::Pow(a, b) => {
                let base = a.const_value()?;
                let e = b.const_value()?;
                if !e.is_integer() {
                    return None;
                }
                let n = e.to_integer().to_i64()?;
                if n.abs() > 10_000 || (n < 0 && base.is_zero()) {
                    return None;
                }
                let mut acc = Rational::one();
                for _ in 0..n.abs() {
                    acc *= &base;
                }
                Some(if n < 0 { acc.recip() } else { acc })
            }
        }
    }

    /// Integer value of a constant expression.
    pub fn const_int(&self) -> Option<BigInt> {
        let r = self.const_value()?;
        r.is_integer().then(|| r.to_integer())
    }

    pub fn const_i64(&self) -> Option<i64> {
        self.const_int()?.to_i64()
    }

    /// Whether the variable occurs anywhere.
    pub fn mentions(&self, v: &str) -> bool {
        match self {
            Ast::Var(x) => x == v,
            Ast::Num(_) => false,
            Ast::Neg(a) => a.mentions(v),
            Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) | Ast::Div(a, b) | Ast::Pow(a, b) => {
                a.mentions(v) || b.mentions(v)
            }
            Ast::Call(_, args) => args.iter().any(|a| a.mentions(v)),
        }
    }

    /// `(a, b)` such that the expression equals `a*v + b`, if it is linear in
    /// `v` with rational coefficients and no other variables.
    pub fn linear_in(&self, v: &str) -> Option<(Rational, Rational)> {
        match self {
            Ast::Num(r) => Some((Rational::zero(), r.clone())),
            Ast::Var(x) if x == v => Some((Rational::one(), Rational::zero())),
            Ast::Var(_) | Ast::Call(..) => None,
            Ast::Neg(a) => {
                let (x, y) = a.linear_in(v)?;
                Some((-x, -y))
            }
            Ast::Add(a, b) => {
                let (x1, y1) = a.linear_in(v)?;
                let (x2, y2) = b.linear_in(v)?;
                Some((x1 + x2, y1 + y2))
            }
            Ast::Sub(a, b) => {
                let (x1, y1) = a.linear_in(v)?;
                let (x2, y2) = b.linear_in(v)?;
                Some((x1 - x2, y1 - y2))
            }
            Ast::Mul(a, b) => {
                let (x1, y1) = a.linear_in(v)?;
                let (x2, y2) = b.linear_in(v)?;
                if !x1.is_zero() && !x2.is_zero() {
                    return None;
                }
                Some((&x1 * &y2 + &x2 * &y1, y1 * y2))
            }
            Ast::Div(a, b) => {
                let d = b.const_value()?;
                if d.is_zero() {
                    return None;
                }
                let (x, y) = a.linear_in(v)?;
                Some((x / &d, y / d))
            }
            Ast::Pow(..) => {
                let c = self.const_value()?;
                Some((Rational::zero(), c))
            }
        }
    }
}

/// Render a rational for re-parsing: integers plainly, fractions as `n/d`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rational rendered so it can be used as a factor (`(-3/4)` when needed).
pub fn fmt_rational_factor(r: &Rational) -> String {
    if r.is_integer() && !r.is_negative() {
        r.numer().to_string()
    } else {
        format!("({})", fmt_rational(r))
    }
}
