use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ast::{fmt_rational, fmt_rational_factor, parse_ast, Ast};
use super::summand::SummandExpr;
use super::ExprError;
use crate::constants::ConstantKey;
use crate::exact::Rational;

/// Right-hand side of an identity: rationals, named constants and a few
/// operations, possibly containing convergent sums of summands.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedFormExpr {
    Num(Rational),
    Const(ConstantKey),
    Add(Vec<ClosedFormExpr>),
    Mul(Vec<ClosedFormExpr>),
    Neg(Box<ClosedFormExpr>),
    Div(Box<ClosedFormExpr>, Box<ClosedFormExpr>),
    Pow(Box<ClosedFormExpr>, Rational),
    Log(Box<ClosedFormExpr>),
    Sqrt(Box<ClosedFormExpr>),
    /// `sum_{k >= start} summand`.
    Sum(Box<SummandExpr>, i64),
}

use ClosedFormExpr as CF;

fn neg(x: CF) -> CF {
    match x {
        CF::Num(r) => CF::Num(-r),
        CF::Neg(y) => *y,
        CF::Mul(mut v) if matches!(v.first(), Some(CF::Num(_))) => {
            if let CF::Num(c) = &v[0] {
                v[0] = CF::Num(-c);
            }
            CF::Mul(v)
        }
        x => CF::Neg(Box::new(x)),
    }
}

fn const_arg(f: &str, args: &[Ast]) -> Result<Rational, ExprError> {
    if args.len() != 1 {
        return Err(ExprError::Shape(format!("{f} takes one argument")));
    }
    args[0].const_value().ok_or_else(|| ExprError::Shape(format!("{f} needs a rational argument")))
}

fn small_index(f: &str, args: &[Ast]) -> Result<u32, ExprError> {
    let r = const_arg(f, args)?;
    if !r.is_integer() || r < Rational::one() {
        return Err(ExprError::Shape(format!("{f} needs a positive integer argument")));
    }
    r.to_integer().to_u32().ok_or_else(|| ExprError::Shape(format!("{f} argument too large")))
}

impl ClosedFormExpr {
    pub fn parse(s: &str, seqs: &[String]) -> Result<CF, ExprError> {
        CF::from_ast(&parse_ast(s, seqs)?, seqs)
    }

    pub fn from_ast(e: &Ast, seqs: &[String]) -> Result<CF, ExprError> {
        if let Some(r) = e.const_value() {
            return Ok(CF::Num(r));
        }
        let rec = |a: &Ast| CF::from_ast(a, seqs);
        Ok(match e {
            Ast::Num(r) => CF::Num(r.clone()),
            Ast::Var(v) => CF::Const(match v.as_str() {
                "pi" => ConstantKey::Pi,
                "G" => ConstantKey::Catalan,
                "K" => ConstantKey::K3,
                "L" => ConstantKey::L8,
                "phi" => ConstantKey::GoldenPhi,
                _ => return Err(ExprError::UnknownSymbol(v.clone())),
            }),
            Ast::Neg(a) => neg(rec(a)?),
            Ast::Add(a, b) | Ast::Sub(a, b) => {
                let mut v = Vec::new();
                for (x, sign) in [(a, false), (b, matches!(e, Ast::Sub(..)))] {
                    let x = rec(x)?;
                    let x = if sign { neg(x) } else { x };
                    match x {
                        CF::Add(xs) => v.extend(xs),
                        x => v.push(x),
                    }
                }
                CF::Add(v)
            }
            Ast::Mul(a, b) => {
                let mut v = Vec::new();
                for x in [rec(a)?, rec(b)?] {
                    match x {
                        CF::Mul(xs) => v.extend(xs),
                        x => v.push(x),
                    }
                }
                CF::Mul(v)
            }
            Ast::Div(a, b) => CF::Div(Box::new(rec(a)?), Box::new(rec(b)?)),
            Ast::Pow(a, b) => {
                let x = b
                    .const_value()
                    .ok_or_else(|| ExprError::Shape("exponent in a closed form must be rational".into()))?;
                CF::Pow(Box::new(rec(a)?), x)
            }
            Ast::Call(f, args) => match f.as_str() {
                "zeta" => CF::Const(ConstantKey::Zeta(small_index(f, args)?)),
                "beta" => match small_index(f, args)? {
                    2 => CF::Const(ConstantKey::Catalan),
                    n => CF::Const(ConstantKey::Beta(n)),
                },
                "Gamma" => {
                    let q = const_arg(f, args)?;
                    if !q.is_positive() {
                        return Err(ExprError::Shape("Gamma needs a positive rational".into()));
                    }
                    CF::Const(ConstantKey::GammaRat(q))
                }
                "log" | "sqrt" => {
                    if args.len() != 1 {
                        return Err(ExprError::Shape(format!("{f} takes one argument")));
                    }
                    match args[0].const_value() {
                        Some(q) if q.is_positive() => CF::Const(if f == "log" {
                            ConstantKey::LogQ(q)
                        } else {
                            ConstantKey::SqrtQ(q)
                        }),
                        Some(_) => return Err(ExprError::Shape(format!("{f} of a non-positive rational"))),
                        None if f == "log" => CF::Log(Box::new(rec(&args[0])?)),
                        None => CF::Sqrt(Box::new(rec(&args[0])?)),
                    }
                }
                "sum" => {
                    if args.is_empty() || args.len() > 2 {
                        return Err(ExprError::Shape("sum takes a summand and an optional start".into()));
                    }
                    let start = match args.get(1) {
                        None => 0,
                        Some(a) => a.const_i64().ok_or_else(|| ExprError::Shape("sum start must be an integer".into()))?,
                    };
                    CF::Sum(Box::new(SummandExpr::from_ast(&args[0], seqs)?), start)
                }
                _ => return Err(ExprError::Unsupported(format!("function '{f}' in a closed form"))),
            },
        })
    }

    /// Whether a convergent sum occurs inside.
    pub fn has_sum(&self) -> bool {
        match self {
            CF::Num(_) | CF::Const(_) => false,
            CF::Sum(..) => true,
            CF::Add(v) | CF::Mul(v) => v.iter().any(|x| x.has_sum()),
            CF::Neg(a) | CF::Pow(a, _) | CF::Log(a) | CF::Sqrt(a) => a.has_sum(),
            CF::Div(a, b) => a.has_sum() || b.has_sum(),
        }
    }

    /// Constants referenced, in order of first occurrence.
    pub fn constants(&self) -> Vec<ConstantKey> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<ConstantKey>) {
        match self {
            CF::Num(_) | CF::Sum(..) => {}
            CF::Const(k) => {
                if !out.contains(k) {
                    out.push(k.clone());
                }
            }
            CF::Add(v) | CF::Mul(v) => v.iter().for_each(|x| x.collect(out)),
            CF::Neg(a) | CF::Pow(a, _) | CF::Log(a) | CF::Sqrt(a) => a.collect(out),
            CF::Div(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }

    fn atomic(&self) -> bool {
        match self {
            CF::Num(r) => r.is_integer() && !r.is_negative(),
            CF::Const(_) | CF::Log(_) | CF::Sqrt(_) | CF::Sum(..) => true,
            _ => false,
        }
    }

    fn as_factor(&self) -> String {
        match self {
            CF::Num(r) => fmt_rational_factor(r),
            CF::Pow(..) => self.to_string(),
            x if x.atomic() => x.to_string(),
            x => format!("({x})"),
        }
    }
}

impl fmt::Display for ClosedFormExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CF::Num(r) => write!(f, "{}", fmt_rational(r)),
            CF::Const(k) => match k {
                ConstantKey::LogQ(q) => write!(f, "log({})", fmt_rational(q)),
                ConstantKey::SqrtQ(q) => write!(f, "sqrt({})", fmt_rational(q)),
                ConstantKey::GammaRat(q) => write!(f, "Gamma({})", fmt_rational(q)),
                k => write!(f, "{k}"),
            },
            CF::Add(v) => {
                for (i, x) in v.iter().enumerate() {
                    let (minus, body) = match x {
                        CF::Neg(y) => (true, y.as_ref().clone()),
                        CF::Num(r) if r.is_negative() => (true, CF::Num(-r)),
                        CF::Mul(m) if matches!(m.first(), Some(CF::Num(c)) if c.is_negative()) => {
                            (true, neg(x.clone()))
                        }
                        x => (false, x.clone()),
                    };
                    let s = match &body {
                        CF::Add(_) => format!("({body})"),
                        CF::Num(r) if !r.is_integer() && minus => fmt_rational(r),
                        _ => body.to_string(),
                    };
                    match (i, minus) {
                        (0, false) => write!(f, "{s}")?,
                        (0, true) => write!(f, "-{}", if body.atomic() || matches!(body, CF::Num(_)) { s } else { format!("({s})") })?,
                        (_, false) => write!(f, " + {s}")?,
                        (_, true) => write!(f, " - {s}")?,
                    }
                }
                Ok(())
            }
            CF::Mul(v) => {
                let parts: Vec<String> = v
                    .iter()
                    .enumerate()
                    .map(|(i, x)| match x {
                        // a leading positive rational needs no parentheses
                        CF::Num(r) if i == 0 && r.is_positive() && r.is_integer() => fmt_rational(r),
                        x => x.as_factor(),
                    })
                    .collect();
                write!(f, "{}", parts.join("*"))
            }
            CF::Neg(a) => {
                if a.atomic() {
                    write!(f, "-{a}")
                } else {
                    write!(f, "-({a})")
                }
            }
            CF::Div(a, b) => {
                let n = match a.as_ref() {
                    x if x.atomic() => x.to_string(),
                    x @ CF::Mul(_) | x @ CF::Pow(..) => x.to_string(),
                    x => format!("({x})"),
                };
                let d = match b.as_ref() {
                    x if x.atomic() => x.to_string(),
                    x @ CF::Pow(..) => x.to_string(),
                    x => format!("({x})"),
                };
                write!(f, "{n}/{d}")
            }
            CF::Pow(a, e) => {
                let b = if a.atomic() && !matches!(a.as_ref(), CF::Num(_)) { a.to_string() } else { format!("({a})") };
                if e.is_integer() && !e.is_negative() {
                    write!(f, "{b}^{}", e.numer())
                } else {
                    write!(f, "{b}^({})", fmt_rational(e))
                }
            }
            CF::Log(a) => write!(f, "log({a})"),
            CF::Sqrt(a) => write!(f, "sqrt({a})"),
            CF::Sum(s, start) => {
                if *start == 0 {
                    write!(f, "sum({s})")
                } else {
                    write!(f, "sum({s}, {start})")
                }
            }
        }
    }
}

impl ClosedFormExpr {
    pub fn zero() -> CF {
        CF::Num(Rational::zero())
    }
}
