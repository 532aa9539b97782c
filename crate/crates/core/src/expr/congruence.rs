use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::ast::{fmt_rational, fmt_rational_factor, parse_ast, Ast};
use super::ExprError;
use crate::exact::{bernoulli, bernoulli_poly, euler, euler_poly, harmonic, kronecker_symbol, Rational};

/// Prime-dependent quantities allowed on the right of a supercongruence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CAtom {
    /// Kronecker symbol `(a/p)`.
    Legendre(i64),
    /// Kronecker symbol `(p/n)`.
    KronP(i64),
    /// Fermat quotient `(a^(p-1) - 1)/p`.
    Fermat(BigInt),
    /// `B_{p+off}`.
    Bern(i64),
    /// `E_{p+off}`.
    Euler(i64),
    /// `B_{p+off}(x)`.
    BernPoly(i64, Rational),
    /// `E_{p+off}(x)`.
    EulerPoly(i64, Rational),
    /// `H_{p+off}^{(m)}`.
    Harm(i64, u32),
    /// `base^((a p + b)/d)`.
    PowP { base: Rational, a: i64, b: i64, d: i64 },
}

fn p_off(off: i64) -> String {
    match off {
        0 => "p".into(),
        o if o > 0 => format!("p+{o}"),
        o => format!("p{o}"),
    }
}

impl fmt::Display for CAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CAtom::Legendre(a) => write!(f, "kron({a},p)"),
            CAtom::KronP(n) => write!(f, "kron(p,{n})"),
            CAtom::Fermat(a) => write!(f, "q({a})"),
            CAtom::Bern(o) => write!(f, "B({})", p_off(*o)),
            CAtom::Euler(o) => write!(f, "E({})", p_off(*o)),
            CAtom::BernPoly(o, x) => write!(f, "B({},{})", p_off(*o), fmt_rational(x)),
            CAtom::EulerPoly(o, x) => write!(f, "E({},{})", p_off(*o), fmt_rational(x)),
            CAtom::Harm(o, 1) => write!(f, "H({})", p_off(*o)),
            CAtom::Harm(o, m) => write!(f, "H({},{m})", p_off(*o)),
            CAtom::PowP { base, a, b, d } => {
                let lin = match (*a, *b) {
                    (1, 0) => "p".to_string(),
                    (a, 0) => format!("{a}*p"),
                    (1, b) if b > 0 => format!("p+{b}"),
                    (1, b) => format!("p{b}"),
                    (a, b) if b > 0 => format!("{a}*p+{b}"),
                    (a, b) => format!("{a}*p{b}"),
                };
                let e = if *d == 1 {
                    if lin == "p" { lin } else { format!("({lin})") }
                } else {
                    format!("(({lin})/{d})")
                };
                write!(f, "{}^{e}", fmt_rational_factor(base))
            }
        }
    }
}

/// `coef * p^p_pow * prod atom^e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CMono {
    pub coef: Rational,
    pub p_pow: i64,
    pub atoms: Vec<(CAtom, u32)>,
}

/// Canonical sum of [`CMono`]s, sorted, merged, without zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceRHS {
    pub terms: Vec<CMono>,
}

type Key = (i64, Vec<(CAtom, u32)>);

#[derive(Debug, Clone)]
struct M {
    coef: Rational,
    p_pow: i64,
    atoms: BTreeMap<CAtom, u32>,
}

impl M {
    fn c(r: Rational) -> M {
        M { coef: r, p_pow: 0, atoms: BTreeMap::new() }
    }

    fn atom(a: CAtom) -> M {
        let mut m = M::c(Rational::one());
        m.atoms.insert(a, 1);
        m
    }

    fn mul(&self, o: &M) -> M {
        let mut m = M { coef: &self.coef * &o.coef, p_pow: self.p_pow + o.p_pow, atoms: self.atoms.clone() };
        for (a, e) in &o.atoms {
            *m.atoms.entry(a.clone()).or_insert(0) += e;
        }
        m
    }
}

fn rpow(r: &Rational, n: i64) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..n.unsigned_abs() {
        acc *= r;
    }
    if n < 0 {
        acc.recip()
    } else {
        acc
    }
}

fn prod(a: &[M], b: &[M]) -> Vec<M> {
    a.iter().flat_map(|x| b.iter().map(move |y| x.mul(y))).collect()
}

fn neg(v: Vec<M>) -> Vec<M> {
    v.into_iter()
        .map(|mut m| {
            m.coef = -m.coef;
            m
        })
        .collect()
}

/// Offset `off` when `e` equals `p + off`.
fn p_shift(e: &Ast) -> Option<i64> {
    let (a, b) = e.linear_in("p")?;
    if a.is_one() && b.is_integer() {
        b.to_integer().to_i64()
    } else {
        None
    }
}

fn expand(e: &Ast) -> Result<Vec<M>, ExprError> {
    if let Some(r) = e.const_value() {
        return Ok(if r.is_zero() { vec![] } else { vec![M::c(r)] });
    }
    Ok(match e {
        Ast::Num(r) => vec![M::c(r.clone())],
        Ast::Var(v) if v == "p" => {
            let mut m = M::c(Rational::one());
            m.p_pow = 1;
            vec![m]
        }
        Ast::Var(v) => return Err(ExprError::UnknownSymbol(v.clone())),
        Ast::Neg(a) => neg(expand(a)?),
        Ast::Add(a, b) => {
            let mut v = expand(a)?;
            v.extend(expand(b)?);
            v
        }
        Ast::Sub(a, b) => {
            let mut v = expand(a)?;
            v.extend(neg(expand(b)?));
            v
        }
        Ast::Mul(a, b) => prod(&expand(a)?, &expand(b)?),
        Ast::Div(a, b) => {
            let d = expand(b)?;
            if d.len() != 1 || !d[0].atoms.is_empty() || d[0].coef.is_zero() {
                return Err(ExprError::Unsupported("division by anything but c*p^j".into()));
            }
            let inv = M { coef: d[0].coef.recip(), p_pow: -d[0].p_pow, atoms: BTreeMap::new() };
            prod(&expand(a)?, &[inv])
        }
        Ast::Pow(b, x) => {
            if let Some(n) = x.const_i64() {
                let bs = expand(b)?;
                if bs.len() == 1 {
                    let m = &bs[0];
                    if n < 0 && (!m.atoms.is_empty() || m.coef.is_zero()) {
                        return Err(ExprError::Unsupported("negative power of a prime-dependent atom".into()));
                    }
                    let mut r = M { coef: rpow(&m.coef, n), p_pow: m.p_pow * n, atoms: m.atoms.clone() };
                    for v in r.atoms.values_mut() {
                        *v *= n as u32;
                    }
                    r.atoms.retain(|_, v| *v > 0);
                    return Ok(vec![r]);
                }
                if n < 0 {
                    return Err(ExprError::Unsupported("negative power of a sum".into()));
                }
                let mut acc = vec![M::c(Rational::one())];
                for _ in 0..n {
                    acc = prod(&acc, &bs);
                }
                return Ok(acc);
            }
            let base = b
                .const_value()
                .ok_or_else(|| ExprError::Shape("only rational bases may have p in the exponent".into()))?;
            let (xa, xb) = x
                .linear_in("p")
                .ok_or_else(|| ExprError::Shape("exponent must be linear in p".into()))?;
            let d = xa.denom().lcm(xb.denom());
            let a = (&xa * Rational::from_integer(d.clone())).to_integer();
            let bb = (&xb * Rational::from_integer(d.clone())).to_integer();
            if base.is_zero() {
                return Err(ExprError::Shape("zero base".into()));
            }
            vec![M::atom(CAtom::PowP {
                base,
                a: a.to_i64().unwrap_or(0),
                b: bb.to_i64().unwrap_or(0),
                d: d.to_i64().unwrap_or(1),
            })]
        }
        Ast::Call(f, args) => return expand_call(f, args),
    })
}

fn expand_call(f: &str, args: &[Ast]) -> Result<Vec<M>, ExprError> {
    let need = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(ExprError::Shape(format!("{f} takes {n} argument(s) here")))
        }
    };
    let int = |a: &Ast| a.const_i64().ok_or_else(|| ExprError::Shape(format!("{f} needs an integer argument")));
    match f {
        "kron" => {
            need(2)?;
            let is_p = |a: &Ast| matches!(a, Ast::Var(v) if v == "p");
            if is_p(&args[1]) {
                Ok(vec![M::atom(CAtom::Legendre(int(&args[0])?))])
            } else if is_p(&args[0]) {
                Ok(vec![M::atom(CAtom::KronP(int(&args[1])?))])
            } else {
                let v = kronecker_symbol(int(&args[0])?, int(&args[1])?);
                Ok(if v == 0 { vec![] } else { vec![M::c(Rational::from_integer(v.into()))] })
            }
        }
        "q" => {
            need(1)?;
            let a = args[0].const_int().ok_or_else(|| ExprError::Shape("q needs an integer".into()))?;
            if a.is_zero() {
                return Err(ExprError::Shape("q(0) is undefined".into()));
            }
            Ok(vec![M::atom(CAtom::Fermat(a))])
        }
        "B" | "E" => {
            if args.is_empty() || args.len() > 2 {
                return Err(ExprError::Shape(format!("{f} takes one or two arguments")));
            }
            let x = match args.get(1) {
                None => None,
                Some(a) => Some(a.const_value().ok_or_else(|| ExprError::Shape("polynomial argument must be rational".into()))?),
            };
            if let Some(n) = args[0].const_i64() {
                if n < 0 {
                    return Err(ExprError::Shape("negative index".into()));
                }
                let v = match (f, &x) {
                    ("B", None) => bernoulli(n as u64),
                    ("B", Some(x)) => bernoulli_poly(n as u64, x),
                    (_, None) => euler(n as u64),
                    (_, Some(x)) => euler_poly(n as u64, x),
                };
                return Ok(if v.is_zero() { vec![] } else { vec![M::c(v)] });
            }
            let off = p_shift(&args[0]).ok_or_else(|| ExprError::Shape(format!("{f} index must be p + constant")))?;
            Ok(vec![M::atom(match (f, x) {
                ("B", None) => CAtom::Bern(off),
                ("B", Some(x)) => CAtom::BernPoly(off, x),
                (_, None) => CAtom::Euler(off),
                (_, Some(x)) => CAtom::EulerPoly(off, x),
            })])
        }
        "H" => {
            if args.is_empty() || args.len() > 2 {
                return Err(ExprError::Shape("H takes one or two arguments".into()));
            }
            let m = match args.get(1) {
                None => 1,
                Some(a) => a.const_i64().filter(|m| *m >= 1).ok_or_else(|| ExprError::Shape("bad harmonic order".into()))? as u32,
            };
            if let Some(n) = args[0].const_i64() {
                let h = harmonic(n.max(0) as u64, m);
                return Ok(if h.is_zero() { vec![] } else { vec![M::c(h)] });
            }
            let off = p_shift(&args[0]).ok_or_else(|| ExprError::Shape("H index must be p + constant".into()))?;
            Ok(vec![M::atom(CAtom::Harm(off, m))])
        }
        _ => Err(ExprError::Unsupported(format!("function '{f}' in a congruence"))),
    }
}

impl CongruenceRHS {
    pub fn parse(s: &str) -> Result<CongruenceRHS, ExprError> {
        CongruenceRHS::from_ast(&parse_ast(s, &[])?)
    }

    pub fn from_ast(e: &Ast) -> Result<CongruenceRHS, ExprError> {
        let mut acc: BTreeMap<Key, Rational> = BTreeMap::new();
        for m in expand(e)? {
            let key = (m.p_pow, m.atoms.into_iter().collect::<Vec<_>>());
            *acc.entry(key).or_insert_with(Rational::zero) += m.coef;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((p_pow, atoms), coef)| CMono { coef, p_pow, atoms })
            .collect();
        Ok(CongruenceRHS { terms })
    }

    pub fn zero() -> Self {
        CongruenceRHS { terms: vec![] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn atoms(&self) -> Vec<CAtom> {
        let mut v: Vec<CAtom> = self.terms.iter().flat_map(|t| t.atoms.iter().map(|a| a.0.clone())).collect();
        v.sort();
        v.dedup();
        v
    }
}

impl fmt::Display for CMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut fs: Vec<String> = Vec::new();
        match self.p_pow {
            0 => {}
            1 => fs.push("p".into()),
            j if j > 1 => fs.push(format!("p^{j}")),
            _ => {}
        }
        for (a, e) in &self.atoms {
            fs.push(if *e == 1 { a.to_string() } else { format!("{a}^{e}") });
        }
        let den = match self.p_pow {
            j if j < 0 => Some(if j == -1 { "p".to_string() } else { format!("p^{}", -j) }),
            _ => None,
        };
        let c = &self.coef;
        let mut s = if fs.is_empty() {
            fmt_rational(c)
        } else if c.is_one() {
            fs.join("*")
        } else if (-c).is_one() {
            format!("-{}", fs.join("*"))
        } else {
            format!("{}*{}", fmt_rational(c), fs.join("*"))
        };
        if let Some(d) = den {
            s = format!("{s}/{d}");
        }
        write!(f, "{s}")
    }
}

impl fmt::Display for CongruenceRHS {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let s = t.to_string();
            match (i, s.strip_prefix('-')) {
                (0, _) => write!(f, "{s}")?,
                (_, Some(r)) => write!(f, " - {r}")?,
                (_, None) => write!(f, " + {s}")?,
            }
        }
        Ok(())
    }
}

/// Parse `(a p + b)/d` exponent triple back into an integer at a given prime.
pub fn pow_exponent(a: i64, b: i64, d: i64, p: u64) -> Option<i64> {
    let n = a as i128 * p as i128 + b as i128;
    if n % d as i128 != 0 {
        return None;
    }
    i64::try_from(n / d as i128).ok()
}
