use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ast::{fmt_rational, fmt_rational_factor, Ast};
use super::closed::ClosedFormExpr;
use super::ExprError;
use crate::exact::{binomial, harmonic, Rational};

/// `a*k + b` with integer coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lin {
    pub a: i64,
    pub b: i64,
}

impl Lin {
    pub const K: Lin = Lin { a: 1, b: 0 };

    pub fn new(a: i64, b: i64) -> Self {
        Lin { a, b }
    }

    pub fn at(&self, k: i64) -> i64 {
        self.a * k + self.b
    }

    /// Split rational `(x, y)` for `x*k + y` into a scalar times a primitive
    /// form with positive leading coefficient.
    fn normalize(x: &Rational, y: &Rational) -> (Rational, Lin) {
        let l = x.denom().lcm(y.denom());
        let xi = (x * Rational::from_integer(l.clone())).to_integer();
        let yi = (y * Rational::from_integer(l.clone())).to_integer();
        let mut g = xi.gcd(&yi);
        if xi.is_negative() {
            g = -g;
        }
        let a = (&xi / &g).to_i64().expect("coefficient");
        let b = (&yi / &g).to_i64().expect("coefficient");
        (Rational::new(g, l), Lin { a, b })
    }

    fn from_ast(e: &Ast, what: &str) -> Result<Lin, ExprError> {
        let bad = || ExprError::Shape(format!("{what} must be an integer linear form in k"));
        let (x, y) = e.linear_in("k").ok_or_else(bad)?;
        if !x.is_integer() || !y.is_integer() {
            return Err(bad());
        }
        Ok(Lin { a: x.to_integer().to_i64().ok_or_else(bad)?, b: y.to_integer().to_i64().ok_or_else(bad)? })
    }
}

impl fmt::Display for Lin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.a {
            0 => return write!(f, "{}", self.b),
            1 => write!(f, "k")?,
            -1 => write!(f, "-k")?,
            a => write!(f, "{a}*k")?,
        }
        match self.b {
            0 => Ok(()),
            b if b > 0 => write!(f, "+{b}"),
            b => write!(f, "{b}"),
        }
    }
}

/// Polynomial in `k`, coefficients in ascending degree, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Poly(pub Vec<Rational>);

impl Poly {
    pub fn constant(c: Rational) -> Poly {
        Poly(vec![c]).trim()
    }

    pub fn of_lin(l: Lin) -> Poly {
        Poly(vec![Rational::from_integer(l.b.into()), Rational::from_integer(l.a.into())]).trim()
    }

    fn trim(mut self) -> Poly {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let z = Rational::zero();
        Poly((0..n).map(|i| self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z)).collect()).trim()
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::default();
        }
        let mut c = vec![Rational::zero(); self.0.len() + o.0.len() - 1];
        for (i, x) in self.0.iter().enumerate() {
            for (j, y) in o.0.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        Poly(c).trim()
    }

    pub fn scale(&self, s: &Rational) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect()).trim()
    }

    pub fn eval(&self, k: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.0.iter().rev() {
            acc = acc * k + c;
        }
        acc
    }

    /// Exact quotient by a linear factor, if it divides.
    pub fn div_lin(&self, l: Lin) -> Option<Poly> {
        if self.is_zero() {
            return Some(Poly::default());
        }
        let root = Rational::new((-l.b).into(), l.a.into());
        let n = self.0.len();
        if n == 1 {
            return None;
        }
        let mut q = vec![Rational::zero(); n - 1];
        q[n - 2] = self.0[n - 1].clone();
        for i in (1..n - 1).rev() {
            q[i - 1] = &self.0[i] + &root * &q[i];
        }
        if !(&self.0[0] + &root * &q[0]).is_zero() {
            return None;
        }
        let a = Rational::from_integer(l.a.into());
        Some(Poly(q.into_iter().map(|c| c / &a).collect()))
    }

    /// `self = c * prim` with `prim` integral, primitive, leading coefficient
    /// positive.
    pub fn primitive(&self) -> (Rational, Poly) {
        let mut l = BigInt::one();
        for c in &self.0 {
            l = l.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self.0.iter().map(|c| (c * Rational::from_integer(l.clone())).to_integer()).collect();
        let mut g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        if g.is_zero() {
            return (Rational::zero(), Poly::default());
        }
        if ints.last().unwrap().is_negative() {
            g = -g;
        }
        let prim = Poly(ints.iter().map(|x| Rational::from_integer(x / &g)).collect());
        (Rational::new(g, l), prim)
    }

    fn is_monomial_one(&self) -> bool {
        self.0.len() == 1 && self.0[0].is_one()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { "-" } else { "+" })?;
            }
            first = false;
            let mono = match i {
                0 => String::new(),
                1 => "k".to_string(),
                _ => format!("k^{i}"),
            };
            if mono.is_empty() {
                write!(f, "{}", fmt_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}*{mono}", fmt_rational(&a))?;
            }
        }
        Ok(())
    }
}

/// Generalized harmonic number `H_{arg}^{(order)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HAtom {
    pub arg: Lin,
    pub order: u32,
}

impl fmt::Display for HAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order == 1 {
            write!(f, "H({})", self.arg)
        } else {
            write!(f, "H({},{})", self.arg, self.order)
        }
    }
}

/// One canonical group of a summand:
///
/// `p^p_pow * prod C(n,r)^e * base^k * real_base^k * prod seq(arg)^e
///   * (sum_atom poly(k) * atom) / prod lin(k)^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub p_pow: i64,
    pub binoms: Vec<(Lin, Lin, i64)>,
    pub base: Rational,
    pub real_base: Option<ClosedFormExpr>,
    pub seqs: Vec<(String, Lin, i64)>,
    pub denom: Vec<(Lin, u32)>,
    /// `None` stands for the atom 1.
    pub body: Vec<(Option<HAtom>, Poly)>,
}

/// Canonical summand: a sum of [`Term`]s with distinct hypergeometric parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SummandExpr {
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone)]
struct Mono {
    coef: Rational,
    p_pow: i64,
    binoms: BTreeMap<(Lin, Lin), i64>,
    base: Rational,
    real: Option<(String, ClosedFormExpr)>,
    seqs: BTreeMap<(String, Lin), i64>,
    lins: BTreeMap<Lin, i64>,
    h: Option<HAtom>,
}

fn merge<K: Ord + Clone>(a: &mut BTreeMap<K, i64>, b: &BTreeMap<K, i64>, s: i64) {
    for (k, e) in b {
        let v = a.entry(k.clone()).or_insert(0);
        *v += e * s;
        if *v == 0 {
            a.remove(k);
        }
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

impl Mono {
    fn constant(c: Rational) -> Mono {
        Mono {
            coef: c,
            p_pow: 0,
            binoms: BTreeMap::new(),
            base: Rational::one(),
            real: None,
            seqs: BTreeMap::new(),
            lins: BTreeMap::new(),
            h: None,
        }
    }

    fn mul(&self, o: &Mono) -> Result<Mono, ExprError> {
        let h = match (self.h, o.h) {
            (Some(_), Some(_)) => {
                return Err(ExprError::Unsupported("products of harmonic numbers".into()));
            }
            (a, b) => a.or(b),
        };
        let real = match (&self.real, &o.real) {
            (Some(_), Some(_)) => return Err(ExprError::Unsupported("two irrational geometric bases".into())),
            (a, b) => a.clone().or(b.clone()),
        };
        let mut m = Mono {
            coef: &self.coef * &o.coef,
            p_pow: self.p_pow + o.p_pow,
            binoms: self.binoms.clone(),
            base: &self.base * &o.base,
            real,
            seqs: self.seqs.clone(),
            lins: self.lins.clone(),
            h,
        };
        merge(&mut m.binoms, &o.binoms, 1);
        merge(&mut m.seqs, &o.seqs, 1);
        merge(&mut m.lins, &o.lins, 1);
        Ok(m)
    }

    fn pow(&self, n: i64) -> Result<Mono, ExprError> {
        if n == 0 {
            return Ok(Mono::constant(Rational::one()));
        }
        if n < 0 && (self.h.is_some() || self.real.is_some() || self.coef.is_zero()) {
            return Err(ExprError::Unsupported("negative power of a non-invertible factor".into()));
        }
        if n != 1 && (self.h.is_some() || self.real.is_some()) {
            return Err(ExprError::Unsupported("powers of harmonic numbers or irrational bases".into()));
        }
        let mut m = self.clone();
        m.coef = rpow(&self.coef, n);
        m.base = rpow(&self.base, n);
        m.p_pow = self.p_pow * n;
        for v in m.binoms.values_mut().chain(m.seqs.values_mut()).chain(m.lins.values_mut()) {
            *v *= n;
        }
        Ok(m)
    }

    fn is_plain(&self) -> bool {
        self.p_pow == 0 && self.binoms.is_empty() && self.base.is_one() && self.real.is_none()
            && self.seqs.is_empty() && self.h.is_none()
    }
}

fn neg_all(v: Vec<Mono>) -> Vec<Mono> {
    v.into_iter()
        .map(|mut m| {
            m.coef = -m.coef;
            m
        })
        .collect()
}

/// If the sum is `x*k + y` with `x != 0`, the single monomial `c * lin`.
fn collapse_linear(v: &[Mono]) -> Option<Mono> {
    if v.len() < 2 {
        return None;
    }
    let mut x = Rational::zero();
    let mut y = Rational::zero();
    for m in v {
        if !m.is_plain() {
            return None;
        }
        match m.lins.len() {
            0 => y += &m.coef,
            1 => {
                let (l, e) = m.lins.iter().next().unwrap();
                if *e != 1 {
                    return None;
                }
                x += &m.coef * Rational::from_integer(l.a.into());
                y += &m.coef * Rational::from_integer(l.b.into());
            }
            _ => return None,
        }
    }
    if x.is_zero() {
        return Some(Mono::constant(y));
    }
    let (c, l) = Lin::normalize(&x, &y);
    let mut m = Mono::constant(c);
    m.lins.insert(l, 1);
    Some(m)
}

fn lin_mono(x: &Rational, y: &Rational) -> Mono {
    if x.is_zero() {
        return Mono::constant(y.clone());
    }
    let (c, l) = Lin::normalize(x, y);
    let mut m = Mono::constant(c);
    m.lins.insert(l, 1);
    m
}

fn product(a: &[Mono], b: &[Mono]) -> Result<Vec<Mono>, ExprError> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x.mul(y)?);
        }
    }
    Ok(out)
}

fn single(v: Vec<Mono>) -> Option<Mono> {
    match v.len() {
        0 => Some(Mono::constant(Rational::zero())),
        1 => v.into_iter().next(),
        _ => collapse_linear(&v),
    }
}

fn expand(e: &Ast, seqs: &[String]) -> Result<Vec<Mono>, ExprError> {
    let r = match e {
        Ast::Num(r) => {
            if r.is_zero() {
                vec![]
            } else {
                vec![Mono::constant(r.clone())]
            }
        }
        Ast::Var(v) if v == "k" => vec![lin_mono(&Rational::one(), &Rational::zero())],
        Ast::Var(v) if v == "p" => {
            let mut m = Mono::constant(Rational::one());
            m.p_pow = 1;
            vec![m]
        }
        Ast::Var(v) => return Err(ExprError::UnknownSymbol(v.clone())),
        Ast::Neg(a) => neg_all(expand(a, seqs)?),
        Ast::Add(a, b) => {
            let mut v = expand(a, seqs)?;
            v.extend(expand(b, seqs)?);
            v
        }
        Ast::Sub(a, b) => {
            let mut v = expand(a, seqs)?;
            v.extend(neg_all(expand(b, seqs)?));
            v
        }
        Ast::Mul(a, b) => product(&expand(a, seqs)?, &expand(b, seqs)?)?,
        Ast::Div(a, b) => {
            let d = single(expand(b, seqs)?)
                .ok_or_else(|| ExprError::Unsupported("division by a non-linear sum".into()))?;
            if d.coef.is_zero() {
                return Err(ExprError::Shape("division by zero".into()));
            }
            product(&expand(a, seqs)?, &[d.pow(-1)?])?
        }
        Ast::Pow(b, x) => return expand_pow(b, x, seqs),
        Ast::Call(f, args) => return expand_call(f, args, seqs),
    };
    // keep linear factors together so they can be divided by later
    Ok(match collapse_linear(&r) {
        Some(m) if !m.coef.is_zero() => vec![m],
        Some(_) => vec![],
        None => r,
    })
}

fn expand_pow(b: &Ast, x: &Ast, seqs: &[String]) -> Result<Vec<Mono>, ExprError> {
    if let Some(n) = x.const_i64() {
        let bs = expand(b, seqs)?;
        if let Some(m) = single(bs.clone()) {
            if m.coef.is_zero() {
                return if n > 0 { Ok(vec![]) } else { Err(ExprError::Shape("0 to a non-positive power".into())) };
            }
            return Ok(vec![m.pow(n)?]);
        }
        if n < 0 {
            return Err(ExprError::Unsupported("negative power of a sum".into()));
        }
        let mut acc = vec![Mono::constant(Rational::one())];
        for _ in 0..n {
            acc = product(&acc, &bs)?;
        }
        return Ok(acc);
    }
    let (xa, xb) = x
        .linear_in("k")
        .ok_or_else(|| ExprError::Shape("exponent must be an integer or linear in k".into()))?;
    if !xa.is_integer() || !xb.is_integer() {
        return Err(ExprError::Shape("exponent of a geometric factor must have integer coefficients".into()));
    }
    let (xa, xb) = (xa.to_integer().to_i64().unwrap(), xb.to_integer().to_i64().unwrap());
    if let Some(q) = b.const_value() {
        if q.is_zero() {
            return Err(ExprError::Shape("geometric base is zero".into()));
        }
        let mut m = Mono::constant(rpow(&q, xb));
        m.base = rpow(&q, xa);
        return Ok(vec![m]);
    }
    if xb != 0 {
        return Err(ExprError::Unsupported("irrational base with a constant exponent shift".into()));
    }
    let cf = ClosedFormExpr::from_ast(b, seqs)?;
    let cf = if xa == 1 { cf } else { ClosedFormExpr::Pow(Box::new(cf), Rational::from_integer(xa.into())) };
    let mut m = Mono::constant(Rational::one());
    m.real = Some((cf.to_string(), cf));
    Ok(vec![m])
}

fn expand_call(f: &str, args: &[Ast], seqs: &[String]) -> Result<Vec<Mono>, ExprError> {
    let arity = |lo: usize, hi: usize| {
        if args.len() < lo || args.len() > hi {
            Err(ExprError::Shape(format!("{f} takes {lo}..{hi} arguments")))
        } else {
            Ok(())
        }
    };
    let order = |i: usize| -> Result<u32, ExprError> {
        match args.get(i) {
            None => Ok(1),
            Some(a) => a
                .const_i64()
                .filter(|m| *m >= 1 && *m <= 64)
                .map(|m| m as u32)
                .ok_or_else(|| ExprError::Shape("harmonic order must be a positive integer".into())),
        }
    };
    match f {
        "C" => {
            arity(2, 2)?;
            let n = Lin::from_ast(&args[0], "binomial argument")?;
            let r = Lin::from_ast(&args[1], "binomial argument")?;
            if n.a == 0 && r.a == 0 {
                let c = binomial(n.b, r.b);
                return Ok(if c.is_zero() { vec![] } else { vec![Mono::constant(Rational::from_integer(c))] });
            }
            let mut m = Mono::constant(Rational::one());
            m.binoms.insert((n, r), 1);
            Ok(vec![m])
        }
        "H" => {
            arity(1, 2)?;
            let arg = Lin::from_ast(&args[0], "harmonic index")?;
            let ord = order(1)?;
            if arg.a == 0 {
                let h = harmonic(arg.b.max(0) as u64, ord);
                return Ok(if h.is_zero() { vec![] } else { vec![Mono::constant(h)] });
            }
            let mut m = Mono::constant(Rational::one());
            m.h = Some(HAtom { arg, order: ord });
            Ok(vec![m])
        }
        "AltH" => {
            // sum_{j<=2n} (-1)^j / j^m = 2^(1-m) H_n^(m) - H_2n^(m)
            arity(1, 2)?;
            let arg = Lin::from_ast(&args[0], "alternating harmonic index")?;
            let ord = order(1)?;
            if arg.a % 2 != 0 || arg.b % 2 != 0 {
                return Err(ExprError::Unsupported("AltH needs an even index".into()));
            }
            let half = Lin { a: arg.a / 2, b: arg.b / 2 };
            let mut m1 = Mono::constant(rpow(&Rational::from_integer(2.into()), 1 - ord as i64));
            m1.h = Some(HAtom { arg: half, order: ord });
            let mut m2 = Mono::constant(-Rational::one());
            m2.h = Some(HAtom { arg, order: ord });
            Ok(vec![m1, m2])
        }
        s if seqs.iter().any(|x| x == s) => {
            arity(1, 1)?;
            let arg = Lin::from_ast(&args[0], "sequence index")?;
            let mut m = Mono::constant(Rational::one());
            m.seqs.insert((s.to_string(), arg), 1);
            Ok(vec![m])
        }
        _ => Err(ExprError::Unsupported(format!("function '{f}' inside a summand"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct GroupKey {
    p_pow: i64,
    binoms: Vec<((Lin, Lin), i64)>,
    base: Rational,
    real: Option<String>,
    seqs: Vec<((String, Lin), i64)>,
}

fn canonicalize(monos: Vec<Mono>) -> SummandExpr {
    let mut groups: BTreeMap<GroupKey, (Option<ClosedFormExpr>, Vec<Mono>)> = BTreeMap::new();
    for m in monos {
        if m.coef.is_zero() {
            continue;
        }
        let key = GroupKey {
            p_pow: m.p_pow,
            binoms: m.binoms.iter().map(|(k, v)| (*k, *v)).collect(),
            base: m.base.clone(),
            real: m.real.as_ref().map(|r| r.0.clone()),
            seqs: m.seqs.iter().map(|(k, v)| (k.clone(), *v)).collect(),
        };
        let g = groups.entry(key).or_insert_with(|| (m.real.as_ref().map(|r| r.1.clone()), Vec::new()));
        g.1.push(m);
    }
    let mut terms = Vec::new();
    for (key, (real, ms)) in groups {
        let mut den: BTreeMap<Lin, u32> = BTreeMap::new();
        for m in &ms {
            for (l, e) in &m.lins {
                if *e < 0 {
                    let d = den.entry(*l).or_insert(0);
                    *d = (*d).max((-e) as u32);
                }
            }
        }
        let mut body: BTreeMap<Option<HAtom>, Poly> = BTreeMap::new();
        for m in &ms {
            let mut p = Poly::constant(m.coef.clone());
            for (l, e) in &m.lins {
                if *e > 0 {
                    for _ in 0..*e {
                        p = p.mul(&Poly::of_lin(*l));
                    }
                }
            }
            for (l, d) in &den {
                let have = m.lins.get(l).copied().filter(|e| *e < 0).map_or(0, |e| (-e) as u32);
                for _ in 0..(d - have) {
                    p = p.mul(&Poly::of_lin(*l));
                }
            }
            let slot = body.entry(m.h).or_default();
            *slot = slot.add(&p);
        }
        body.retain(|_, p| !p.is_zero());
        if body.is_empty() {
            continue;
        }
        for (l, d) in den.iter_mut() {
            while *d > 0 {
                let q: Option<Vec<Poly>> = body.values().map(|p| p.div_lin(*l)).collect();
                match q {
                    Some(q) => {
                        for (slot, np) in body.values_mut().zip(q) {
                            *slot = np;
                        }
                        *d -= 1;
                    }
                    None => break,
                }
            }
        }
        den.retain(|_, d| *d > 0);
        terms.push(Term {
            p_pow: key.p_pow,
            binoms: key.binoms.into_iter().map(|((n, r), e)| (n, r, e)).collect(),
            base: key.base,
            real_base: real,
            seqs: key.seqs.into_iter().map(|((s, l), e)| (s, l, e)).collect(),
            denom: den.into_iter().collect(),
            body: body.into_iter().collect(),
        });
    }
    SummandExpr { terms }
}

impl SummandExpr {
    pub fn from_ast(e: &Ast, seqs: &[String]) -> Result<SummandExpr, ExprError> {
        Ok(canonicalize(expand(e, seqs)?))
    }

    pub fn parse(s: &str, seqs: &[String]) -> Result<SummandExpr, ExprError> {
        SummandExpr::from_ast(&super::ast::parse_ast(s, seqs)?, seqs)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Harmonic atoms occurring anywhere.
    pub fn harmonic_atoms(&self) -> Vec<HAtom> {
        let mut v: Vec<HAtom> = self.terms.iter().flat_map(|t| t.body.iter().filter_map(|b| b.0)).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Sequence names referenced.
    pub fn sequences(&self) -> Vec<String> {
        let mut v: Vec<String> = self.terms.iter().flat_map(|t| t.seqs.iter().map(|s| s.0.clone())).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn mentions_p(&self) -> bool {
        self.terms.iter().any(|t| t.p_pow != 0)
    }

    /// Human-oriented rendering that keeps proportional harmonic blocks
    /// together; also valid input.
    pub fn factored(&self) -> String {
        self.to_string()
    }
}

fn body_string(body: &[(Option<HAtom>, Poly)]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut rest: Vec<(HAtom, &Poly)> = Vec::new();
    for (h, p) in body {
        match h {
            None => parts.push(p.to_string()),
            Some(h) => rest.push((*h, p)),
        }
    }
    // group atoms whose coefficient polynomials are proportional
    let mut classes: Vec<(Poly, Vec<(Rational, HAtom)>)> = Vec::new();
    for (h, p) in rest {
        let (c, prim) = p.primitive();
        match classes.iter_mut().find(|cl| cl.0 == prim) {
            Some(cl) => cl.1.push((c, h)),
            None => classes.push((prim, vec![(c, h)])),
        }
    }
    for (prim, atoms) in classes {
        if atoms.len() == 1 {
            let (c, h) = &atoms[0];
            let p = prim.scale(c);
            if p.degree() == Some(0) {
                let c = &p.0[0];
                if c.is_one() {
                    parts.push(h.to_string());
                } else if (-c).is_one() {
                    parts.push(format!("-{h}"));
                } else {
                    parts.push(format!("{}*{h}", fmt_rational(c)));
                }
            } else {
                parts.push(format!("({p})*{h}"));
            }
        } else {
            let inner: Vec<String> = atoms
                .iter()
                .map(|(c, h)| {
                    if c.is_one() {
                        h.to_string()
                    } else if (-c).is_one() {
                        format!("-{h}")
                    } else {
                        format!("{}*{h}", fmt_rational(c))
                    }
                })
                .collect();
            let inner = join_signed(&inner);
            if prim.is_monomial_one() {
                parts.push(format!("({inner})"));
            } else {
                parts.push(format!("({prim})*({inner})"));
            }
        }
    }
    join_signed(&parts)
}

fn join_signed(parts: &[String]) -> String {
    let mut s = String::new();
    for (i, p) in parts.iter().enumerate() {
        if i == 0 {
            s.push_str(p);
        } else if let Some(rest) = p.strip_prefix('-') {
            s.push_str(" - ");
            s.push_str(rest);
        } else {
            s.push_str(" + ");
            s.push_str(p);
        }
    }
    s
}

fn simple_token(s: &str) -> bool {
    s.chars().all(|c| c.is_alphanumeric() || c == '_')
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut num: Vec<String> = Vec::new();
        let mut den: Vec<String> = Vec::new();
        let pw = |s: String, e: i64| if e == 1 { s } else { format!("{s}^{e}") };
        match self.p_pow {
            0 => {}
            j if j > 0 => num.push(pw("p".into(), j)),
            j => den.push(pw("p".into(), -j)),
        }
        for (n, r, e) in &self.binoms {
            let s = format!("C({n},{r})");
            if *e > 0 {
                num.push(pw(s, *e));
            } else {
                den.push(pw(s, -e));
            }
        }
        if !self.base.is_one() {
            num.push(format!("{}^k", fmt_rational_factor(&self.base)));
        }
        if let Some(r) = &self.real_base {
            num.push(format!("({r})^k"));
        }
        for (s, l, e) in &self.seqs {
            let s = format!("{s}({l})");
            if *e > 0 {
                num.push(pw(s, *e));
            } else {
                den.push(pw(s, -e));
            }
        }
        for (l, m) in &self.denom {
            let s = if l.b == 0 && l.a == 1 { "k".to_string() } else { format!("({l})") };
            den.push(pw(s, *m as i64));
        }
        let body = body_string(&self.body);
        let mut out = String::new();
        if num.is_empty() {
            if den.is_empty() || simple_token(&body) || body.parse::<i64>().is_ok() {
                out.push_str(&body);
            } else {
                out.push_str(&format!("({body})"));
            }
        } else {
            if body == "-1" {
                out.push('-');
            } else if body != "1" {
                if simple_token(&body) {
                    out.push_str(&body);
                } else {
                    out.push_str(&format!("({body})"));
                }
                out.push('*');
            }
            out.push_str(&num.join("*"));
        }
        if !den.is_empty() {
            if den.len() == 1 {
                out.push_str(&format!("/{}", den[0]));
            } else {
                out.push_str(&format!("/({})", den.join("*")));
            }
        }
        write!(f, "{out}")
    }
}

impl fmt::Display for SummandExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", join_signed(&parts))
    }
}

/// Exact value of a rational summand at `k` (and `p`, when it occurs).
pub fn eval_summand_rational(
    s: &SummandExpr,
    k: i64,
    p: Option<i64>,
    seq: &dyn Fn(&str, i64) -> Option<Rational>,
) -> Result<Rational, ExprError> {
    let kr = Rational::from_integer(k.into());
    let mut total = Rational::zero();
    for t in &s.terms {
        if t.real_base.is_some() {
            return Err(ExprError::Unsupported("irrational base in exact evaluation".into()));
        }
        let mut v = rpow(&t.base, k);
        if t.p_pow != 0 {
            let p = p.ok_or_else(|| ExprError::UnknownSymbol("p".into()))?;
            v *= rpow(&Rational::from_integer(p.into()), t.p_pow);
        }
        for (n, r, e) in &t.binoms {
            let c = binomial(n.at(k), r.at(k));
            if c.is_zero() {
                if *e < 0 {
                    return Err(ExprError::Shape(format!("binomial C({n},{r}) vanishes at k = {k}")));
                }
                v = Rational::zero();
            } else {
                v *= rpow(&Rational::from_integer(c), *e);
            }
        }
        for (name, l, e) in &t.seqs {
            let x = seq(name, l.at(k)).ok_or_else(|| ExprError::UnknownSymbol(name.clone()))?;
            v *= rpow(&x, *e);
        }
        for (l, m) in &t.denom {
            let d = l.at(k);
            if d == 0 {
                return Err(ExprError::Shape(format!("denominator {l} vanishes at k = {k}")));
            }
            v /= rpow(&Rational::from_integer(d.into()), *m as i64);
        }
        let mut b = Rational::zero();
        for (h, poly) in &t.body {
            let c = poly.eval(&kr);
            b += match h {
                None => c,
                Some(h) => c * harmonic(h.arg.at(k).max(0) as u64, h.order),
            };
        }
        total += v * b;
    }
    Ok(total)
}
