use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use super::CongruenceError;
use crate::exact::{binomial, harmonic, ModPK, ModPKError, Rational};
use crate::expr::{SummandExpr, Term};
use crate::series_engine::SeqTable;

fn lift(e: ModPKError) -> CongruenceError {
    match e {
        ModPKError::PrecisionExhausted { .. } => CongruenceError::Precision(e),
        other => CongruenceError::Arithmetic(other.to_string()),
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

/// Largest argument a factorial or harmonic table must cover for `k` in
/// `start..=end`.
fn table_extent(s: &SummandExpr, start: i64, end: i64) -> usize {
    let mut hi = 0i64;
    for t in &s.terms {
        let lins = t
            .binoms
            .iter()
            .flat_map(|(n, r, _)| [*n, *r])
            .chain(t.body.iter().filter_map(|(h, _)| h.map(|h| h.arg)));
        for l in lins {
            hi = hi.max(l.at(start)).max(l.at(end));
        }
    }
    hi.max(0) as usize
}

/// Exact summation with harmonic prefix tables.
pub struct ExactSum<'a> {
    seqs: &'a mut SeqTable,
    harm: HashMap<u32, Vec<Rational>>,
    extent: usize,
}

impl<'a> ExactSum<'a> {
    pub fn new(s: &SummandExpr, start: i64, end: i64, seqs: &'a mut SeqTable) -> Self {
        ExactSum { seqs, harm: HashMap::new(), extent: table_extent(s, start, end) }
    }

    fn h(&mut self, n: i64, m: u32) -> Rational {
        let extent = self.extent;
        let tab = self.harm.entry(m).or_insert_with(|| {
            let mut v = Vec::with_capacity(extent + 1);
            v.push(Rational::zero());
            for j in 1..=extent as u64 {
                let next = v.last().unwrap() + Rational::new(BigInt::one(), BigInt::from(j).pow(m));
                v.push(next);
            }
            v
        });
        let n = n.max(0) as usize;
        tab.get(n).cloned().unwrap_or_else(|| harmonic(n as u64, m))
    }

    fn term(&mut self, t: &Term, k: i64, p: u64) -> Result<Rational, CongruenceError> {
        let mut v = rpow(&t.base, k) * rpow(&Rational::from_integer(p.into()), t.p_pow);
        for (n, r, e) in &t.binoms {
            let c = binomial(n.at(k), r.at(k));
            if c.is_zero() {
                if *e < 0 {
                    return Err(CongruenceError::Term(format!("C({n},{r}) vanishes at k = {k}")));
                }
                return Ok(Rational::zero());
            }
            v *= rpow(&Rational::from_integer(c), *e);
        }
        for (name, l, e) in &t.seqs {
            let x = self
                .seqs
                .get(name, l.at(k))
                .ok_or_else(|| CongruenceError::Term(format!("sequence {name} undefined at {}", l.at(k))))?;
            v *= rpow(&x, *e);
        }
        for (l, m) in &t.denom {
            let d = l.at(k);
            if d == 0 {
                return Err(CongruenceError::Term(format!("denominator {l} vanishes at k = {k}")));
            }
            v /= rpow(&Rational::from_integer(d.into()), *m as i64);
        }
        let kr = Rational::from_integer(k.into());
        let mut b = Rational::zero();
        for (h, poly) in &t.body {
            let c = poly.eval(&kr);
            b += match h {
                None => c,
                Some(h) => c * self.h(h.arg.at(k), h.order),
            };
        }
        Ok(v * b)
    }

    pub fn sum(&mut self, s: &SummandExpr, start: i64, end: i64, p: u64) -> Result<Rational, CongruenceError> {
        if s.terms.iter().any(|t| t.real_base.is_some()) {
            return Err(CongruenceError::Term("irrational base in a finite sum".into()));
        }
        let mut acc = Rational::zero();
        for k in start..=end {
            for t in &s.terms {
                acc += self.term(t, k, p)?;
            }
        }
        Ok(acc)
    }
}

/// Summation in valuated modular arithmetic. Binomials come from factorial
/// valuations and unit parts, so no p-divisible quantity is ever inverted
/// as a residue.
pub struct FastSum<'a> {
    p: u64,
    e: u32,
    rel: u32,
    modulus: BigUint,
    fact_v: Vec<i64>,
    fact_u: Vec<BigUint>,
    fact_inv: Vec<BigUint>,
    harm: HashMap<u32, Vec<ModPK>>,
    seqs: &'a mut SeqTable,
}

impl<'a> FastSum<'a> {
    pub fn new(s: &SummandExpr, start: i64, end: i64, p: u64, e: u32, seqs: &'a mut SeqTable) -> Self {
        let n = table_extent(s, start, end);
        let rel = ModPK::working_digits(e);
        let modulus = BigUint::from(p).pow(rel);
        let mut fact_v = vec![0i64; n + 1];
        let mut fact_u = vec![BigUint::one(); n + 1];
        for j in 1..=n {
            let mut m = j as u64;
            let mut v = 0;
            while m.is_multiple_of(p) {
                m /= p;
                v += 1;
            }
            fact_v[j] = fact_v[j - 1] + v;
            fact_u[j] = (&fact_u[j - 1] * m) % &modulus;
        }
        let mut fact_inv = vec![BigUint::one(); n + 1];
        fact_inv[n] = inv_unit(&fact_u[n], &modulus);
        for j in (1..=n).rev() {
            let mut m = j as u64;
            while m.is_multiple_of(p) {
                m /= p;
            }
            fact_inv[j - 1] = (&fact_inv[j] * m) % &modulus;
        }
        FastSum { p, e, rel, modulus, fact_v, fact_u, fact_inv, harm: HashMap::new(), seqs }
    }

    fn binom(&self, n: i64, r: i64) -> Option<ModPK> {
        if n < 0 || r < 0 || r > n {
            return None;
        }
        let (n, r) = (n as usize, r as usize);
        let v = self.fact_v[n] - self.fact_v[r] - self.fact_v[n - r];
        if n == 2 * r && (r as u64) <= (self.p - 1) / 2 {
            debug_assert_eq!(v, 0, "central binomial below p/2 must be a unit");
        }
        let u = (&self.fact_u[n] * &self.fact_inv[r] % &self.modulus) * &self.fact_inv[n - r] % &self.modulus;
        Some(ModPK::from_parts(self.p, self.e, v, u, self.rel))
    }

    fn h(&mut self, n: i64, m: u32) -> ModPK {
        let (p, e) = (self.p, self.e);
        let extent = self.fact_v.len() - 1;
        let n = n.max(0) as usize;
        let tab = self.harm.entry(m).or_insert_with(|| {
            let mut v = Vec::with_capacity(extent + 1);
            v.push(ModPK::zero(p, e));
            for j in 1..=extent as u64 {
                let x = ModPK::from_rational(&Rational::new(BigInt::one(), BigInt::from(j).pow(m)), p, e);
                let next = v.last().unwrap().add(&x);
                v.push(next);
            }
            v
        });
        match tab.get(n) {
            Some(x) => x.clone(),
            None => ModPK::from_rational(&harmonic(n as u64, m), p, e),
        }
    }

    fn term(&mut self, t: &Term, k: i64) -> Result<ModPK, CongruenceError> {
        let (p, e) = (self.p, self.e);
        let mut v = ModPK::from_rational(&t.base, p, e).pow(k).map_err(lift)?.shift(t.p_pow);
        for (n, r, x) in &t.binoms {
            match self.binom(n.at(k), r.at(k)) {
                Some(c) => v = v.mul(&c.pow(*x).map_err(lift)?),
                None if *x < 0 => {
                    return Err(CongruenceError::Term(format!("C({n},{r}) vanishes at k = {k}")));
                }
                None => return Ok(ModPK::zero(p, e)),
            }
        }
        for (name, l, x) in &t.seqs {
            let s = self
                .seqs
                .get(name, l.at(k))
                .ok_or_else(|| CongruenceError::Term(format!("sequence {name} undefined at {}", l.at(k))))?;
            v = v.mul(&ModPK::from_rational(&s, p, e).pow(*x).map_err(lift)?);
        }
        for (l, m) in &t.denom {
            let d = l.at(k);
            if d == 0 {
                return Err(CongruenceError::Term(format!("denominator {l} vanishes at k = {k}")));
            }
            v = v.mul(&ModPK::from_i64(d, p, e).pow(-(*m as i64)).map_err(lift)?);
        }
        let kr = Rational::from_integer(k.into());
        let mut b = ModPK::zero(p, e);
        for (h, poly) in &t.body {
            let c = ModPK::from_rational(&poly.eval(&kr), p, e);
            b = b.add(&match h {
                None => c,
                Some(h) => c.mul(&self.h(h.arg.at(k), h.order)),
            });
        }
        Ok(v.mul(&b))
    }

    pub fn sum(&mut self, s: &SummandExpr, start: i64, end: i64) -> Result<ModPK, CongruenceError> {
        if s.terms.iter().any(|t| t.real_base.is_some()) {
            return Err(CongruenceError::Term("irrational base in a finite sum".into()));
        }
        let mut acc = ModPK::zero(self.p, self.e);
        for k in start..=end {
            for t in &s.terms {
                acc = acc.add(&self.term(t, k)?);
            }
        }
        Ok(acc)
    }
}

fn inv_unit(a: &BigUint, m: &BigUint) -> BigUint {
    if m.is_one() {
        return BigUint::zero();
    }
    let a = BigInt::from(a.clone());
    let m = BigInt::from(m.clone());
    let g = a.extended_gcd(&m);
    g.x.mod_floor(&m).to_biguint().expect("nonnegative")
}
