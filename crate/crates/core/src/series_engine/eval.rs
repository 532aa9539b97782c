use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::SeriesError;
use crate::constants::ConstantKernel;
use crate::exact::{binomial, harmonic, Rational};
use crate::expr::{HAtom, RecurrenceSpec, SummandExpr, Term};
use crate::realball::RealBall;

/// Exact `a_n` from a recurrence `lead(n) a_{n+1} = sum_i terms[i](n) a_{n-i}`.
pub fn recurrence_sequence(spec: &RecurrenceSpec, n: usize) -> Rational {
    let mut t = SeqTable::new(std::slice::from_ref(spec));
    t.get(&spec.name, n as i64).expect("recurrence defined")
}

/// Lazily extended values of registered recurrence sequences.
#[derive(Debug, Clone, Default)]
pub struct SeqTable {
    specs: Vec<RecurrenceSpec>,
    values: BTreeMap<String, Vec<Rational>>,
}

impl SeqTable {
    pub fn new(specs: &[RecurrenceSpec]) -> Self {
        SeqTable { specs: specs.to_vec(), values: BTreeMap::new() }
    }

    pub fn get(&mut self, name: &str, n: i64) -> Option<Rational> {
        if n < 0 {
            return None;
        }
        let spec = self.specs.iter().find(|s| s.name == name)?;
        let vals = self.values.entry(name.to_string()).or_insert_with(|| spec.initial.clone());
        while vals.len() <= n as usize {
            let m = vals.len() as i64 - 1;
            let mr = Rational::from_integer(m.into());
            let mut acc = Rational::zero();
            for (i, p) in spec.terms.iter().enumerate() {
                let j = m - i as i64;
                if j >= 0 {
                    acc += p.eval(&mr) * &vals[j as usize];
                }
            }
            let lead = spec.lead.eval(&mr);
            if lead.is_zero() {
                return None;
            }
            vals.push(acc / lead);
        }
        Some(vals[n as usize].clone())
    }
}

/// `x! / y!` for `x, y >= 0`.
fn fact_ratio(x: i64, y: i64) -> Rational {
    let mut acc = num_bigint::BigInt::one();
    for j in (x.min(y) + 1)..=x.max(y) {
        acc *= j;
    }
    if x >= y {
        Rational::from_integer(acc)
    } else {
        Rational::new(1.into(), acc)
    }
}

fn binom_nonzero(n: i64, r: i64) -> bool {
    n >= 0 && r >= 0 && r <= n
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

struct TermState {
    term: Term,
    real_base: Option<RealBall>,
    /// `prod C^e * base^k * real_base^k`, `None` while a binomial vanishes.
    hyp: Option<RealBall>,
}

impl TermState {
    fn exact_hyp(&self, k: i64, prec: u32) -> Result<Option<RealBall>, SeriesError> {
        let mut v = rpow(&self.term.base, k);
        for (n, r, e) in &self.term.binoms {
            let c = binomial(n.at(k), r.at(k));
            if c.is_zero() {
                if *e < 0 {
                    return Err(SeriesError::Malformed(format!("C({n},{r}) vanishes in a denominator at k = {k}")));
                }
                return Ok(None);
            }
            v *= rpow(&Rational::from_integer(c), *e);
        }
        let mut b = RealBall::from_rational(&v, prec);
        if let Some(rb) = &self.real_base {
            b = b.mul(&rb.pow_i64(k)?);
        }
        Ok(Some(b))
    }

    /// Move `hyp` from `k` to `k + 1`.
    fn advance(&mut self, k: i64, prec: u32) -> Result<(), SeriesError> {
        let smooth = self.hyp.is_some()
            && self
                .term
                .binoms
                .iter()
                .all(|(n, r, _)| binom_nonzero(n.at(k), r.at(k)) && binom_nonzero(n.at(k + 1), r.at(k + 1)));
        if !smooth {
            self.hyp = self.exact_hyp(k + 1, prec)?;
            return Ok(());
        }
        let mut q = self.term.base.clone();
        for (n, r, e) in &self.term.binoms {
            let (n0, r0, n1, r1) = (n.at(k), r.at(k), n.at(k + 1), r.at(k + 1));
            let ratio = fact_ratio(n1, n0) * fact_ratio(r0, r1) * fact_ratio(n0 - r0, n1 - r1);
            q *= rpow(&ratio, *e);
        }
        let mut h = self.hyp.take().expect("smooth").mul(&RealBall::from_rational(&q, prec));
        if let Some(rb) = &self.real_base {
            h = h.mul(rb);
        }
        self.hyp = Some(h);
        Ok(())
    }
}

struct HState {
    atom: HAtom,
    n: i64,
    value: RealBall,
}

impl HState {
    fn new(atom: HAtom, k: i64, prec: u32) -> Self {
        let n = atom.arg.at(k).max(0);
        let value = RealBall::from_rational(&harmonic(n as u64, atom.order), prec);
        HState { atom, n, value }
    }

    fn recip_pow(j: i64, m: u32, prec: u32) -> RealBall {
        let d = num_bigint::BigInt::from(j).pow(m);
        RealBall::from_rational(&Rational::new(1.into(), d), prec)
    }

    fn move_to(&mut self, k: i64, prec: u32) {
        let target = self.atom.arg.at(k).max(0);
        while self.n < target {
            self.n += 1;
            self.value = self.value.add(&Self::recip_pow(self.n, self.atom.order, prec));
        }
        while self.n > target {
            self.value = self.value.sub(&Self::recip_pow(self.n, self.atom.order, prec));
            self.n -= 1;
        }
    }
}

/// Term-by-term evaluator with O(1) updates of binomial products and
/// harmonic numbers between consecutive indices.
pub struct Evaluator {
    k: i64,
    prec: u32,
    terms: Vec<TermState>,
    harm: Vec<HState>,
    seqs: SeqTable,
}

impl Evaluator {
    pub fn new(
        expr: &SummandExpr,
        start: i64,
        prec: u32,
        seqs: &SeqTable,
        kernel: &ConstantKernel,
    ) -> Result<Self, SeriesError> {
        let mut terms = Vec::new();
        let mut atoms: Vec<HAtom> = Vec::new();
        for t in &expr.terms {
            if t.p_pow != 0 {
                return Err(SeriesError::Malformed("summand depends on p".into()));
            }
            let real_base = match &t.real_base {
                Some(cf) => Some(super::closed_eval::eval_closed(cf, 30, prec, kernel, seqs)?),
                None => None,
            };
            for (h, _) in &t.body {
                if let Some(h) = h {
                    if !atoms.contains(h) {
                        atoms.push(*h);
                    }
                }
            }
            let mut st = TermState { term: t.clone(), real_base, hyp: None };
            st.hyp = st.exact_hyp(start, prec)?;
            terms.push(st);
        }
        let harm = atoms.into_iter().map(|a| HState::new(a, start, prec)).collect();
        Ok(Evaluator { k: start, prec, terms, harm, seqs: seqs.clone() })
    }

    pub fn index(&self) -> i64 {
        self.k
    }

    /// Enclosure of the summand at the current index.
    pub fn value(&mut self) -> Result<RealBall, SeriesError> {
        let k = self.k;
        let kr = Rational::from_integer(k.into());
        let mut total = RealBall::zero(self.prec);
        for st in &self.terms {
            let Some(hyp) = &st.hyp else { continue };
            let mut scal = Rational::one();
            for (name, l, e) in &st.term.seqs {
                let x = self
                    .seqs
                    .get(name, l.at(k))
                    .ok_or_else(|| SeriesError::Malformed(format!("sequence {name} undefined at {}", l.at(k))))?;
                if x.is_zero() && *e < 0 {
                    return Err(SeriesError::Malformed(format!("{name} vanishes in a denominator")));
                }
                scal *= rpow(&x, *e);
            }
            for (l, m) in &st.term.denom {
                let d = l.at(k);
                if d == 0 {
                    return Err(SeriesError::Malformed(format!("denominator {l} vanishes at k = {k}")));
                }
                scal /= rpow(&Rational::from_integer(d.into()), *m as i64);
            }
            let mut body = RealBall::zero(self.prec);
            let mut plain = Rational::zero();
            for (h, poly) in &st.term.body {
                let c = poly.eval(&kr);
                match h {
                    None => plain += c,
                    Some(h) => {
                        let hv = &self.harm.iter().find(|s| s.atom == *h).expect("atom").value;
                        body = body.add(&hv.mul_rational(&c));
                    }
                }
            }
            if !plain.is_zero() {
                body = body.add(&RealBall::from_rational(&plain, self.prec));
            }
            total = total.add(&hyp.mul(&body).mul_rational(&scal));
        }
        Ok(total)
    }

    pub fn advance(&mut self) -> Result<(), SeriesError> {
        let k = self.k;
        for st in &mut self.terms {
            st.advance(k, self.prec)?;
        }
        self.k += 1;
        for h in &mut self.harm {
            h.move_to(self.k, self.prec);
        }
        Ok(())
    }
}

/// Enclosure of `sum_{k=start}^{n} term(k)`.
pub fn partial_sum(
    expr: &SummandExpr,
    start: i64,
    n: i64,
    prec: u32,
    seqs: &SeqTable,
    kernel: &ConstantKernel,
) -> Result<RealBall, SeriesError> {
    if n < start {
        return Err(SeriesError::Malformed(format!("upper index {n} below start {start}")));
    }
    let mut ev = Evaluator::new(expr, start, prec, seqs, kernel)?;
    let mut acc = RealBall::zero(prec);
    loop {
        acc = acc.add(&ev.value()?);
        if ev.index() == n {
            return Ok(acc);
        }
        ev.advance()?;
    }
}
