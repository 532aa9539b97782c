//! Finite sums modulo prime powers and per-prime congruence verdicts.
//!
//! Two strategies evaluate the left-hand side. `ExactRational` sums big
//! rationals and reduces once. `ModPKFast` stays in valuated modular
//! arithmetic throughout, taking binomials from factorial valuations and unit
//! parts; when its precision runs out it retries with more digits and then
//! falls back to the exact path.

mod fast;
mod rhs;

use std::time::Instant;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use rhs::{atom_exact, atom_mod, eval_congruence_rhs, eval_congruence_rhs_exact};

use crate::exact::{p_valuation, primes_between, ModPK, ModPKError, Rational};
use crate::expr::{ConjectureRecord, Instance, Kind, Limit, RecurrenceSpec, Rhs, SummandExpr};
use crate::series_engine::SeqTable;
use fast::{ExactSum, FastSum};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CongruenceError {
    #[error("record is not a congruence")]
    NotCongruence,
    #[error("atom undefined: {0}")]
    Atom(String),
    #[error("term undefined: {0}")]
    Term(String),
    #[error("bound {0} is not an integer at p = {1}")]
    Bound(String, u64),
    #[error(transparent)]
    Precision(ModPKError),
    #[error("arithmetic: {0}")]
    Arithmetic(String),
}

/// Which evaluation strategy to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Exact,
    Fast,
    /// Run both and record whether they agree.
    Both,
    /// Exact up to [`AUTO_EXACT_MAX`], fast above.
    Auto,
}

/// Largest prime handled exactly under [`Strategy::Auto`].
pub const AUTO_EXACT_MAX: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StrategyUsed {
    ExactRational,
    ModPKFast,
}

/// Extra digits granted to the fast path before it gives up.
const RETRY_DIGITS: u32 = 8;

/// Whether `x ≡ 0 (mod p^e)`, or `None` when `x` is not known that far.
pub fn divisible(x: &ModPK, e: u32) -> Option<bool> {
    if x.is_exact_zero() {
        return Some(true);
    }
    match x.valuation() {
        Some(v) => Some(v >= e as i64),
        None => (x.absolute_precision()? >= e as i64).then_some(true),
    }
}

fn fast_sum(
    s: &SummandExpr,
    start: i64,
    end: i64,
    p: u64,
    e: u32,
    seqs: &mut SeqTable,
) -> Result<ModPK, CongruenceError> {
    FastSum::new(s, start, end, p, e, seqs).sum(s, start, end)
}

/// Exact value of `sum_{k=start}^{end} s(k)` at prime `p`.
pub fn finite_sum_exact(
    s: &SummandExpr,
    start: i64,
    end: i64,
    p: u64,
    seqs: &mut SeqTable,
) -> Result<Rational, CongruenceError> {
    ExactSum::new(s, start, end, seqs).sum(s, start, end, p)
}

/// `sum_{k=start}^{end} s(k)` modulo `p^e`. Under the fast strategy the
/// result is guaranteed to be known modulo `p^e`; otherwise the exact path
/// takes over.
pub fn finite_sum_mod(
    s: &SummandExpr,
    start: i64,
    end: i64,
    p: u64,
    e: u32,
    strategy: Strategy,
    seqs: &mut SeqTable,
) -> Result<(ModPK, StrategyUsed), CongruenceError> {
    let use_fast = match strategy {
        Strategy::Fast => true,
        Strategy::Auto => p > AUTO_EXACT_MAX,
        Strategy::Exact | Strategy::Both => false,
    };
    if use_fast {
        for extra in [0, RETRY_DIGITS] {
            match fast_sum(s, start, end, p, e + extra, seqs) {
                Ok(x) if x.absolute_precision().is_none_or(|a| a >= e as i64) => {
                    return Ok((x, StrategyUsed::ModPKFast));
                }
                Ok(_) | Err(CongruenceError::Precision(_)) => continue,
                Err(err) => return Err(err),
            }
        }
    }
    let r = finite_sum_exact(s, start, end, p, seqs)?;
    Ok((ModPK::from_rational(&r, p, e), StrategyUsed::ExactRational))
}

#[derive(Debug, Clone, Serialize)]
pub struct CongruenceVerdict {
    pub id: String,
    pub sample: String,
    pub prime: u64,
    pub modexp: u32,
    pub holds: bool,
    /// Set when an atom or term is undefined at this prime; `holds` is then
    /// meaningless.
    pub skipped: Option<String>,
    pub lhs: Option<ModPK>,
    pub rhs: Option<ModPK>,
    pub strategy: StrategyUsed,
    /// `v_p(lhs - rhs)`; `None` when the difference vanishes to the
    /// precision carried.
    pub diff_valuation: Option<i64>,
    /// Under [`Strategy::Both`], whether the two left-hand sides agree
    /// modulo `p^e`.
    pub agree: Option<bool>,
    pub elapsed_ms: u128,
}

impl CongruenceVerdict {
    pub fn failed(&self) -> bool {
        self.skipped.is_none() && !self.holds
    }
}

fn bounds(record: &ConjectureRecord, p: u64) -> Result<(i64, i64), CongruenceError> {
    let start = record.start.at(p).ok_or_else(|| CongruenceError::Bound(record.start.to_string(), p))?;
    let end = match record.limit {
        Limit::Finite(b) => b.at(p).ok_or_else(|| CongruenceError::Bound(b.to_string(), p))?,
        Limit::Infinite => return Err(CongruenceError::Bound("inf".into(), p)),
    };
    Ok((start, end))
}

fn verdict_at(
    record: &ConjectureRecord,
    inst: &Instance,
    p: u64,
    strategy: Strategy,
    sequences: &[RecurrenceSpec],
) -> CongruenceVerdict {
    let t0 = Instant::now();
    let e = record.modexp.unwrap_or(1);
    let mut v = CongruenceVerdict {
        id: record.id.clone(),
        sample: inst.label.clone(),
        prime: p,
        modexp: e,
        holds: false,
        skipped: None,
        lhs: None,
        rhs: None,
        strategy: StrategyUsed::ExactRational,
        diff_valuation: None,
        agree: None,
        elapsed_ms: 0,
    };
    if let Err(err) = fill(&mut v, record, inst, p, e, strategy, sequences) {
        v.skipped = Some(err.to_string());
    }
    v.elapsed_ms = t0.elapsed().as_millis();
    v
}

fn fill(
    v: &mut CongruenceVerdict,
    record: &ConjectureRecord,
    inst: &Instance,
    p: u64,
    e: u32,
    strategy: Strategy,
    sequences: &[RecurrenceSpec],
) -> Result<(), CongruenceError> {
    let Rhs::Congruence(rhs) = &inst.rhs else {
        return Err(CongruenceError::NotCongruence);
    };
    let (start, end) = bounds(record, p)?;
    let mut seqs = SeqTable::new(sequences);
    let exact_first = match strategy {
        Strategy::Exact | Strategy::Both => true,
        Strategy::Fast => false,
        Strategy::Auto => p <= AUTO_EXACT_MAX,
    };
    if exact_first {
        let l = finite_sum_exact(&inst.summand, start, end, p, &mut seqs)?;
        let r = eval_congruence_rhs_exact(rhs, p)?;
        let d = &l - &r;
        v.diff_valuation = (!d.is_zero()).then(|| p_valuation(d.numer(), p) as i64 - p_valuation(d.denom(), p) as i64);
        v.holds = v.diff_valuation.is_none_or(|x| x >= e as i64);
        v.lhs = Some(ModPK::from_rational(&l, p, e));
        v.rhs = Some(ModPK::from_rational(&r, p, e));
        v.strategy = StrategyUsed::ExactRational;
        if strategy == Strategy::Both {
            let (f, _) = finite_sum_mod(&inst.summand, start, end, p, e, Strategy::Fast, &mut seqs)?;
            let exact = ModPK::from_rational(&l, p, e + RETRY_DIGITS);
            v.agree = divisible(&f.sub(&exact), e);
        }
        return Ok(());
    }
    let (l, used) = finite_sum_mod(&inst.summand, start, end, p, e, Strategy::Fast, &mut seqs)?;
    let r = eval_congruence_rhs(rhs, p, e)?;
    let d = l.sub(&r);
    v.holds = match divisible(&d, e) {
        Some(h) => h,
        None => {
            // too much cancellation for the fast path: settle it exactly
            let l = finite_sum_exact(&inst.summand, start, end, p, &mut seqs)?;
            let r = eval_congruence_rhs_exact(rhs, p)?;
            let d = l - r;
            v.diff_valuation = (!d.is_zero()).then(|| p_valuation(d.numer(), p) as i64 - p_valuation(d.denom(), p) as i64);
            v.diff_valuation.is_none_or(|x| x >= e as i64)
        }
    };
    if v.diff_valuation.is_none() {
        v.diff_valuation = d.valuation();
    }
    v.lhs = Some(l);
    v.rhs = Some(r);
    v.strategy = used;
    Ok(())
}

/// Check a congruence record at every admissible prime in `[lo, hi]`, one
/// verdict per (prime, sample), ordered by prime and then sample.
pub fn verify_congruence(
    record: &ConjectureRecord,
    sequences: &[RecurrenceSpec],
    lo: u64,
    hi: u64,
    strategy: Strategy,
) -> Result<Vec<CongruenceVerdict>, CongruenceError> {
    if record.kind != Kind::Congruence {
        return Err(CongruenceError::NotCongruence);
    }
    let primes = primes_between(lo, hi);
    let mut work: Vec<(u64, usize)> = Vec::new();
    for &p in &primes {
        for (i, inst) in record.instances.iter().enumerate() {
            if inst.filter.admits(p) {
                work.push((p, i));
            }
        }
    }
    Ok(work
        .par_iter()
        .map(|&(p, i)| verdict_at(record, &record.instances[i], p, strategy, sequences))
        .collect())
}
