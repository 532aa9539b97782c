//! Closed-form candidates for series values by integer-relation search.
//!
//! A series value `v` and basis constants `b_1..b_n` are fed to PSLQ. A
//! relation `c_0 v + sum c_i b_i = 0` with `c_0 != 0` yields the candidate
//! `v = -sum (c_i / c_0) b_i`. The margin is the number of digits used minus
//! the digits the coefficients themselves could absorb, `sum log10 |c_i|`;
//! a small or negative margin means the relation is likely an accident of
//! precision. Nothing here proves anything.

mod pslq;

use std::path::Path;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use pslq::{pslq, residual, RelationResult};

use crate::constants::ConstantKernel;
use crate::exact::Rational;
use crate::expr::ast::fmt_rational_factor;
use crate::expr::{ClosedFormExpr, ExprError, RecurrenceSpec, SummandExpr};
use crate::series_engine::{eval_closed, sum_to_tolerance, working_prec, SeqTable, SeriesError, SeriesOptions, SeriesStatus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscoverError {
    #[error("need at least two values")]
    TooFewValues,
    #[error("value {index} is not known to {digits} digits")]
    InsufficientPrecision { index: usize, digits: u32 },
    #[error("empty basis")]
    EmptyBasis,
    #[error("series did not converge")]
    Divergent,
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("config: {0}")]
    Config(String),
}

/// Default coefficient height bound.
pub fn default_max_height() -> BigInt {
    BigInt::from(100_000_000u64)
}

pub const DEFAULT_DIGITS: u32 = 60;

#[derive(Debug, Clone, Serialize)]
pub struct Discovery {
    /// Always `"candidate"`: a relation found numerically, not a proof.
    pub status: &'static str,
    pub digits: u32,
    pub basis: Vec<String>,
    pub relation: RelationResult,
    /// `value = candidate`, present when the relation involves the value.
    pub candidate: Option<String>,
    /// Digits of agreement beyond what the coefficient sizes explain.
    pub margin: Option<f64>,
    /// Decimal value of the series.
    pub value: String,
}

/// `sum log10 max(1, |c_i|)`.
pub fn explained_digits(c: &[BigInt]) -> f64 {
    c.iter()
        .filter(|x| !x.is_zero())
        .map(|x| {
            let bits = x.bits() as f64;
            let f = x.abs().to_f64().unwrap_or(f64::INFINITY);
            if f.is_finite() { f.log10() } else { bits * std::f64::consts::LOG10_2 }
        })
        .sum()
}

/// `-sum (c_i / c_0) b_i` as a closed form.
fn candidate_expr(c: &[BigInt], basis: &[ClosedFormExpr]) -> Option<ClosedFormExpr> {
    let c0 = c.first().filter(|x| !x.is_zero())?;
    let mut parts = Vec::new();
    for (ci, b) in c[1..].iter().zip(basis) {
        if ci.is_zero() {
            continue;
        }
        let q = Rational::new(-ci.clone(), c0.clone());
        parts.push(format!("{}*({b})", fmt_rational_factor(&q)));
    }
    if parts.is_empty() {
        return Some(ClosedFormExpr::zero());
    }
    ClosedFormExpr::parse(&parts.join("+"), &[]).ok()
}

/// Search for `value` in the span of `basis` at `digits` digits.
pub fn discover_value(
    value: &crate::realball::RealBall,
    basis: &[ClosedFormExpr],
    digits: u32,
    max_height: &BigInt,
    kernel: &ConstantKernel,
    seqs: &SeqTable,
) -> Result<Discovery, DiscoverError> {
    if basis.is_empty() {
        return Err(DiscoverError::EmptyBasis);
    }
    let prec = working_prec(digits + 20);
    let mut vals = vec![value.clone()];
    for b in basis {
        vals.push(eval_closed(b, digits + 20, prec, kernel, seqs)?);
    }
    let relation = pslq(&vals, max_height, digits)?;
    let (candidate, margin) = match &relation.coefficients {
        Some(c) if !c[0].is_zero() => {
            let e = candidate_expr(c, basis);
            (e.map(|e| e.to_string()), Some(digits as f64 - explained_digits(c)))
        }
        _ => (None, None),
    };
    Ok(Discovery {
        status: "candidate",
        digits,
        basis: basis.iter().map(|b| b.to_string()).collect(),
        relation,
        candidate,
        margin,
        value: value.to_decimal(digits as usize),
    })
}

/// Evaluate `sum_{k >= start} summand` and search it against `basis`.
pub fn discover_closed_form(
    summand: &SummandExpr,
    start: i64,
    basis: &[ClosedFormExpr],
    digits: u32,
    max_height: &BigInt,
    kernel: &ConstantKernel,
    sequences: &[RecurrenceSpec],
) -> Result<Discovery, DiscoverError> {
    if basis.is_empty() {
        return Err(DiscoverError::EmptyBasis);
    }
    let seqs = SeqTable::new(sequences);
    let opts = SeriesOptions { prec: Some(working_prec(digits + 20)), ..SeriesOptions::default() };
    let enc = sum_to_tolerance(summand, start, digits + 15, &seqs, kernel, &opts)?;
    if enc.status != SeriesStatus::Converged {
        return Err(DiscoverError::Divergent);
    }
    discover_value(&enc.value, basis, digits, max_height, kernel, &seqs)
}

/// Try several bases independently, in parallel, keeping input order.
pub fn discover_bases(
    summand: &SummandExpr,
    start: i64,
    bases: &[Vec<ClosedFormExpr>],
    digits: u32,
    max_height: &BigInt,
    kernel: &ConstantKernel,
    sequences: &[RecurrenceSpec],
) -> Vec<Result<Discovery, DiscoverError>> {
    bases
        .par_iter()
        .map(|b| discover_closed_form(summand, start, b, digits, max_height, kernel, sequences))
        .collect()
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct DiscoverTarget {
    pub id: String,
    #[serde(default)]
    pub label: Option<String>,
    pub start: i64,
    pub summand: String,
}

/// Menu of basis constants and the series to search.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct DiscoverConfig {
    #[serde(default = "default_digits")]
    pub digits: u32,
    #[serde(default = "default_height_str")]
    pub max_height: String,
    pub menu: Vec<String>,
    #[serde(default, rename = "target")]
    pub targets: Vec<DiscoverTarget>,
}

fn default_digits() -> u32 {
    DEFAULT_DIGITS
}

fn default_height_str() -> String {
    default_max_height().to_string()
}

impl DiscoverConfig {
    pub fn parse(text: &str) -> Result<Self, DiscoverError> {
        let c: DiscoverConfig = toml::from_str(text).map_err(|e| DiscoverError::Config(e.to_string()))?;
        c.max_height()?;
        c.basis()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DiscoverError> {
        let text = std::fs::read_to_string(path).map_err(|e| DiscoverError::Config(e.to_string()))?;
        Self::parse(&text)
    }

    pub fn max_height(&self) -> Result<BigInt, DiscoverError> {
        self.max_height.parse().map_err(|_| DiscoverError::Config(format!("bad max_height '{}'", self.max_height)))
    }

    pub fn basis(&self) -> Result<Vec<ClosedFormExpr>, DiscoverError> {
        Ok(self.menu.iter().map(|s| ClosedFormExpr::parse(s, &[])).collect::<Result<_, _>>()?)
    }
}

const SHIPPED: &str = include_str!("../../data/discover.toml");

pub fn shipped_discover_config() -> DiscoverConfig {
    DiscoverConfig::parse(SHIPPED).expect("shipped discovery config parses")
}
