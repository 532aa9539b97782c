//! Certified evaluation of infinite series and identity verdicts.
//!
//! Terms are produced incrementally in ball arithmetic. Summation stops once
//! the ratio `|t_{k+1}/t_k|` has stayed below `rho = 1.05 * max` over a
//! window of consecutive indices with `rho < 0.95`; the tail is then bounded
//! by `|t_N| rho / (1 - rho)` and folded into the radius.
//!
//! Alternating series whose ratio tends to `-1` never pass that test. For
//! them the tail from some index `N0` on is rewritten by Euler's transform
//! `sum_j t_{N0+j} = sum_n 2^-(n+1) sum_i C(n,i) t_{N0+i}`, whose terms decay
//! like `2^-n`, and the same window rule bounds the transformed tail.

mod closed_eval;
mod eval;
mod verify;

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

pub use closed_eval::eval_closed;
pub use eval::{partial_sum, recurrence_sequence, Evaluator, SeqTable};
pub use verify::{verify_identity, verify_identity_with, IdentityVerdict};

use crate::constants::{ConstError, ConstantKernel};
use crate::expr::SummandExpr;
use crate::realball::{BallError, Mag, RealBall};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("malformed term: {0}")]
    Malformed(String),
    #[error(transparent)]
    Ball(#[from] BallError),
    #[error(transparent)]
    Constant(#[from] ConstError),
    #[error("inner sum did not converge: {0}")]
    InnerSum(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeriesStatus {
    Converged,
    TailCapHit,
}

/// How the tail was handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailMethod {
    Ratio,
    /// Euler transform applied from this index on.
    Euler { from: i64 },
}

#[derive(Debug, Clone)]
pub struct SeriesEnclosure {
    /// Radius already includes `tail_bound`.
    pub value: RealBall,
    pub terms_used: usize,
    pub tail_bound: Mag,
    pub status: SeriesStatus,
    pub method: TailMethod,
}

#[derive(Debug, Clone)]
pub struct SeriesOptions {
    pub window: usize,
    pub safety: f64,
    pub cutoff: f64,
    pub n_max: usize,
    /// Cap on transformed terms once the Euler tail is in use.
    pub euler_max: usize,
    /// Working precision; default `ceil(3.33 * digits) + 64` bits.
    pub prec: Option<u32>,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { window: 20, safety: 1.05, cutoff: 0.95, n_max: 1_000_000, euler_max: 20_000, prec: None }
    }
}

pub fn working_prec(digits: u32) -> u32 {
    (3.33 * digits as f64).ceil() as u32 + 64
}

/// Ratio window over `log2 |t|`. Zero terms reset it.
struct RatioWindow {
    w: usize,
    prev: Option<(f64, i8)>,
    logs: VecDeque<f64>,
    alternating: usize,
}

impl RatioWindow {
    fn new(w: usize) -> Self {
        RatioWindow { w, prev: None, logs: VecDeque::new(), alternating: 0 }
    }

    fn push(&mut self, t: &RealBall) {
        let sign = if t.is_positive() {
            1
        } else if t.is_negative() {
            -1
        } else {
            0
        };
        let l = t.mag_upper().log2();
        if sign == 0 || !l.is_finite() {
            self.prev = None;
            self.logs.clear();
            self.alternating = 0;
            return;
        }
        if let Some((pl, ps)) = self.prev {
            self.logs.push_back(l - pl);
            if self.logs.len() > self.w {
                self.logs.pop_front();
            }
            self.alternating = if ps == -sign { self.alternating + 1 } else { 0 };
        }
        self.prev = Some((l, sign));
    }

    fn full(&self) -> bool {
        self.logs.len() == self.w
    }

    fn max_ratio(&self) -> f64 {
        self.logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max).exp2()
    }

    fn min_ratio(&self) -> f64 {
        self.logs.iter().cloned().fold(f64::INFINITY, f64::min).exp2()
    }
}

/// Upper bound for `|t| rho / (1 - rho)`.
fn geometric_tail(t: &RealBall, rho: f64) -> Mag {
    let f = Mag::from_rational_up(&crate::exact::Rational::from_float(rho / (1.0 - rho) * (1.0 + 1e-12)).expect("finite"));
    t.mag_upper().mul(&f)
}

fn tolerance(digits: u32) -> f64 {
    -(digits as f64 + 3.0) / std::f64::consts::LOG10_2
}

/// Sum `sum_{k >= start} expr(k)` to about `digits` correct digits.
pub fn sum_to_tolerance(
    expr: &SummandExpr,
    start: i64,
    digits: u32,
    seqs: &SeqTable,
    kernel: &ConstantKernel,
    opts: &SeriesOptions,
) -> Result<SeriesEnclosure, SeriesError> {
    let prec = opts.prec.unwrap_or_else(|| working_prec(digits));
    let tol = tolerance(digits);
    let mut ev = Evaluator::new(expr, start, prec, seqs, kernel)?;
    let mut acc = RealBall::zero(prec);
    let mut win = RatioWindow::new(opts.window);
    let mut used = 0usize;
    loop {
        let t = ev.value()?;
        acc = acc.add(&t);
        used += 1;
        win.push(&t);
        if win.full() {
            let rho = opts.safety * win.max_ratio();
            if rho < opts.cutoff {
                let tail = geometric_tail(&t, rho);
                if tail.log2() < tol || t.mag_upper().is_zero() {
                    return Ok(SeriesEnclosure {
                        value: acc.add_error(&tail),
                        terms_used: used,
                        tail_bound: tail,
                        status: SeriesStatus::Converged,
                        method: TailMethod::Ratio,
                    });
                }
            } else if used >= 4 * opts.window
                && win.alternating >= opts.window
                && win.max_ratio() < 1.0
                && win.min_ratio() > 0.9
            {
                ev.advance()?;
                return euler_tail(ev, acc, used, tol, opts);
            }
        }
        if used >= opts.n_max {
            return Ok(SeriesEnclosure {
                value: acc,
                terms_used: used,
                tail_bound: Mag::zero(),
                status: SeriesStatus::TailCapHit,
                method: TailMethod::Ratio,
            });
        }
        ev.advance()?;
    }
}

fn euler_tail(
    mut ev: Evaluator,
    head: RealBall,
    mut used: usize,
    tol: f64,
    opts: &SeriesOptions,
) -> Result<SeriesEnclosure, SeriesError> {
    let from = ev.index();
    // diag[j] holds the j-th repeated average ending at the newest term
    let mut diag: Vec<RealBall> = Vec::new();
    let mut acc = head;
    let mut win = RatioWindow::new(opts.window);
    for _ in 0..opts.euler_max {
        let mut carry = ev.value()?;
        used += 1;
        for d in diag.iter_mut() {
            let old = std::mem::replace(d, carry.clone());
            carry = old.add(&carry).mul_pow2(-1);
        }
        diag.push(carry.clone());
        let u = carry.mul_pow2(-1);
        acc = acc.add(&u);
        win.push(&u);
        if win.full() {
            let rho = opts.safety * win.max_ratio();
            if rho < opts.cutoff {
                let tail = geometric_tail(&u, rho);
                if tail.log2() < tol {
                    return Ok(SeriesEnclosure {
                        value: acc.add_error(&tail),
                        terms_used: used,
                        tail_bound: tail,
                        status: SeriesStatus::Converged,
                        method: TailMethod::Euler { from },
                    });
                }
            }
        }
        ev.advance()?;
    }
    Ok(SeriesEnclosure {
        value: acc,
        terms_used: used,
        tail_bound: Mag::zero(),
        status: SeriesStatus::TailCapHit,
        method: TailMethod::Euler { from },
    })
}
