use std::time::Instant;

use super::eval::SeqTable;
use super::{eval_closed, sum_to_tolerance, working_prec, SeriesError, SeriesOptions, SeriesStatus, TailMethod};
use crate::constants::ConstantKernel;
use crate::expr::{ConjectureRecord, Instance, Kind, RecurrenceSpec, Rhs};
use crate::realball::{ball_compare, Mag, RealBall, Verdict};

/// Outcome for one sample of an identity record.
#[derive(Debug, Clone)]
pub struct IdentityVerdict {
    pub id: String,
    /// Parameter assignment, empty when the record has none.
    pub sample: String,
    pub digits: u32,
    pub verdict: Verdict,
    pub lhs: Option<RealBall>,
    pub rhs: Option<RealBall>,
    /// Upper bound for `|lhs - rhs|`.
    pub bound: Option<Mag>,
    pub status: Option<SeriesStatus>,
    pub method: Option<TailMethod>,
    pub terms_used: usize,
    pub prec: u32,
    /// Why the verdict is inconclusive, when it is.
    pub diagnostic: Option<String>,
    pub elapsed_ms: u128,
}

/// Doublings of the working precision tried on an inconclusive comparison.
const MAX_DOUBLINGS: u32 = 2;

pub fn verify_identity(
    record: &ConjectureRecord,
    sequences: &[RecurrenceSpec],
    digits: u32,
    kernel: &ConstantKernel,
) -> Vec<IdentityVerdict> {
    verify_identity_with(record, sequences, digits, kernel, &SeriesOptions::default())
}

pub fn verify_identity_with(
    record: &ConjectureRecord,
    sequences: &[RecurrenceSpec],
    digits: u32,
    kernel: &ConstantKernel,
    opts: &SeriesOptions,
) -> Vec<IdentityVerdict> {
    let seqs = SeqTable::new(sequences);
    let start = record.start.at(0).unwrap_or(0);
    record
        .instances
        .iter()
        .map(|inst| {
            let t0 = Instant::now();
            let mut v = if record.kind != Kind::Identity {
                failed(record, inst, digits, "record is not an identity".into())
            } else {
                verify_instance(record, inst, start, digits, &seqs, kernel, opts)
            };
            v.elapsed_ms = t0.elapsed().as_millis();
            v
        })
        .collect()
}

fn failed(record: &ConjectureRecord, inst: &Instance, digits: u32, why: String) -> IdentityVerdict {
    IdentityVerdict {
        id: record.id.clone(),
        sample: inst.label.clone(),
        digits,
        verdict: Verdict::Inconclusive,
        lhs: None,
        rhs: None,
        bound: None,
        status: None,
        method: None,
        terms_used: 0,
        prec: 0,
        diagnostic: Some(why),
        elapsed_ms: 0,
    }
}

fn verify_instance(
    record: &ConjectureRecord,
    inst: &Instance,
    start: i64,
    digits: u32,
    seqs: &SeqTable,
    kernel: &ConstantKernel,
    opts: &SeriesOptions,
) -> IdentityVerdict {
    let Rhs::Closed(rhs_expr) = &inst.rhs else {
        return failed(record, inst, digits, "right-hand side is not a closed form".into());
    };
    let mut prec = opts.prec.unwrap_or_else(|| working_prec(digits));
    let mut last = None;
    for _ in 0..=MAX_DOUBLINGS {
        let o = SeriesOptions { prec: Some(prec), ..opts.clone() };
        let attempt = (|| -> Result<_, SeriesError> {
            let lhs = sum_to_tolerance(&inst.summand, start, digits, seqs, kernel, &o)?;
            let rhs = eval_closed(rhs_expr, digits, prec, kernel, seqs)?;
            Ok((lhs, rhs))
        })();
        let (lhs, rhs) = match attempt {
            Ok(x) => x,
            Err(e) => return failed(record, inst, digits, e.to_string()),
        };
        let bound = lhs.value.sub(&rhs).mag_upper();
        let mut v = IdentityVerdict {
            id: record.id.clone(),
            sample: inst.label.clone(),
            digits,
            verdict: Verdict::Inconclusive,
            lhs: Some(lhs.value.clone()),
            rhs: Some(rhs.clone()),
            bound: Some(bound),
            status: Some(lhs.status),
            method: Some(lhs.method),
            terms_used: lhs.terms_used,
            prec,
            diagnostic: None,
            elapsed_ms: 0,
        };
        if lhs.status == SeriesStatus::TailCapHit {
            v.diagnostic = Some(format!("tail not certified after {} terms", lhs.terms_used));
            return v;
        }
        v.verdict = ball_compare(&lhs.value, &rhs, digits);
        if v.verdict != Verdict::Inconclusive {
            return v;
        }
        v.diagnostic = Some(format!("enclosures overlap at {prec} bits"));
        last = Some(v);
        prec *= 2;
    }
    last.expect("at least one attempt")
}
