use num_traits::ToPrimitive;

use super::eval::SeqTable;
use super::{sum_to_tolerance, SeriesError, SeriesOptions, SeriesStatus};
use crate::constants::ConstantKernel;
use crate::expr::ClosedFormExpr;
use crate::realball::RealBall;

/// Enclosure of a closed form at `prec` bits. Inner sums are evaluated to
/// `digits + 6` digits; one that hits the term cap is an error.
pub fn eval_closed(
    cf: &ClosedFormExpr,
    digits: u32,
    prec: u32,
    kernel: &ConstantKernel,
    seqs: &SeqTable,
) -> Result<RealBall, SeriesError> {
    let rec = |x: &ClosedFormExpr| eval_closed(x, digits, prec, kernel, seqs);
    Ok(match cf {
        ClosedFormExpr::Num(q) => RealBall::from_rational(q, prec),
        ClosedFormExpr::Const(k) => kernel.get(k, prec)?,
        ClosedFormExpr::Add(v) => {
            let mut acc = RealBall::zero(prec);
            for x in v {
                acc = acc.add(&rec(x)?);
            }
            acc
        }
        ClosedFormExpr::Mul(v) => {
            let mut acc = RealBall::from_i64(1, prec);
            for x in v {
                acc = acc.mul(&rec(x)?);
            }
            acc
        }
        ClosedFormExpr::Neg(a) => rec(a)?.neg(),
        ClosedFormExpr::Div(a, b) => rec(a)?.div(&rec(b)?)?,
        ClosedFormExpr::Pow(a, q) => {
            let base = rec(a)?;
            match q.is_integer().then(|| q.to_integer().to_i64()).flatten() {
                Some(n) => base.pow_i64(n)?,
                None => base.pow_rational(q)?,
            }
        }
        ClosedFormExpr::Log(a) => rec(a)?.log()?,
        ClosedFormExpr::Sqrt(a) => rec(a)?.sqrt()?,
        ClosedFormExpr::Sum(s, start) => {
            let opts = SeriesOptions { prec: Some(prec), ..SeriesOptions::default() };
            let enc = sum_to_tolerance(s, *start, digits + 6, seqs, kernel, &opts)?;
            if enc.status != SeriesStatus::Converged {
                return Err(SeriesError::InnerSum(s.to_string()));
            }
            enc.value
        }
    })
}
