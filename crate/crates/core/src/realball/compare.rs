use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::RealBall;
use crate::exact::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    CertifiedEqual,
    CertifiedDistinct,
    Inconclusive,
}

/// Compare two enclosures at tolerance `10^-t`.
///
/// Equal when `|mid_a - mid_b| + rad_a + rad_b < 10^-t`; distinct when the
/// balls are disjoint. Equality is tested first.
pub fn ball_compare(a: &RealBall, b: &RealBall, t: u32) -> Verdict {
    let d = (a.mid().to_rational() - b.mid().to_rational()).abs();
    let r = a.rad().to_rational() + b.rad().to_rational();
    let tol = Rational::new(BigInt::from(1), BigInt::from(10).pow(t));
    if &d + &r < tol {
        Verdict::CertifiedEqual
    } else if d > r {
        Verdict::CertifiedDistinct
    } else {
        Verdict::Inconclusive
    }
}
