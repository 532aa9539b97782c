use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use super::Rational;

/// Extra p-adic digits carried beyond the target exponent.
pub const GUARD_DIGITS: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModPKError {
    #[error("precision exhausted: value known modulo p^{known}, p^{needed} required")]
    PrecisionExhausted { known: i64, needed: i64 },
    #[error("division by a value that is zero modulo p^{0}")]
    DivisionByZero(i64),
    #[error("division by exact zero")]
    DivisionByExactZero,
    #[error("mismatched moduli")]
    Mismatch,
}

#[derive(Debug, Clone)]
enum Val {
    /// Zero: exactly (`None`) or known only modulo `p^n`.
    Zero(Option<i64>),
    /// `p^v * u` with `u` a unit known modulo `p^rel`.
    Unit { v: i64, u: BigUint, rel: u32 },
}

/// A p-adic number truncated to finite precision.
///
/// Values carry their own absolute precision, so cancellation in sums is
/// tracked instead of silently producing garbage digits. The nominal target
/// is `p^e`; fresh values are created with `e + GUARD_DIGITS` digits.
#[derive(Debug, Clone)]
pub struct ModPK {
    p: u64,
    e: u32,
    val: Val,
}

fn pow_p(p: u64, n: u32) -> BigUint {
    BigUint::from(p).pow(n)
}

/// Split `n != 0` as `p^v * m` with `p ∤ m`.
fn split(n: &BigUint, p: u64) -> (i64, BigUint) {
    let pb = BigUint::from(p);
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return (v, m);
        }
        m = q;
        v += 1;
    }
}

fn inv_mod(a: &BigUint, m: &BigUint) -> BigUint {
    if m.is_one() {
        return BigUint::zero();
    }
    let a = BigInt::from(a.clone());
    let m = BigInt::from(m.clone());
    let g = a.extended_gcd(&m);
    debug_assert!(g.gcd.is_one());
    g.x.mod_floor(&m).to_biguint().unwrap()
}

impl ModPK {
    pub fn working_digits(e: u32) -> u32 {
        e + GUARD_DIGITS
    }

    pub fn zero(p: u64, e: u32) -> Self {
        ModPK { p, e, val: Val::Zero(None) }
    }

    pub fn one(p: u64, e: u32) -> Self {
        Self::from_int(&BigInt::one(), p, e)
    }

    pub fn from_int(n: &BigInt, p: u64, e: u32) -> Self {
        Self::from_rational(&Rational::from_integer(n.clone()), p, e)
    }

    pub fn from_i64(n: i64, p: u64, e: u32) -> Self {
        Self::from_int(&BigInt::from(n), p, e)
    }

    /// Exact reduction of a rational number.
    pub fn from_rational(r: &Rational, p: u64, e: u32) -> Self {
        if r.is_zero() {
            return Self::zero(p, e);
        }
        let rel = Self::working_digits(e);
        let (vn, n) = split(r.numer().magnitude(), p);
        let (vd, d) = split(r.denom().magnitude(), p);
        let m = pow_p(p, rel);
        let mut u = (n % &m) * inv_mod(&(d % &m), &m) % &m;
        if r.numer().sign() == Sign::Minus {
            u = (&m - u) % &m;
        }
        ModPK { p, e, val: Val::Unit { v: vn - vd, u, rel } }
    }

    /// A unit `u` given modulo `p^rel`, times `p^v`.
    pub fn from_parts(p: u64, e: u32, v: i64, u: BigUint, rel: u32) -> Self {
        let m = pow_p(p, rel);
        let u = u % &m;
        debug_assert!(!(&u % p).is_zero());
        ModPK { p, e, val: Val::Unit { v, u, rel } }
    }

    /// Zero known only modulo `p^abs`.
    pub fn inexact_zero(p: u64, e: u32, abs: i64) -> Self {
        ModPK { p, e, val: Val::Zero(Some(abs)) }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn target(&self) -> u32 {
        self.e
    }

    /// Valuation; `None` for (possibly inexact) zero.
    pub fn valuation(&self) -> Option<i64> {
        match &self.val {
            Val::Unit { v, .. } => Some(*v),
            Val::Zero(_) => None,
        }
    }

    pub fn unit(&self) -> Option<&BigUint> {
        match &self.val {
            Val::Unit { u, .. } => Some(u),
            Val::Zero(_) => None,
        }
    }

    /// Absolute precision: the value is known modulo `p^abs`.
    pub fn absolute_precision(&self) -> Option<i64> {
        match &self.val {
            Val::Zero(a) => *a,
            Val::Unit { v, rel, .. } => Some(v + *rel as i64),
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.val, Val::Zero(None))
    }

    fn same(&self, o: &Self) -> Result<(), ModPKError> {
        if self.p != o.p {
            return Err(ModPKError::Mismatch);
        }
        Ok(())
    }

    pub fn neg(&self) -> Self {
        let val = match &self.val {
            Val::Zero(a) => Val::Zero(*a),
            Val::Unit { v, u, rel } => {
                let m = pow_p(self.p, *rel);
                Val::Unit { v: *v, u: (&m - u) % &m, rel: *rel }
            }
        };
        ModPK { p: self.p, e: self.e, val }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.same(o).expect("ModPK prime mismatch");
        let e = self.e.max(o.e);
        let p = self.p;
        let abs = match (self.absolute_precision(), o.absolute_precision()) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a),
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        let val = match (&self.val, &o.val) {
            (Val::Zero(None), _) => return ModPK { e, ..o.clone() },
            (_, Val::Zero(None)) => return ModPK { e, ..self.clone() },
            (Val::Zero(Some(_)), Val::Zero(Some(_))) => Val::Zero(abs),
            (Val::Unit { v, u, .. }, Val::Zero(Some(_)))
            | (Val::Zero(Some(_)), Val::Unit { v, u, .. }) => {
                let abs = abs.unwrap();
                if *v >= abs {
                    Val::Zero(Some(abs))
                } else {
                    let rel = (abs - v) as u32;
                    Val::Unit { v: *v, u: u % pow_p(p, rel), rel }
                }
            }
            (Val::Unit { v: v1, u: u1, .. }, Val::Unit { v: v2, u: u2, .. }) => {
                let abs = abs.unwrap();
                let lo = (*v1).min(*v2);
                if lo >= abs {
                    Val::Zero(Some(abs))
                } else {
                    let width = (abs - lo) as u32;
                    let m = pow_p(p, width);
                    let a = if *v1 > lo { u1 * pow_p(p, (v1 - lo) as u32) } else { u1.clone() };
                    let b = if *v2 > lo { u2 * pow_p(p, (v2 - lo) as u32) } else { u2.clone() };
                    let s = (a + b) % &m;
                    if s.is_zero() {
                        Val::Zero(Some(abs))
                    } else {
                        let (t, u) = split(&s, p);
                        let rel = width - t as u32;
                        Val::Unit { v: lo + t, u, rel }
                    }
                }
            }
        };
        ModPK { p, e, val }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.same(o).expect("ModPK prime mismatch");
        let e = self.e.max(o.e);
        let p = self.p;
        let val = match (&self.val, &o.val) {
            (Val::Zero(None), _) | (_, Val::Zero(None)) => Val::Zero(None),
            (Val::Zero(Some(a)), Val::Zero(Some(b))) => Val::Zero(Some(a + b)),
            (Val::Zero(Some(a)), Val::Unit { v, .. }) | (Val::Unit { v, .. }, Val::Zero(Some(a))) => {
                Val::Zero(Some(a + v))
            }
            (Val::Unit { v: v1, u: u1, rel: r1 }, Val::Unit { v: v2, u: u2, rel: r2 }) => {
                let rel = (*r1).min(*r2);
                Val::Unit { v: v1 + v2, u: (u1 * u2) % pow_p(p, rel), rel }
            }
        };
        ModPK { p, e, val }
    }

    pub fn inv(&self) -> Result<Self, ModPKError> {
        match &self.val {
            Val::Zero(None) => Err(ModPKError::DivisionByExactZero),
            Val::Zero(Some(a)) => Err(ModPKError::DivisionByZero(*a)),
            Val::Unit { v, u, rel } => {
                let m = pow_p(self.p, *rel);
                Ok(ModPK { p: self.p, e: self.e, val: Val::Unit { v: -v, u: inv_mod(u, &m), rel: *rel } })
            }
        }
    }

    pub fn div(&self, o: &Self) -> Result<Self, ModPKError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, n: i64) -> Result<Self, ModPKError> {
        if n < 0 {
            return self.inv()?.pow(-n);
        }
        let mut acc = ModPK::one(self.p, self.e);
        let mut base = self.clone();
        let mut k = n as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        Ok(acc)
    }

    /// Multiply by `p^k`.
    pub fn shift(&self, k: i64) -> Self {
        let val = match &self.val {
            Val::Zero(None) => Val::Zero(None),
            Val::Zero(Some(a)) => Val::Zero(Some(a + k)),
            Val::Unit { v, u, rel } => Val::Unit { v: v + k, u: u.clone(), rel: *rel },
        };
        ModPK { p: self.p, e: self.e, val }
    }

    /// Canonical form modulo `p^e`: zero when the valuation reaches `e`,
    /// otherwise the unit truncated to `e - v` digits.
    pub fn truncated(&self) -> Result<Self, ModPKError> {
        let e = self.e as i64;
        let val = match &self.val {
            Val::Zero(None) => Val::Zero(Some(e)),
            Val::Zero(Some(a)) => {
                if *a >= e {
                    Val::Zero(Some(e))
                } else {
                    return Err(ModPKError::PrecisionExhausted { known: *a, needed: e });
                }
            }
            Val::Unit { v, u, rel } => {
                if *v >= e {
                    Val::Zero(Some(e))
                } else if v + (*rel as i64) < e {
                    return Err(ModPKError::PrecisionExhausted { known: v + *rel as i64, needed: e });
                } else {
                    let rel = (e - v) as u32;
                    Val::Unit { v: *v, u: u % pow_p(self.p, rel), rel }
                }
            }
        };
        Ok(ModPK { p: self.p, e: self.e, val })
    }

    /// `true` when the value is divisible by `p^e`.
    pub fn is_zero_mod_target(&self) -> Result<bool, ModPKError> {
        Ok(matches!(self.truncated()?.val, Val::Zero(_)))
    }

    /// Whether `self ≡ other (mod p^e)`.
    pub fn congruent(&self, other: &Self) -> Result<bool, ModPKError> {
        self.sub(other).is_zero_mod_target()
    }

    /// Residue in `[0, p^e)` when the valuation is non-negative.
    pub fn residue(&self) -> Option<BigUint> {
        let t = self.truncated().ok()?;
        match &t.val {
            Val::Zero(_) => Some(BigUint::zero()),
            Val::Unit { v, u, .. } if *v >= 0 => {
                Some(u * pow_p(self.p, *v as u32) % pow_p(self.p, self.e))
            }
            _ => None,
        }
    }
}

impl PartialEq for ModPK {
    fn eq(&self, other: &Self) -> bool {
        if self.p != other.p || self.e != other.e {
            return false;
        }
        match (self.truncated(), other.truncated()) {
            (Ok(a), Ok(b)) => match (&a.val, &b.val) {
                (Val::Zero(_), Val::Zero(_)) => true,
                (Val::Unit { v: v1, u: u1, .. }, Val::Unit { v: v2, u: u2, .. }) => v1 == v2 && u1 == u2,
                _ => false,
            },
            _ => false,
        }
    }
}

impl fmt::Display for ModPK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.val {
            Val::Zero(None) => write!(f, "0"),
            Val::Zero(Some(a)) => write!(f, "O({}^{})", self.p, a),
            Val::Unit { v, u, rel } => {
                if *v == 0 {
                    write!(f, "{} + O({}^{})", u, self.p, rel)
                } else {
                    write!(f, "{}^{} * {} + O({}^{})", self.p, v, u, self.p, v + *rel as i64)
                }
            }
        }
    }
}

impl Serialize for ModPK {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
