//! Arbitrary-precision ball arithmetic: a midpoint and a rigorous radius.
//!
//! Every operation returns a ball that contains the exact result of applying
//! the operation to any points of the input balls.

mod compare;
mod elementary;
mod float;

pub use compare::{ball_compare, Verdict};
pub use elementary::{atan_inv, atanh_inv, ln2, pi};
pub use float::{Float, Round};

use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::exact::Rational;

/// Bits kept in radius mantissas.
const MAG_BITS: u32 = 30;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BallError {
    #[error("division by a ball containing zero")]
    DivisionByZero,
    #[error("argument outside the domain of {0}")]
    Domain(&'static str),
    #[error("argument too large for {0}")]
    Overflow(&'static str),
}

/// Non-negative upper bound with a short mantissa.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mag(Float);

impl Mag {
    pub fn zero() -> Self {
        Mag(Float::zero())
    }

    pub fn pow2(e: i64) -> Self {
        Mag(Float::pow2(e))
    }

    /// Upper bound for `|x|`.
    pub fn from_float(x: &Float) -> Self {
        Mag(x.abs().round(MAG_BITS, Round::Up).0)
    }

    /// Lower bound for `|x|`.
    pub fn lower_from_float(x: &Float) -> Float {
        x.abs().round(MAG_BITS, Round::Down).0
    }

    pub fn from_rational_up(r: &Rational) -> Self {
        let r = r.abs();
        Mag(Float::from_ratio(r.numer(), r.denom(), MAG_BITS, Round::Up).0)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Mag(self.0.add_exact(&o.0).round(MAG_BITS, Round::Up).0)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Mag(self.0.mul_exact(&o.0).round(MAG_BITS, Round::Up).0)
    }

    /// `self / d` rounded up; `d` must be a positive lower bound.
    pub fn div_lower(&self, d: &Float) -> Self {
        Mag(Float::div_round(&self.0, d, MAG_BITS, Round::Up).0)
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        Mag(self.0.mul_pow2(k))
    }

    pub fn max(&self, o: &Self) -> Self {
        if self.0.cmp_value(&o.0).is_ge() {
            self.clone()
        } else {
            o.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn to_rational(&self) -> Rational {
        self.0.to_rational()
    }

    /// `log2` of the bound, `-inf` for zero.
    pub fn log2(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let f = &self.0;
        let drop = f.bits().saturating_sub(53) as i64;
        let m = num_traits::ToPrimitive::to_f64(&(f.mantissa() >> drop as usize)).unwrap_or(1.0);
        m.log2() + (f.exponent() + drop) as f64
    }
}

fn err_mag(e: Option<i64>) -> Mag {
    match e {
        Some(e) => Mag::pow2(e),
        None => Mag::zero(),
    }
}

/// Interval `[mid - rad, mid + rad]` computed at `prec` bits.
#[derive(Debug, Clone)]
pub struct RealBall {
    mid: Float,
    rad: Mag,
    prec: u32,
}

impl RealBall {
    pub fn new(mid: Float, rad: Mag, prec: u32) -> Self {
        RealBall { mid, rad, prec }
    }

    pub fn zero(prec: u32) -> Self {
        RealBall { mid: Float::zero(), rad: Mag::zero(), prec }
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        Self::from_int(&BigInt::from(n), prec)
    }

    pub fn from_int(n: &BigInt, prec: u32) -> Self {
        let (mid, e) = Float::from_int(n).round(prec, Round::Nearest);
        RealBall { mid, rad: err_mag(e), prec }
    }

    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        let (mid, e) = Float::from_ratio(q.numer(), q.denom(), prec, Round::Nearest);
        RealBall { mid, rad: err_mag(e), prec }
    }

    pub fn from_float(x: Float, prec: u32) -> Self {
        let (mid, e) = x.round(prec, Round::Nearest);
        RealBall { mid, rad: err_mag(e), prec }
    }

    /// Ball `[lo, hi]` from two rational endpoints.
    pub fn from_endpoints(lo: &Rational, hi: &Rational, prec: u32) -> Self {
        let two = Rational::from_integer(BigInt::from(2));
        let mid = (lo + hi) / &two;
        let half = (hi - lo).abs() / two;
        let b = Self::from_rational(&mid, prec);
        b.add_error(&Mag::from_rational_up(&half))
    }

    pub fn mid(&self) -> &Float {
        &self.mid
    }

    pub fn rad(&self) -> &Mag {
        &self.rad
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        let (mid, e) = self.mid.round(prec, Round::Nearest);
        RealBall { mid, rad: self.rad.add(&err_mag(e)), prec }
    }

    pub fn add_error(&self, r: &Mag) -> Self {
        RealBall { mid: self.mid.clone(), rad: self.rad.add(r), prec: self.prec }
    }

    /// Same midpoint, zero radius.
    pub fn midpoint_ball(&self) -> Self {
        RealBall { mid: self.mid.clone(), rad: Mag::zero(), prec: self.prec }
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    /// Upper bound for `|x|` over the ball.
    pub fn mag_upper(&self) -> Mag {
        Mag::from_float(&self.mid).add(&self.rad)
    }

    /// Lower bound for `|x|` over the ball (zero when the ball contains 0).
    pub fn mag_lower(&self) -> Float {
        let lo = self.mid.abs().sub_exact(self.rad.as_float());
        if lo.is_negative() || lo.is_zero() {
            Float::zero()
        } else {
            lo.round(MAG_BITS, Round::Down).0
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.mag_lower().is_zero()
    }

    pub fn is_positive(&self) -> bool {
        !self.mid.is_negative() && !self.contains_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mid.is_negative() && !self.contains_zero()
    }

    /// Whether the exact rational lies in the ball.
    pub fn contains_rational(&self, q: &Rational) -> bool {
        (self.mid.to_rational() - q).abs() <= self.rad.to_rational()
    }

    /// Whether `other` lies entirely inside `self`.
    pub fn contains_ball(&self, other: &RealBall) -> bool {
        let d = (self.mid.to_rational() - other.mid.to_rational()).abs();
        d + other.rad.to_rational() <= self.rad.to_rational()
    }

    pub fn neg(&self) -> Self {
        RealBall { mid: self.mid.neg(), rad: self.rad.clone(), prec: self.prec }
    }

    pub fn abs(&self) -> Self {
        RealBall { mid: self.mid.abs(), rad: self.rad.clone(), prec: self.prec }
    }

    pub fn add(&self, o: &Self) -> Self {
        let prec = self.prec.max(o.prec);
        let (mid, e) = add_round(&self.mid, &o.mid, prec);
        RealBall { mid, rad: self.rad.add(&o.rad).add(&e), prec }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let prec = self.prec.max(o.prec);
        let (mid, e) = self.mid.mul_exact(&o.mid).round(prec, Round::Nearest);
        let am = Mag::from_float(&self.mid);
        let bm = Mag::from_float(&o.mid);
        let rad = am.mul(&o.rad).add(&bm.mul(&self.rad)).add(&self.rad.mul(&o.rad)).add(&err_mag(e));
        RealBall { mid, rad, prec }
    }

    pub fn mul_rational(&self, q: &Rational) -> Self {
        self.mul(&RealBall::from_rational(q, self.prec))
    }

    pub fn mul_i64(&self, n: i64) -> Self {
        self.mul(&RealBall::from_i64(n, self.prec))
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        RealBall { mid: self.mid.mul_pow2(k), rad: self.rad.mul_pow2(k), prec: self.prec }
    }

    pub fn div(&self, o: &Self) -> Result<Self, BallError> {
        let prec = self.prec.max(o.prec);
        let bl = o.mag_lower();
        if bl.is_zero() {
            return Err(BallError::DivisionByZero);
        }
        let (mid, e) = Float::div_round(&self.mid, &o.mid, prec, Round::Nearest);
        let rad = if self.rad.is_zero() && o.rad.is_zero() {
            Mag::zero()
        } else {
            // (|a| rb + |b| ra) / (|b| (|b| - rb))
            let am = Mag::from_float(&self.mid);
            let bm = Mag::from_float(&o.mid);
            let num = am.mul(&o.rad).add(&bm.mul(&self.rad));
            let blo = Mag::lower_from_float(&o.mid);
            let den = blo.mul_exact(&bl).round(MAG_BITS, Round::Down).0;
            num.div_lower(&den)
        };
        Ok(RealBall { mid, rad: rad.add(&err_mag(e)), prec })
    }

    pub fn inv(&self) -> Result<Self, BallError> {
        RealBall::from_i64(1, self.prec).div(self)
    }

    pub fn div_i64(&self, n: i64) -> Self {
        self.div(&RealBall::from_i64(n, self.prec)).expect("division by zero integer")
    }

    pub fn sqr(&self) -> Self {
        self.mul(self)
    }

    pub fn pow_i64(&self, n: i64) -> Result<Self, BallError> {
        if n < 0 {
            return self.inv()?.pow_i64(-n);
        }
        let mut acc = RealBall::from_i64(1, self.prec);
        let mut base = self.clone();
        let mut k = n as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.sqr();
            }
        }
        Ok(acc)
    }

    pub fn sqrt(&self) -> Result<Self, BallError> {
        if self.mid.is_negative() || (self.contains_zero() && !self.rad.is_zero()) {
            if self.mid.is_zero() && self.rad.is_zero() {
                return Ok(self.clone());
            }
            return Err(BallError::Domain("sqrt"));
        }
        if self.mid.is_zero() {
            return Ok(self.clone());
        }
        let (mid, e) = self.mid.sqrt_round(self.prec, Round::Nearest);
        let mut rad = err_mag(e);
        if !self.rad.is_zero() {
            // |sqrt(m + d) - sqrt(m)| <= r / sqrt(m - r)
            let lo = self.mag_lower();
            let (slo, _) = lo.sqrt_round(MAG_BITS, Round::Down);
            rad = rad.add(&self.rad.div_lower(&slo));
        }
        Ok(RealBall { mid, rad, prec: self.prec })
    }

    /// Ball hull of two balls.
    pub fn union(&self, o: &Self) -> Self {
        let a = self.mid.to_rational();
        let b = o.mid.to_rational();
        let ra = self.rad.to_rational();
        let rb = o.rad.to_rational();
        let lo = (&a - &ra).min(&b - &rb);
        let hi = (&a + &ra).max(&b + &rb);
        RealBall::from_endpoints(&lo, &hi, self.prec.max(o.prec))
    }

    /// Digits of agreement: `-log10(rad / |mid|)`.
    pub fn rel_accuracy_digits(&self) -> f64 {
        if self.rad.is_zero() {
            return f64::INFINITY;
        }
        let m = Mag::from_float(&self.mid).log2();
        (m - self.rad.log2()) * std::f64::consts::LOG10_2
    }

    /// Midpoint to `digits` decimals.
    pub fn to_decimal(&self, digits: usize) -> String {
        self.mid.to_decimal(digits)
    }
}

/// `a + b` rounded to `prec` bits with an error bound. Operands whose
/// magnitudes are far apart are not expanded exactly.
fn add_round(a: &Float, b: &Float, prec: u32) -> (Float, Mag) {
    if a.is_zero() {
        let (m, e) = b.round(prec, Round::Nearest);
        return (m, err_mag(e));
    }
    if b.is_zero() {
        let (m, e) = a.round(prec, Round::Nearest);
        return (m, err_mag(e));
    }
    let (ea, eb) = (a.mag_exp(), b.mag_exp());
    let gap = prec as i64 + 8;
    if eb < ea - gap && b.exponent() < a.exponent() {
        let (m, e) = a.round(prec, Round::Nearest);
        return (m, err_mag(e).add(&Mag::pow2(eb)));
    }
    if ea < eb - gap && a.exponent() < b.exponent() {
        let (m, e) = b.round(prec, Round::Nearest);
        return (m, err_mag(e).add(&Mag::pow2(ea)));
    }
    let (m, e) = a.add_exact(b).round(prec, Round::Nearest);
    (m, err_mag(e))
}

impl fmt::Display for RealBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = ((self.prec as f64) * std::f64::consts::LOG10_2).floor() as usize;
        let d = d.clamp(1, 80);
        write!(f, "[{} +/- {:.3e}]", self.mid.to_decimal(d), self.rad.to_f64())
    }
}
