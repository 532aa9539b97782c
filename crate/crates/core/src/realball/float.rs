use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exact::Rational;

/// Binary floating point value `man * 2^exp` with an unbounded mantissa.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Float {
    man: BigInt,
    exp: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
    Nearest,
}

impl Float {
    pub fn new(man: BigInt, exp: i64) -> Self {
        Float { man, exp }
    }

    pub fn zero() -> Self {
        Float { man: BigInt::zero(), exp: 0 }
    }

    pub fn from_i64(n: i64) -> Self {
        Float { man: BigInt::from(n), exp: 0 }
    }

    pub fn from_int(n: &BigInt) -> Self {
        Float { man: n.clone(), exp: 0 }
    }

    pub fn pow2(e: i64) -> Self {
        Float { man: BigInt::one(), exp: e }
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 || !x.is_finite() {
            return Self::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let e = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, ex) = if e == 0 { (frac, -1074) } else { (frac | (1u64 << 52), e - 1075) };
        Float { man: BigInt::from(m) * sign, exp: ex }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.man
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.man.is_negative()
    }

    pub fn signum(&self) -> i32 {
        match self.man.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Float { man: self.man.abs(), exp: self.exp }
    }

    pub fn neg(&self) -> Self {
        Float { man: -&self.man, exp: self.exp }
    }

    pub fn bits(&self) -> u64 {
        self.man.bits()
    }

    /// `|x| < 2^mag_exp`; meaningless for zero.
    pub fn mag_exp(&self) -> i64 {
        if self.is_zero() {
            i64::MIN / 4
        } else {
            self.exp + self.bits() as i64
        }
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        Float { man: self.man.clone(), exp: self.exp + k }
    }

    pub fn mul_exact(&self, o: &Self) -> Self {
        Float { man: &self.man * &o.man, exp: self.exp + o.exp }
    }

    pub fn add_exact(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(o.exp);
        let a = &self.man << (self.exp - e) as usize;
        let b = &o.man << (o.exp - e) as usize;
        Float { man: a + b, exp: e }
    }

    pub fn sub_exact(&self, o: &Self) -> Self {
        self.add_exact(&o.neg())
    }

    /// Round to at most `prec` mantissa bits. Returns the rounded value and
    /// the exponent of one ulp when rounding was inexact.
    pub fn round(&self, prec: u32, mode: Round) -> (Self, Option<i64>) {
        let bits = self.bits();
        if bits <= prec as u64 {
            return (self.clone(), None);
        }
        let shift = bits - prec as u64;
        let neg = self.man.is_negative();
        let mag = self.man.magnitude();
        let mut q: BigUint = mag >> shift as usize;
        let exact = mag.trailing_zeros().is_none_or(|tz| tz >= shift);
        if exact {
            let man = if neg { -BigInt::from(q) } else { BigInt::from(q) };
            return (Float { man, exp: self.exp + shift as i64 }, None);
        }
        let bump = match mode {
            Round::Down => neg,
            Round::Up => !neg,
            Round::Nearest => mag.bit(shift - 1),
        };
        if bump {
            q += 1u32;
        }
        let man = if neg { -BigInt::from(q) } else { BigInt::from(q) };
        let exp = self.exp + shift as i64;
        (Float { man, exp }, Some(exp))
    }

    pub fn to_rational(&self) -> Rational {
        if self.exp >= 0 {
            Rational::from_integer(&self.man << self.exp as usize)
        } else {
            Rational::new(self.man.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    /// Nearest `prec`-bit value to `num/den` with the error exponent.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32, mode: Round) -> (Self, Option<i64>) {
        Self::div_round(&Float::from_int(num), &Float::from_int(den), prec, mode)
    }

    pub fn div_round(a: &Self, b: &Self, prec: u32, mode: Round) -> (Self, Option<i64>) {
        assert!(!b.is_zero(), "Float division by zero");
        if a.is_zero() {
            return (Self::zero(), None);
        }
        let shift = (prec as i64 + b.bits() as i64 - a.bits() as i64 + 2).max(0);
        let num = &a.man << shift as usize;
        let neg = num.is_negative() != b.man.is_negative();
        let (q, r) = (num.magnitude() / b.man.magnitude(), num.magnitude() % b.man.magnitude());
        let exp = a.exp - shift - b.exp;
        let inexact = !r.is_zero();
        let mut q = q;
        if inexact {
            let bump = match mode {
                Round::Down => neg,
                Round::Up => !neg,
                Round::Nearest => (&r << 1usize) >= *b.man.magnitude(),
            };
            if bump {
                q += 1u32;
            }
        }
        let man = if neg { -BigInt::from(q) } else { BigInt::from(q) };
        let raw = Float { man, exp };
        let (res, e2) = raw.round(prec, mode);
        let err = match (inexact, e2) {
            (false, e2) => e2,
            (true, None) => Some(exp),
            (true, Some(e2)) => Some(e2 + 1),
        };
        (res, err)
    }

    /// Square root of a non-negative value.
    pub fn sqrt_round(&self, prec: u32, mode: Round) -> (Self, Option<i64>) {
        assert!(!self.is_negative(), "sqrt of negative Float");
        if self.is_zero() {
            return (Self::zero(), None);
        }
        let want = 2 * prec as i64 + 4;
        let mut shift = (want - self.bits() as i64).max(0);
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let m = self.man.magnitude() << shift as usize;
        let r = m.sqrt();
        let exact = &r * &r == m;
        let mut r = r;
        if !exact && mode == Round::Up {
            r += 1u32;
        }
        let exp = (self.exp - shift) / 2;
        let raw = Float { man: BigInt::from(r), exp };
        let (res, e2) = raw.round(prec, mode);
        let err = match (exact, e2) {
            (true, e2) => e2,
            (false, None) => Some(exp),
            (false, Some(e2)) => Some(e2 + 1),
        };
        (res, err)
    }

    pub fn cmp_value(&self, o: &Self) -> Ordering {
        let d = self.sub_exact(o);
        d.man.sign().cmp(&Sign::NoSign)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.bits() as i64;
        let drop = (bits - 60).max(0);
        let m = (&self.man >> drop as usize).to_f64().unwrap_or(0.0);
        m * 2f64.powi((self.exp + drop).clamp(-1100, 1100) as i32)
    }

    /// `floor(|x| * 10^digits)` as a decimal string with a point inserted.
    pub fn to_decimal(&self, digits: usize) -> String {
        let r = self.to_rational();
        let neg = r.is_negative();
        let scaled = r.abs() * Rational::from_integer(BigInt::from(10).pow(digits as u32));
        let q = scaled.round().to_integer();
        let s = q.to_string();
        let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
        let (ip, fp) = s.split_at(s.len() - digits);
        let sign = if neg && !q.is_zero() { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{ip}")
        } else {
            format!("{sign}{ip}.{fp}")
        }
    }
}
