use std::sync::Mutex;

use num_bigint::BigInt;

use super::{BallError, Float, Mag, RealBall};
use crate::exact::Rational;

/// `sum_j (±1)^j / ((2j+1) n^(2j+1))`; the alternating variant is `atan(1/n)`.
fn inv_series(n: u64, prec: u32, alternating: bool) -> RealBall {
    assert!(n >= 2);
    let work = prec + 16;
    let n2 = BigInt::from(n) * BigInt::from(n);
    let mut pw = RealBall::from_i64(1, work).div(&RealBall::from_i64(n as i64, work)).unwrap();
    let mut acc = RealBall::zero(work);
    let target = -(work as i64) - 4;
    let mut j: i64 = 0;
    loop {
        let term = pw.div_i64(2 * j + 1);
        let term = if alternating && j % 2 == 1 { term.neg() } else { term };
        acc = acc.add(&term);
        pw = pw.div(&RealBall::from_int(&n2, work)).unwrap();
        j += 1;
        let next = pw.div_i64(2 * j + 1).mag_upper();
        if next.log2() < target as f64 {
            // tail <= next term * n^2/(n^2-1) <= 2 * next term
            acc = acc.add_error(&next.mul_pow2(1));
            break;
        }
    }
    acc.with_prec(prec)
}

pub fn atanh_inv(n: u64, prec: u32) -> RealBall {
    inv_series(n, prec, false)
}

pub fn atan_inv(n: u64, prec: u32) -> RealBall {
    inv_series(n, prec, true)
}

static PI: Mutex<Option<RealBall>> = Mutex::new(None);
static LN2: Mutex<Option<RealBall>> = Mutex::new(None);

fn cached(slot: &Mutex<Option<RealBall>>, prec: u32, f: impl Fn(u32) -> RealBall) -> RealBall {
    let mut g = slot.lock().unwrap();
    if let Some(b) = g.as_ref() {
        if b.prec() >= prec {
            return b.with_prec(prec);
        }
    }
    let b = f(prec + 32);
    *g = Some(b.clone());
    b.with_prec(prec)
}

pub fn pi(prec: u32) -> RealBall {
    cached(&PI, prec, |w| {
        let a = atan_inv(5, w).mul_i64(16);
        let b = atan_inv(239, w).mul_i64(4);
        a.sub(&b)
    })
}

pub fn ln2(prec: u32) -> RealBall {
    cached(&LN2, prec, |w| {
        let a = atanh_inv(26, w).mul_i64(18);
        let b = atanh_inv(4801, w).mul_i64(2);
        let c = atanh_inv(8749, w).mul_i64(8);
        a.sub(&b).add(&c)
    })
}

impl RealBall {
    pub fn exp(&self) -> Result<RealBall, BallError> {
        let prec = self.prec();
        let m = self.mid().clone();
        if m.mag_exp() > 40 {
            return Err(BallError::Overflow("exp"));
        }
        let s = if m.is_zero() { 0 } else { (m.mag_exp() + 12).max(0) };
        let work = prec + 16 + s as u32;
        let y = RealBall::new(m.mul_pow2(-s), Mag::zero(), work);
        // Taylor series, |y| < 2^-12
        let mut acc = RealBall::from_i64(1, work);
        let mut term = RealBall::from_i64(1, work);
        let mut j = 1;
        loop {
            term = term.mul(&y).div_i64(j);
            acc = acc.add(&term);
            j += 1;
            let t = term.mag_upper();
            if t.is_zero() || t.log2() < -(work as f64) - 8.0 {
                acc = acc.add_error(&t);
                break;
            }
        }
        for _ in 0..s {
            acc = acc.sqr();
        }
        let r = self.rad();
        if !r.is_zero() {
            if r.log2() > 0.0 {
                return Err(BallError::Overflow("exp radius"));
            }
            // exp(m)(e^r - 1) <= exp(m) r (1 + 2r)
            let f = r.mul(&Mag::pow2(0).add(&r.mul_pow2(1)));
            acc = acc.add_error(&acc.mag_upper().mul(&f));
        }
        Ok(acc.with_prec(prec))
    }

    pub fn log(&self) -> Result<RealBall, BallError> {
        if !self.is_positive() {
            return Err(BallError::Domain("log"));
        }
        let prec = self.prec();
        let work = prec + 16;
        let m = self.mid().clone();
        // m = f 2^k with f in [3/4, 3/2)
        let mut k = m.mag_exp() - 1;
        let mut f = m.mul_pow2(-k);
        if f.cmp_value(&Float::new(BigInt::from(3), -1)).is_ge() {
            f = f.mul_pow2(-1);
            k += 1;
        }
        let fb = RealBall::new(f, Mag::zero(), work);
        let one = RealBall::from_i64(1, work);
        let z = fb.sub(&one).div(&fb.add(&one))?;
        let z2 = z.sqr();
        let mut acc = RealBall::zero(work);
        let mut pw = z.clone();
        let mut j: i64 = 0;
        loop {
            acc = acc.add(&pw.div_i64(2 * j + 1));
            pw = pw.mul(&z2);
            j += 1;
            let t = pw.mag_upper();
            if t.is_zero() || t.log2() < -(work as f64) - 8.0 {
                // |z| <= 1/5, tail <= next * 25/24
                acc = acc.add_error(&t.mul_pow2(1));
                break;
            }
        }
        let mut res = acc.mul_pow2(1);
        if k != 0 {
            res = res.add(&ln2(work).mul_i64(k));
        }
        let r = self.rad();
        if !r.is_zero() {
            res = res.add_error(&r.div_lower(&self.mag_lower()));
        }
        Ok(res.with_prec(prec))
    }

    /// `x^q` for `x > 0` (or any `x` when `q` is an integer).
    pub fn pow_rational(&self, q: &Rational) -> Result<RealBall, BallError> {
        if q.is_integer() {
            let n: i64 = num_traits::ToPrimitive::to_i64(q.numer()).ok_or(BallError::Overflow("pow"))?;
            return self.pow_i64(n);
        }
        if q.denom() == &BigInt::from(2) {
            let n: i64 = num_traits::ToPrimitive::to_i64(q.numer()).ok_or(BallError::Overflow("pow"))?;
            return self.sqrt()?.pow_i64(n);
        }
        self.log()?.mul_rational(q).exp()
    }

    pub fn pow_ball(&self, y: &RealBall) -> Result<RealBall, BallError> {
        self.log()?.mul(y).exp()
    }

    fn sin_cos_series(&self, odd: bool) -> Result<RealBall, BallError> {
        let prec = self.prec();
        let m = self.mid().clone();
        if m.mag_exp() > 3 {
            return Err(BallError::Overflow("sin/cos"));
        }
        let work = prec + 16;
        let x = RealBall::new(m, Mag::zero(), work);
        let x2 = x.sqr();
        let mut term = if odd { x.clone() } else { RealBall::from_i64(1, work) };
        let mut acc = term.clone();
        let mut j: i64 = if odd { 1 } else { 0 };
        loop {
            term = term.mul(&x2).div_i64((j + 1) * (j + 2)).neg();
            j += 2;
            acc = acc.add(&term);
            let t = term.mag_upper();
            if j > 16 && (t.is_zero() || t.log2() < -(work as f64) - 8.0) {
                acc = acc.add_error(&t);
                break;
            }
        }
        Ok(acc.add_error(self.rad()).with_prec(prec))
    }

    /// Sine for `|x| < 8`.
    pub fn sin(&self) -> Result<RealBall, BallError> {
        self.sin_cos_series(true)
    }

    /// Cosine for `|x| < 8`.
    pub fn cos(&self) -> Result<RealBall, BallError> {
        self.sin_cos_series(false)
    }
}
