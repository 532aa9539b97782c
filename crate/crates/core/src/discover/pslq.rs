//! PSLQ in binary fixed point.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::DiscoverError;
use crate::realball::{Mag, RealBall};

#[derive(Debug, Clone, Serialize)]
pub struct RelationResult {
    /// Integer relation with nonnegative leading coefficient, if found.
    #[serde(serialize_with = "ser_coeffs")]
    pub coefficients: Option<Vec<BigInt>>,
    /// Upper bound for `|sum c_i x_i|` over the input enclosures.
    pub residual: Option<f64>,
    /// Working precision in bits.
    pub prec: u32,
    pub iterations: usize,
    /// Every relation has Euclidean norm at least this large when the
    /// search stops without one.
    pub norm_bound: Option<f64>,
}

fn ser_coeffs<S: serde::Serializer>(c: &Option<Vec<BigInt>>, s: S) -> Result<S::Ok, S::Error> {
    match c {
        None => s.serialize_none(),
        Some(v) => s.collect_seq(v.iter().map(|x| x.to_string())),
    }
}

struct Fixed {
    prec: u32,
    one: BigInt,
}

impl Fixed {
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a * b) >> self.prec
    }

    fn div(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a << self.prec) / b
    }

    fn sqrt(&self, a: &BigInt) -> BigInt {
        (a << self.prec).sqrt()
    }

    /// Nearest integer to the fixed-point quotient `a / b`.
    fn nint_div(&self, a: &BigInt, b: &BigInt) -> BigInt {
        let q = self.div(a, b);
        (q + (&self.one >> 1)) >> self.prec
    }

    fn to_fixed(&self, x: &RealBall) -> BigInt {
        let m = x.mid();
        let shift = m.exponent() + self.prec as i64;
        if shift >= 0 {
            m.mantissa() << shift as usize
        } else {
            m.mantissa() >> (-shift) as usize
        }
    }

    fn to_f64(&self, a: &BigInt) -> f64 {
        let bits = a.bits() as i64;
        let drop = (bits - 60).max(0);
        let top: f64 = (a >> drop as usize).to_string().parse().unwrap_or(f64::INFINITY);
        top * 2f64.powi((drop - self.prec as i64) as i32)
    }
}

/// Bits needed to represent `10^digits`.
fn digit_bits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32
}

/// Search for integers `c`, not all zero, with `|c_i| <= max_height` and
/// `|sum c_i x_i| < 10^-tolerance_digits` over the enclosures. Inputs need
/// radius below `10^-(tolerance_digits + 10)`.
pub fn pslq(values: &[RealBall], max_height: &BigInt, tolerance_digits: u32) -> Result<RelationResult, DiscoverError> {
    let n = values.len();
    if n < 2 {
        return Err(DiscoverError::TooFewValues);
    }
    let need = -(digit_bits(tolerance_digits + 10) as f64);
    for (i, v) in values.iter().enumerate() {
        if v.rad().log2() >= need {
            return Err(DiscoverError::InsufficientPrecision { index: i, digits: tolerance_digits + 10 });
        }
    }
    let prec = digit_bits(tolerance_digits + 10) + 2 * n as u32 + 16;
    let fx = Fixed { prec, one: BigInt::one() << prec };
    let tol_bits = digit_bits(tolerance_digits);
    let tol = BigInt::one() << prec.saturating_sub(tol_bits);
    let x: Vec<BigInt> = values.iter().map(|v| fx.to_fixed(v)).collect();

    let found = |c: Vec<BigInt>, it: usize| -> Option<RelationResult> {
        if c.iter().all(|v| v.is_zero()) || c.iter().any(|v| v.abs() > *max_height) {
            return None;
        }
        let c = normalize(c);
        let res = residual(values, &c);
        (res.log2() < -(tol_bits as f64)).then(|| RelationResult {
            coefficients: Some(c),
            residual: Some(res.to_f64()),
            prec,
            iterations: it,
            norm_bound: None,
        })
    };

    // an input that vanishes is its own relation
    for i in 0..n {
        if values[i].mag_upper().log2() < -(tol_bits as f64) {
            let mut c = vec![BigInt::zero(); n];
            c[i] = BigInt::one();
            if let Some(r) = found(c, 0) {
                return Ok(r);
            }
        }
    }

    let g = fx.sqrt(&fx.div(&(BigInt::from(4) << prec), &(BigInt::from(3) << prec)));
    let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| (0..n).map(|j| BigInt::from((i == j) as i32)).collect()).collect();
    let mut b = a.clone();
    let mut h = vec![vec![BigInt::zero(); n - 1]; n];

    let mut s = vec![BigInt::zero(); n];
    for k in 0..n {
        let mut t = BigInt::zero();
        for xj in &x[k..] {
            t += fx.mul(xj, xj);
        }
        s[k] = fx.sqrt(&t);
    }
    let t = s[0].clone();
    if t.is_zero() {
        return Err(DiscoverError::InsufficientPrecision { index: 0, digits: tolerance_digits + 10 });
    }
    let mut y: Vec<BigInt> = x.iter().map(|v| fx.div(v, &t)).collect();
    for v in s.iter_mut() {
        *v = fx.div(v, &t);
    }
    for i in 0..n {
        if i < n - 1 && !s[i].is_zero() {
            h[i][i] = fx.div(&s[i + 1], &s[i]);
        }
        for j in 0..i.min(n - 1) {
            let den = fx.mul(&s[j], &s[j + 1]);
            if !den.is_zero() {
                h[i][j] = -fx.div(&fx.mul(&y[i], &y[j]), &den);
            }
        }
    }

    let reduce = |i: usize, j: usize, y: &mut [BigInt], h: &mut [Vec<BigInt>], a: &mut [Vec<BigInt>], b: &mut [Vec<BigInt>]| -> bool {
        if h[j][j].is_zero() {
            return false;
        }
        let t = fx.nint_div(&h[i][j], &h[j][j]);
        if t.is_zero() {
            return true;
        }
        let yi = y[i].clone();
        y[j] += &t * yi;
        for k in 0..=j {
            let hj = h[j][k].clone();
            h[i][k] -= &t * hj;
        }
        for k in 0..n {
            let aj = a[j][k].clone();
            a[i][k] -= &t * aj;
            let bi = b[k][i].clone();
            b[k][j] += &t * bi;
        }
        true
    };

    for i in 1..n {
        for j in (0..i).rev() {
            reduce(i, j, &mut y, &mut h, &mut a, &mut b);
        }
    }

    let max_steps = 200 * n * (tolerance_digits as usize + 10);
    let mut bound = None;
    for it in 1..=max_steps {
        // exchange
        let mut m = 0;
        let mut best = BigInt::from(-1);
        let mut gp = g.clone();
        for i in 0..n - 1 {
            let sz = fx.mul(&gp, &h[i][i].abs());
            if sz > best {
                best = sz;
                m = i;
            }
            gp = fx.mul(&gp, &g);
        }
        y.swap(m, m + 1);
        h.swap(m, m + 1);
        a.swap(m, m + 1);
        for row in b.iter_mut() {
            row.swap(m, m + 1);
        }
        // corner
        if m + 2 < n {
            let t0 = fx.sqrt(&(fx.mul(&h[m][m], &h[m][m]) + fx.mul(&h[m][m + 1], &h[m][m + 1])));
            if t0.is_zero() {
                break;
            }
            let t1 = fx.div(&h[m][m], &t0);
            let t2 = fx.div(&h[m][m + 1], &t0);
            for row in h.iter_mut().skip(m) {
                let (t3, t4) = (row[m].clone(), row[m + 1].clone());
                row[m] = fx.mul(&t1, &t3) + fx.mul(&t2, &t4);
                row[m + 1] = fx.mul(&t1, &t4) - fx.mul(&t2, &t3);
            }
        }
        // reduction
        for i in m + 1..n {
            for j in (0..=(i - 1).min(m + 1)).rev() {
                if !reduce(i, j, &mut y, &mut h, &mut a, &mut b) {
                    break;
                }
            }
        }
        // termination
        let mut hit = false;
        for i in 0..n {
            if y[i].abs() < tol {
                hit = true;
                let c: Vec<BigInt> = (0..n).map(|j| b[j][i].clone()).collect();
                if let Some(r) = found(c, it) {
                    return Ok(r);
                }
            }
        }
        let hmax = (0..n - 1).map(|j| h[j][j].abs()).max().unwrap_or_default();
        if hmax.is_zero() {
            break;
        }
        let nb = 1.0 / fx.to_f64(&hmax);
        bound = Some(nb);
        if !hit && nb > fx.to_f64(&(max_height << prec)) * (n as f64).sqrt() {
            return Ok(RelationResult { coefficients: None, residual: None, prec, iterations: it, norm_bound: bound });
        }
    }
    Ok(RelationResult { coefficients: None, residual: None, prec, iterations: max_steps, norm_bound: bound })
}

/// Divide out the content and make the first nonzero entry positive.
fn normalize(mut c: Vec<BigInt>) -> Vec<BigInt> {
    let g = c.iter().fold(BigInt::zero(), |g, v| num_integer::Integer::gcd(&g, v));
    if !g.is_zero() && !g.is_one() {
        for v in c.iter_mut() {
            *v /= &g;
        }
    }
    if c.iter().find(|v| !v.is_zero()).is_some_and(|v| v.is_negative()) {
        for v in c.iter_mut() {
            *v = -v.clone();
        }
    }
    c
}

/// Upper bound for `|sum c_i x_i|`.
pub fn residual(values: &[RealBall], c: &[BigInt]) -> Mag {
    let prec = values.iter().map(|v| v.prec()).max().unwrap_or(64) + 64;
    let mut acc = RealBall::zero(prec);
    for (v, ci) in values.iter().zip(c) {
        acc = acc.add(&v.mul(&RealBall::from_int(ci, prec)));
    }
    acc.mag_upper()
}
