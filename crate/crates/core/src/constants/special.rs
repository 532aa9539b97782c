use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};

use crate::exact::{bernoulli, factorial, kronecker_symbol, rat, Rational};
use crate::realball::{ln2, pi, BallError, Mag, RealBall};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstError {
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Ball(#[from] BallError),
}

pub fn const_pi(prec: u32) -> RealBall {
    pi(prec)
}

pub fn const_log(q: &Rational, prec: u32) -> Result<RealBall, ConstError> {
    if !q.is_positive() {
        return Err(ConstError::Domain(format!("log of non-positive {q}")));
    }
    if q == &rat(2) {
        return Ok(ln2(prec));
    }
    Ok(RealBall::from_rational(q, prec + 8).log()?.with_prec(prec))
}

/// `zeta(s, a) = sum_{n >= 0} (n + a)^-s` for integer `s >= 2` and `a > 0`,
/// by Euler-Maclaurin summation. The remainder after the last Bernoulli
/// term is bounded by the first omitted term (the summand is completely
/// monotone).
pub fn hurwitz_zeta(s: u32, a: &Rational, prec: u32) -> Result<RealBall, ConstError> {
    if s < 2 {
        return Err(ConstError::Domain(format!("Hurwitz zeta needs s >= 2, got {s}")));
    }
    if !a.is_positive() {
        return Err(ConstError::Domain(format!("Hurwitz zeta needs a > 0, got {a}")));
    }
    let work = prec + 24;
    let n_direct = (work as f64 * 0.12).ceil() as i64 + 10;
    let si = s as i64;
    let mut acc = RealBall::zero(work);
    for n in 0..n_direct {
        let x = RealBall::from_rational(&(a + rat(n)), work);
        acc = acc.add(&x.pow_i64(-si)?);
    }
    let y = RealBall::from_rational(&(a + rat(n_direct)), work);
    let yinv = y.inv()?;
    let y1s = yinv.pow_i64(si - 1)?; // y^(1-s)
    acc = acc.add(&y1s.div_i64(si - 1));
    let ys = y1s.mul(&yinv); // y^-s
    acc = acc.add(&ys.mul_pow2(-1));
    let yinv2 = yinv.sqr();
    // term_j = B_2j/(2j)! * (s)_(2j-1) * y^(-s-2j+1)
    let mut pw = y1s.clone();
    let mut rising = Rational::one(); // (s)_(2j-1)
    let mut j: u64 = 1;
    let cutoff = -(work as f64) - 8.0;
    loop {
        pw = pw.mul(&yinv2);
        if j == 1 {
            rising = rat(si);
        } else {
            let base = si + 2 * j as i64 - 3;
            rising = rising * rat(base) * rat(base + 1);
        }
        let c = bernoulli(2 * j) * &rising / Rational::from_integer(factorial(2 * j));
        let term = pw.mul_rational(&c);
        let mag = term.mag_upper();
        if mag.log2() < cutoff || j > 4000 {
            // first omitted term bounds the remainder
            return Ok(acc.add_error(&mag).with_prec(prec));
        }
        acc = acc.add(&term);
        j += 1;
    }
}

pub fn const_zeta(n: u32, prec: u32) -> Result<RealBall, ConstError> {
    if n < 2 {
        return Err(ConstError::Domain(format!("zeta({n}) is not finite")));
    }
    if n.is_multiple_of(2) {
        // zeta(n) = |B_n| (2 pi)^n / (2 n!)
        let b = bernoulli(n as u64).abs() / Rational::from_integer(factorial(n as u64) * 2);
        let work = prec + 16;
        let tp = pi(work).mul_pow2(1).pow_i64(n as i64)?;
        return Ok(tp.mul_rational(&b).with_prec(prec));
    }
    hurwitz_zeta(n, &rat(1), prec)
}

/// `L(s, chi_d)` for the Kronecker character of discriminant `d`.
pub fn const_dirichlet_l(d: i64, s: u32, prec: u32) -> Result<RealBall, ConstError> {
    let q = d.unsigned_abs() as i64;
    if q < 3 {
        return Err(ConstError::Domain(format!("unsupported discriminant {d}")));
    }
    let work = prec + 8;
    let mut acc = RealBall::zero(work);
    for a in 1..q {
        let c = kronecker_symbol(d, a);
        if c == 0 {
            continue;
        }
        let z = hurwitz_zeta(s, &Rational::new(BigInt::from(a), BigInt::from(q)), work)?;
        acc = if c > 0 { acc.add(&z) } else { acc.sub(&z) };
    }
    let scale = RealBall::from_i64(q, work).pow_i64(s as i64)?;
    Ok(acc.div(&scale)?.with_prec(prec))
}

/// Dirichlet beta `sum (-1)^k/(2k+1)^n`.
pub fn const_beta(n: u32, prec: u32) -> Result<RealBall, ConstError> {
    if n == 0 {
        return Err(ConstError::Domain("beta(0)".into()));
    }
    if n == 1 {
        return Ok(pi(prec).mul_pow2(-2));
    }
    const_dirichlet_l(-4, n, prec)
}

/// `Gamma(x)` for rational `x > 0`: Stirling series after raising the
/// argument, with the Bernoulli remainder bound.
pub fn const_gamma_rational(x: &Rational, prec: u32) -> Result<RealBall, ConstError> {
    if !x.is_positive() {
        return Err(ConstError::Domain(format!("Gamma at non-positive {x}")));
    }
    let work = prec + 40;
    let target = (work as f64 * 0.12).ceil() as i64 + 10;
    let fl = x.floor().to_integer().to_i64().unwrap_or(0);
    let shift = (target - fl).max(0);
    let y = x + rat(shift);
    let mut prod = Rational::one();
    for i in 0..shift {
        prod *= x + rat(i);
    }
    let yb = RealBall::from_rational(&y, work);
    let logy = yb.log()?;
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let mut lg = yb.sub(&RealBall::from_rational(&half, work)).mul(&logy).sub(&yb);
    let log2pi = pi(work).mul_pow2(1).log()?;
    lg = lg.add(&log2pi.mul_pow2(-1));
    let yinv = yb.inv()?;
    let yinv2 = yinv.sqr();
    let mut pw = yinv.clone(); // y^-(2j-1)
    let cutoff = -(work as f64) - 8.0;
    let mut j: u64 = 1;
    loop {
        let c = bernoulli(2 * j) / rat((2 * j * (2 * j - 1)) as i64);
        let term = pw.mul_rational(&c);
        let mag = term.mag_upper();
        if mag.log2() < cutoff || j > 4000 {
            lg = lg.add_error(&mag);
            break;
        }
        lg = lg.add(&term);
        pw = pw.mul(&yinv2);
        j += 1;
    }
    let g = lg.exp()?;
    Ok(g.div(&RealBall::from_rational(&prod, work))?.with_prec(prec))
}

pub fn const_sqrt(q: &Rational, prec: u32) -> Result<RealBall, ConstError> {
    if q.is_negative() {
        return Err(ConstError::Domain(format!("sqrt of negative {q}")));
    }
    Ok(RealBall::from_rational(q, prec + 8).sqrt()?.with_prec(prec))
}

pub fn const_phi(prec: u32) -> RealBall {
    let s5 = RealBall::from_i64(5, prec + 8).sqrt().unwrap();
    s5.add(&RealBall::from_i64(1, prec + 8)).mul_pow2(-1).with_prec(prec)
}

/// `zeta(2, a) = sum_j (j+1) (-t)^j zeta(j+2)` around the nearer of 0 and 1,
/// used as an independent route to `L(2, chi)`.
fn hurwitz2_taylor(a: &Rational, prec: u32, zetas: &mut Vec<RealBall>) -> Result<RealBall, ConstError> {
    let work = prec + 16;
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    // for a <= 1/2: zeta(2,a) = a^-2 + zeta(2, 1+a), t = a with alternating sign;
    // otherwise zeta(2, 1 - t) with t = 1 - a.
    let (lead, t, sign) = if a <= &half {
        (Some(a.clone()), a.clone(), -1i64)
    } else {
        (None, rat(1) - a, 1i64)
    };
    let tf = t.to_f64().unwrap();
    let mut acc = RealBall::zero(work);
    if let Some(a) = lead {
        acc = acc.add(&RealBall::from_rational(&(rat(1) / (&a * &a)), work));
    }
    let mut tp = Rational::one();
    let mut j: u64 = 0;
    loop {
        if zetas.len() <= j as usize {
            zetas.push(const_zeta(j as u32 + 2, work)?);
        }
        let z = &zetas[j as usize];
        let coef = &tp * rat(j as i64 + 1);
        acc = acc.add(&z.mul_rational(&coef));
        j += 1;
        tp = tp * &t * rat(sign);
        // tail <= 2 t^J ((J+1)/(1-t) + t/(1-t)^2), using zeta <= 2
        let jj = j as f64;
        let bound = 2.0 * tf.powf(jj) * ((jj + 1.0) / (1.0 - tf) + tf / ((1.0 - tf) * (1.0 - tf)));
        if bound.log2() < -(work as f64) - 4.0 {
            let e = Mag::from_rational_up(&Rational::from_float(bound * 2.0).unwrap());
            return Ok(acc.add_error(&e).with_prec(prec));
        }
    }
}

/// `L(2, chi_d)` from Taylor expansions in integer zeta values.
pub fn dirichlet_l2_taylor(d: i64, prec: u32) -> Result<RealBall, ConstError> {
    let q = d.unsigned_abs() as i64;
    let work = prec + 8;
    let mut acc = RealBall::zero(work);
    let mut zetas = Vec::new();
    for a in 1..q {
        let c = kronecker_symbol(d, a);
        if c == 0 {
            continue;
        }
        let z = hurwitz2_taylor(&Rational::new(BigInt::from(a), BigInt::from(q)), work + 8, &mut zetas)?;
        acc = if c > 0 { acc.add(&z) } else { acc.sub(&z) };
    }
    Ok(acc.div_i64(q * q).with_prec(prec))
}
