use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{rat, Rational};

/// `H_n^(m) = sum_{j=1}^n 1/j^m`, with `H_0^(m) = 0`.
pub fn harmonic(n: u64, m: u32) -> Rational {
    let mut acc = Rational::zero();
    for j in 1..=n {
        acc += Rational::new(BigInt::one(), BigInt::from(j).pow(m));
    }
    acc
}

/// Binomial coefficient with the convention `C(n, k) = 0` outside `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, j| acc * j)
}

static TANGENT: Mutex<Vec<BigInt>> = Mutex::new(Vec::new());
static SECANT: Mutex<Vec<BigInt>> = Mutex::new(Vec::new());

/// Tangent numbers `T_1..T_n` (index 0 unused), extended on demand.
fn tangent_numbers(n: usize) -> Vec<BigInt> {
    let mut cache = TANGENT.lock().unwrap();
    if cache.len() <= n {
        let size = (n + 1).max(2 * cache.len());
        let mut t = vec![BigInt::zero(); size];
        t[1] = BigInt::one();
        for k in 2..size {
            t[k] = &t[k - 1] * (k - 1);
        }
        for k in 2..size {
            for j in k..size {
                t[j] = &t[j - 1] * (j - k) + &t[j] * (j - k + 2);
            }
        }
        *cache = t;
    }
    cache[..=n].to_vec()
}

/// Secant numbers `S_0..S_n` with `E_{2n} = (-1)^n S_n`.
fn secant_numbers(n: usize) -> Vec<BigInt> {
    let mut cache = SECANT.lock().unwrap();
    if cache.len() <= n {
        let size = (n + 1).max(2 * cache.len());
        let mut s = vec![BigInt::zero(); size];
        s[0] = BigInt::one();
        for k in 1..size {
            s[k] = &s[k - 1] * k;
        }
        for k in 1..size {
            for j in (k + 1)..size {
                s[j] = &s[j - 1] * (j - k) + &s[j] * (j - k + 1);
            }
        }
        *cache = s;
    }
    cache[..=n].to_vec()
}

/// Bernoulli number `B_n` with `B_1 = -1/2`.
pub fn bernoulli(n: u64) -> Rational {
    match n {
        0 => rat(1),
        1 => Rational::new(BigInt::from(-1), BigInt::from(2)),
        _ if n % 2 == 1 => Rational::zero(),
        _ => {
            let h = (n / 2) as usize;
            let t = tangent_numbers(h).swap_remove(h);
            let four = BigInt::one() << (2 * h);
            let num = t * BigInt::from(2 * h as u64);
            let den = &four * (&four - 1u32);
            let b = Rational::new(num, den);
            if h % 2 == 1 {
                b
            } else {
                -b
            }
        }
    }
}

/// Euler number `E_n` (`E_0 = 1, E_2 = -1, E_4 = 5`, odd ones vanish).
pub fn euler(n: u64) -> Rational {
    if n % 2 == 1 {
        return Rational::zero();
    }
    let h = (n / 2) as usize;
    let s = secant_numbers(h).swap_remove(h);
    Rational::from_integer(if h.is_multiple_of(2) { s } else { -s })
}

/// `B_n(x) = sum_j C(n,j) B_j x^(n-j)`.
pub fn bernoulli_poly(n: u64, x: &Rational) -> Rational {
    let mut acc = Rational::zero();
    let mut xp = Rational::one();
    // accumulate from the top coefficient down so powers of x grow
    for j in (0..=n).rev() {
        let b = bernoulli(j);
        if !b.is_zero() {
            acc += b * Rational::from_integer(binomial(n as i64, j as i64)) * &xp;
        }
        xp *= x;
    }
    acc
}

/// `E_n(x) = sum_j C(n,j) E_j / 2^j (x - 1/2)^(n-j)`.
pub fn euler_poly(n: u64, x: &Rational) -> Rational {
    let y = x - Rational::new(BigInt::one(), BigInt::from(2));
    let mut acc = Rational::zero();
    let mut yp = Rational::one();
    for j in (0..=n).rev() {
        let e = euler(j);
        if !e.is_zero() {
            let w = Rational::new(binomial(n as i64, j as i64), BigInt::one() << j);
            acc += e * w * &yp;
        }
        yp *= &y;
    }
    acc
}
