use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::numbers::{bernoulli, bernoulli_poly, euler, euler_poly};
use super::{ModPK, Rational};

/// Primes in `[lo, hi]`, ascending.
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 {
        return Vec::new();
    }
    let n = hi as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (lo.max(2)..=hi).filter(|&k| sieve[k as usize]).collect()
}

/// p-adic valuation of a non-zero integer.
pub fn p_valuation(n: &BigInt, p: u64) -> u64 {
    assert!(!n.is_zero());
    let mut m = n.abs();
    let mut v = 0;
    let pb = BigInt::from(p);
    while (&m % &pb).is_zero() {
        m /= &pb;
        v += 1;
    }
    v
}

/// `r` as `p^v * u` modulo `p^e` (with guard digits).
pub fn reduce_mod(r: &Rational, p: u64, e: u32) -> ModPK {
    ModPK::from_rational(r, p, e)
}

/// Kronecker symbol `(a/n)`.
pub fn kronecker_symbol(a: i64, n: i64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut a = a as i128;
    let mut n = n as i128;
    let mut k: i32 = 1;
    if n < 0 {
        n = -n;
        if a < 0 {
            k = -k;
        }
    }
    let mut twos = 0;
    while n % 2 == 0 {
        n /= 2;
        twos += 1;
    }
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if twos % 2 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                k = -k;
            }
        }
    }
    // n is odd and positive; Jacobi symbol
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                k = -k;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            k = -k;
        }
        a %= n;
    }
    if n == 1 {
        k
    } else {
        0
    }
}

/// Fermat quotient `q_p(a) = (a^(p-1) - 1)/p` modulo `p^e` (plus guard).
/// Requires `p ∤ a`.
pub fn fermat_quotient(a: &BigInt, p: u64, e: u32) -> Option<ModPK> {
    let pb = BigInt::from(p);
    if (a % &pb).is_zero() {
        return None;
    }
    let digits = ModPK::working_digits(e);
    let m = BigUint::from(p).pow(digits + 1);
    let base = a.mod_floor(&BigInt::from(m.clone())).to_biguint().unwrap();
    let x = base.modpow(&BigUint::from(p - 1), &m);
    let q = if x.is_zero() { &m - BigUint::one() } else { x - BigUint::one() };
    debug_assert!((&q % p).is_zero());
    let q = q / p;
    Some(ModPK::from_int(&BigInt::from(q), p, e))
}

/// Per-prime context for the modular Bernoulli/Euler values.
#[derive(Debug, Clone, Copy)]
pub struct PrimeCtx {
    pub p: u64,
    pub e: u32,
}

impl PrimeCtx {
    pub fn new(p: u64, e: u32) -> Self {
        PrimeCtx { p, e }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IndexError {
    #[error("index {n} outside the admissible range for p = {p}")]
    OutOfRange { n: i64, p: u64 },
    #[error("p = {p} divides the denominator of the argument")]
    BadArgument { p: u64 },
}

/// `B_n mod p^e` for `0 <= n <= p - 3`, where `B_n` is p-integral.
pub fn bernoulli_mod(n: i64, ctx: &PrimeCtx) -> Result<ModPK, IndexError> {
    if n < 0 || n > ctx.p as i64 - 3 {
        return Err(IndexError::OutOfRange { n, p: ctx.p });
    }
    Ok(ModPK::from_rational(&bernoulli(n as u64), ctx.p, ctx.e))
}

/// `E_n mod p^e` for `0 <= n <= p - 1`.
pub fn euler_mod(n: i64, ctx: &PrimeCtx) -> Result<ModPK, IndexError> {
    if n < 0 || n > ctx.p as i64 - 1 {
        return Err(IndexError::OutOfRange { n, p: ctx.p });
    }
    Ok(ModPK::from_rational(&euler(n as u64), ctx.p, ctx.e))
}

fn check_arg(x: &Rational, p: u64) -> Result<(), IndexError> {
    if (x.denom() % BigInt::from(p)).is_zero() {
        Err(IndexError::BadArgument { p })
    } else {
        Ok(())
    }
}

/// `B_n(x) mod p^e` for p-integral `x` and `0 <= n <= p - 2`.
pub fn bernoulli_poly_mod(n: i64, x: &Rational, ctx: &PrimeCtx) -> Result<ModPK, IndexError> {
    if n < 0 || n > ctx.p as i64 - 2 {
        return Err(IndexError::OutOfRange { n, p: ctx.p });
    }
    check_arg(x, ctx.p)?;
    Ok(ModPK::from_rational(&bernoulli_poly(n as u64, x), ctx.p, ctx.e))
}

/// `E_n(x) mod p^e` for p-integral `x` and `0 <= n <= p - 1`.
pub fn euler_poly_mod(n: i64, x: &Rational, ctx: &PrimeCtx) -> Result<ModPK, IndexError> {
    if n < 0 || n > ctx.p as i64 - 1 {
        return Err(IndexError::OutOfRange { n, p: ctx.p });
    }
    check_arg(x, ctx.p)?;
    Ok(ModPK::from_rational(&euler_poly(n as u64, x), ctx.p, ctx.e))
}
