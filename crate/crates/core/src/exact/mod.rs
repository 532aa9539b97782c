//! Exact rational arithmetic, classical number sequences and truncated
//! p-adic values.

mod modpk;
mod numbers;
mod primes;

pub use modpk::{ModPK, ModPKError, GUARD_DIGITS};
pub use numbers::{
    bernoulli, bernoulli_poly, binomial, euler, euler_poly, factorial, harmonic,
};
pub use primes::{
    bernoulli_mod, bernoulli_poly_mod, euler_mod, euler_poly_mod, fermat_quotient,
    kronecker_symbol, p_valuation, primes_between, reduce_mod, IndexError, PrimeCtx,
};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Normalized fraction of arbitrary-precision integers.
pub type Rational = BigRational;

/// Shorthand for building an integer rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `n / d`. Panics when `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}
