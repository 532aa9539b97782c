use hcert::exact::*;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

mod common;
use common::{check_modpk_op, odd_index_identity, small_rational};

fn q(n: i64, d: i64) -> Rational {
    ratio(n, d)
}

// Oracle: B_n from sum_{j=0}^{n} C(n+1, j) B_j = 0.
fn bernoulli_oracle(upto: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = vec![rat(1)];
    for n in 1..=upto {
        let mut s = Rational::zero();
        for (j, bj) in b.iter().enumerate() {
            s += Rational::from_integer(binomial(n as i64 + 1, j as i64)) * bj;
        }
        b.push(-s / rat(n as i64 + 1));
    }
    b
}

// Oracle: E_n from sum_{j even} C(n, j) E_j = 0 for even n > 0.
fn euler_oracle(upto: usize) -> Vec<Rational> {
    let mut e: Vec<Rational> = vec![rat(1)];
    for n in 1..=upto {
        if n % 2 == 1 {
            e.push(Rational::zero());
            continue;
        }
        let mut s = Rational::zero();
        for j in (0..n).step_by(2) {
            s += Rational::from_integer(binomial(n as i64, j as i64)) * &e[j];
        }
        e.push(-s);
    }
    e
}

#[test]
fn harmonic_examples() {
    assert_eq!(harmonic(4, 1), q(25, 12));
    assert_eq!(harmonic(3, 2), q(49, 36));
    assert_eq!(harmonic(0, 3), rat(0));
}

#[test]
fn harmonic_recurrence() {
    for m in 1..=3u32 {
        let mut prev = Rational::zero();
        for n in 1..=500u64 {
            let h = if n % 97 == 0 { harmonic(n, m) } else { &prev + Rational::new(BigInt::one(), BigInt::from(n).pow(m)) };
            assert_eq!(h, &prev + Rational::new(BigInt::one(), BigInt::from(n).pow(m)));
            prev = h;
        }
        assert_eq!(prev, harmonic(500, m));
    }
}

#[test]
fn odd_index_identity_to_200() {
    odd_index_identity(200).unwrap();
}

#[test]
fn bernoulli_matches_recurrence() {
    let o = bernoulli_oracle(80);
    for (n, b) in o.iter().enumerate() {
        assert_eq!(&bernoulli(n as u64), b, "B_{n}");
    }
    assert_eq!(bernoulli(1), q(-1, 2));
}

#[test]
fn euler_matches_recurrence() {
    let o = euler_oracle(80);
    for (n, e) in o.iter().enumerate() {
        assert_eq!(&euler(n as u64), e, "E_{n}");
    }
    assert_eq!(euler(4), rat(5));
}

#[test]
fn polynomials_at_small_points() {
    // B_n(0) = B_n for n != 1, E_n(1/2) = E_n / 2^n
    for n in 0..20u64 {
        if n != 1 {
            assert_eq!(bernoulli_poly(n, &rat(0)), bernoulli(n));
        }
        let e = euler(n) / Rational::from_integer(BigInt::from(2).pow(n as u32));
        assert_eq!(euler_poly(n, &q(1, 2)), e);
    }
    assert_eq!(bernoulli_poly(2, &q(1, 3)), q(1, 9) - q(1, 3) + q(1, 6));
}

#[test]
fn reduce_examples() {
    let a = reduce_mod(&q(49, 20), 7, 3);
    assert_eq!(a.valuation(), Some(2));
    assert_eq!(a.truncated().unwrap().unit().unwrap() % 7u32, 6u32.into());
    let b = reduce_mod(&q(1, 3), 5, 2);
    assert_eq!(b.residue().unwrap(), 17u32.into());
    let x = ModPK::from_parts(5, 2, 1, 1u32.into(), 10);
    let y = ModPK::from_parts(5, 2, 0, 3u32.into(), 10);
    let s = x.add(&y);
    assert_eq!(s.valuation(), Some(0));
    assert_eq!(s.residue().unwrap(), 8u32.into());
    let two = ModPK::from_i64(2, 5, 2);
    assert_eq!(two.inv().unwrap().residue().unwrap(), 13u32.into());
}

#[test]
fn modular_sequences() {
    let c7 = PrimeCtx::new(7, 1);
    let c5 = PrimeCtx::new(5, 1);
    assert_eq!(bernoulli_mod(2, &c7).unwrap().residue().unwrap(), 6u32.into());
    assert_eq!(euler_mod(2, &c5).unwrap().residue().unwrap(), 4u32.into());
    assert_eq!(bernoulli_poly_mod(1, &q(1, 3), &c7).unwrap().residue().unwrap(), 1u32.into());
    assert_eq!(euler_poly_mod(1, &q(1, 4), &c7).unwrap().residue().unwrap(), 5u32.into());
    assert_eq!(euler_poly_mod(2, &q(1, 2), &c5).unwrap().residue().unwrap(), 1u32.into());
    assert!(bernoulli_mod(5, &c7).is_err());
    assert!(bernoulli_poly_mod(1, &q(1, 7), &c7).is_err());
}

#[test]
fn fermat_quotient_examples() {
    assert_eq!(fermat_quotient(&BigInt::from(2), 3, 1).unwrap().residue().unwrap(), 1u32.into());
    assert_eq!(fermat_quotient(&BigInt::from(2), 5, 1).unwrap().residue().unwrap(), 3u32.into());
    assert!(fermat_quotient(&BigInt::from(10), 5, 1).is_none());
}

#[test]
fn fermat_quotient_additivity() {
    for p in primes_between(3, 200) {
        for (a, b) in [(2i64, 3i64), (2, 2), (3, 7), (6, 35), (11, 13)] {
            if (a as u64).is_multiple_of(p) || (b as u64).is_multiple_of(p) {
                continue;
            }
            let qa = fermat_quotient(&BigInt::from(a), p, 1).unwrap();
            let qb = fermat_quotient(&BigInt::from(b), p, 1).unwrap();
            let qab = fermat_quotient(&BigInt::from(a * b), p, 1).unwrap();
            assert!(qab.congruent(&qa.add(&qb)).unwrap(), "p={p} a={a} b={b}");
        }
    }
}

// Oracle: Euler's criterion for odd primes.
fn legendre_oracle(a: i64, p: u64) -> i32 {
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    let mut acc = 1u64;
    for _ in 0..(p - 1) / 2 {
        acc = acc * r % p;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

#[test]
fn kronecker_examples_and_legendre() {
    assert_eq!(kronecker_symbol(-3, 7), 1);
    assert_eq!(kronecker_symbol(2, 7), 1);
    assert_eq!(kronecker_symbol(2, 5), -1);
    assert_eq!(kronecker_symbol(5, 1), 1);
    for p in primes_between(3, 200) {
        for a in -30..30 {
            assert_eq!(kronecker_symbol(a, p as i64), legendre_oracle(a, p), "({a}/{p})");
        }
    }
}

#[test]
fn wolstenholme_to_500() {
    for p in primes_between(5, 500) {
        let h1 = reduce_mod(&harmonic(p - 1, 1), p, 2);
        assert!(h1.is_zero_mod_target().unwrap(), "p={p}");
        let h2 = reduce_mod(&harmonic(p - 1, 2), p, 1);
        assert!(h2.is_zero_mod_target().unwrap(), "p={p}");
    }
}

#[test]
fn glaisher_to_200() {
    for p in primes_between(5, 200) {
        let ctx3 = PrimeCtx::new(p, 3);
        let b = bernoulli_mod(p as i64 - 3, &ctx3).unwrap();
        let pp = ModPK::from_i64(p as i64, p, 3);
        let rhs = pp.mul(&pp).mul(&b).mul(&reduce_mod(&q(-1, 3), p, 3));
        assert!(reduce_mod(&harmonic(p - 1, 1), p, 3).congruent(&rhs).unwrap(), "p={p}");
        let ctx2 = PrimeCtx::new(p, 2);
        let b = bernoulli_mod(p as i64 - 3, &ctx2).unwrap();
        let rhs = ModPK::from_i64(p as i64, p, 2).mul(&b).mul(&reduce_mod(&q(2, 3), p, 2));
        assert!(reduce_mod(&harmonic(p - 1, 2), p, 2).congruent(&rhs).unwrap(), "p={p}");
    }
}

#[test]
fn binomial_conventions() {
    assert_eq!(binomial(6, 3), BigInt::from(20));
    assert_eq!(binomial(3, 5), BigInt::zero());
    assert_eq!(binomial(3, -1), BigInt::zero());
    assert_eq!(factorial(5), BigInt::from(120));
}

#[test]
fn inexact_zero_is_reported() {
    // 1/p^3 * (p^3 * x) loses digits only through cancellation
    let p = 5;
    let a = ModPK::from_rational(&q(1, 125), p, 2);
    let b = ModPK::from_rational(&q(-1, 125), p, 2);
    let z = a.add(&b);
    assert!(z.valuation().is_none());
    let scaled = z.shift(3);
    assert!(scaled.is_zero_mod_target().unwrap());
    let big = z.shift(-30);
    assert!(big.truncated().is_err());
}


proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn modpk_agrees_with_rationals(
        a in small_rational(),
        b in small_rational(),
        pi in 0usize..5,
        e in 1u32..=4,
        op in 0u8..4,
    ) {
        check_modpk_op(&a, &b, pi, e, op)?;
    }
}
