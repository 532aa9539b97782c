//! Generators and property bodies shared by the unit suites and the
//! acceptance runner.
#![allow(dead_code)]

use hcert::exact::{harmonic, rat, ratio, reduce_mod, Rational};
use hcert::expr::parse_summand;
use hcert::constants::{ConstantKernel, ConstantKey};
use hcert::discover::pslq;
use hcert::realball::RealBall;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

// Random summand sources built from the grammar's summand fragment.
pub fn lin_src() -> impl Strategy<Value = String> {
    (1i64..4, -3i64..4).prop_map(|(a, b)| format!("({a}k{b:+})"))
}

pub fn factor_src() -> impl Strategy<Value = String> {
    prop_oneof![
        (1i64..20, 1i64..9).prop_map(|(n, d)| format!("{n}/{d}")),
        lin_src(),
        (lin_src(), 1i64..3).prop_map(|(l, e)| format!("{l}^{e}")),
        (1i64..4, 0i64..3, 1i64..3, -1i64..3).prop_map(|(a, b, e, s)| {
            let e = if s < 0 { -e } else { e };
            format!("C({a}k+{b},k)^({e})")
        }),
        prop_oneof![Just(-1i64), Just(2), Just(-8), Just(16), Just(27)].prop_map(|b| format!("({b})^k")),
        prop_oneof![Just(1i64), Just(2), Just(4)].prop_map(|b| format!("1/{b}^k")),
        Just("k".to_string()),
    ]
}

pub fn mono_src() -> impl Strategy<Value = String> {
    (
        prop::collection::vec(factor_src(), 1..4),
        prop::collection::vec(lin_src(), 0..2),
        prop::option::of((lin_src(), 1u32..4)),
        any::<bool>(),
    )
        .prop_map(|(num, den, h, neg)| {
            let mut s = num.join("*");
            if let Some((l, m)) = h {
                s = format!("{s}*H({l},{m})");
            }
            if !den.is_empty() {
                s = format!("{s}/({})", den.join("*"));
            }
            if neg {
                format!("-{s}")
            } else {
                s
            }
        })
}

pub fn summand_src() -> impl Strategy<Value = String> {
    prop::collection::vec(mono_src(), 1..4).prop_map(|v| v.join(" + "))
}

/// Printing a parsed summand and parsing it again is the identity.
pub fn check_round_trip(src: &str) -> Result<(), TestCaseError> {
    let a = parse_summand(src).unwrap();
    let printed = a.to_string();
    let b = parse_summand(&printed).unwrap();
    prop_assert_eq!(&a, &b, "{} -> {}", src, printed);
    prop_assert_eq!(printed, b.to_string());
    Ok(())
}

/// `|ball - x| <= slack` for some point of the ball.
pub fn near(b: &RealBall, x: &Rational, slack: &Rational) -> bool {
    (b.mid().to_rational() - x).abs() <= b.rad().to_rational() + slack
}

// Oracle: exp(a) by an exact Taylor sum with remainder bound.
pub fn exp_oracle(a: &Rational, n: usize) -> (Rational, Rational) {
    let mut term = rat(1);
    let mut s = rat(1);
    for j in 1..=n {
        term = term * a / rat(j as i64);
        s += &term;
    }
    let next = (&term * a / rat(n as i64 + 1)).abs();
    (s, next * rat(200))
}

pub fn arb_rat() -> impl Strategy<Value = Rational> {
    (-100_000i64..100_000, 1i64..10_000).prop_map(|(n, d)| ratio(n, d))
}

pub fn ball_around(x: &Rational, prec: u32, wide: bool) -> RealBall {
    if wide {
        let w = ratio(1, 1_000_000);
        RealBall::from_endpoints(&(x - &w), &(x + &w), prec)
    } else {
        RealBall::from_rational(x, prec)
    }
}

/// Ball operation `op` on enclosures of `a` and `b` contains the exact result.
pub fn check_ball_op(a: &Rational, b: &Rational, prec: u32, wide: bool, op: u8) -> Result<(), TestCaseError> {
    let (a, b) = (a.clone(), b.clone());
    let ba = ball_around(&a, prec, wide);
    let bb = ball_around(&b, prec, wide);
    match op {
        0 => prop_assert!(ba.add(&bb).contains_rational(&(&a + &b))),
        1 => prop_assert!(ba.sub(&bb).contains_rational(&(&a - &b))),
        2 => prop_assert!(ba.mul(&bb).contains_rational(&(&a * &b))),
        3 => {
            if let Ok(q) = ba.div(&bb) {
                prop_assert!(q.contains_rational(&(&a / &b)));
            }
        }
        4 => {
            let x = a.abs();
            let bx = ball_around(&x, prec, wide);
            if let Ok(s) = bx.sqrt() {
                // lo^2 <= x <= hi^2
                let m = s.mid().to_rational();
                let r = s.rad().to_rational();
                let lo = &m - &r;
                let hi = &m + &r;
                prop_assert!(hi.is_positive() && &hi * &hi >= x);
                prop_assert!(lo <= Rational::zero() || &lo * &lo <= x);
            }
        }
        5 => {
            let n = (b.numer() % BigInt::from(7)).try_into().unwrap_or(0i64);
            if let Ok(pw) = ba.pow_i64(n) {
                let mut exact = Rational::one();
                let base = if n < 0 { a.recip() } else { a.clone() };
                for _ in 0..n.abs() {
                    exact *= &base;
                }
                prop_assert!(pw.contains_rational(&exact));
            }
        }
        6 => {
            let x = &a / rat(20_000);
            let (v, err) = exp_oracle(&x, 60);
            let e = ball_around(&x, prec, wide).exp().unwrap();
            prop_assert!(near(&e, &v, &err));
        }
        _ => prop_assert!(RealBall::from_rational(&a, prec).contains_rational(&a)),
    }
    Ok(())
}

pub fn small_rational() -> impl Strategy<Value = Rational> {
    (-2000i64..2000, 1i64..2000).prop_map(|(n, d)| ratio(n, d))
}

/// ModPK arithmetic commutes with reduction of rationals modulo `p^e`.
pub fn check_modpk_op(a: &Rational, b: &Rational, pi: usize, e: u32, op: u8) -> Result<(), TestCaseError> {
    let (a, b) = (a.clone(), b.clone());
    let p = [3u64, 5, 7, 11, 13][pi];
    let ma = reduce_mod(&a, p, e);
    let mb = reduce_mod(&b, p, e);
    let (exact, modular) = match op {
        0 => (&a + &b, ma.add(&mb)),
        1 => (&a - &b, ma.sub(&mb)),
        2 => (&a * &b, ma.mul(&mb)),
        _ => {
            if b.is_zero() {
                return Ok(());
            }
            (&a / &b, ma.div(&mb).unwrap())
        }
    };
    let expect = reduce_mod(&exact, p, e);
    prop_assert!(modular == expect, "{} vs {}", modular, expect);
    Ok(())
}

/// `H_2n(m) - H_n(m) / 2^m` is the sum of `1/j^m` over odd `j <= 2n`.
pub fn odd_index_identity(n_max: u64) -> Result<(), String> {
    for m in 1..=3u32 {
        for n in 0..=n_max {
            let lhs = harmonic(2 * n, m) - harmonic(n, m) / Rational::from_integer(BigInt::from(2).pow(m));
            let mut odd = Rational::zero();
            let mut j = 1u64;
            while j <= 2 * n {
                odd += Rational::new(BigInt::one(), BigInt::from(j).pow(m));
                j += 2;
            }
            if lhs != odd {
                return Err(format!("n={n} m={m}"));
            }
        }
    }
    Ok(())
}

const PLANT_PREC: u32 = 400;

// Constants independent over the rationals: logs of distinct primes,
// square roots of distinct squarefree integers and pi.
fn pool(k: &ConstantKernel) -> Vec<RealBall> {
    let mut v = vec![k.get(&ConstantKey::Pi, PLANT_PREC).unwrap()];
    for q in [2, 3, 5] {
        v.push(k.get(&ConstantKey::LogQ(rat(q)), PLANT_PREC).unwrap());
        v.push(k.get(&ConstantKey::SqrtQ(rat(q)), PLANT_PREC).unwrap());
    }
    v
}

fn content_free(c: &[i64]) -> Vec<BigInt> {
    let g = c.iter().fold(0i64, |g, &x| num_integer::gcd(g, x));
    let s = if c.iter().find(|&&x| x != 0).unwrap() < &0 { -1 } else { 1 };
    c.iter().map(|&x| BigInt::from(s * x / g)).collect()
}

/// Pool indices, coefficients for them and the coefficient of the planted value.
pub fn planted_inputs() -> impl Strategy<Value = (Vec<usize>, Vec<i64>, i64)> {
    (
        proptest::sample::subsequence((0..7).collect::<Vec<usize>>(), 2..=4),
        proptest::collection::vec(-100i64..=100, 5),
        1i64..=100,
    )
}

/// PSLQ recovers a relation planted among pool constants.
pub fn check_planted(idx: &[usize], coef: &[i64], last: i64) -> Result<(), TestCaseError> {
    let k = ConstantKernel::new();
    let pool = pool(&k);
    let m = idx.len();
    let mut c: Vec<i64> = coef[..m].to_vec();
    prop_assume!(c.iter().any(|&x| x != 0));
    c.push(last);
    // x_last = -(sum c_i x_i) / last, so that sum c_i x_i + last x_last = 0
    let mut acc = RealBall::zero(PLANT_PREC);
    for (i, &j) in idx.iter().enumerate() {
        acc = acc.add(&pool[j].mul(&RealBall::from_i64(c[i], PLANT_PREC)));
    }
    let x_last = acc.neg().div(&RealBall::from_i64(last, PLANT_PREC)).unwrap();
    let mut vals: Vec<RealBall> = idx.iter().map(|&j| pool[j].clone()).collect();
    vals.push(x_last);
    let r = pslq(&vals, &BigInt::from(100), 60).unwrap();
    prop_assert_eq!(r.coefficients, Some(content_free(&c)));
    prop_assert!(r.residual.unwrap() < 1e-60);
    Ok(())
}
