use hcert::constants::*;
use hcert::exact::{binomial, rat, ratio, Rational};
use hcert::realball::{ball_compare, pi, RealBall, Verdict};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

fn decimal(s: &str) -> Rational {
    let (i, f) = s.split_once('.').unwrap();
    let n: BigInt = format!("{i}{f}").parse().unwrap();
    Rational::new(n, BigInt::from(10).pow(f.len() as u32))
}

fn agrees(b: &RealBall, s: &str) -> bool {
    let digits = s.split_once('.').unwrap().1.len() as u32;
    let tol = Rational::new(BigInt::from(1), BigInt::from(10).pow(digits));
    (b.mid().to_rational() - decimal(s)).abs() <= b.rad().to_rational() + tol
}

// Oracle: zeta(3) = 5/2 sum (-1)^(k-1) / (k^3 C(2k,k)), alternating with
// decreasing terms, so the first omitted term bounds the error.
fn zeta3_oracle(terms: i64) -> (Rational, Rational) {
    let mut s = Rational::zero();
    for k in 1..=terms {
        let t = Rational::new(BigInt::from(1), BigInt::from(k).pow(3) * binomial(2 * k, k));
        if k % 2 == 1 {
            s += t;
        } else {
            s -= t;
        }
    }
    let k = terms + 1;
    let next = Rational::new(BigInt::from(1), BigInt::from(k).pow(3) * binomial(2 * k, k));
    (s * ratio(5, 2), next * ratio(5, 2))
}

// Oracle: Bernoulli numbers by the defining recurrence.
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

// Oracle: zeta(s) by Euler-Maclaurin in exact rationals at N = 12.
fn zeta_em_oracle(s: i64) -> (Rational, Rational) {
    let n = 12i64;
    let b = bernoulli_oracle(40);
    let pw = |x: i64, e: i64| Rational::new(BigInt::from(1), BigInt::from(x).pow(e as u32));
    let mut acc = Rational::zero();
    for k in 1..n {
        acc += pw(k, s);
    }
    acc += pw(n, s - 1) / rat(s - 1) + pw(n, s) / rat(2);
    let mut rising = rat(1);
    let mut fact = rat(1);
    let mut last = Rational::zero();
    for j in 1..=19i64 {
        let m = 2 * j;
        // (s)_(2j-1) and (2j)!
        rising = if j == 1 { rat(s) } else { rising * rat(s + m - 3) * rat(s + m - 2) };
        fact = fact * rat(m - 1) * rat(m);
        let t = &b[m as usize] * &rising / &fact * pw(n, s + m - 1);
        if j == 19 {
            last = t.abs();
        } else {
            acc += t;
        }
    }
    (acc, last)
}

#[test]
fn zeta3_against_alternating_oracle() {
    let z = const_zeta(3, 256).unwrap();
    let (v, err) = zeta3_oracle(80);
    assert!((z.mid().to_rational() - v).abs() <= z.rad().to_rational() + err);
    assert!(agrees(&z, "1.20205690315959428540"));
}

#[test]
fn zeta5_against_em_oracle() {
    let z = const_zeta(5, 200).unwrap();
    let (v, err) = zeta_em_oracle(5);
    assert!(err < decimal("0.000000000000000000001"));
    assert!((z.mid().to_rational() - v).abs() <= z.rad().to_rational() + err);
    assert!(agrees(&z, "1.036927755143370"));
}

#[test]
fn even_zeta_matches_series_route() {
    // the even branch uses Bernoulli numbers; compare with Euler-Maclaurin
    let a = const_zeta(4, 200).unwrap();
    let b = hurwitz_zeta(4, &rat(1), 200).unwrap();
    assert_eq!(ball_compare(&a, &b, 55), Verdict::CertifiedEqual);
    let c = pi(200).pow_i64(2).unwrap().div_i64(6);
    assert_eq!(ball_compare(&const_zeta(2, 200).unwrap(), &c, 55), Verdict::CertifiedEqual);
}

#[test]
fn catalan_against_ramanujan_formula() {
    // G = pi/8 log(2 + sqrt 3) + 3/8 sum 1/((2k+1)^2 C(2k,k))
    let prec = 200;
    let mut s = Rational::zero();
    for k in 0..120i64 {
        s += Rational::new(BigInt::from(1), BigInt::from(2 * k + 1).pow(2) * binomial(2 * k, k));
    }
    let s3 = RealBall::from_i64(3, prec).sqrt().unwrap();
    let lg = s3.add(&RealBall::from_i64(2, prec)).log().unwrap();
    let g = pi(prec).mul(&lg).div_i64(8).add(&RealBall::from_rational(&(s * ratio(3, 8)), prec));
    let ours = const_beta(2, prec).unwrap();
    assert_eq!(ball_compare(&ours, &g, 50), Verdict::CertifiedEqual);
    assert!(agrees(&ours, "0.915965594177219"));
}

#[test]
fn beta_odd_closed_forms_and_beta4() {
    let b3 = const_beta(3, 200).unwrap();
    let c3 = pi(200).pow_i64(3).unwrap().div_i64(32);
    assert_eq!(ball_compare(&b3, &c3, 50), Verdict::CertifiedEqual);
    let b5 = const_beta(5, 200).unwrap();
    let c5 = pi(200).pow_i64(5).unwrap().mul_rational(&ratio(5, 1536));
    assert_eq!(ball_compare(&b5, &c5, 50), Verdict::CertifiedEqual);
    let b = const_beta(4, 200).unwrap();
    assert!(agrees(&b, "0.9889445517"));
    assert!(agrees(&b, "0.9889445517411053361084"));
}

#[test]
fn dirichlet_values_two_ways() {
    let prec = 200;
    let k = const_dirichlet_l(-3, 2, prec).unwrap();
    let k2 = dirichlet_l2_taylor(-3, prec).unwrap();
    assert_eq!(ball_compare(&k, &k2, 50), Verdict::CertifiedEqual);
    assert!(agrees(&k, "0.781302"));
    let l = const_dirichlet_l(-8, 2, prec).unwrap();
    let l2 = dirichlet_l2_taylor(-8, prec).unwrap();
    assert_eq!(ball_compare(&l, &l2, 50), Verdict::CertifiedEqual);
    assert!(agrees(&l, "1.064734"));
}

// Oracle: Gamma(1/4)^2 = (2 pi)^(3/2) / AGM(1, sqrt 2), with the AGM enclosed
// between the arithmetic and geometric iterates.
fn gamma_quarter_oracle(prec: u32) -> RealBall {
    let mut a = RealBall::from_i64(1, prec);
    let mut b = RealBall::from_i64(2, prec).sqrt().unwrap();
    for _ in 0..12 {
        let na = a.add(&b).mul_pow2(-1);
        let nb = a.mul(&b).sqrt().unwrap();
        a = na;
        b = nb;
    }
    let agm = a.union(&b);
    let tp = pi(prec).mul_pow2(1);
    tp.pow_i64(3).unwrap().sqrt().unwrap().div(&agm).unwrap().sqrt().unwrap()
}

#[test]
fn gamma_quarter_against_agm() {
    let g = const_gamma_rational(&ratio(1, 4), 200).unwrap();
    let o = gamma_quarter_oracle(200);
    assert_eq!(ball_compare(&g, &o, 50), Verdict::CertifiedEqual);
    assert!(agrees(&g, "3.62560990822190"));
}

#[test]
fn gamma_reflection() {
    let prec = 200;
    for x in [ratio(1, 3), ratio(1, 4), ratio(5, 8), ratio(7, 12)] {
        let g = const_gamma_rational(&x, prec).unwrap();
        let h = const_gamma_rational(&(rat(1) - &x), prec).unwrap();
        let s = pi(prec).mul_rational(&x).sin().unwrap();
        let lhs = g.mul(&h).mul(&s);
        assert_eq!(ball_compare(&lhs, &pi(prec), 50), Verdict::CertifiedEqual, "x = {x}");
    }
}

#[test]
fn gamma_integer_values() {
    let g = const_gamma_rational(&rat(6), 128).unwrap();
    assert!(g.contains_rational(&rat(120)));
}

#[test]
fn precision_doubling_shrinks_radius() {
    let keys = [
        ConstantKey::Pi,
        ConstantKey::Zeta(3),
        ConstantKey::Zeta(5),
        ConstantKey::Catalan,
        ConstantKey::K3,
        ConstantKey::L8,
        ConstantKey::Beta(4),
        ConstantKey::LogQ(rat(3)),
        ConstantKey::GammaRat(ratio(1, 3)),
        ConstantKey::SqrtQ(rat(2)),
        ConstantKey::GoldenPhi,
    ];
    for k in keys {
        let a = evaluate(&k, 100).unwrap();
        let b = evaluate(&k, 200).unwrap();
        assert!(a.rad().log2() - b.rad().log2() >= 40.0, "{k}");
        assert!(a.contains_ball(&b) || ball_compare(&a, &b, 25) == Verdict::CertifiedEqual, "{k}");
    }
}

#[test]
fn disk_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let kernel = ConstantKernel::with_disk_cache(dir.path());
    let a = kernel.get(&ConstantKey::Zeta(3), 128).unwrap();
    assert_eq!(kernel.disk().unwrap().len(), 1);
    let fresh = ConstantKernel::with_disk_cache(dir.path());
    let b = fresh.get(&ConstantKey::Zeta(3), 128).unwrap();
    assert_eq!(a.mid(), b.mid());
    assert_eq!(a.rad(), b.rad());
    // a record with the wrong version is ignored
    let path = std::fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    let text = std::fs::read_to_string(&path).unwrap().replace("\"version\": 1", "\"version\": 99");
    std::fs::write(&path, text).unwrap();
    assert!(DiskCache::new(dir.path()).load(&ConstantKey::Zeta(3), 128).is_none());
    assert_eq!(DiskCache::new(dir.path()).clear().unwrap(), 1);
}
