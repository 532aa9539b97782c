use hcert::constants::{ConstantKernel, ConstantKey};
use hcert::exact::{binomial, rat, ratio, Rational};
use hcert::expr::{eval_summand_rational, parse_registry, parse_summand, shipped_registry, Kind};
use hcert::realball::{ln2, RealBall, Verdict};
use hcert::series_engine::*;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn decimal(s: &str) -> Rational {
    let (i, f) = s.split_once('.').unwrap();
    let n: BigInt = format!("{i}{f}").parse().unwrap();
    Rational::new(n, BigInt::from(10).pow(f.len() as u32))
}

fn holds(b: &RealBall, x: &Rational, slack_digits: u32) -> bool {
    let tol = Rational::new(BigInt::from(1), BigInt::from(10).pow(slack_digits));
    (b.mid().to_rational() - x).abs() <= b.rad().to_rational() + tol
}

const PI_40: &str = "3.1415926535897932384626433832795028841971";

// Oracle: zeta(3) from the alternating series 5/2 sum (-1)^(k-1)/(k^3 C(2k,k))
// in exact rationals; the first omitted term bounds the error.
fn zeta3_oracle() -> Rational {
    let mut s = Rational::zero();
    for k in 1..=40i64 {
        let t = Rational::new(1.into(), BigInt::from(k).pow(3) * binomial(2 * k, k));
        if k % 2 == 1 {
            s += t;
        } else {
            s -= t;
        }
    }
    s * ratio(5, 2)
}

fn empty() -> SeqTable {
    SeqTable::default()
}

#[test]
fn apery_partial_sums() {
    let k = ConstantKernel::new();
    let s = parse_summand("(-1)^(k-1)/(k^3*C(2k,k))").unwrap();
    let b = partial_sum(&s, 1, 2, 128, &empty(), &k).unwrap();
    assert!(b.contains_rational(&ratio(23, 48)));
    let b = partial_sum(&s, 1, 1, 128, &empty(), &k).unwrap();
    assert!(b.contains_rational(&ratio(1, 2)));
    assert!(partial_sum(&s, 1, 0, 128, &empty(), &k).is_err());
}

#[test]
fn recurrence_values() {
    let reg = shipped_registry();
    let hsy = reg.sequence("hsy").unwrap();
    assert_eq!(recurrence_sequence(hsy, 0), rat(1));
    assert_eq!(recurrence_sequence(hsy, 2), rat(20));
    assert_eq!(recurrence_sequence(hsy, 3), rat(120));
}

#[test]
fn apery_to_twenty_digits() {
    let k = ConstantKernel::new();
    let s = parse_summand("(-1)^(k-1)/(k^3*C(2k,k))").unwrap();
    let e = sum_to_tolerance(&s, 1, 20, &empty(), &k, &SeriesOptions::default()).unwrap();
    assert_eq!(e.status, SeriesStatus::Converged);
    assert!(holds(&e.value, &(zeta3_oracle() * ratio(2, 5)), 22));
    assert!(holds(&e.value, &decimal("0.48082276126383"), 14));
    assert!(e.value.rad().to_f64() < 1e-20);
}

#[test]
fn bauer_to_twenty_digits() {
    let k = ConstantKernel::new();
    let s = parse_summand("(4k+1)*C(2k,k)^3/(-64)^k").unwrap();
    let e = sum_to_tolerance(&s, 0, 20, &empty(), &k, &SeriesOptions::default()).unwrap();
    assert_eq!(e.status, SeriesStatus::Converged);
    assert!(matches!(e.method, TailMethod::Euler { .. }));
    let two_over_pi = RealBall::from_i64(2, 200).div(&RealBall::from_rational(&decimal(PI_40), 200)).unwrap();
    assert!(holds(&e.value, &two_over_pi.mid().to_rational(), 30));
}

#[test]
fn central_binomial_arcsine_series() {
    let k = ConstantKernel::new();
    let s = parse_summand("C(2k,k)/((2k+1)*16^k)").unwrap();
    let e = sum_to_tolerance(&s, 0, 20, &empty(), &k, &SeriesOptions::default()).unwrap();
    assert!(holds(&e.value, &(decimal(PI_40) / rat(3)), 30));
}

#[test]
fn alternating_slow_series_use_the_euler_tail() {
    let k = ConstantKernel::new();
    let s = parse_summand("(-1)^k/(k+1)").unwrap();
    let e = sum_to_tolerance(&s, 0, 30, &empty(), &k, &SeriesOptions::default()).unwrap();
    assert_eq!(e.status, SeriesStatus::Converged);
    assert!(e.value.rad().to_f64() < 1e-30);
    let l2 = ln2(256);
    assert!(holds(&e.value, &l2.mid().to_rational(), 60));
    let s = parse_summand("(-1)^k/(2k+1)").unwrap();
    let e = sum_to_tolerance(&s, 0, 30, &empty(), &k, &SeriesOptions::default()).unwrap();
    assert!(holds(&e.value, &(decimal(PI_40) / rat(4)), 39));
}

#[test]
fn non_decaying_series_hit_the_cap() {
    let k = ConstantKernel::new();
    let opts = SeriesOptions { n_max: 3000, ..SeriesOptions::default() };
    for src in ["(-1)^k", "1/(k+1)^2", "(-1)^k*(k+1)"] {
        let s = parse_summand(src).unwrap();
        let e = sum_to_tolerance(&s, 0, 20, &empty(), &k, &opts).unwrap();
        assert_eq!(e.status, SeriesStatus::TailCapHit, "{src}");
    }
}

fn fixture(rhs: &str) -> hcert::expr::Registry {
    parse_registry(&format!(
        "schema = 1\n[[record]]\nid = \"G\"\nkind = \"identity\"\nsummand = \"(25k-3)/(2^k*C(3k,k))\"\nrhs = \"{rhs}\"\nprovenance = \"test\"\n"
    ))
    .unwrap()
}

#[test]
fn gosper_verdicts() {
    let k = ConstantKernel::new();
    let reg = fixture("pi/2");
    let v = verify_identity(&reg.records[0], &[], 30, &k);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].verdict, Verdict::CertifiedEqual);
    assert!(v[0].bound.as_ref().unwrap().to_f64() < 1e-30);
    let reg = fixture("pi/2+1/10^10");
    let v = verify_identity(&reg.records[0], &[], 30, &k);
    assert_eq!(v[0].verdict, Verdict::CertifiedDistinct);
}

#[test]
fn hsy_identity() {
    let k = ConstantKernel::new();
    let reg = shipped_registry();
    let v = verify_identity(reg.get("B.HSY").unwrap(), &reg.sequences, 25, &k);
    assert_eq!(v[0].verdict, Verdict::CertifiedEqual);
}

#[test]
fn parameterized_records_yield_one_verdict_per_sample() {
    let k = ConstantKernel::new();
    let reg = shipped_registry();
    let r = reg.get("C2.8").unwrap();
    let v = verify_identity(r, &reg.sequences, 20, &k);
    assert_eq!(v.len(), r.instances.len());
    assert!(v.iter().all(|x| x.verdict == Verdict::CertifiedEqual && !x.sample.is_empty()));
}

#[test]
fn wrong_kind_is_inconclusive() {
    let k = ConstantKernel::new();
    let reg = shipped_registry();
    let v = verify_identity(reg.get("B.Wolstenholme-1").unwrap(), &reg.sequences, 20, &k);
    assert!(v.iter().all(|x| x.verdict == Verdict::Inconclusive && x.diagnostic.is_some()));
}

#[test]
fn incremental_matches_exact_summation() {
    let reg = shipped_registry();
    let k = ConstantKernel::new();
    let seqs = SeqTable::new(&reg.sequences);
    let seq_exact = |name: &str, n: i64| {
        let spec = reg.sequence(name)?;
        (n >= 0).then(|| recurrence_sequence(spec, n as usize))
    };
    let mut checked = 0;
    for r in &reg.records {
        if !r.start.is_fixed() {
            continue;
        }
        let start = r.start.at(0).unwrap();
        for inst in &r.instances {
            let s = &inst.summand;
            if s.mentions_p() || s.terms.iter().any(|t| t.real_base.is_some()) {
                continue;
            }
            let mut exact = Rational::zero();
            for j in start..=50 {
                exact += eval_summand_rational(s, j, None, &seq_exact).unwrap();
            }
            let b = partial_sum(s, start, 50, 256, &seqs, &k).unwrap();
            assert!(b.contains_rational(&exact), "{} {}", r.id, inst.label);
            checked += 1;
        }
    }
    assert!(checked > 150, "{checked}");
}

#[test]
fn enclosures_nest_across_precisions() {
    let reg = shipped_registry();
    let k = ConstantKernel::new();
    let seqs = SeqTable::new(&reg.sequences);
    let opts = SeriesOptions::default();
    for r in reg.records.iter().filter(|r| r.kind == Kind::Identity) {
        let start = r.start.at(0).unwrap();
        for inst in &r.instances {
            let lo = sum_to_tolerance(&inst.summand, start, 20, &seqs, &k, &opts).unwrap();
            let hi = sum_to_tolerance(&inst.summand, start, 40, &seqs, &k, &opts).unwrap();
            assert_eq!(lo.status, SeriesStatus::Converged, "{}", r.id);
            assert!(lo.value.contains_rational(&hi.value.mid().to_rational()), "{} {}", r.id, inst.label);
        }
    }
}

#[test]
fn closed_forms_with_inner_sums() {
    let k = ConstantKernel::new();
    let cf = hcert::expr::parse_closed_form("sum(1/(k^2*C(2k,k)),1)*18/pi^2").unwrap();
    let b = eval_closed(&cf, 30, 200, &k, &empty()).unwrap();
    // sum 1/(k^2 C(2k,k)) = pi^2/18
    assert!(holds(&b, &rat(1), 30));
    let pi = k.get(&ConstantKey::Pi, 200).unwrap();
    assert!(pi.contains_rational(&decimal(PI_40)) || holds(&pi, &decimal(PI_40), 39));
}

// Planted series with exact rational sums:
// sum x^k = 1/(1-x), sum k x^k = x/(1-x)^2, sum k^2 x^k = x(1+x)/(1-x)^3.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn planted_tails_are_sound(
        num in -80i64..=80,
        den in 81i64..=200,
        a in -20i64..=20,
        b in -20i64..=20,
        c in -20i64..=20,
        digits in 15u32..=35,
    ) {
        prop_assume!(num != 0 && (a, b, c) != (0, 0, 0));
        let x = ratio(num, den);
        let one = rat(1);
        let truth = rat(a) / (&one - &x)
            + rat(b) * &x / ((&one - &x) * (&one - &x))
            + rat(c) * &x * (&one + &x) / ((&one - &x) * (&one - &x) * (&one - &x));
        let src = format!("({a}+{b}*k+{c}*k^2)*({num}/{den})^k");
        let s = parse_summand(&src).unwrap();
        let k = ConstantKernel::new();
        let e = sum_to_tolerance(&s, 0, digits, &empty(), &k, &SeriesOptions::default()).unwrap();
        prop_assert_eq!(e.status, SeriesStatus::Converged);
        prop_assert!(e.value.contains_rational(&truth), "{} {}", src, e.value);
    }
}
