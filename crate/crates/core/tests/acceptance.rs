//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

mod common;

use std::time::{Duration, Instant};

use hcert::congruence_engine::{verify_congruence, CongruenceVerdict, Strategy};
use hcert::constants::{const_dirichlet_l, const_gamma_rational, dirichlet_l2_taylor, ConstantKernel, ConstantKey};
use hcert::discover::{default_max_height, discover_closed_form, pslq};
use hcert::exact::{rat, ratio};
use hcert::expr::{parse_closed_form, parse_summand, shipped_registry, ConjectureRecord, Kind, Registry, Role};
use hcert::realball::{ball_compare, pi, RealBall, Verdict};
use hcert::series_engine::{sum_to_tolerance, verify_identity, working_prec, IdentityVerdict, SeqTable, SeriesOptions};
use num_bigint::BigInt;
use proptest::strategy::Strategy as Gen;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;

/// Name, time budget in seconds and check.
type Criterion = (&'static str, u64, fn() -> Outcome);

fn identities(reg: &Registry, r: &ConjectureRecord, digits: u32, k: &ConstantKernel) -> Vec<IdentityVerdict> {
    verify_identity(r, &reg.sequences, digits, k)
}

fn congruences(reg: &Registry, r: &ConjectureRecord, hi: u64, st: Strategy) -> Result<Vec<CongruenceVerdict>, String> {
    verify_congruence(r, &reg.sequences, 3, hi, st).map_err(|e| format!("{}: {e}", r.id))
}

fn baseline_battery() -> Outcome {
    let reg = shipped_registry();
    let k = ConstantKernel::new();
    let recs: Vec<&ConjectureRecord> =
        reg.records.iter().filter(|r| r.role == Role::Baseline && r.kind == Kind::Identity).collect();
    if recs.len() < 20 {
        return Err(format!("only {} baseline identities", recs.len()));
    }
    let mut n = 0;
    let mut bad = Vec::new();
    for r in &recs {
        for v in identities(&reg, r, 40, &k) {
            n += 1;
            if v.verdict != Verdict::CertifiedEqual {
                bad.push(format!("{}[{}] {:?}", v.id, v.sample, v.verdict));
            }
        }
    }
    if bad.is_empty() {
        Ok(format!("{} records, {n} samples CertifiedEqual at 40 digits", recs.len()))
    } else {
        Err(bad.join(", "))
    }
}

fn conjectures() -> Outcome {
    let reg = shipped_registry();
    let k = ConstantKernel::new();
    let printed: Vec<&ConjectureRecord> =
        reg.records.iter().filter(|r| r.role == Role::Conjecture && !r.has_flag("variant")).collect();
    let labels: std::collections::BTreeSet<&str> =
        printed.iter().filter_map(|r| r.label.as_deref()).map(|l| l.split('(').next().unwrap()).collect();
    let mut unsettled = Vec::new();
    let mut findings = Vec::new();
    let (mut ids, mut cons) = (0, 0);
    for r in &printed {
        let mut finding = false;
        match r.kind {
            Kind::Identity => {
                for v in identities(&reg, r, 30, &k) {
                    ids += 1;
                    match v.verdict {
                        Verdict::CertifiedEqual => {}
                        Verdict::CertifiedDistinct => finding = true,
                        Verdict::Inconclusive => unsettled.push(format!("{}[{}]", v.id, v.sample)),
                    }
                }
            }
            Kind::Congruence => {
                for v in congruences(&reg, r, 50, Strategy::Auto)? {
                    cons += 1;
                    if v.skipped.is_some() {
                        unsettled.push(format!("{} p={}", v.id, v.prime));
                    } else if !v.holds {
                        finding = true;
                    }
                }
            }
        }
        if finding {
            let tag = if r.has_flag("open-question") { " (exempt)" } else { "" };
            findings.push(format!("{}{tag}", r.id));
        }
    }
    if labels.len() != 66 {
        return Err(format!("{} conjecture labels, expected 66", labels.len()));
    }
    if !unsettled.is_empty() {
        return Err(format!("unsettled: {}", unsettled.join(", ")));
    }
    Ok(format!(
        "66 conjectures, {} records, {ids} identity samples, {cons} congruence checks; findings: {}",
        printed.len(),
        findings.join(", ")
    ))
}

fn known_theorems() -> Outcome {
    let reg = shipped_registry();
    let mut total = 0;
    for (id, hi) in [
        ("B.Wolstenholme-1", 500),
        ("B.Wolstenholme-2", 500),
        ("B.Glaisher", 200),
        ("B.Long", 100),
        ("B.GL-256", 50),
        ("B.GL-16", 50),
    ] {
        let r = reg.get(id).ok_or_else(|| format!("{id} missing"))?;
        let vs = congruences(&reg, r, hi, Strategy::Auto)?;
        if vs.is_empty() {
            return Err(format!("{id}: no primes checked"));
        }
        if let Some(v) = vs.iter().find(|v| !v.holds || v.skipped.is_some()) {
            return Err(format!("{id} p={} {}", v.prime, v.sample));
        }
        total += vs.len();
    }
    Ok(format!("{total} checks hold"))
}

fn cross_validation() -> Outcome {
    let reg = shipped_registry();
    let (mut n, mut recs) = (0, 0);
    for r in reg.records.iter().filter(|r| r.kind == Kind::Congruence) {
        recs += 1;
        for v in congruences(&reg, r, 50, Strategy::Both)? {
            if v.skipped.is_some() {
                continue;
            }
            if v.agree != Some(true) {
                return Err(format!("{} p={} {}", v.id, v.prime, v.sample));
            }
            n += 1;
        }
    }
    Ok(format!("{n} sums agree over {recs} records"))
}

fn constants_kernel() -> Outcome {
    const D: u32 = 50;
    let prec = working_prec(D);
    let tol = D - 5;
    let k = ConstantKernel::new();
    let eq = |a: &RealBall, b: &RealBall, what: &str| -> Result<(), String> {
        match ball_compare(a, b, tol) {
            Verdict::CertifiedEqual => Ok(()),
            v => Err(format!("{what}: {v:?}")),
        }
    };
    let z2 = k.get(&ConstantKey::Zeta(2), prec).map_err(|e| e.to_string())?;
    let p = pi(prec);
    eq(&z2, &p.mul(&p).div(&RealBall::from_i64(6, prec)).unwrap(), "zeta(2)")?;
    for x in [ratio(1, 3), ratio(1, 4), ratio(5, 8), ratio(7, 12)] {
        let g = const_gamma_rational(&x, prec).map_err(|e| e.to_string())?;
        let h = const_gamma_rational(&(rat(1) - &x), prec).map_err(|e| e.to_string())?;
        let s = p.mul_rational(&x).sin().map_err(|e| e.to_string())?;
        eq(&g.mul(&h).mul(&s), &p, &format!("reflection at {x}"))?;
    }
    for d in [-3, -8] {
        let a = const_dirichlet_l(d, 2, prec).map_err(|e| e.to_string())?;
        let b = dirichlet_l2_taylor(d, prec).map_err(|e| e.to_string())?;
        eq(&a, &b, &format!("L(2, chi_{d})"))?;
    }
    Ok(format!("zeta(2), 4 reflections, K and L agree to 1e-{tol}"))
}

fn discovery() -> Outcome {
    let k = ConstantKernel::new();
    let reg = shipped_registry();
    let s = parse_summand("(-1)^(k-1)/(k^3*C(2k,k))").unwrap();
    let opts = SeriesOptions { prec: Some(working_prec(80)), ..SeriesOptions::default() };
    let apery = sum_to_tolerance(&s, 1, 75, &SeqTable::default(), &k, &opts).map_err(|e| e.to_string())?.value;
    let z3 = k.get(&ConstantKey::Zeta(3), working_prec(80)).map_err(|e| e.to_string())?;
    let r = pslq(&[apery, z3], &default_max_height(), 60).map_err(|e| e.to_string())?;
    let want = Some(vec![BigInt::from(5), BigInt::from(-2)]);
    if r.coefficients != want {
        return Err(format!("Apery relation {:?}", r.coefficients));
    }
    let rec = reg.get("C2.1-i").ok_or("C2.1-i missing")?;
    let basis = vec![parse_closed_form("zeta(5)").unwrap(), parse_closed_form("pi^2*zeta(3)").unwrap()];
    let start = rec.start.at(0).unwrap();
    let d = discover_closed_form(&rec.instances[0].summand, start, &basis, 60, &default_max_height(), &k, &[])
        .map_err(|e| e.to_string())?;
    let expect = parse_closed_form("451/40*zeta(5)-14/15*pi^2*zeta(3)").unwrap().to_string();
    let margin = d.margin.unwrap_or(f64::NEG_INFINITY);
    if d.candidate.as_deref() != Some(expect.as_str()) || margin < 15.0 {
        return Err(format!("C2.1-i candidate {:?} margin {margin}", d.candidate));
    }
    let planted = run_property(100, common::planted_inputs(), |(i, c, l)| common::check_planted(&i, &c, l))?;
    Ok(format!("(5, -2); (451/40, -14/15) margin {margin:.1}; planted {planted}/100"))
}

/// Run `cases` successful cases of a property; rejected draws do not count.
fn run_property<S: Gen>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), proptest::test_runner::TestCaseError>,
) -> Result<u32, String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())?;
    Ok(cases)
}

fn property_suites() -> Outcome {
    let rt = run_property(10_000, common::summand_src(), |s| common::check_round_trip(&s))?;
    let ball = run_property(
        10_000,
        (common::arb_rat(), common::arb_rat(), 16u32..256, proptest::bool::ANY, 0u8..8),
        |(a, b, p, w, op)| common::check_ball_op(&a, &b, p, w, op),
    )?;
    common::odd_index_identity(200)?;
    let modpk = run_property(
        10_000,
        (common::small_rational(), common::small_rational(), 0usize..5, 1u32..=4, 0u8..4),
        |(a, b, pi, e, op)| common::check_modpk_op(&a, &b, pi, e, op),
    )?;
    Ok(format!("round-trip {rt}, ball containment {ball}, odd-index n <= 200, ModPK fuzz {modpk}"))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("baseline identity battery", 60, baseline_battery),
        ("conjecture records", 600, conjectures),
        ("known-theorem congruences", 300, known_theorems),
        ("exact/fast cross-validation", 180, cross_validation),
        ("constants kernel", 30, constants_kernel),
        ("discovery", 120, discovery),
        ("property suites", 120, property_suites),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let res = f();
        let dt = t0.elapsed();
        let res = match res {
            Ok(msg) if dt > Duration::from_secs(*budget) => Err(format!("{msg}; over budget {budget} s")),
            r => r,
        };
        match res {
            Ok(msg) => println!("criterion {}: PASS  {name} [{:.1} s] {msg}", i + 1, dt.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} [{:.1} s] {msg}", i + 1, dt.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
