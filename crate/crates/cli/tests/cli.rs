use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Run the binary from the fixture directory with no cache in the
/// environment.
fn hcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcert"))
        .args(args)
        .current_dir(fixtures())
        .env_remove("HCERT_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn mask_elapsed(v: &mut Value) {
    match v {
        Value::Object(m) => {
            for (k, x) in m.iter_mut() {
                if k == "elapsed_ms" {
                    *x = Value::from(0);
                } else {
                    mask_elapsed(x);
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(mask_elapsed),
        _ => {}
    }
}

fn rows(v: &Value) -> &Vec<Value> {
    v["rows"].as_array().unwrap()
}

#[test]
fn perturbed_fixture_is_distinct() {
    let o = hcert(&["--registry", "registry.toml", "verify", "--id", "PERTURBED_TEST"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(rows(&v).len(), 1);
    assert_eq!(rows(&v)[0]["verdict"], "CertifiedDistinct");
    assert_eq!(v["summary"]["findings"], serde_json::json!(["PERTURBED_TEST"]));
}

#[test]
fn golden_report() {
    let args = ["--registry", "registry.toml", "--prime-max", "13", "verify-all"];
    let o = hcert(&args);
    assert_eq!(code(&o), 1);
    let mut v = json(&o);
    mask_elapsed(&mut v);
    let got = serde_json::to_string_pretty(&v).unwrap() + "\n";
    let path = fixtures().join("golden.json");
    if std::env::var_os("HCERT_BLESS").is_some() {
        std::fs::write(&path, &got).unwrap();
    }
    let want = std::fs::read_to_string(&path).expect("golden file; run with HCERT_BLESS=1 to create");
    assert_eq!(got, want);
}

#[test]
fn reruns_are_identical_modulo_elapsed() {
    let args = ["--registry", "registry.toml", "--prime-max", "31", "verify-all", "--kind", "congruence"];
    let strip = |o: Output| -> String {
        String::from_utf8(o.stdout).unwrap().lines().filter(|l| !l.contains("\"elapsed_ms\"")).collect()
    };
    assert_eq!(strip(hcert(&args)), strip(hcert(&args)));
}

#[test]
fn every_row_has_the_report_fields() {
    let v = json(&hcert(&["--registry", "registry.toml", "--prime-max", "13", "verify-all"]));
    assert_eq!(v["schema"], 1);
    for r in rows(&v) {
        for k in ["id", "kind", "verdict", "lhs", "rhs", "bound", "strategy", "elapsed_ms"] {
            assert!(r.get(k).is_some(), "{k} missing in {r}");
        }
        assert!(r["digits"].is_u64() || r["prime"].is_u64(), "{r}");
    }
    let ids: Vec<(&str, u64)> =
        rows(&v).iter().map(|r| (r["id"].as_str().unwrap(), r["prime"].as_u64().unwrap_or(0))).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn shipped_apery_alias() {
    let o = hcert(&["verify", "--id", "APERY", "--digits", "30"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(rows(&v)[0]["id"], "B.Apery");
    assert_eq!(rows(&v)[0]["verdict"], "CertifiedEqual");
}

#[test]
fn shipped_wolstenholme_to_97() {
    let o = hcert(&["verify", "--id", "WOLSTENHOLME", "--prime-max", "97"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let rs = rows(&v);
    // primes 5, 7, ..., 97
    assert_eq!(rs.len(), 23);
    assert!(rs.iter().all(|r| r["verdict"] == "Holds"));
    assert_eq!(rs[0]["prime"], 5);
    assert_eq!(rs[22]["prime"], 97);
}

#[test]
fn open_question_records_are_exempt() {
    let o = hcert(&["--registry", "registry.toml", "verify", "--id", "OPEN_TEST", "--prime-max", "30"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(rows(&v).iter().all(|r| r["verdict"] == "Fails" && r["exempt"] == true));
    assert_eq!(v["summary"]["findings"], serde_json::json!(["OPEN_TEST"]));
}

#[test]
fn undefined_atom_is_inconclusive_exit() {
    let o = hcert(&["--registry", "registry.toml", "verify", "--id", "SKIP_TEST", "--prime-max", "3"]);
    assert_eq!(code(&o), 2);
    let v = json(&o);
    assert_eq!(rows(&v)[0]["verdict"], "Skipped");
    assert!(rows(&v)[0]["diagnostic"].as_str().unwrap().contains("q"));
}

#[test]
fn usage_errors() {
    for args in [
        vec!["verify", "--id", "NO_SUCH_ID"],
        vec!["verify", "--id", "APERY", "--digits", "9"],
        vec!["verify", "--id", "APERY", "--prime-min", "24", "--prime-max", "28"],
        vec!["verify"],
        vec!["frobnicate"],
        vec!["verify", "--id", "APERY", "--strategy", "slow"],
        vec!["cache", "path"],
    ] {
        let o = hcert(&args);
        assert_eq!(code(&o), 64, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty(), "{args:?}");
    }
    // unknown ids are rejected even next to known ones
    assert_eq!(code(&hcert(&["verify", "--id", "APERY", "--id", "NOPE"])), 64);
}

#[test]
fn missing_registry() {
    assert_eq!(code(&hcert(&["--registry", "absent.toml", "list"])), 66);
    assert_eq!(code(&hcert(&["--registry", "absent.toml", "verify", "--id", "X"])), 66);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let reg = fixtures().join("registry.toml");
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("registry = {:?}\ndigits = 12\nprime_max = 11\nids = [\"APERY\"]\n", reg)).unwrap();
    let cfg = cfg.to_str().unwrap();
    let v = json(&hcert(&["--config", cfg, "verify-all"]));
    assert_eq!(v["config"]["digits"], 12);
    assert_eq!(rows(&v).len(), 1);
    let v = json(&hcert(&["--config", cfg, "--digits", "20", "verify", "--id", "WOLSTENHOLME_TEST"]));
    assert_eq!(v["config"]["digits"], 20);
    // 5, 7, 11
    assert_eq!(rows(&v).len(), 3);
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "digits = 30\ncolour = \"red\"\n").unwrap();
    assert_eq!(code(&hcert(&["--config", bad.to_str().unwrap(), "list"])), 64);
}

#[test]
fn report_projections() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = hcert(&["--registry", "registry.toml", "--prime-max", "13", "verify-all", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
    let md = hcert(&["report", out.to_str().unwrap()]);
    assert_eq!(code(&md), 0);
    let md = String::from_utf8(md.stdout).unwrap();
    assert!(md.starts_with("| id |"));
    assert!(md.contains("| PERTURBED_TEST |"));
    assert!(md.contains("findings: OPEN_TEST, PERTURBED_TEST"));
    let csv = hcert(&["report", out.to_str().unwrap(), "--format", "csv"]);
    let csv = String::from_utf8(csv.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("id,kind,sample,verdict,"));
    let n = json(&hcert(&["--registry", "registry.toml", "--prime-max", "13", "verify-all"]))["rows"]
        .as_array()
        .unwrap()
        .len();
    assert_eq!(lines.len(), n + 1);
    // the JSON projection round-trips
    let again = hcert(&["report", out.to_str().unwrap(), "--format", "json"]);
    assert_eq!(json(&again), serde_json::from_str::<Value>(&std::fs::read_to_string(&out).unwrap()).unwrap());
}

#[test]
fn list_shows_records() {
    let o = hcert(&["--registry", "registry.toml", "list", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["APERY_TEST", "PERTURBED_TEST", "WOLSTENHOLME_TEST", "OPEN_TEST", "SKIP_TEST"]);
    let text = String::from_utf8(hcert(&["list"]).stdout).unwrap();
    assert!(text.contains("C2.1-i") && text.contains("B.Apery"));
}

#[test]
fn discover_recovers_apery() {
    let o = hcert(&[
        "discover",
        "--summand",
        "(-1)^(k-1)/(k^3*C(2k,k))",
        "--start",
        "1",
        "--basis",
        "zeta(3)",
        "--digits",
        "40",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let d = &v["results"][0]["discovery"];
    assert_eq!(d["status"], "candidate");
    assert_eq!(d["relation"]["coefficients"], serde_json::json!(["5", "-2"]));
    assert!(d["margin"].as_f64().unwrap() > 20.0);
}

#[test]
fn discover_shipped_targets_report_margins() {
    let o = hcert(&["discover", "--digits", "40"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let rs = v["results"].as_array().unwrap();
    assert_eq!(rs.len(), 3);
    for r in rs {
        assert!(r["error"].is_null(), "{r}");
        assert_eq!(r["discovery"]["basis"].as_array().unwrap().len(), 10);
    }
}

#[test]
fn cache_dir_from_environment_and_flag() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_hcert"))
            .args(args)
            .current_dir(fixtures())
            .env("HCERT_CACHE_DIR", env_dir.path())
            .output()
            .unwrap()
    };
    let o = run(&["cache", "path"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), env_dir.path().display().to_string());
    let o = run(&["--registry", "registry.toml", "cache", "warm", "--digits", "20"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let cached = std::fs::read_dir(env_dir.path()).unwrap().count();
    assert!(cached >= 1);
    // a cached run gives the same verdicts
    let o = run(&["--registry", "registry.toml", "verify", "--id", "APERY"]);
    assert_eq!(code(&o), 0);
    let o = run(&["--cache-dir", flag_dir.path().to_str().unwrap(), "cache", "path"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), flag_dir.path().display().to_string());
    let cached = std::fs::read_dir(env_dir.path()).unwrap().count();
    let o = run(&["cache", "clear"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), format!("removed {cached} entries"));
    assert_eq!(std::fs::read_dir(env_dir.path()).unwrap().count(), 0);
}

#[test]
fn jobs_flag_does_not_change_results() {
    let args = |j: &'static str| ["--registry", "registry.toml", "--jobs", j, "--prime-max", "41", "verify-all"];
    let mut a = json(&hcert(&args("1")));
    let mut b = json(&hcert(&args("3")));
    mask_elapsed(&mut a);
    mask_elapsed(&mut b);
    assert_eq!(a, b);
    assert_eq!(code(&hcert(&["--jobs", "0", "list"])), 64);
}
