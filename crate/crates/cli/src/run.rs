//! Subcommand bodies. Each returns the process exit code or a [`Failure`].

use std::io::Write;
use std::path::{Path, PathBuf};

use hcert::congruence_engine::verify_congruence;
use hcert::constants::ConstantKernel;
use hcert::discover::{discover_closed_form, shipped_discover_config, DiscoverConfig, Discovery};
use hcert::expr::{
    load_registry, parse_closed_form, parse_summand, shipped_registry, ConjectureRecord, Kind, Registry,
    RegistryError, Rhs,
};
use hcert::series_engine::{eval_closed, verify_identity, working_prec, SeqTable};
use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::report::{congruence_row, identity_row, Echo, Report, Row, SCHEMA};

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NOINPUT: i32 = 66;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IO: i32 = 74;

/// Error carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub msg: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, msg: msg.into() }
    }

    fn new(code: i32, msg: impl Into<String>) -> Self {
        Failure { code, msg: msg.into() }
    }
}

pub type Outcome = Result<i32, Failure>;

pub fn registry(cfg: &RunConfig) -> Result<Registry, Failure> {
    let Some(path) = &cfg.registry else {
        return Ok(shipped_registry());
    };
    if !path.is_file() {
        return Err(Failure::new(EXIT_NOINPUT, format!("registry not found: {}", path.display())));
    }
    load_registry(path).map_err(|e| match e {
        RegistryError::Io(e) => Failure::new(EXIT_NOINPUT, format!("{}: {e}", path.display())),
        e => Failure::new(EXIT_DATA, format!("{}: {e}", path.display())),
    })
}

fn kernel(cfg: &RunConfig) -> ConstantKernel {
    match &cfg.cache_dir {
        Some(d) => ConstantKernel::with_disk_cache(d),
        None => ConstantKernel::new(),
    }
}

/// Write to `--output` or stdout.
pub fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    let res = match output {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    res.map_err(|e| Failure::new(EXIT_IO, format!("write failed: {e}")))
}

/// Resolve ids and aliases, rejecting unknown ones before any work starts.
fn select<'a>(reg: &'a Registry, ids: &[String]) -> Result<Vec<&'a ConjectureRecord>, Failure> {
    let mut out: Vec<&ConjectureRecord> = Vec::new();
    let unknown: Vec<&str> = ids.iter().filter(|i| reg.get(i).is_none()).map(String::as_str).collect();
    if !unknown.is_empty() {
        return Err(Failure::usage(format!("unknown id: {}", unknown.join(", "))));
    }
    for id in ids {
        let r = reg.get(id).expect("checked above");
        if !out.iter().any(|o| o.id == r.id) {
            out.push(r);
        }
    }
    Ok(out)
}

fn echo(cfg: &RunConfig, ids: &[String]) -> Echo {
    Echo {
        registry: cfg.registry.as_ref().map_or_else(|| "<shipped>".into(), |p| p.display().to_string()),
        digits: cfg.digits,
        prime_min: cfg.prime_min,
        prime_max: cfg.prime_max,
        strategy: format!("{:?}", cfg.strategy).to_lowercase(),
        ids: ids.to_vec(),
    }
}

fn run_record(r: &ConjectureRecord, reg: &Registry, cfg: &RunConfig, k: &ConstantKernel) -> Vec<Row> {
    let exempt = r.has_flag("open-question");
    match r.kind {
        Kind::Identity => {
            verify_identity(r, &reg.sequences, cfg.digits, k).iter().map(|v| identity_row(v, exempt)).collect()
        }
        Kind::Congruence => {
            match verify_congruence(r, &reg.sequences, cfg.prime_min, cfg.prime_max, cfg.strategy.into()) {
                Ok(vs) => vs.iter().map(|v| congruence_row(v, exempt)).collect(),
                Err(e) => vec![Row {
                    id: r.id.clone(),
                    kind: "congruence".into(),
                    sample: String::new(),
                    verdict: "Skipped".into(),
                    digits: None,
                    prime: None,
                    modexp: r.modexp,
                    lhs: None,
                    rhs: None,
                    bound: None,
                    diff_valuation: None,
                    strategy: String::new(),
                    agree: None,
                    diagnostic: Some(e.to_string()),
                    exempt,
                    elapsed_ms: 0,
                }],
            }
        }
    }
}

fn run_records(records: &[&ConjectureRecord], reg: &Registry, cfg: &RunConfig, ids: &[String]) -> Report {
    let k = kernel(cfg);
    let rows: Vec<Row> = records.par_iter().flat_map_iter(|r| run_record(r, reg, cfg, &k)).collect();
    Report::new(echo(cfg, ids), rows)
}

fn finish(report: &Report, cfg: &RunConfig, output: Option<&Path>) -> Outcome {
    emit(&report.render(cfg.format.unwrap_or(Format::Json)), output)?;
    let s = &report.summary;
    if !s.findings.is_empty() {
        let exempt = |id: &String| report.rows.iter().any(|r| &r.id == id && r.exempt);
        let names: Vec<String> =
            s.findings.iter().map(|id| if exempt(id) { format!("{id} (exempt)") } else { id.clone() }).collect();
        eprintln!("findings: {}", names.join(", "));
    }
    Ok(s.exit_code)
}

pub fn verify(cfg: &RunConfig, output: Option<&Path>) -> Outcome {
    if cfg.ids.is_empty() {
        return Err(Failure::usage("verify needs at least one --id"));
    }
    let reg = registry(cfg)?;
    let records = select(&reg, &cfg.ids)?;
    finish(&run_records(&records, &reg, cfg, &cfg.ids), cfg, output)
}

pub struct AllFilter {
    pub kind: Option<String>,
    pub role: Option<String>,
    pub skip_variants: bool,
}

pub fn verify_all(cfg: &RunConfig, filter: &AllFilter, output: Option<&Path>) -> Outcome {
    let reg = registry(cfg)?;
    let chosen = if cfg.ids.is_empty() { reg.records.iter().collect() } else { select(&reg, &cfg.ids)? };
    let lower = |x: &dyn std::fmt::Debug| format!("{x:?}").to_lowercase();
    let records: Vec<&ConjectureRecord> = chosen
        .into_iter()
        .filter(|r| filter.kind.as_ref().is_none_or(|k| lower(&r.kind) == *k))
        .filter(|r| filter.role.as_ref().is_none_or(|k| lower(&r.role) == *k))
        .filter(|r| !(filter.skip_variants && r.has_flag("variant")))
        .collect();
    finish(&run_records(&records, &reg, cfg, &cfg.ids), cfg, output)
}

pub fn list(cfg: &RunConfig, output: Option<&Path>) -> Outcome {
    #[derive(Serialize)]
    struct Entry<'a> {
        id: &'a str,
        kind: String,
        role: String,
        label: Option<&'a str>,
        samples: usize,
        modexp: Option<u32>,
        flags: &'a [String],
        aliases: &'a [String],
        summand: &'a str,
        rhs: &'a str,
    }
    let reg = registry(cfg)?;
    let entries: Vec<Entry> = reg
        .records
        .iter()
        .map(|r| Entry {
            id: &r.id,
            kind: format!("{:?}", r.kind).to_lowercase(),
            role: format!("{:?}", r.role).to_lowercase(),
            label: r.label.as_deref(),
            samples: r.instances.len(),
            modexp: r.modexp,
            flags: &r.flags,
            aliases: &r.aliases,
            summand: &r.summand_src,
            rhs: &r.rhs_src,
        })
        .collect();
    let text = match cfg.format {
        Some(Format::Json) => serde_json::to_string_pretty(&entries).expect("list serializes") + "\n",
        Some(Format::Csv) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["id", "kind", "role", "label", "samples", "flags", "summand", "rhs"]).expect("csv");
            for e in &entries {
                w.write_record([
                    e.id,
                    &e.kind,
                    &e.role,
                    e.label.unwrap_or(""),
                    &e.samples.to_string(),
                    &e.flags.join(";"),
                    e.summand,
                    e.rhs,
                ])
                .expect("csv");
            }
            String::from_utf8(w.into_inner().expect("csv")).expect("utf-8")
        }
        _ => {
            let mut s = String::new();
            for e in &entries {
                let mut line = format!("{:<22} {:<10} {:<10} {}", e.id, e.kind, e.role, e.label.unwrap_or("-"));
                if e.samples > 1 {
                    line.push_str(&format!("  [{} samples]", e.samples));
                }
                if !e.flags.is_empty() {
                    line.push_str(&format!("  ({})", e.flags.join(", ")));
                }
                s.push_str(line.trim_end());
                s.push('\n');
            }
            s.push_str(&format!("{} records\n", entries.len()));
            s
        }
    };
    emit(&text, output)?;
    Ok(0)
}

pub struct DiscoverArgs {
    pub ids: Vec<String>,
    pub summand: Option<String>,
    pub start: i64,
    pub basis: Vec<String>,
    pub menu: Option<PathBuf>,
    pub digits: Option<u32>,
    pub max_height: Option<String>,
}

#[derive(Debug, Serialize)]
struct DiscoverEntry {
    id: String,
    start: i64,
    summand: String,
    discovery: Option<Discovery>,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct DiscoverReport {
    schema: u32,
    tool: String,
    digits: u32,
    max_height: String,
    results: Vec<DiscoverEntry>,
}

pub fn discover(cfg: &RunConfig, args: &DiscoverArgs, output: Option<&Path>) -> Outcome {
    let menu = match &args.menu {
        Some(p) => DiscoverConfig::load(p).map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", p.display())))?,
        None => shipped_discover_config(),
    };
    let digits = args.digits.unwrap_or(menu.digits);
    if digits < crate::config::MIN_DIGITS {
        return Err(Failure::usage(format!("digits must be at least {}", crate::config::MIN_DIGITS)));
    }
    let height: BigInt = match &args.max_height {
        Some(h) => h.parse().map_err(|_| Failure::usage(format!("bad --max-height '{h}'")))?,
        None => menu.max_height().map_err(|e| Failure::new(EXIT_DATA, e.to_string()))?,
    };
    let basis = if args.basis.is_empty() {
        menu.basis().map_err(|e| Failure::new(EXIT_DATA, e.to_string()))?
    } else {
        args.basis
            .iter()
            .map(|b| parse_closed_form(b).map_err(|e| Failure::usage(format!("basis '{b}': {e}"))))
            .collect::<Result<Vec<_>, _>>()?
    };

    // (id, start, summand source, summand)
    let mut jobs = Vec::new();
    if let Some(src) = &args.summand {
        let s = parse_summand(src).map_err(|e| Failure::usage(format!("summand: {e}")))?;
        jobs.push(("summand".to_string(), args.start, src.clone(), s));
    }
    let reg = if args.ids.is_empty() { None } else { Some(registry(cfg)?) };
    for id in &args.ids {
        if let Some(t) = menu.targets.iter().find(|t| &t.id == id) {
            let s = parse_summand(&t.summand).map_err(|e| Failure::new(EXIT_DATA, format!("{id}: {e}")))?;
            jobs.push((t.id.clone(), t.start, t.summand.clone(), s));
            continue;
        }
        let r = reg.as_ref().and_then(|r| r.get(id)).ok_or_else(|| Failure::usage(format!("unknown id: {id}")))?;
        if r.kind != Kind::Identity {
            return Err(Failure::usage(format!("{id} is not an identity record")));
        }
        let start = r.start.at(0).unwrap_or(0);
        for inst in &r.instances {
            let name = if inst.label.is_empty() { r.id.clone() } else { format!("{} [{}]", r.id, inst.label) };
            jobs.push((name, start, r.summand_src.clone(), inst.summand.clone()));
        }
    }
    if jobs.is_empty() {
        for t in &menu.targets {
            let s = parse_summand(&t.summand).map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", t.id)))?;
            jobs.push((t.id.clone(), t.start, t.summand.clone(), s));
        }
    }

    let k = kernel(cfg);
    let sequences = reg.as_ref().map(|r| r.sequences.clone()).unwrap_or_default();
    let results: Vec<DiscoverEntry> = jobs
        .par_iter()
        .map(|(id, start, src, s)| {
            let d = discover_closed_form(s, *start, &basis, digits, &height, &k, &sequences);
            DiscoverEntry {
                id: id.clone(),
                start: *start,
                summand: src.clone(),
                error: d.as_ref().err().map(|e| e.to_string()),
                discovery: d.ok(),
            }
        })
        .collect();
    let code = if results.iter().any(|r| r.error.is_some()) { crate::report::EXIT_INCONCLUSIVE } else { 0 };
    let report = DiscoverReport {
        schema: SCHEMA,
        tool: format!("hcert {}", env!("CARGO_PKG_VERSION")),
        digits,
        max_height: height.to_string(),
        results,
    };
    let text = match cfg.format {
        Some(Format::Markdown) | Some(Format::Csv) => discover_markdown(&report),
        _ => serde_json::to_string_pretty(&report).expect("discover report serializes") + "\n",
    };
    emit(&text, output)?;
    Ok(code)
}

fn discover_markdown(r: &DiscoverReport) -> String {
    let mut out = format!("digits {}, max height {}\n\n", r.digits, r.max_height);
    out.push_str("| id | candidate | margin | residual | value |\n|---|---|---|---|---|\n");
    for e in &r.results {
        let (cand, margin, res, value) = match (&e.discovery, &e.error) {
            (Some(d), _) => (
                d.candidate.clone().unwrap_or_else(|| "none".into()),
                d.margin.map_or(String::new(), |m| format!("{m:.1}")),
                d.relation.residual.map_or(String::new(), |x| format!("{x:.1e}")),
                d.value.clone(),
            ),
            (None, Some(err)) => (format!("error: {err}"), String::new(), String::new(), String::new()),
            _ => Default::default(),
        };
        out.push_str(&format!("| {} | {} | {} | {} | {} |\n", e.id, cand, margin, res, value));
    }
    out
}

pub fn report(input: &Path, format: Format, output: Option<&Path>) -> Outcome {
    let text = std::fs::read_to_string(input)
        .map_err(|e| Failure::new(EXIT_NOINPUT, format!("{}: {e}", input.display())))?;
    let r = Report::parse(&text).map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", input.display())))?;
    emit(&r.render(format), output)?;
    Ok(0)
}

pub enum CacheOp {
    Path,
    List,
    Clear,
    Warm,
}

pub fn cache(cfg: &RunConfig, op: CacheOp, output: Option<&Path>) -> Outcome {
    let Some(dir) = &cfg.cache_dir else {
        return Err(Failure::usage(format!(
            "no cache directory: pass --cache-dir, set {} or cache_dir in the config file",
            crate::config::CACHE_ENV
        )));
    };
    let k = ConstantKernel::with_disk_cache(dir);
    let disk = k.disk().expect("disk cache configured");
    let text = match op {
        CacheOp::Path => format!("{}\n", dir.display()),
        CacheOp::List => {
            let mut names: Vec<String> = std::fs::read_dir(dir)
                .map(|it| {
                    it.filter_map(Result::ok)
                        .map(|e| e.file_name().to_string_lossy().into_owned())
                        .filter(|n| n.ends_with(".json"))
                        .collect()
                })
                .unwrap_or_default();
            names.sort();
            let mut s: String = names.iter().map(|n| format!("{n}\n")).collect();
            s.push_str(&format!("{} entries in {}\n", names.len(), dir.display()));
            s
        }
        CacheOp::Clear => {
            let n = disk.clear().map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", dir.display())))?;
            format!("removed {n} entries\n")
        }
        CacheOp::Warm => {
            let reg = registry(cfg)?;
            let seqs = SeqTable::new(&reg.sequences);
            let prec = working_prec(cfg.digits);
            let mut failed = 0;
            for r in &reg.records {
                for inst in &r.instances {
                    if let Rhs::Closed(cf) = &inst.rhs {
                        if eval_closed(cf, cfg.digits, prec, &k, &seqs).is_err() {
                            failed += 1;
                        }
                    }
                }
            }
            if failed > 0 {
                return Err(Failure::new(EXIT_SOFTWARE, format!("{failed} right-hand sides failed to evaluate")));
            }
            format!("{} entries in {}\n", disk.len(), dir.display())
        }
    };
    emit(&text, output)?;
    Ok(0)
}
