//! Verdict rows, the JSON report and its markdown and csv projections.

use std::cmp::Ordering;

use hcert::congruence_engine::{CongruenceVerdict, StrategyUsed};
use hcert::realball::{Mag, RealBall, Verdict};
use hcert::series_engine::{IdentityVerdict, SeriesStatus, TailMethod};
use serde::{Deserialize, Serialize};

use crate::config::Format;

pub const SCHEMA: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

/// One verdict: an identity sample at some precision, or a congruence
/// sample at one prime.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Row {
    pub id: String,
    pub kind: String,
    pub sample: String,
    /// CertifiedEqual, CertifiedDistinct, Inconclusive, TailCapHit, Holds,
    /// Fails or Skipped.
    pub verdict: String,
    pub digits: Option<u32>,
    pub prime: Option<u64>,
    pub modexp: Option<u32>,
    pub lhs: Option<String>,
    pub rhs: Option<String>,
    /// Upper bound for `|lhs - rhs|` (identities).
    pub bound: Option<String>,
    /// `v_p(lhs - rhs)` when nonzero (congruences).
    pub diff_valuation: Option<i64>,
    /// Tail method for identities, evaluation path for congruences.
    pub strategy: String,
    /// Exact and fast paths agree (strategy `both` only).
    pub agree: Option<bool>,
    pub diagnostic: Option<String>,
    /// Record is exempt from the exit-code gate.
    pub exempt: bool,
    pub elapsed_ms: u64,
}

impl Row {
    fn gate(&self) -> i32 {
        if self.exempt {
            return EXIT_OK;
        }
        match self.verdict.as_str() {
            "CertifiedDistinct" | "Fails" => EXIT_FAIL,
            "CertifiedEqual" | "Holds" => EXIT_OK,
            _ => EXIT_INCONCLUSIVE,
        }
    }

    pub fn is_finding(&self) -> bool {
        matches!(self.verdict.as_str(), "CertifiedDistinct" | "Fails")
    }
}

/// Decimal scientific form of a magnitude bound, safe far outside the
/// `f64` exponent range.
pub fn fmt_mag(m: &Mag) -> String {
    let l = m.log2();
    if l == f64::NEG_INFINITY {
        return "0".into();
    }
    let t = l * std::f64::consts::LOG10_2;
    let mut e = t.floor();
    let mut mant = 10f64.powf(t - e);
    if mant >= 9.995 {
        mant /= 10.0;
        e += 1.0;
    }
    format!("{mant:.2}e{}", e as i64)
}

fn fmt_ball(b: &RealBall, digits: u32) -> String {
    format!("{} +/- {}", b.to_decimal(digits as usize), fmt_mag(b.rad()))
}

fn tail_name(m: Option<TailMethod>) -> String {
    match m {
        Some(TailMethod::Ratio) => "ratio".into(),
        Some(TailMethod::Euler { from }) => format!("euler@{from}"),
        None => "none".into(),
    }
}

pub fn identity_row(v: &IdentityVerdict, exempt: bool) -> Row {
    let verdict = match (v.verdict, v.status) {
        (Verdict::CertifiedEqual, _) => "CertifiedEqual",
        (Verdict::CertifiedDistinct, _) => "CertifiedDistinct",
        (Verdict::Inconclusive, Some(SeriesStatus::TailCapHit)) => "TailCapHit",
        (Verdict::Inconclusive, _) => "Inconclusive",
    };
    Row {
        id: v.id.clone(),
        kind: "identity".into(),
        sample: v.sample.clone(),
        verdict: verdict.into(),
        digits: Some(v.digits),
        prime: None,
        modexp: None,
        lhs: v.lhs.as_ref().map(|b| fmt_ball(b, v.digits)),
        rhs: v.rhs.as_ref().map(|b| fmt_ball(b, v.digits)),
        bound: v.bound.as_ref().map(fmt_mag),
        diff_valuation: None,
        strategy: tail_name(v.method),
        agree: None,
        diagnostic: v.diagnostic.clone(),
        exempt,
        elapsed_ms: v.elapsed_ms as u64,
    }
}

pub fn congruence_row(v: &CongruenceVerdict, exempt: bool) -> Row {
    let verdict = if v.skipped.is_some() {
        "Skipped"
    } else if v.holds {
        "Holds"
    } else {
        "Fails"
    };
    let diagnostic = v.skipped.clone().or_else(|| match v.agree {
        Some(false) => Some("exact and fast paths disagree".into()),
        _ => None,
    });
    Row {
        id: v.id.clone(),
        kind: "congruence".into(),
        sample: v.sample.clone(),
        verdict: verdict.into(),
        digits: None,
        prime: Some(v.prime),
        modexp: Some(v.modexp),
        lhs: v.lhs.as_ref().map(|x| x.to_string()),
        rhs: v.rhs.as_ref().map(|x| x.to_string()),
        bound: None,
        diff_valuation: v.diff_valuation,
        strategy: match v.strategy {
            StrategyUsed::ExactRational => "exact".into(),
            StrategyUsed::ModPKFast => "fast".into(),
        },
        agree: v.agree,
        diagnostic,
        exempt,
        elapsed_ms: v.elapsed_ms as u64,
    }
}

/// Order by id, then prime; the engine's sample order is kept within ties.
pub fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(|a, b| match a.id.cmp(&b.id) {
        Ordering::Equal => a.prime.cmp(&b.prime),
        o => o,
    });
}

/// Settings that shaped the run, echoed into the report.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Echo {
    pub registry: String,
    pub digits: u32,
    pub prime_min: u64,
    pub prime_max: u64,
    pub strategy: String,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Summary {
    pub rows: usize,
    pub certified_equal: usize,
    pub certified_distinct: usize,
    pub inconclusive: usize,
    pub holds: usize,
    pub fails: usize,
    pub skipped: usize,
    /// Ids with a CertifiedDistinct or failing verdict, exempt or not.
    pub findings: Vec<String>,
    pub exit_code: i32,
}

impl Summary {
    pub fn of(rows: &[Row]) -> Self {
        let mut s = Summary { rows: rows.len(), ..Summary::default() };
        for r in rows {
            match r.verdict.as_str() {
                "CertifiedEqual" => s.certified_equal += 1,
                "CertifiedDistinct" => s.certified_distinct += 1,
                "Holds" => s.holds += 1,
                "Fails" => s.fails += 1,
                "Skipped" => s.skipped += 1,
                _ => s.inconclusive += 1,
            }
            if r.is_finding() && !s.findings.contains(&r.id) {
                s.findings.push(r.id.clone());
            }
        }
        s.exit_code = exit_code(rows);
        s
    }
}

/// 1 on any gated failure, else 2 on anything unsettled, else 0.
pub fn exit_code(rows: &[Row]) -> i32 {
    let codes: Vec<i32> = rows.iter().map(Row::gate).collect();
    if codes.contains(&EXIT_FAIL) {
        EXIT_FAIL
    } else if codes.contains(&EXIT_INCONCLUSIVE) {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub schema: u32,
    pub tool: String,
    pub config: Echo,
    pub rows: Vec<Row>,
    pub summary: Summary,
}

impl Report {
    pub fn new(config: Echo, mut rows: Vec<Row>) -> Self {
        sort_rows(&mut rows);
        let summary = Summary::of(&rows);
        Report { schema: SCHEMA, tool: format!("hcert {}", env!("CARGO_PKG_VERSION")), config, rows, summary }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let r: Report = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if r.schema != SCHEMA {
            return Err(format!("unsupported report schema {}", r.schema));
        }
        Ok(r)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
            Format::Markdown => self.markdown(),
            Format::Csv => self.csv(),
        }
    }

    fn markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("| id | sample | kind | at | verdict | lhs | rhs | bound | strategy | ms | diagnostic |\n");
        out.push_str("|---|---|---|---|---|---|---|---|---|---|---|\n");
        for r in &self.rows {
            let at = match (r.digits, r.prime) {
                (Some(d), _) => format!("{d} digits"),
                (None, Some(p)) => format!("p={p}, e={}", r.modexp.unwrap_or(1)),
                _ => String::new(),
            };
            let bound = match (&r.bound, r.diff_valuation) {
                (Some(b), _) => b.clone(),
                (None, Some(v)) => format!("v_p={v}"),
                _ => String::new(),
            };
            let mut verdict = r.verdict.clone();
            if r.exempt {
                verdict.push_str(" (exempt)");
            }
            let cells = [
                r.id.as_str(),
                r.sample.as_str(),
                r.kind.as_str(),
                at.as_str(),
                verdict.as_str(),
                r.lhs.as_deref().unwrap_or(""),
                r.rhs.as_deref().unwrap_or(""),
                bound.as_str(),
                r.strategy.as_str(),
                &r.elapsed_ms.to_string(),
                r.diagnostic.as_deref().unwrap_or(""),
            ];
            out.push_str("| ");
            out.push_str(&cells.iter().map(|c| c.replace('|', "\\|")).collect::<Vec<_>>().join(" | "));
            out.push_str(" |\n");
        }
        let s = &self.summary;
        out.push_str(&format!(
            "\n{} rows: {} equal, {} distinct, {} inconclusive, {} hold, {} fail, {} skipped; exit {}\n",
            s.rows, s.certified_equal, s.certified_distinct, s.inconclusive, s.holds, s.fails, s.skipped, s.exit_code
        ));
        if !s.findings.is_empty() {
            out.push_str(&format!("findings: {}\n", s.findings.join(", ")));
        }
        out
    }

    fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("row serializes");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
    }
}
