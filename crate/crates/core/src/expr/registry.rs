use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::{parse_ast, Ast};
use super::general::{derive_general_conjecture, ramanujan_series_record, Family};
use super::{ClosedFormExpr, CongruenceRHS, ExprError, Poly, SummandExpr};
use crate::exact::Rational;

pub const SCHEMA: u32 = 1;

const SHIPPED: &str = include_str!("../../data/registry.toml");

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("cannot read registry: {0}")]
    Io(#[from] std::io::Error),
    #[error("registry is not valid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("unsupported registry schema {0} (expected {SCHEMA})")]
    Schema(u32),
    #[error("record {id}: {msg}")]
    Record { id: String, msg: String },
    #[error("duplicate record id {0}")]
    Duplicate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[derive(Default)]
pub enum Kind {
    #[default]
    Identity,
    Congruence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    #[default]
    Conjecture,
    Baseline,
    Fixture,
}

/// `(a p + b)/d`; with `a = 0` a fixed index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PBound {
    pub a: i64,
    pub b: i64,
    pub d: i64,
}

impl PBound {
    pub fn fixed(n: i64) -> Self {
        PBound { a: 0, b: n, d: 1 }
    }

    pub fn at(&self, p: u64) -> Option<i64> {
        let n = self.a as i128 * p as i128 + self.b as i128;
        (n % self.d as i128 == 0).then(|| (n / self.d as i128) as i64)
    }

    pub fn is_fixed(&self) -> bool {
        self.a == 0
    }

    fn parse(s: &str) -> Result<PBound, String> {
        let e = parse_ast(s, &[]).map_err(|e| e.to_string())?;
        let (x, y) = e.linear_in("p").ok_or("bound must be linear in p")?;
        let d = x.denom().lcm(y.denom());
        let dd = Rational::from_integer(d.clone());
        let a = (x * &dd).to_integer().to_i64().ok_or("bound too large")?;
        let b = (y * &dd).to_integer().to_i64().ok_or("bound too large")?;
        Ok(PBound { a, b, d: d.to_i64().ok_or("bound too large")? })
    }
}

impl fmt::Display for PBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.a == 0 {
            return write!(f, "{}", self.b);
        }
        let lin = match (self.a, self.b) {
            (1, 0) => "p".to_string(),
            (a, 0) => format!("{a}p"),
            (1, b) if b > 0 => format!("p+{b}"),
            (1, b) => format!("p{b}"),
            (a, b) if b > 0 => format!("{a}p+{b}"),
            (a, b) => format!("{a}p{b}"),
        };
        if self.d == 1 {
            write!(f, "{lin}")
        } else {
            write!(f, "({lin})/{}", self.d)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Limit {
    Infinite,
    Finite(PBound),
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::Infinite => write!(f, "inf"),
            Limit::Finite(b) => write!(f, "{b}"),
        }
    }
}

/// One conjunct of a prime filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pred {
    Gt(i64),
    Mod { m: i64, r: i64 },
    Ne(i64),
    NotDivides(BigInt),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PrimeFilter {
    pub preds: Vec<Pred>,
}

impl PrimeFilter {
    pub fn admits(&self, p: u64) -> bool {
        let pi = p as i64;
        self.preds.iter().all(|q| match q {
            Pred::Gt(n) => pi > *n,
            Pred::Mod { m, r } => pi.rem_euclid(*m) == r.rem_euclid(*m),
            Pred::Ne(n) => pi != *n,
            Pred::NotDivides(n) => !(n % BigInt::from(p)).is_zero(),
        })
    }

    pub fn parse(s: &str, env: &BTreeMap<String, Rational>) -> Result<PrimeFilter, String> {
        let mut preds = Vec::new();
        for part in s.split(" and ").flat_map(|x| x.split(',')) {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let val = |t: &str| -> Result<BigInt, String> {
                let e = parse_ast(t.trim(), &[]).map_err(|e| e.to_string())?.substitute(env);
                e.const_int().ok_or_else(|| format!("'{t}' is not an integer"))
            };
            let small = |t: &str| val(t)?.to_i64().ok_or_else(|| "value too large".to_string());
            let lhs_p = |l: &str| l.trim() == "p";
            let pred = if let Some((l, r)) = part.split_once("!|") {
                if !lhs_p(l) {
                    return Err(format!("filter '{part}' must start with p"));
                }
                let n = val(r)?;
                if n.is_zero() {
                    return Err("p !| 0 admits no prime".into());
                }
                Pred::NotDivides(n.abs())
            } else if let Some((l, r)) = part.split_once("!=") {
                if !lhs_p(l) {
                    return Err(format!("filter '{part}' must start with p"));
                }
                Pred::Ne(small(r)?)
            } else if let Some((l, r)) = part.split_once(">=") {
                if !lhs_p(l) {
                    return Err(format!("filter '{part}' must start with p"));
                }
                Pred::Gt(small(r)? - 1)
            } else if let Some((l, r)) = part.split_once('>') {
                if !lhs_p(l) {
                    return Err(format!("filter '{part}' must start with p"));
                }
                Pred::Gt(small(r)?)
            } else if let Some((l, r)) = part.split_once('%') {
                if !lhs_p(l) {
                    return Err(format!("filter '{part}' must start with p"));
                }
                let (m, res) = r.split_once("==").ok_or("expected 'p % m == r'")?;
                let m = small(m)?;
                if m <= 0 {
                    return Err("modulus must be positive".into());
                }
                Pred::Mod { m, r: small(res)? }
            } else {
                return Err(format!("cannot parse filter '{part}'"));
            };
            preds.push(pred);
        }
        Ok(PrimeFilter { preds })
    }
}

impl fmt::Display for PrimeFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .preds
            .iter()
            .map(|q| match q {
                Pred::Gt(n) => format!("p > {n}"),
                Pred::Mod { m, r } => format!("p % {m} == {r}"),
                Pred::Ne(n) => format!("p != {n}"),
                Pred::NotDivides(n) => format!("p !| {n}"),
            })
            .collect();
        write!(f, "{}", parts.join(" and "))
    }
}

/// `lead(n) a_{n+1} = sum_i terms[i](n) a_{n-i}` with given initial values.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceSpec {
    pub name: String,
    pub initial: Vec<Rational>,
    pub lead: Poly,
    pub terms: Vec<Poly>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rhs {
    Closed(ClosedFormExpr),
    Congruence(CongruenceRHS),
}

/// A record after parameter substitution.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    /// `x=1/8, m=2`; empty for unparameterized records.
    pub label: String,
    pub params: BTreeMap<String, Rational>,
    pub summand: SummandExpr,
    pub rhs: Rhs,
    pub filter: PrimeFilter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureRecord {
    pub id: String,
    pub kind: Kind,
    pub role: Role,
    pub label: Option<String>,
    pub start: PBound,
    pub limit: Limit,
    pub summand_src: String,
    pub rhs_src: String,
    pub filter_src: Option<String>,
    pub modexp: Option<u32>,
    pub flags: Vec<String>,
    pub provenance: String,
    pub note: Option<String>,
    /// Alternative names accepted on lookup.
    pub aliases: Vec<String>,
    pub instances: Vec<Instance>,
}

impl ConjectureRecord {
    pub fn has_flag(&self, f: &str) -> bool {
        self.flags.iter().any(|x| x == f)
    }

    pub fn is_parameterized(&self) -> bool {
        self.instances.len() > 1 || self.instances.iter().any(|i| !i.params.is_empty())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    pub sequences: Vec<RecurrenceSpec>,
    pub records: Vec<ConjectureRecord>,
}

impl Registry {
    /// Look up a record by id or alias.
    pub fn get(&self, id: &str) -> Option<&ConjectureRecord> {
        self.records.iter().find(|r| r.id == id).or_else(|| self.records.iter().find(|r| r.aliases.iter().any(|a| a == id)))
    }

    pub fn sequence(&self, name: &str) -> Option<&RecurrenceSpec> {
        self.sequences.iter().find(|s| s.name == name)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn sequence_names(&self) -> Vec<String> {
        self.sequences.iter().map(|s| s.name.clone()).collect()
    }

    /// Add a record built elsewhere (for example from a template); ids must
    /// stay unique.
    pub fn push(&mut self, r: ConjectureRecord) -> Result<(), RegistryError> {
        if self.get(&r.id).is_some() {
            return Err(RegistryError::Duplicate(r.id));
        }
        self.records.push(r);
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    schema: Option<u32>,
    #[serde(default)]
    sequence: Vec<RawSequence>,
    #[serde(default)]
    record: Vec<RawRecord>,
    #[serde(default)]
    general: Vec<RawGeneral>,
}

/// A rational Ramanujan-type series fed to the template.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeneral {
    family: u8,
    a: i64,
    b: i64,
    m: i64,
    c: String,
    d: u64,
    provenance: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSequence {
    name: String,
    initial: Vec<String>,
    lead: String,
    terms: Vec<String>,
}

/// Record as written in the registry file.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawRecord {
    pub id: String,
    pub kind: Kind,
    #[serde(default)]
    pub role: Role,
    pub label: Option<String>,
    pub start: Option<String>,
    pub limit: Option<String>,
    pub summand: String,
    pub rhs: String,
    pub modexp: Option<u32>,
    pub filter: Option<String>,
    #[serde(default)]
    pub samples: Vec<BTreeMap<String, String>>,
    #[serde(default)]
    pub flags: Vec<String>,
    pub provenance: String,
    pub note: Option<String>,
    #[serde(default)]
    pub aliases: Vec<String>,
}


fn poly_in(e: &Ast, var: &str) -> Result<Poly, String> {
    Ok(match e {
        Ast::Num(r) => Poly::constant(r.clone()),
        Ast::Var(v) if v == var => Poly(vec![Rational::zero(), Rational::one()]),
        Ast::Var(v) => return Err(format!("unknown variable {v}")),
        Ast::Neg(a) => poly_in(a, var)?.scale(&-Rational::one()),
        Ast::Add(a, b) => poly_in(a, var)?.add(&poly_in(b, var)?),
        Ast::Sub(a, b) => poly_in(a, var)?.add(&poly_in(b, var)?.scale(&-Rational::one())),
        Ast::Mul(a, b) => poly_in(a, var)?.mul(&poly_in(b, var)?),
        Ast::Div(a, b) => {
            let d = b.const_value().filter(|d| !d.is_zero()).ok_or("division by a non-constant")?;
            poly_in(a, var)?.scale(&d.recip())
        }
        Ast::Pow(a, b) => {
            let n = b.const_i64().filter(|n| *n >= 0).ok_or("bad exponent")?;
            let base = poly_in(a, var)?;
            let mut acc = Poly::constant(Rational::one());
            for _ in 0..n {
                acc = acc.mul(&base);
            }
            acc
        }
        Ast::Call(..) => return Err("function calls are not polynomials".into()),
    })
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_ast(s, &[])
        .map_err(|e| e.to_string())?
        .const_value()
        .ok_or_else(|| format!("'{s}' is not a rational number"))
}

fn sequence(raw: &RawSequence) -> Result<RecurrenceSpec, String> {
    let poly = |s: &str| poly_in(&parse_ast(s, &[]).map_err(|e| e.to_string())?, "n");
    let spec = RecurrenceSpec {
        name: raw.name.clone(),
        initial: raw.initial.iter().map(|s| rational(s)).collect::<Result<_, _>>()?,
        lead: poly(&raw.lead)?,
        terms: raw.terms.iter().map(|s| poly(s)).collect::<Result<_, _>>()?,
    };
    if spec.initial.len() < spec.terms.len() {
        return Err("need at least as many initial values as recurrence terms".into());
    }
    if spec.lead.is_zero() {
        return Err("leading coefficient is zero".into());
    }
    Ok(spec)
}

pub(crate) fn build_record(raw: &RawRecord, seqs: &[String]) -> Result<ConjectureRecord, RegistryError> {
    let err = |msg: String| RegistryError::Record { id: raw.id.clone(), msg };
    let ee = |what: &str, e: ExprError| err(format!("{what}: {e}"));
    if raw.id.trim().is_empty() {
        return Err(err("empty id".into()));
    }
    let start = match &raw.start {
        None => PBound::fixed(0),
        Some(s) => PBound::parse(s).map_err(|m| err(format!("start: {m}")))?,
    };
    let limit = match (raw.kind, raw.limit.as_deref()) {
        (Kind::Identity, None | Some("inf")) => Limit::Infinite,
        (Kind::Identity, Some(_)) => return Err(err("identity records must have limit = \"inf\"".into())),
        (Kind::Congruence, None | Some("inf")) => {
            return Err(err("congruence records need a finite limit such as p-1 or (p-1)/2".into()))
        }
        (Kind::Congruence, Some(s)) => {
            let b = PBound::parse(s).map_err(|m| err(format!("limit: {m}")))?;
            if b.is_fixed() {
                return Err(err("congruence limit must depend on p".into()));
            }
            Limit::Finite(b)
        }
    };
    if raw.kind == Kind::Identity && !start.is_fixed() {
        return Err(err("identity start must be a fixed integer".into()));
    }
    let modexp = match raw.kind {
        Kind::Identity => {
            if raw.modexp.is_some() || raw.filter.is_some() {
                return Err(err("identity records take no modexp or filter".into()));
            }
            None
        }
        Kind::Congruence => match raw.modexp {
            Some(e) if (1..=8).contains(&e) => Some(e),
            Some(e) => return Err(err(format!("modexp {e} outside 1..=8"))),
            None => return Err(err("congruence records need modexp".into())),
        },
    };
    let sum_ast = parse_ast(&raw.summand, seqs).map_err(|e| ee("summand", e))?;
    let rhs_ast = parse_ast(&raw.rhs, seqs).map_err(|e| ee("rhs", e))?;
    let envs: Vec<BTreeMap<String, Rational>> = if raw.samples.is_empty() {
        vec![BTreeMap::new()]
    } else {
        raw.samples
            .iter()
            .map(|s| {
                s.iter()
                    .map(|(k, v)| Ok((k.clone(), rational(v).map_err(|m| err(format!("sample {k}: {m}")))?)))
                    .collect::<Result<BTreeMap<_, _>, RegistryError>>()
            })
            .collect::<Result<_, _>>()?
    };
    let mut instances = Vec::new();
    for env in envs {
        let label = env
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(", ");
        let ctx = |what: &str, e: ExprError| {
            if label.is_empty() {
                ee(what, e)
            } else {
                err(format!("{what} at {label}: {e}"))
            }
        };
        let summand = SummandExpr::from_ast(&sum_ast.substitute(&env), seqs).map_err(|e| ctx("summand", e))?;
        let rhs_sub = rhs_ast.substitute(&env);
        let rhs = match raw.kind {
            Kind::Identity => match ClosedFormExpr::from_ast(&rhs_sub, seqs) {
                Ok(c) => Rhs::Closed(c),
                Err(e) => {
                    if CongruenceRHS::from_ast(&rhs_sub).is_ok() {
                        return Err(err("kind is identity but rhs is a congruence right-hand side".into()));
                    }
                    return Err(ctx("rhs", e));
                }
            },
            Kind::Congruence => match CongruenceRHS::from_ast(&rhs_sub) {
                Ok(c) => Rhs::Congruence(c),
                Err(e) => return Err(ctx("rhs", e)),
            },
        };
        if raw.kind == Kind::Identity && summand.mentions_p() {
            return Err(err("identity summand mentions p".into()));
        }
        let filter = match &raw.filter {
            None => PrimeFilter::default(),
            Some(f) => PrimeFilter::parse(f, &env).map_err(|m| err(format!("filter: {m}")))?,
        };
        instances.push(Instance { label, params: env, summand, rhs, filter });
    }
    Ok(ConjectureRecord {
        id: raw.id.clone(),
        kind: raw.kind,
        role: raw.role,
        label: raw.label.clone(),
        start,
        limit,
        summand_src: raw.summand.clone(),
        rhs_src: raw.rhs.clone(),
        filter_src: raw.filter.clone(),
        modexp,
        flags: raw.flags.clone(),
        provenance: raw.provenance.clone(),
        note: raw.note.clone(),
        aliases: raw.aliases.clone(),
        instances,
    })
}

/// Parse and validate a registry document.
pub fn parse_registry(text: &str) -> Result<Registry, RegistryError> {
    if text.trim().is_empty() {
        return Ok(Registry::default());
    }
    let raw: RawFile = toml::from_str(text)?;
    match raw.schema {
        Some(SCHEMA) => {}
        Some(s) => return Err(RegistryError::Schema(s)),
        None => return Err(RegistryError::Schema(0)),
    }
    let mut sequences = Vec::new();
    for s in &raw.sequence {
        sequences.push(sequence(s).map_err(|msg| RegistryError::Record { id: format!("sequence {}", s.name), msg })?);
    }
    let names: Vec<String> = sequences.iter().map(|s: &RecurrenceSpec| s.name.clone()).collect();
    let mut seen = BTreeSet::new();
    let mut records = Vec::new();
    for r in &raw.record {
        for name in std::iter::once(&r.id).chain(&r.aliases) {
            if !seen.insert(name.clone()) {
                return Err(RegistryError::Duplicate(name.clone()));
            }
        }
        let rec = build_record(r, &names)?;
        for inst in &rec.instances {
            for s in inst.summand.sequences() {
                if !names.contains(&s) {
                    return Err(RegistryError::Record { id: r.id.clone(), msg: format!("unknown sequence {s}") });
                }
            }
        }
        records.push(rec);
    }
    for g in &raw.general {
        let bad = |msg: String| RegistryError::Record { id: format!("general m={}", g.m), msg };
        let fam = Family::from_index(g.family).ok_or_else(|| bad("family must be 1..4".into()))?;
        let c = rational(&g.c).map_err(bad)?;
        let base = ramanujan_series_record(fam, g.a, g.b, g.m, &c, g.d, &g.provenance)?;
        let (ident, cong) = derive_general_conjecture(fam, g.a, g.b, g.m, &c, g.d)?;
        for rec in [base, ident, cong] {
            if !seen.insert(rec.id.clone()) {
                return Err(RegistryError::Duplicate(rec.id));
            }
            records.push(rec);
        }
    }
    Ok(Registry { sequences, records })
}

pub fn load_registry(path: impl AsRef<Path>) -> Result<Registry, RegistryError> {
    parse_registry(&std::fs::read_to_string(path)?)
}

/// The registry compiled into the library.
pub fn shipped_registry() -> Registry {
    parse_registry(SHIPPED).expect("shipped registry is valid")
}
