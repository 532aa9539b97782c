//! Template instantiation for rational Ramanujan-type series
//! `sum (ak+b) X_k / m^k = c sqrt(d) / pi`, where `X_k` is one of four
//! binomial products, into a log-identity and a mod p^2 congruence.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::registry::{build_record, RawRecord};
use super::{ConjectureRecord, Kind, RegistryError, Role};
use crate::exact::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `C(2k,k)^3`
    One,
    /// `C(2k,k)^2 C(3k,k)`
    Two,
    /// `C(2k,k)^2 C(4k,2k)`
    Three,
    /// `C(2k,k) C(3k,k) C(6k,3k)`
    Four,
}

impl Family {
    pub fn from_index(i: u8) -> Option<Family> {
        match i {
            1 => Some(Family::One),
            2 => Some(Family::Two),
            3 => Some(Family::Three),
            4 => Some(Family::Four),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        self as u8 + 1
    }

    fn binomials(self) -> &'static str {
        match self {
            Family::One => "C(2k,k)^3",
            Family::Two => "C(2k,k)^2*C(3k,k)",
            Family::Three => "C(2k,k)^2*C(4k,2k)",
            Family::Four => "C(2k,k)*C(3k,k)*C(6k,3k)",
        }
    }

    fn factor(self, a: i64, b: i64) -> String {
        let lin = format!("({a}k+{b})");
        match self {
            Family::One => format!("6*{lin}*(H(2k)-H(k))+{a}"),
            Family::Two => format!("{lin}*(3*H(3k)+2*H(2k)-5*H(k))+{a}"),
            Family::Three => format!("4*{lin}*(H(4k)-H(k))+{a}"),
            Family::Four => format!("3*{lin}*(2*H(6k)-H(3k)-H(k))+{a}"),
        }
    }

    fn roman(self) -> &'static str {
        ["i", "ii", "iii", "iv"][self as usize]
    }
}

fn squarefree(d: u64) -> bool {
    let mut q = 2u64;
    while q * q <= d {
        if d.is_multiple_of(q * q) {
            return false;
        }
        q += 1;
    }
    d > 0
}

fn c_sqrt_d(c: &Rational, d: u64) -> String {
    if d == 1 {
        format!("({c})")
    } else {
        format!("({c})*sqrt({d})")
    }
}

fn tag(fam: Family, m: i64) -> String {
    format!("{}({m})", fam.index())
}

fn check(a: i64, m: i64, c: &Rational, d: u64, id: &str) -> Result<(), RegistryError> {
    let bad = |msg: &str| RegistryError::Record { id: id.to_string(), msg: msg.to_string() };
    if a == 0 || m == 0 {
        return Err(bad("a and m must be nonzero"));
    }
    if c.is_zero() {
        return Err(bad("c must be nonzero"));
    }
    if !squarefree(d) {
        return Err(bad("d must be a positive squarefree integer"));
    }
    Ok(())
}

/// The underlying series `sum (ak+b) X_k / m^k = c sqrt(d)/pi` as a baseline
/// record with id `RS<family>(<m>)`.
pub fn ramanujan_series_record(
    fam: Family,
    a: i64,
    b: i64,
    m: i64,
    c: &Rational,
    d: u64,
    provenance: &str,
) -> Result<ConjectureRecord, RegistryError> {
    let id = format!("RS{}", tag(fam, m));
    check(a, m, c, d, &id)?;
    let raw = RawRecord {
        id,
        kind: Kind::Identity,
        role: Role::Baseline,
        summand: format!("({a}k+{b})*{}/({m})^k", fam.binomials()),
        rhs: format!("{}/pi", c_sqrt_d(c, d)),
        provenance: provenance.to_string(),
        ..RawRecord::default()
    };
    build_record(&raw, &[])
}

/// Identity and congruence predicted by the template for one series; ids
/// `GC<family>(<m>)` and `GC<family>(<m>)-mod`.
pub fn derive_general_conjecture(
    fam: Family,
    a: i64,
    b: i64,
    m: i64,
    c: &Rational,
    d: u64,
) -> Result<(ConjectureRecord, ConjectureRecord), RegistryError> {
    let id = format!("GC{}", tag(fam, m));
    check(a, m, c, d, &id)?;
    let summand = format!("{}/({m})^k*({})", fam.binomials(), fam.factor(a, b));
    let prov = format!("General Conjecture ({}), 2022-12-08", fam.roman());
    let ident = RawRecord {
        id: id.clone(),
        kind: Kind::Identity,
        role: Role::Conjecture,
        label: Some(format!("General({})", fam.roman())),
        summand: summand.clone(),
        rhs: format!("{}/pi*log({})", c_sqrt_d(c, d), m.abs()),
        provenance: prov.clone(),
        ..RawRecord::default()
    };
    let dm = (d as i128 * m as i128).abs();
    let filter = match fam {
        Family::One => format!("p !| {dm}"),
        _ => format!("p > 2 and p !| {dm}"),
    };
    let cong = RawRecord {
        id: format!("{id}-mod"),
        kind: Kind::Congruence,
        role: Role::Conjecture,
        label: Some(format!("General({})", fam.roman())),
        limit: Some("p-1".into()),
        summand,
        rhs: format!("kron({},p)*({a}+({b})*(({m})^(p-1)-1))", -(d as i64)),
        modexp: Some(2),
        filter: Some(filter),
        provenance: prov,
        ..RawRecord::default()
    };
    Ok((build_record(&ident, &[])?, build_record(&cong, &[])?))
}
