//! Certified enclosures of the transcendental constants that appear on the
//! right-hand sides, with an in-memory and an optional on-disk cache.

mod cache;
mod special;

pub use cache::DiskCache;
pub use special::{
    const_beta, const_dirichlet_l, const_gamma_rational, const_log, const_phi, const_pi,
    const_sqrt, const_zeta, dirichlet_l2_taylor, hurwitz_zeta, ConstError,
};

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::sync::Mutex;

use crate::exact::Rational;
use crate::realball::RealBall;

/// Named constants with a known evaluation route.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConstantKey {
    Pi,
    LogQ(Rational),
    Zeta(u32),
    Beta(u32),
    Catalan,
    /// `L(2, chi_-3)`.
    K3,
    /// `L(2, chi_-8)`.
    L8,
    GammaRat(Rational),
    SqrtQ(Rational),
    GoldenPhi,
}

impl fmt::Display for ConstantKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstantKey::Pi => write!(f, "pi"),
            ConstantKey::LogQ(q) => write!(f, "log({q})"),
            ConstantKey::Zeta(n) => write!(f, "zeta({n})"),
            ConstantKey::Beta(n) => write!(f, "beta({n})"),
            ConstantKey::Catalan => write!(f, "G"),
            ConstantKey::K3 => write!(f, "K"),
            ConstantKey::L8 => write!(f, "L"),
            ConstantKey::GammaRat(q) => write!(f, "Gamma({q})"),
            ConstantKey::SqrtQ(q) => write!(f, "sqrt({q})"),
            ConstantKey::GoldenPhi => write!(f, "phi"),
        }
    }
}

/// Evaluate a constant without caching.
pub fn evaluate(key: &ConstantKey, prec: u32) -> Result<RealBall, ConstError> {
    match key {
        ConstantKey::Pi => Ok(const_pi(prec)),
        ConstantKey::LogQ(q) => const_log(q, prec),
        ConstantKey::Zeta(n) => const_zeta(*n, prec),
        ConstantKey::Beta(n) => const_beta(*n, prec),
        ConstantKey::Catalan => const_beta(2, prec),
        ConstantKey::K3 => const_dirichlet_l(-3, 2, prec),
        ConstantKey::L8 => const_dirichlet_l(-8, 2, prec),
        ConstantKey::GammaRat(q) => const_gamma_rational(q, prec),
        ConstantKey::SqrtQ(q) => const_sqrt(q, prec),
        ConstantKey::GoldenPhi => Ok(const_phi(prec)),
    }
}

/// Memoizing front end over [`evaluate`].
#[derive(Debug, Default)]
pub struct ConstantKernel {
    memo: Mutex<HashMap<ConstantKey, RealBall>>,
    disk: Option<DiskCache>,
}

impl ConstantKernel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_disk_cache(dir: impl Into<PathBuf>) -> Self {
        ConstantKernel { memo: Mutex::default(), disk: Some(DiskCache::new(dir)) }
    }

    pub fn disk(&self) -> Option<&DiskCache> {
        self.disk.as_ref()
    }

    /// Enclosure of `key` with at least `prec` bits of working precision.
    pub fn get(&self, key: &ConstantKey, prec: u32) -> Result<RealBall, ConstError> {
        if let Some(b) = self.memo.lock().unwrap().get(key) {
            if b.prec() >= prec {
                return Ok(b.with_prec(prec));
            }
        }
        let b = match self.disk.as_ref().and_then(|d| d.load(key, prec)) {
            Some(b) => b,
            None => {
                let b = evaluate(key, prec)?;
                if let Some(d) = &self.disk {
                    // a failed write only costs a recomputation later
                    let _ = d.store(key, &b);
                }
                b
            }
        };
        let mut memo = self.memo.lock().unwrap();
        let keep = memo.get(key).is_none_or(|old| old.prec() < b.prec());
        if keep {
            memo.insert(key.clone(), b.clone());
        }
        Ok(b)
    }

    pub fn pi(&self, prec: u32) -> RealBall {
        self.get(&ConstantKey::Pi, prec).expect("pi")
    }
}
