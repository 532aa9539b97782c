use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::ConstantKey;
use crate::realball::{Float, Mag, RealBall};

const FORMAT: &str = "hcert-constant";
const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Part {
    man: String,
    exp: i64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    format: String,
    version: u32,
    key: String,
    prec: u32,
    mid: Part,
    rad: Part,
}

/// One JSON file per `(key, precision)`.
#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
}

fn part(f: &Float) -> Part {
    Part { man: f.mantissa().to_string(), exp: f.exponent() }
}

fn float(p: &Part) -> Option<Float> {
    Some(Float::new(p.man.parse::<BigInt>().ok()?, p.exp))
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DiskCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &ConstantKey, prec: u32) -> PathBuf {
        let name: String = key
            .to_string()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        self.dir.join(format!("{name}-p{prec}.json"))
    }

    pub fn load(&self, key: &ConstantKey, prec: u32) -> Option<RealBall> {
        let text = fs::read_to_string(self.path(key, prec)).ok()?;
        let r: Record = serde_json::from_str(&text).ok()?;
        if r.format != FORMAT || r.version != VERSION || r.key != key.to_string() || r.prec != prec {
            return None;
        }
        let mid = float(&r.mid)?;
        let rad = float(&r.rad)?;
        if rad.is_negative() {
            return None;
        }
        Some(RealBall::new(mid, Mag::from_float(&rad), prec))
    }

    pub fn store(&self, key: &ConstantKey, b: &RealBall) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let r = Record {
            format: FORMAT.into(),
            version: VERSION,
            key: key.to_string(),
            prec: b.prec(),
            mid: part(b.mid()),
            rad: part(b.rad().as_float()),
        };
        let tmp = self.path(key, b.prec()).with_extension("tmp");
        fs::write(&tmp, serde_json::to_string_pretty(&r)?)?;
        fs::rename(tmp, self.path(key, b.prec()))
    }

    /// Number of cached records.
    pub fn len(&self) -> usize {
        fs::read_dir(&self.dir)
            .map(|it| it.filter_map(Result::ok).filter(|e| e.path().extension().is_some_and(|x| x == "json")).count())
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) -> io::Result<usize> {
        let mut n = 0;
        if let Ok(it) = fs::read_dir(&self.dir) {
            for e in it.filter_map(Result::ok) {
                if e.path().extension().is_some_and(|x| x == "json") {
                    fs::remove_file(e.path())?;
                    n += 1;
                }
            }
        }
        Ok(n)
    }
}
