//! Run configuration: defaults, then the config file, then flags. The cache
//! directory alone may also come from the environment.

use std::path::{Path, PathBuf};

use hcert::congruence_engine::Strategy;
use hcert::exact::primes_between;
use serde::{Deserialize, Serialize};

pub const CACHE_ENV: &str = "HCERT_CACHE_DIR";
pub const MIN_DIGITS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Markdown,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StrategyArg {
    Exact,
    Fast,
    Both,
    Auto,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Exact => Strategy::Exact,
            StrategyArg::Fast => Strategy::Fast,
            StrategyArg::Both => Strategy::Both,
            StrategyArg::Auto => Strategy::Auto,
        }
    }
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub registry: Option<PathBuf>,
    pub digits: Option<u32>,
    pub prime_min: Option<u64>,
    pub prime_max: Option<u64>,
    pub strategy: Option<StrategyArg>,
    pub jobs: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub format: Option<Format>,
    #[serde(default)]
    pub ids: Vec<String>,
}

impl FileConfig {
    /// Relative paths are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut c: FileConfig = toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut c.registry, &mut c.cache_dir].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(c)
    }
}

/// Flag values as given on the command line.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub registry: Option<PathBuf>,
    pub digits: Option<u32>,
    pub prime_min: Option<u64>,
    pub prime_max: Option<u64>,
    pub strategy: Option<StrategyArg>,
    pub jobs: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub format: Option<Format>,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// `None` selects the shipped registry.
    pub registry: Option<PathBuf>,
    pub digits: u32,
    pub prime_min: u64,
    pub prime_max: u64,
    pub strategy: StrategyArg,
    pub jobs: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    /// `None` lets each subcommand pick its natural format.
    pub format: Option<Format>,
    pub ids: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            registry: None,
            digits: 30,
            prime_min: 3,
            prime_max: 100,
            strategy: StrategyArg::Auto,
            jobs: None,
            cache_dir: None,
            format: None,
            ids: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn resolve(file: Option<FileConfig>, flags: Overrides, env_cache: Option<PathBuf>) -> Result<Self, String> {
        let mut c = RunConfig::default();
        if let Some(f) = file {
            c.registry = f.registry.or(c.registry);
            c.digits = f.digits.unwrap_or(c.digits);
            c.prime_min = f.prime_min.unwrap_or(c.prime_min);
            c.prime_max = f.prime_max.unwrap_or(c.prime_max);
            c.strategy = f.strategy.unwrap_or(c.strategy);
            c.jobs = f.jobs.or(c.jobs);
            c.cache_dir = f.cache_dir;
            c.format = f.format;
            c.ids = f.ids;
        }
        c.cache_dir = env_cache.or(c.cache_dir);
        c.registry = flags.registry.or(c.registry);
        c.digits = flags.digits.unwrap_or(c.digits);
        c.prime_min = flags.prime_min.unwrap_or(c.prime_min);
        c.prime_max = flags.prime_max.unwrap_or(c.prime_max);
        c.strategy = flags.strategy.unwrap_or(c.strategy);
        c.jobs = flags.jobs.or(c.jobs);
        c.cache_dir = flags.cache_dir.or(c.cache_dir);
        c.format = flags.format.or(c.format);
        if !flags.ids.is_empty() {
            c.ids = flags.ids;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.digits < MIN_DIGITS {
            return Err(format!("digits must be at least {MIN_DIGITS}, got {}", self.digits));
        }
        if primes_between(self.prime_min, self.prime_max).is_empty() {
            return Err(format!("no primes in {}..{}", self.prime_min, self.prime_max));
        }
        if self.jobs == Some(0) {
            return Err("jobs must be positive".into());
        }
        Ok(())
    }
}
