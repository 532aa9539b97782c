//! `hcert`: verify registry identities and congruences, search for closed
//! forms and manage the constant cache.

mod config;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{FileConfig, Format, Overrides, RunConfig, StrategyArg, CACHE_ENV};
use run::{AllFilter, CacheOp, DiscoverArgs, Failure, Outcome, EXIT_USAGE};

#[derive(Parser, Debug)]
#[command(name = "hcert", version, about = "Certified checks of harmonic-number series and supercongruences")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Registry file (default: the shipped registry)
    #[arg(long, global = true, value_name = "PATH")]
    registry: Option<PathBuf>,
    /// TOML file with run settings; flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Report format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout
    #[arg(long, short, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, short, global = true)]
    jobs: Option<usize>,
    /// Constant cache directory (also HCERT_CACHE_DIR)
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    /// Decimal digits for identity checks (default 30, at least 10)
    #[arg(long, global = true)]
    digits: Option<u32>,
    /// Smallest prime for congruence checks (default 3)
    #[arg(long, global = true)]
    prime_min: Option<u64>,
    /// Largest prime for congruence checks (default 100)
    #[arg(long, global = true)]
    prime_max: Option<u64>,
    /// Congruence evaluation strategy (default auto: exact up to 100, fast above)
    #[arg(long, global = true, value_enum)]
    strategy: Option<StrategyArg>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List registry records
    List,
    /// Verify selected records by id or alias
    Verify {
        /// Record id or alias; repeatable
        #[arg(long = "id", required = true)]
        ids: Vec<String>,
    },
    /// Verify the whole registry, or the records matching the filters
    VerifyAll {
        /// Restrict to these ids; repeatable
        #[arg(long = "id")]
        ids: Vec<String>,
        /// identity or congruence
        #[arg(long, value_parser = ["identity", "congruence"])]
        kind: Option<String>,
        /// conjecture, baseline or fixture
        #[arg(long, value_parser = ["conjecture", "baseline", "fixture"])]
        role: Option<String>,
        /// Leave out records flagged as variants
        #[arg(long)]
        skip_variants: bool,
    },
    /// Search a series value against a basis of constants with PSLQ
    Discover {
        /// Identity record or discovery target id; repeatable
        #[arg(long = "id")]
        ids: Vec<String>,
        /// Summand of an ad hoc series
        #[arg(long)]
        summand: Option<String>,
        /// First index of the ad hoc series
        #[arg(long, default_value_t = 1, requires = "summand")]
        start: i64,
        /// Basis element; repeatable, replaces the menu
        #[arg(long)]
        basis: Vec<String>,
        /// Discovery config with menu and targets (default: shipped)
        #[arg(long, value_name = "FILE")]
        menu: Option<PathBuf>,
        /// Coefficient height bound
        #[arg(long)]
        max_height: Option<String>,
    },
    /// Re-render a JSON report
    Report {
        /// Report written by verify or verify-all
        input: PathBuf,
    },
    /// Inspect or fill the constant cache
    Cache {
        #[command(subcommand)]
        op: CacheCmd,
    },
}

#[derive(Subcommand, Debug)]
enum CacheCmd {
    /// Print the cache directory
    Path,
    /// List cached constants
    List,
    /// Delete cached constants
    Clear,
    /// Evaluate every closed-form right-hand side at the configured digits
    Warm,
}

fn resolve(g: &Global, ids: Vec<String>) -> Result<RunConfig, Failure> {
    let file = match &g.config {
        Some(p) => Some(FileConfig::load(p).map_err(Failure::usage)?),
        None => None,
    };
    let flags = Overrides {
        registry: g.registry.clone(),
        digits: g.digits,
        prime_min: g.prime_min,
        prime_max: g.prime_max,
        strategy: g.strategy,
        jobs: g.jobs,
        cache_dir: g.cache_dir.clone(),
        format: g.format,
        ids,
    };
    let env = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    RunConfig::resolve(file, flags, env).map_err(Failure::usage)
}

fn dispatch(cli: Cli) -> Outcome {
    let g = &cli.global;
    let out = g.output.as_deref();
    let (ids, discover_digits) = match &cli.command {
        Command::Verify { ids } | Command::VerifyAll { ids, .. } => (ids.clone(), None),
        Command::Discover { .. } => (Vec::new(), g.digits),
        _ => (Vec::new(), None),
    };
    let cfg = resolve(g, ids)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::usage(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::List => run::list(&cfg, out),
        Command::Verify { .. } => run::verify(&cfg, out),
        Command::VerifyAll { kind, role, skip_variants, .. } => {
            run::verify_all(&cfg, &AllFilter { kind, role, skip_variants }, out)
        }
        Command::Discover { ids, summand, start, basis, menu, max_height } => {
            let args = DiscoverArgs { ids, summand, start, basis, menu, digits: discover_digits, max_height };
            run::discover(&cfg, &args, out)
        }
        Command::Report { input } => run::report(&input, cfg.format.unwrap_or(Format::Markdown), out),
        Command::Cache { op } => {
            let op = match op {
                CacheCmd::Path => CacheOp::Path,
                CacheCmd::List => CacheOp::List,
                CacheCmd::Clear => CacheOp::Clear,
                CacheCmd::Warm => CacheOp::Warm,
            };
            run::cache(&cfg, op, out)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match dispatch(cli) {
        Ok(c) => c,
        Err(f) => {
            eprintln!("hcert: {}", f.msg);
            f.code
        }
    };
    ExitCode::from(code as u8)
}
