//! The `vanishing` command line: `ext`, `chart`, `vanish`, `verify`.

pub mod config;
pub mod verify;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use vanishing_core::chart::{region_e2_chart, render_svg, slice_e1_chart, Chart};
use vanishing_core::cobar::{
    cache_file_name, cached_tables, contributing_primes, ext_table_at, ext_table_cached, CacheStatus, CobarError,
    ExtAtlas, ExtTable,
};
use vanishing_core::linalg::is_prime;
use vanishing_core::oracle::{contraction_facts, vanish, ContractionFact, FieldClass, Localization, OracleError, StemTable, Verdict};
use vanishing_core::slice::{SliceError, Variant, Window};

use config::{Config, OutputFormat, CACHE_DIR_ENV};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Cobar(#[from] CobarError),
    #[error(transparent)]
    Slice(#[from] SliceError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Io(String),
    #[error("no Ext cache for p={prime} in {dir}; run `vanishing ext --prime {prime} --smax {s_max} --tmax {t_max}` first")]
    MissingCache {
        prime: u64,
        s_max: usize,
        t_max: u32,
        dir: String,
    },
}

#[derive(Parser, Debug)]
#[command(name = "vanishing", version, about = "Adams-Novikov E2 tables, slice charts and vanishing queries for motivic stable stems")]
pub struct Cli {
    /// Settings file in `key = value` format.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory holding Ext cache files (overrides config and environment).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads for Ext computations.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute (or load) E2^{s,t}(BP(p)) and write the cache file.
    Ext(ExtArgs),
    /// Render a slice E1 or Andrews–Miller region E2 chart.
    Chart(ChartArgs),
    /// Ask whether π_{m+nα} of the sphere vanishes.
    Vanish(VanishArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(clap::Args, Debug)]
pub struct ExtArgs {
    #[arg(long)]
    pub prime: u64,
    #[arg(long)]
    pub smax: Option<usize>,
    #[arg(long)]
    pub tmax: Option<u32>,
    /// Cache file to write instead of the default name in the cache directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    SliceE1,
    RegionE2,
}

#[derive(clap::Args, Debug)]
pub struct ChartArgs {
    #[arg(long, value_enum, default_value = "slice-e1")]
    pub kind: KindArg,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub m_min: i64,
    #[arg(long, default_value_t = 12, allow_hyphen_values = true)]
    pub m_max: i64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub n_min: i64,
    #[arg(long, default_value_t = 24, allow_hyphen_values = true)]
    pub n_max: i64,
    /// Use the p-local slices (slice-e1 only).
    #[arg(long)]
    pub prime: Option<u64>,
    /// json or svg; defaults to the configured format.
    #[arg(long)]
    pub format: Option<OutputFormat>,
    /// Render an existing chart JSON instead of building one.
    #[arg(long)]
    pub from: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Nonreal,
    PositiveChar,
    FormallyReal,
    Unspecified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    /// The sphere itself.
    Integral,
    /// The η-complete sphere.
    EtaComplete,
}

#[derive(clap::Args, Debug)]
pub struct VanishArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub m: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub n: i64,
    #[arg(long, value_enum, default_value = "unspecified")]
    pub field: FieldArg,
    #[arg(long, value_enum, default_value = "integral")]
    pub variant: VariantArg,
    /// Localize at this odd prime.
    #[arg(long)]
    pub prime: Option<u64>,
    /// Exponential characteristic of the field.
    #[arg(long)]
    pub q: Option<u64>,
    /// Stems table JSON replacing the built-in one.
    #[arg(long)]
    pub stems: Option<PathBuf>,
    /// Also list the k-fold contraction statements for k ≤ this bound.
    #[arg(long)]
    pub contractions: Option<i64>,
}

#[derive(clap::Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(verify::SUITES))]
    pub suite: String,
}

/// Text for standard output and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_output(path: &Path, contents: &str) -> Result<(), CliError> {
    vanishing_core::cobar::write_atomic(path, contents).map_err(|e| io_err(path, e))
}

pub fn resolve_config(cli: &Cli, env_cache_dir: Option<String>) -> Result<Config, CliError> {
    let mut config = Config::load(cli.config.as_deref(), env_cache_dir)?;
    if let Some(dir) = &cli.cache_dir {
        config.cache_dir = dir.clone();
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        config.threads = Some(n);
    }
    config.validate()
}

/// Parses nothing and touches no global state beyond the optional thread
/// pool; `main` is a thin wrapper.
pub fn run(cli: Cli, env_cache_dir: Option<String>) -> Result<Outcome, CliError> {
    let config = resolve_config(&cli, env_cache_dir)?;
    if let Some(n) = config.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Ext(args) => cmd_ext(&config, args),
        Command::Chart(args) => cmd_chart(&config, args),
        Command::Vanish(args) => cmd_vanish(&config, args),
        Command::Verify(args) => cmd_verify(&config, args),
    }
}

pub fn env_cache_dir() -> Option<String> {
    std::env::var(CACHE_DIR_ENV).ok()
}

fn ok(stdout: String, stderr: String) -> Outcome {
    Outcome { stdout, stderr, code: 0 }
}

pub fn summarize(table: &ExtTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "E2^{{s,t}}(BP({})) for s ≤ {}, t ≤ {}; nonzero groups:", table.prime, table.s_max, table.t_max);
    let mut rows: Vec<_> = table.nonzero().collect();
    rows.sort_by_key(|((s, t), _)| (*s, *t));
    for ((s, t), g) in rows {
        let _ = writeln!(out, "({s},{t}): {g}");
    }
    out
}

fn cmd_ext(config: &Config, args: &ExtArgs) -> Result<Outcome, CliError> {
    if !is_prime(args.prime) {
        return Err(CliError::Usage(format!("--prime {} is not a prime", args.prime)));
    }
    let (s_default, t_default) = config.window(args.prime);
    let s_max = args.smax.unwrap_or(s_default);
    let t_max = args.tmax.unwrap_or(t_default);
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| config.cache_dir.join(cache_file_name(args.prime, s_max, t_max)));
    let (table, status) = ext_table_at(args.prime, s_max, t_max, &path)?;
    let status = match status {
        CacheStatus::Hit => "cache hit",
        CacheStatus::Computed => "computed",
        CacheStatus::Repaired => "cache invalid; recomputed",
    };
    Ok(ok(summarize(&table), format!("{status}: {}\n", path.display())))
}

/// Tables for every prime that can contribute to `E2(MU)` up to the degree
/// the `p = 2` cache reaches (capped by `t_wanted`).
pub fn load_atlas(config: &Config, t_wanted: u32) -> Result<ExtAtlas, CliError> {
    let missing = |p: u64| {
        let (s_max, t_max) = config.window(p);
        CliError::MissingCache {
            prime: p,
            s_max,
            t_max,
            dir: config.cache_dir.display().to_string(),
        }
    };
    let two = cached_tables(&config.cache_dir, 2).pop().ok_or_else(|| missing(2))?;
    let t_reach = two.t_max.min(t_wanted.max(2));
    let mut atlas = ExtAtlas::new([two]);
    for p in contributing_primes(1, t_reach).into_iter().filter(|p| *p != 2) {
        let table = cached_tables(&config.cache_dir, p).pop().ok_or_else(|| missing(p))?;
        atlas.insert(table);
    }
    Ok(atlas)
}

fn load_plocal(config: &Config, p: u64) -> Result<ExtAtlas, CliError> {
    let table = cached_tables(&config.cache_dir, p).pop().ok_or_else(|| {
        let (s_max, t_max) = config.window(p);
        CliError::MissingCache {
            prime: p,
            s_max,
            t_max,
            dir: config.cache_dir.display().to_string(),
        }
    })?;
    Ok(ExtAtlas::new([table]))
}

pub fn build_chart(config: &Config, args: &ChartArgs) -> Result<Chart, CliError> {
    let window = Window {
        m_min: args.m_min,
        m_max: args.m_max,
        n_min: args.n_min,
        n_max: args.n_max,
    };
    if window.is_empty() {
        return Err(CliError::Usage("empty chart window".into()));
    }
    match args.kind {
        KindArg::RegionE2 => {
            if args.prime.is_some() {
                return Err(CliError::Usage("--prime applies to slice-e1 charts only".into()));
            }
            Ok(region_e2_chart(window)?)
        }
        KindArg::SliceE1 => match args.prime {
            None => {
                let atlas = load_atlas(config, (2 * window.n_max.max(1)) as u32)?;
                Ok(slice_e1_chart(window, Variant::Integral, &atlas)?)
            }
            Some(p) => {
                if !is_prime(p) {
                    return Err(CliError::Usage(format!("--prime {p} is not a prime")));
                }
                let atlas = load_plocal(config, p)?;
                Ok(slice_e1_chart(window, Variant::PLocal(p), &atlas)?)
            }
        },
    }
}

fn cmd_chart(config: &Config, args: &ChartArgs) -> Result<Outcome, CliError> {
    let format = args.format.unwrap_or(config.format);
    let json = match &args.from {
        Some(path) => std::fs::read_to_string(path).map_err(|e| io_err(path, e))?,
        None => build_chart(config, args)?.to_json(),
    };
    let chart = Chart::from_json(&json).map_err(|e| CliError::Usage(format!("chart JSON: {e}")))?;
    let text = match format {
        OutputFormat::Json => chart.to_json(),
        OutputFormat::Svg => render_svg(&chart),
    };
    let mut stderr = String::new();
    for w in &chart.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    match &args.out {
        Some(path) => {
            write_output(path, &text)?;
            let _ = writeln!(stderr, "wrote {}", path.display());
            Ok(ok(String::new(), stderr))
        }
        None => Ok(ok(text, stderr)),
    }
}

#[derive(Serialize)]
struct VanishOutput<'a> {
    #[serde(flatten)]
    verdict: &'a Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    contractions: Option<Vec<ContractionFact>>,
}

pub fn field_class(args: &VanishArgs) -> Result<FieldClass, CliError> {
    let q = args.q;
    let field = match args.field {
        FieldArg::Nonreal => {
            if q.is_some_and(|q| q != 1) {
                return Err(CliError::Usage("use --field positive-char for characteristic q > 1".into()));
            }
            FieldClass::NonrealChar0
        }
        FieldArg::PositiveChar => FieldClass::PositiveCharPerfectFiniteCd {
            q: q.ok_or_else(|| CliError::Usage("--field positive-char needs --q".into()))?,
        },
        FieldArg::FormallyReal => {
            if q.is_some_and(|q| q != 1) {
                return Err(CliError::Usage("formally real fields have q = 1".into()));
            }
            FieldClass::FormallyReal
        }
        FieldArg::Unspecified => FieldClass::Unspecified,
    };
    Ok(match args.variant {
        VariantArg::Integral => field,
        VariantArg::EtaComplete => FieldClass::EtaComplete {
            q: q.unwrap_or(field.exponential_characteristic()),
        },
    })
}

fn cmd_vanish(config: &Config, args: &VanishArgs) -> Result<Outcome, CliError> {
    let field = field_class(args)?;
    let localization = match args.prime {
        None => Localization::Integral,
        Some(p) => Localization::PLocal { p },
    };
    let stems_path = args.stems.clone().or_else(|| config.stems.clone());
    let stems = match stems_path {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
            StemTable::from_json(&text)?
        }
        None => StemTable::seed(),
    };
    let verdict = vanish(args.m, args.n, field, localization, &stems)?;
    let contractions = match args.contractions {
        Some(k) => Some(contraction_facts(args.m, args.n, field, localization, &stems, k)?),
        None => None,
    };
    let mut text = serde_json::to_string_pretty(&VanishOutput { verdict: &verdict, contractions }).expect("verdict serializes");
    text.push('\n');
    Ok(Outcome {
        stdout: text,
        stderr: String::new(),
        code: if verdict.vanishes() { 0 } else { 2 },
    })
}

fn cached_table(config: &Config, p: u64) -> Result<ExtTable, CliError> {
    let (s_max, t_max) = config.window(p);
    Ok(ext_table_cached(p, s_max, t_max, &config.cache_dir)?.0)
}

fn cmd_verify(config: &Config, args: &VerifyArgs) -> Result<Outcome, CliError> {
    let report = match args.suite.as_str() {
        "cobar-axioms" => verify::cobar_axioms(&[(2, 8, 20), (3, 6, 30)])?,
        "vanishing-lines" => {
            let tables = [2, 3, 5].into_iter().map(|p| cached_table(config, p)).collect::<Result<Vec<_>, _>>()?;
            verify::vanishing_lines(&tables)
        }
        "am-window" => verify::am_window(&cached_table(config, 2)?, 18)?,
        "region-columns" => verify::region_columns(Window { m_min: 0, m_max: 30, n_min: 0, n_max: 90 }),
        "oracle-regions" => verify::oracle_regions(&StemTable::seed(), 70, 200)?,
        other => return Err(CliError::Usage(format!("unknown suite {other:?}"))),
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    Ok(Outcome {
        stdout: text,
        stderr: String::new(),
        code: if report.pass { 0 } else { 1 },
    })
}
