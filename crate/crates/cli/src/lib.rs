//! Command-line front end: bound sweeps, distribution dumps, oracle
//! verification and single-point explanations, emitted as CSV or JSON.
//!
//! Options come from flags and, optionally, a flat `key = value` config file
//! (`--config PATH`) whose keys mirror the long flag names. Flags win.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use thiserror::Error;

use ndt_core::bound::{
    expected_breakdown, linear_grid, peak_detail, sweep, validate_grid, BoundKind, EnvelopeOrder,
    NetworkConfig,
};
use ndt_core::comparator::{CurveRegistry, CurveValue};
use ndt_core::demand::{distinct_distribution, substream_seed};
use ndt_core::montecarlo::monte_carlo_expected;
use ndt_core::oracle::verify_all;
use ndt_core::{Error as CoreError, Rational};

pub const TOOL_NAME: &str = "ndt";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const DEFAULT_TRANSMITTERS: u32 = 5;
pub const DEFAULT_RECEIVERS: u32 = 20;
pub const DEFAULT_FILES: u32 = 100;
pub const DEFAULT_GRID_POINTS: usize = 21;
pub const DEFAULT_VERIFY_LIMIT: u32 = 8;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("oracle verification failed")]
    VerifyFailed,
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    /// 0 ok, 1 bad configuration, 2 infeasible library, 3 failed verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::VerifyFailed => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::InfeasibleLibrary { .. } => CliError::Infeasible(format!(
                "{err}; the peak bound assumes every receiver requests a distinct file, use expected-sweep instead"
            )),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ndt", version, about = "Exact NDT lower bounds for cache-aided interference networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Peak-NDT lower bound over a grid of cache sizes
    PeakSweep(Options),
    /// Expected-NDT lower bound over a grid of cache sizes
    ExpectedSweep(Options),
    /// Distribution of the number of distinct requested files
    Distribution(Options),
    /// Run every oracle suite
    Verify(Options),
    /// One bound value with its maximizing cut size and envelope segment
    Point(Options),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Number of transmitters K_T
    #[arg(long)]
    pub kt: Option<u32>,
    /// Number of receivers K_R
    #[arg(long)]
    pub kr: Option<u32>,
    /// Library size N
    #[arg(long)]
    pub files: Option<u32>,
    /// Single normalized cache size, e.g. 0.4 or 2/5
    #[arg(long)]
    pub mu: Option<String>,
    /// Grid `start:stop:count`, endpoints inclusive
    #[arg(long)]
    pub grid: Option<String>,
    /// Monte-Carlo samples per grid point (expected-sweep only)
    #[arg(long)]
    pub samples: Option<u64>,
    /// Base seed; grid point i draws from an independent substream
    #[arg(long)]
    pub seed: Option<u64>,
    /// Render values as decimals with this many digits instead of p/q
    #[arg(long)]
    pub decimal: Option<usize>,
    /// csv or json
    #[arg(long)]
    pub format: Option<String>,
    /// Output path (standard output when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reference curve to overlay; repeatable
    #[arg(long)]
    pub overlay: Vec<String>,
    /// theorem (envelope per cut size, then max) or proof (max, then envelope)
    #[arg(long)]
    pub envelope_order: Option<String>,
    /// Parameter limit for verify
    #[arg(long)]
    pub limit: Option<u32>,
    /// peak or expected (point only)
    #[arg(long)]
    pub kind: Option<String>,
    /// Flat key=value config file; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    PeakSweep,
    ExpectedSweep,
    Distribution,
    Verify,
    Point,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::PeakSweep => "peak-sweep",
            Command::ExpectedSweep => "expected-sweep",
            Command::Distribution => "distribution",
            Command::Verify => "verify",
            Command::Point => "point",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Fully resolved options for one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub transmitters: u32,
    pub receivers: u32,
    pub files: u32,
    pub mu_grid: Vec<Rational>,
    pub samples: Option<u64>,
    pub seed: u64,
    pub decimal: Option<usize>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub overlays: Vec<String>,
    pub order: EnvelopeOrder,
    pub limit: u32,
    pub kind: BoundKind,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses a flat config file: `key = value` lines, `#` comments, blank lines.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        const KNOWN: &[&str] = &[
            "kt", "kr", "files", "mu", "grid", "samples", "seed", "decimal", "format", "out", "overlay",
            "envelope-order", "limit", "kind",
        ];
        if !KNOWN.contains(&key.as_str()) {
            return Err(bad(format!("config line {}: unknown key {key:?}", lineno + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn pick<T: std::str::FromStr>(
    flag: Option<T>,
    file: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    file.get(key)
        .map(|v| v.parse::<T>().map_err(|_| bad(format!("invalid value for {key}: {v:?}"))))
        .transpose()
}

/// Parses `start:stop:count` into exact, evenly spaced cache sizes.
pub fn parse_grid_spec(spec: &str) -> Result<Vec<Rational>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad(format!("grid {spec:?} must look like start:stop:count")));
    }
    let start = Rational::parse(parts[0]).map_err(|e| bad(e.to_string()))?;
    let stop = Rational::parse(parts[1]).map_err(|e| bad(e.to_string()))?;
    let count: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| bad(format!("grid count {:?} is not a positive integer", parts[2])))?;
    Ok(linear_grid(&start, &stop, count)?)
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let (command, opts) = match cli.command {
            CliCommand::PeakSweep(o) => (Command::PeakSweep, o),
            CliCommand::ExpectedSweep(o) => (Command::ExpectedSweep, o),
            CliCommand::Distribution(o) => (Command::Distribution, o),
            CliCommand::Verify(o) => (Command::Verify, o),
            CliCommand::Point(o) => (Command::Point, o),
        };
        let file = match &opts.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
                parse_config_file(&text)?
            }
            None => BTreeMap::new(),
        };
        Self::resolve(command, opts, &file)
    }

    pub fn resolve(command: Command, opts: Options, file: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let transmitters = pick(opts.kt, file, "kt")?.unwrap_or(DEFAULT_TRANSMITTERS);
        let receivers = pick(opts.kr, file, "kr")?.unwrap_or(DEFAULT_RECEIVERS);
        let files = pick(opts.files, file, "files")?.unwrap_or(DEFAULT_FILES);
        if transmitters == 0 || receivers == 0 || files == 0 {
            return Err(bad("--kt, --kr and --files must be positive"));
        }
        let samples = pick(opts.samples, file, "samples")?;
        let seed = pick(opts.seed, file, "seed")?.unwrap_or(0);
        let decimal = pick(opts.decimal, file, "decimal")?;
        let limit = pick(opts.limit, file, "limit")?.unwrap_or(DEFAULT_VERIFY_LIMIT);
        let out = opts.out.clone().or_else(|| file.get("out").map(PathBuf::from));

        let format = match pick(opts.format, file, "format")?.as_deref() {
            None | Some("csv") => OutputFormat::Csv,
            Some("json") => OutputFormat::Json,
            Some(other) => return Err(bad(format!("unknown format {other:?} (expected csv or json)"))),
        };
        let order = match pick(opts.envelope_order, file, "envelope-order")?.as_deref() {
            None | Some("theorem") => EnvelopeOrder::Theorem,
            Some("proof") => EnvelopeOrder::Proof,
            Some(other) => return Err(bad(format!("unknown envelope order {other:?} (expected theorem or proof)"))),
        };
        let kind = match pick(opts.kind, file, "kind")?.as_deref() {
            None | Some("peak") => BoundKind::Peak,
            Some("expected") => BoundKind::Expected,
            Some(other) => return Err(bad(format!("unknown kind {other:?} (expected peak or expected)"))),
        };

        let overlays = if !opts.overlay.is_empty() {
            opts.overlay.clone()
        } else {
            file.get("overlay")
                .map(|v| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
                .unwrap_or_default()
        };
        let registry = CurveRegistry::with_builtins();
        for name in &overlays {
            if registry.lookup(name).is_none() {
                let known: Vec<_> = registry.names().collect();
                return Err(bad(format!("unknown overlay {name:?}; available: {}", known.join(", "))));
            }
        }

        let (mu, grid) = if opts.mu.is_some() || opts.grid.is_some() {
            (opts.mu.clone(), opts.grid.clone())
        } else {
            (file.get("mu").cloned(), file.get("grid").cloned())
        };
        let mu_grid = match (mu, grid) {
            (Some(_), Some(_)) => return Err(bad("give either --mu or --grid, not both")),
            (Some(mu), None) => vec![Rational::parse(&mu).map_err(|e| bad(e.to_string()))?],
            (None, Some(grid)) => parse_grid_spec(&grid)?,
            (None, None) => linear_grid(
                &Rational::new(1, transmitters.into()),
                &Rational::one(),
                if transmitters == 1 { 1 } else { DEFAULT_GRID_POINTS },
            )?,
        };

        match command {
            Command::PeakSweep | Command::ExpectedSweep | Command::Point => {
                validate_grid(transmitters, &mu_grid)?;
            }
            Command::Distribution | Command::Verify => {}
        }
        if command == Command::Point && mu_grid.len() != 1 {
            return Err(bad("point needs a single cache size (--mu)"));
        }
        if let Some(n) = samples {
            if command != Command::ExpectedSweep {
                return Err(bad("--samples is only meaningful for expected-sweep"));
            }
            if n == 0 {
                return Err(bad("--samples must be positive"));
            }
        }
        Ok(RunConfig {
            command,
            transmitters,
            receivers,
            files,
            mu_grid,
            samples,
            seed,
            decimal,
            format,
            out,
            overlays,
            order,
            limit,
            kind,
        })
    }

    fn render(&self, value: &Rational) -> String {
        match self.decimal {
            Some(d) => value.to_decimal(d),
            None => value.to_string(),
        }
    }

    fn network(&self, mu: &Rational) -> Result<NetworkConfig, CliError> {
        Ok(NetworkConfig::new(self.transmitters, self.receivers, self.files, mu.clone())?)
    }

    fn metadata(&self) -> Value {
        let order = match self.order {
            EnvelopeOrder::Theorem => "theorem",
            EnvelopeOrder::Proof => "proof",
        };
        json!({
            "tool": TOOL_NAME,
            "version": TOOL_VERSION,
            "command": self.command.name(),
            "kt": self.transmitters,
            "kr": self.receivers,
            "files": self.files,
            "envelope_order": order,
            "samples": self.samples,
            "seed": self.seed,
            "overlays": self.overlays,
        })
    }
}

/// A table of string cells with a header, emitted as CSV or JSON records.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn write(&self, cfg: &RunConfig, out: &mut dyn Write) -> io::Result<()> {
        match cfg.format {
            OutputFormat::Csv => {
                writeln!(out, "{}", self.header.join(","))?;
                for row in &self.rows {
                    writeln!(out, "{}", row.join(","))?;
                }
            }
            OutputFormat::Json => {
                let records: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut m = Map::new();
                        for (k, v) in self.header.iter().zip(row) {
                            m.insert(k.clone(), Value::String(v.clone()));
                        }
                        Value::Object(m)
                    })
                    .collect();
                let doc = json!({ "metadata": cfg.metadata(), "records": records });
                serde_json::to_writer_pretty(&mut *out, &doc)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

fn sweep_table(cfg: &RunConfig, kind: BoundKind) -> Result<Table, CliError> {
    let curve = sweep(cfg.transmitters, cfg.receivers, cfg.files, &cfg.mu_grid, kind, cfg.order)?;
    let mc = match cfg.samples {
        Some(n) => Some(
            cfg.mu_grid
                .par_iter()
                .enumerate()
                .map(|(i, mu)| {
                    let net = cfg.network(mu)?;
                    Ok(monte_carlo_expected(&net, n, substream_seed(cfg.seed, i as u64), cfg.order)?.mean)
                })
                .collect::<Result<Vec<_>, CliError>>()?,
        ),
        None => None,
    };
    let registry = CurveRegistry::with_builtins().select(&cfg.overlays)?;

    let mut header = vec!["mu".to_string(), "value".to_string()];
    if mc.is_some() {
        header.push("mc_value".into());
    }
    header.extend(registry.names().map(str::to_string));

    let mut rows = Vec::with_capacity(curve.samples.len());
    for (i, (mu, value)) in curve.samples.iter().enumerate() {
        let mut row = vec![cfg.render(mu), cfg.render(value)];
        if let Some(mc) = &mc {
            row.push(cfg.render(&mc[i]));
        }
        let net = cfg.network(mu)?;
        for (_, v) in registry.overlay(&net) {
            row.push(match v {
                CurveValue::Value(v) => cfg.render(&v),
                CurveValue::Unavailable => "NA".into(),
            });
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

fn distribution_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let dist = distinct_distribution(cfg.files, cfg.receivers)?;
    Ok(Table {
        header: vec!["s".into(), "probability".into()],
        rows: dist.iter().map(|(s, p)| vec![s.to_string(), cfg.render(p)]).collect(),
    })
}

fn point_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let mu = &cfg.mu_grid[0];
    let net = cfg.network(mu)?;
    let t = net.t();
    let header = ["kind", "s", "probability", "mu", "t", "value", "argmax_sigma", "t1", "t2"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    match cfg.kind {
        BoundKind::Peak => {
            let d = peak_detail(&net, cfg.order)?;
            rows.push(vec![
                "peak".into(),
                cfg.receivers.to_string(),
                "1".into(),
                cfg.render(mu),
                cfg.render(&t),
                cfg.render(&d.value),
                d.sigma.to_string(),
                d.segment.0.to_string(),
                d.segment.1.to_string(),
            ]);
        }
        BoundKind::Expected => {
            let b = expected_breakdown(&net, cfg.order)?;
            for (s, p, d) in &b.categories {
                rows.push(vec![
                    "category".into(),
                    s.to_string(),
                    cfg.render(p),
                    cfg.render(mu),
                    cfg.render(&t),
                    cfg.render(&d.value),
                    d.sigma.to_string(),
                    d.segment.0.to_string(),
                    d.segment.1.to_string(),
                ]);
            }
            rows.push(vec![
                "expected".into(),
                String::new(),
                "1".into(),
                cfg.render(mu),
                cfg.render(&t),
                cfg.render(&b.value),
                String::new(),
                String::new(),
                String::new(),
            ]);
        }
    }
    Ok(Table { header, rows })
}

/// Executes one command, writing its artifact to `out`.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    match cfg.command {
        Command::PeakSweep => sweep_table(cfg, BoundKind::Peak)?.write(cfg, out)?,
        Command::ExpectedSweep => sweep_table(cfg, BoundKind::Expected)?.write(cfg, out)?,
        Command::Distribution => distribution_table(cfg)?.write(cfg, out)?,
        Command::Point => point_table(cfg)?.write(cfg, out)?,
        Command::Verify => {
            let report = verify_all(cfg.limit)?;
            match cfg.format {
                OutputFormat::Csv => out.write_all(report.render_text().as_bytes())?,
                OutputFormat::Json => out.write_all(report.render_json_lines().as_bytes())?,
            }
            if !report.all_passed() {
                return Err(CliError::VerifyFailed);
            }
        }
    }
    Ok(())
}

/// Runs `cfg`, sending output to `cfg.out` or standard output.
pub fn run_to_destination(cfg: &RunConfig) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => write_atomically(path, |w| run(cfg, w)),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            run(cfg, &mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn write_atomically(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    let result = body(&mut buf);
    if matches!(result, Ok(()) | Err(CliError::VerifyFailed)) {
        fs::write(path, &buf)?;
    }
    result
}
