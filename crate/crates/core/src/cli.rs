//! Command-line front end of `dirtail`.
//!
//! Every command reads one JSON config holding the aggregate specification
//! plus the parameters of the run, and writes a table as CSV (default) or
//! JSON. Errors go to stderr as a JSON object; the exit status is 2 for
//! invalid input and 3 for numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aggtail::{
    regime_classify, simplex_constant_recursion, tail_asymptotic, var_es_asymptotic, AggregateSpec,
    RawSpec,
};
use crate::error::{Error, Result};
use crate::montecarlo::{
    conditional_mc_tail, crude_mc_tail, empirical_gumbel_mda, gumbel_limit_check, norming_constants,
    pairwise_asymindep, quadrature_tail, threshold_at_depth, Estimate, McConfig, Method, WeightMatrix,
};
use crate::radial::{default_endpoint_distances, default_log_depths, DiagnosticMode, RadialModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

const DEFAULT_N: u64 = 100_000;

#[derive(Parser, Debug)]
#[command(name = "dirtail", version, about = "Tail asymptotics of aggregated Dirichlet risks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    /// Asymptotic tail prediction at thresholds or depths
    Approx,
    /// Monte Carlo or quadrature estimate of the tail
    Simulate,
    /// Prediction against an oracle, with their ratio
    Ratio,
    /// Asymptotic VaR and mean excess at levels
    VarEs,
    /// Max-domain diagnostics of the radial law or the aggregate
    DiagnoseMda,
    /// Norming constants, pairwise exceedances and Gumbel-limit checks
    Maxstable,
    /// The simplex constant recursion for p in (0, 1)
    Constants,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    Approx(RunArgs),
    Simulate(RunArgs),
    Ratio(RunArgs),
    VarEs(RunArgs),
    DiagnoseMda(RunArgs),
    Maxstable(RunArgs),
    Constants(RunArgs),
}

impl Command {
    fn split(&self) -> (CommandKind, &RunArgs) {
        match self {
            Command::Approx(a) => (CommandKind::Approx, a),
            Command::Simulate(a) => (CommandKind::Simulate, a),
            Command::Ratio(a) => (CommandKind::Ratio, a),
            Command::VarEs(a) => (CommandKind::VarEs, a),
            Command::DiagnoseMda(a) => (CommandKind::DiagnoseMda, a),
            Command::Maxstable(a) => (CommandKind::Maxstable, a),
            Command::Constants(a) => (CommandKind::Constants, a),
        }
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// JSON config file, or `-` for stdin
    pub config: PathBuf,
    /// Seed for randomized runs (overrides the config)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Output file (stdout when absent)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the effective config to this path before running
    #[arg(long)]
    pub dump_config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMethod {
    Crude,
    Conditional,
    Quadrature,
}

/// A run configuration: the aggregate specification plus command
/// parameters. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: Vec<f64>,
    pub lambda: Vec<f64>,
    pub p: f64,
    pub radial: RadialModel,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub multiplicity_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Sample size for Monte Carlo runs; block size for Gumbel-limit runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    /// Raw thresholds on `S_p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    /// Radial survival depths `F̄(u)` mapped to thresholds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<OracleMethod>,
    /// Confidence levels for `var-es`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    /// Radial diagnostic for `diagnose-mda`; absent means the empirical
    /// aggregate relation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<DiagnosticMode>,
    /// Grid for the radial diagnostic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_grid: Option<Vec<f64>>,
    /// Block sizes `n` for norming constants and pairwise levels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_sizes: Option<Vec<f64>>,
    /// Weight matrix columns for pairwise runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl RunConfig {
    /// Parses a config; syntax errors carry line and column.
    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| {
            Error::Validation(format!("config line {} column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn raw_spec(&self) -> RawSpec {
        RawSpec {
            alpha: self.alpha.clone(),
            lambda: self.lambda.clone(),
            p: self.p,
            radial: self.radial,
            multiplicity_tol: self.multiplicity_tol,
        }
    }

    pub fn spec(&self) -> Result<AggregateSpec> {
        AggregateSpec::try_from(self.raw_spec())
    }

    /// Hex SHA-256 of the canonical JSON form of the specification.
    pub fn spec_hash(&self) -> String {
        let json = serde_json::to_string(&self.raw_spec()).expect("spec serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .fold(String::new(), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }

    fn require_seed(&self, what: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Validation(format!("{what} is randomized and needs a seed")))
    }

    fn mc(&self, what: &str, workers: usize) -> Result<McConfig> {
        Ok(McConfig::new(self.n.unwrap_or(DEFAULT_N), self.require_seed(what)?).with_workers(workers))
    }

    /// Thresholds from `thresholds` or `depths`, with the depth column.
    fn threshold_grid(&self, spec: &AggregateSpec) -> Result<Vec<f64>> {
        match (&self.thresholds, &self.depths) {
            (Some(t), None) => Ok(t.clone()),
            (None, Some(ds)) => ds.iter().map(|&d| threshold_at_depth(spec, d)).collect(),
            (Some(_), Some(_)) => Err(Error::Validation(
                "give either thresholds or depths, not both".into(),
            )),
            (None, None) => Err(Error::Validation("config needs thresholds or depths".into())),
        }
    }
}

/// A table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Real(x) if x.is_nan() => "nan".into(),
            Cell::Real(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Real(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Real(x) if x.is_finite() => serde_json::json!(x),
            Cell::Real(x) => serde_json::Value::String(Cell::Real(*x).csv()),
            Cell::Int(i) => serde_json::json!(i),
            Cell::Text(s) => serde_json::json!(s),
            Cell::Flag(b) => serde_json::json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Cell {
        Cell::Real(x)
    }
}
impl From<u64> for Cell {
    fn from(x: u64) -> Cell {
        Cell::Int(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Cell {
        Cell::Int(x as u64)
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Cell {
        Cell::Text(x.to_string())
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Cell {
        Cell::Flag(x)
    }
}

/// Output of one command.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Table {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let j = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[j]).collect())
    }

    fn meta_line(seed: Option<u64>, hash: &str) -> String {
        let seed = seed.map_or("none".to_string(), |s| s.to_string());
        format!(
            "# dirtail {} seed={seed} spec_sha256={hash}",
            env!("CARGO_PKG_VERSION")
        )
    }

    pub fn to_csv(&self, seed: Option<u64>, spec_hash: &str) -> String {
        let mut out = Table::meta_line(seed, spec_hash);
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, seed: Option<u64>, spec_hash: &str) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                serde_json::Value::Object(
                    self.columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.to_string(), v.json()))
                        .collect(),
                )
            })
            .collect();
        let doc = serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "seed": seed,
            "spec_sha256": spec_hash,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }
}

fn estimate_cells(e: &Estimate) -> Vec<Cell> {
    let method = match e.method {
        Method::Crude => "crude",
        Method::Conditional => "conditional",
        Method::Quadrature => "quadrature",
    };
    vec![
        method.into(),
        e.n.into(),
        e.seed.into(),
        e.p_hat.into(),
        e.log_p_hat.into(),
        e.stderr.into(),
        e.log_stderr.into(),
    ]
}

fn oracle(
    spec: &AggregateSpec,
    config: &RunConfig,
    t: f64,
    workers: usize,
    default: OracleMethod,
) -> Result<Estimate> {
    match config.method.unwrap_or(default) {
        OracleMethod::Quadrature => quadrature_tail(spec, t),
        OracleMethod::Conditional => conditional_mc_tail(spec, t, &config.mc("conditional Monte Carlo", workers)?),
        OracleMethod::Crude => crude_mc_tail(spec, t, &config.mc("crude Monte Carlo", workers)?),
    }
}

/// Runs one command on a parsed config.
pub fn run(command: CommandKind, config: &RunConfig, workers: usize) -> Result<Table> {
    let spec = config.spec()?;
    match command {
        CommandKind::Approx => {
            let asym = tail_asymptotic(&spec)?;
            let regime = regime_classify(&spec)?;
            let regime = serde_json::to_value(regime.regime).expect("regime serializes");
            let regime = regime.as_str().unwrap_or("").to_string();
            let mut table = Table::new(&[
                "threshold",
                "base_u",
                "depth_log",
                "prediction_log",
                "regime",
                "K_log",
                "rho",
            ]);
            for t in config.threshold_grid(&spec)? {
                let u = asym.convention.base_from_threshold(t);
                table.push(vec![
                    t.into(),
                    u.into(),
                    base_depth_log(&asym, u)?.into(),
                    asym.evaluate(t)?.ln().into(),
                    Cell::Text(regime.clone()),
                    asym.ln_k.into(),
                    asym.rho.into(),
                ]);
            }
            Ok(table)
        }
        CommandKind::Simulate => {
            let mut table = Table::new(&[
                "threshold", "method", "n", "seed", "p_hat", "log_p_hat", "stderr", "log_stderr",
            ]);
            let default = OracleMethod::Conditional;
            for t in config.threshold_grid(&spec)? {
                let e = oracle(&spec, config, t, workers, default)?;
                let mut row = vec![t.into()];
                row.extend(estimate_cells(&e));
                table.push(row);
            }
            Ok(table)
        }
        CommandKind::Ratio => {
            let asym = tail_asymptotic(&spec)?;
            let default = if spec.d() <= 3 {
                OracleMethod::Quadrature
            } else {
                OracleMethod::Conditional
            };
            let mut table = Table::new(&[
                "threshold",
                "depth_log",
                "prediction_log",
                "oracle_log",
                "ratio",
                "oracle_log_stderr",
            ]);
            for t in config.threshold_grid(&spec)? {
                let pred = asym.evaluate(t)?.ln();
                let e = oracle(&spec, config, t, workers, default)?;
                let u = asym.convention.base_from_threshold(t);
                table.push(vec![
                    t.into(),
                    base_depth_log(&asym, u)?.into(),
                    pred.into(),
                    e.log_p_hat.into(),
                    (pred - e.log_p_hat).exp().into(),
                    e.log_stderr.into(),
                ]);
            }
            Ok(table)
        }
        CommandKind::VarEs => {
            let levels = config
                .levels
                .as_ref()
                .ok_or_else(|| Error::Validation("var-es needs levels".into()))?;
            let mut table = Table::new(&["level", "var", "es_minus_var", "accuracy_warning"]);
            for &b in levels {
                let r = var_es_asymptotic(&spec, b)?;
                table.push(vec![b.into(), r.var.into(), r.es_minus_var.into(), r.accuracy_warning.into()]);
            }
            Ok(table)
        }
        CommandKind::DiagnoseMda => match config.diagnostic {
            Some(mode) => {
                let grid = match (&config.grid, mode) {
                    (Some(g), _) => g.clone(),
                    (None, DiagnosticMode::WeibullRatio { .. }) => default_endpoint_distances(),
                    (None, _) => default_log_depths(),
                };
                let mut table = Table::new(&["grid", "u", "ratio", "ratio_log"]);
                for (g, r) in grid.iter().zip(spec.radial().mda_diagnostic(mode, &grid)?) {
                    table.push(vec![(*g).into(), r.u.into(), r.ratio.into(), r.ln_ratio.into()]);
                }
                Ok(table)
            }
            None => {
                let x_grid = config
                    .x_grid
                    .as_ref()
                    .ok_or_else(|| Error::Validation("diagnose-mda needs x_grid or diagnostic".into()))?;
                let depths = config
                    .depths
                    .as_ref()
                    .ok_or_else(|| Error::Validation("diagnose-mda needs depths".into()))?;
                let cfg = config.mc("diagnose-mda", workers)?;
                let mut table = Table::new(&["depth", "threshold", "x", "ratio", "limit"]);
                for r in empirical_gumbel_mda(&spec, x_grid, depths, &cfg)? {
                    table.push(vec![r.depth.into(), r.v.into(), r.x.into(), r.ratio.into(), r.limit.into()]);
                }
                Ok(table)
            }
        },
        CommandKind::Maxstable => maxstable(&spec, config, workers),
        CommandKind::Constants => {
            let geom = simplex_constant_recursion(&spec)?;
            let mut table = Table::new(&[
                "k",
                "lambda_tilde",
                "theta",
                "theta_tilde",
                "curvature",
                "c_tilde",
                "rv_index",
                "stationarity_residual",
            ]);
            for l in &geom.levels {
                table.push(vec![
                    l.k.into(),
                    l.lambda_tilde.into(),
                    l.theta.into(),
                    l.theta_tilde.into(),
                    l.curvature.into(),
                    l.c_tilde.into(),
                    l.rv_index.into(),
                    l.stationarity_residual.into(),
                ]);
            }
            Ok(table)
        }
    }
}

fn base_depth_log(asym: &crate::aggtail::TailAsymptotic, u: f64) -> Result<f64> {
    match asym.base {
        crate::aggtail::Base::Gumbel => asym.radial.ln_survival(u),
        crate::aggtail::Base::Weibull => asym.radial.ln_survival(1.0 - u),
    }
}

fn maxstable(spec: &AggregateSpec, config: &RunConfig, workers: usize) -> Result<Table> {
    let blocks = config
        .block_sizes
        .as_ref()
        .ok_or_else(|| Error::Validation("maxstable needs block_sizes".into()))?;
    if let Some(columns) = &config.weights {
        let [i, j] = config.pair.unwrap_or([0, 1]);
        let cfg = config.mc("pairwise exceedance", workers)?;
        let weights = WeightMatrix {
            columns: columns.clone(),
        };
        let rows = pairwise_asymindep(&config.alpha, &weights, config.p, config.radial, i, j, blocks, &cfg)?;
        let mut table = Table::new(&["block_size", "b_n", "joint_log", "marginal_log", "ratio"]);
        for r in rows {
            table.push(vec![
                r.level_n.into(),
                r.b_n.into(),
                r.joint.log_p_hat.into(),
                r.marginal.log_p_hat.into(),
                r.ratio.into(),
            ]);
        }
        return Ok(table);
    }
    if let Some(replicates) = config.replicates {
        let x_grid = config
            .x_grid
            .as_ref()
            .ok_or_else(|| Error::Validation("a Gumbel-limit run needs x_grid".into()))?;
        let seed = config.require_seed("the Gumbel-limit check")?;
        let mut table = Table::new(&["block_size", "x", "empirical", "limit", "abs_diff"]);
        for &n in blocks {
            if !(n >= 2.0 && n.fract() == 0.0) {
                return Err(Error::Validation(format!("block size {n} must be an integer >= 2")));
            }
            let cfg = McConfig::new(n as u64, seed).with_workers(workers);
            for r in gumbel_limit_check(spec, x_grid, replicates, &cfg)? {
                table.push(vec![
                    n.into(),
                    r.x.into(),
                    r.empirical.into(),
                    r.limit.into(),
                    (r.empirical - r.limit).abs().into(),
                ]);
            }
        }
        return Ok(table);
    }
    let mut table = Table::new(&["block_size", "a_n", "b_n"]);
    for &n in blocks {
        let c = norming_constants(spec, n)?;
        table.push(vec![n.into(), c.a_n.into(), c.b_n.into()]);
    }
    Ok(table)
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numeric(_) => EXIT_NUMERIC,
        _ => EXIT_VALIDATION,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain { .. } => "domain",
        Error::Validation(_) => "validation",
        Error::WrongRegime(_) => "wrong_regime",
        Error::UnsupportedClass(_) => "unsupported_class",
        Error::Unsupported(_) => "unsupported",
        Error::Numeric(_) => "numeric",
    }
}

fn report(e: &Error) -> i32 {
    let msg = serde_json::json!({"error": error_kind(e), "message": e.to_string()});
    eprintln!("{msg}");
    exit_code(e)
}

fn read_config(path: &Path) -> Result<RunConfig> {
    let mut text = String::new();
    let io = if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|s| text = s)
    };
    io.map_err(|e| Error::Validation(format!("cannot read config {}: {e}", path.display())))?;
    RunConfig::from_json(&text)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    let res = match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    res.map_err(|e| Error::Validation(format!("cannot write output: {e}")))
}

fn execute(args: Cli) -> Result<()> {
    let (kind, run_args) = args.command.split();
    let mut config = read_config(&run_args.config)?;
    if run_args.seed.is_some() {
        config.seed = run_args.seed;
    }
    if run_args.format.is_some() {
        config.format = run_args.format;
    }
    if run_args.output.is_some() {
        config.output = run_args.output.clone();
    }
    config.spec()?;
    if run_args.workers == 0 {
        return Err(Error::Validation("--workers must be at least 1".into()));
    }
    if let Some(path) = &run_args.dump_config {
        let text = serde_json::to_string_pretty(&config).expect("config serializes");
        std::fs::write(path, text + "\n")
            .map_err(|e| Error::Validation(format!("cannot write config dump: {e}")))?;
    }
    let table = run(kind, &config, run_args.workers)?;
    let hash = config.spec_hash();
    let text = match config.format.unwrap_or_default() {
        Format::Csv => table.to_csv(config.seed, &hash),
        Format::Json => table.to_json(config.seed, &hash),
    };
    write_out(config.output.as_deref(), &text)
}

/// Parses `args` and runs the command, returning the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => report(&e),
    }
}
