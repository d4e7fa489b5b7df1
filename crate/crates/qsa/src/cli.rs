//! Command-line front end: single checks and parameter sweeps with explicit
//! seeds, human-readable tables, and machine-readable JSON/CSV.
//!
//! Exit codes: 0 when all margins clear their tolerances and all
//! optimizations converged, 2 on flagged margin violations, 1 on usage or
//! validation errors.

use clap::{Args, Parser, Subcommand};

use crate::channels::{depolarizing_channel, random_kraus_channel, Channel, DepolarizingParams};
use crate::entropy_opt::{h_hat_numeric, s_min_dep_closed, s_min_numeric, OptimizerConfig};
use crate::error::{QsaError, Result};
use crate::qstate::{random_density, BipartiteDims, RngSeed};
use crate::superadd::{smin_additivity_check, strong_superadd_check, verify_lemma_instance};

const LEMMA_TOL: f64 = 1e-9;
const MARGIN_TOL: f64 = 1e-6;
const SMIN_TOL: f64 = 1e-7;
const HHAT_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Smin,
    Hhat,
    Lemma,
    Superadd,
    Additivity,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiKind {
    Identity,
    Depolarizing,
    RandomKraus,
}

impl PsiKind {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(PsiKind::Identity),
            "depolarizing" => Ok(PsiKind::Depolarizing),
            "random_kraus" | "random-kraus" => Ok(PsiKind::RandomKraus),
            other => Err(QsaError::ConfigInvalid(format!(
                "psi: unknown kind {other:?} (expected identity, depolarizing, random_kraus)"
            ))),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            PsiKind::Identity => "identity",
            PsiKind::Depolarizing => "depolarizing",
            PsiKind::RandomKraus => "random_kraus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    E,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

/// Fully resolved run configuration (flags over file values over defaults).
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub d: usize,
    pub d_k: usize,
    pub p: f64,
    pub psi_p: f64,
    pub psi_kind: PsiKind,
    pub n_states: usize,
    pub n_bases: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub value_tol: f64,
    pub step_tol: f64,
    pub ensemble_cap: Option<usize>,
    pub seed: u64,
    pub log_base: LogBase,
    pub output_format: OutputFormat,
    pub output_path: Option<String>,
    pub p_grid: Option<(f64, f64, f64)>,
    pub jobs: usize,
}

impl RunConfig {
    fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_iters: self.max_iters,
            value_tol: self.value_tol,
            step_tol: self.step_tol,
            ensemble_cap: self.ensemble_cap,
            seed: RngSeed(self.seed).stream(0xC0FF_EE),
        }
    }

    fn log_scale(&self) -> f64 {
        match self.log_base {
            LogBase::E => 1.0,
            LogBase::Two => 2.0f64.ln(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "qsa",
    about = "Output-entropy quantities and superadditivity checks for the depolarizing channel",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand, Debug)]
enum CliCommand {
    /// Minimal output entropy of the depolarizing channel: closed form vs optimizer
    Smin(CommonArgs),
    /// Constrained ensemble minimum for the depolarizing channel on random states
    Hhat(CommonArgs),
    /// Joint-output-entropy lower bound over sampled balanced bases
    Lemma(CommonArgs),
    /// Strong superadditivity check on random bipartite states
    Superadd(CommonArgs),
    /// Additivity of the minimal output entropy over a product channel
    Additivity(CommonArgs),
    /// Superadditivity sweep over a p-grid
    Sweep(CommonArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Dimension d of the depolarizing channel's space H
    #[arg(long)]
    d: Option<usize>,
    /// Dimension of the companion space K
    #[arg(long)]
    dk: Option<usize>,
    /// Depolarizing mixing parameter p, 0 <= p <= d^2/(d^2-1)
    #[arg(long)]
    p: Option<f64>,
    /// Companion channel kind: identity, depolarizing, random_kraus
    #[arg(long)]
    psi: Option<String>,
    /// Mixing parameter of a depolarizing companion channel
    #[arg(long)]
    psi_p: Option<f64>,
    /// Number of random states to sample
    #[arg(long)]
    n_states: Option<usize>,
    /// Number of balanced bases per state (lemma)
    #[arg(long)]
    n_bases: Option<usize>,
    /// Optimizer restarts
    #[arg(long)]
    restarts: Option<usize>,
    /// Maximum iterations per restart
    #[arg(long)]
    max_iters: Option<usize>,
    /// Convergence tolerance on the objective (nats)
    #[arg(long)]
    value_tol: Option<f64>,
    /// Step-size tolerance
    #[arg(long)]
    step_tol: Option<f64>,
    /// Maximum ensemble size (default: input dimension squared)
    #[arg(long)]
    ensemble_cap: Option<usize>,
    /// RNG seed (falls back to QSA_SEED, then 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Entropy unit for reports: e (nats) or 2 (bits)
    #[arg(long)]
    log_base: Option<String>,
    /// Output format: table, json, csv
    #[arg(long)]
    format: Option<String>,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<String>,
    /// p-grid for sweeps as start:end:step
    #[arg(long)]
    p_grid: Option<String>,
    /// Worker threads for sweeps (default: available parallelism)
    #[arg(long)]
    jobs: Option<usize>,
    /// key = value configuration file; flags override file values
    #[arg(long)]
    config: Option<String>,
}

/// Parse a `key = value` configuration document.
fn parse_config_file(text: &str) -> Result<std::collections::BTreeMap<String, String>> {
    let mut map = std::collections::BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            QsaError::ConfigInvalid(format!("config line {}: expected key = value", lineno + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn file_get<T: std::str::FromStr>(
    file: &std::collections::BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>> {
    match file.get(key) {
        None => Ok(None),
        Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
            QsaError::ConfigInvalid(format!("{key}: cannot parse {raw:?}"))
        }),
    }
}

/// Resolve argv (and an optional config document) into a validated RunConfig.
/// Flag values override file values; defaults fill the rest.
pub fn parse_config(argv: &[String], file_text: Option<&str>) -> Result<RunConfig> {
    let cli = Cli::try_parse_from(argv)
        .map_err(|e| QsaError::ConfigInvalid(e.to_string()))?;
    let (command, args) = match cli.command {
        CliCommand::Smin(a) => (CommandKind::Smin, a),
        CliCommand::Hhat(a) => (CommandKind::Hhat, a),
        CliCommand::Lemma(a) => (CommandKind::Lemma, a),
        CliCommand::Superadd(a) => (CommandKind::Superadd, a),
        CliCommand::Additivity(a) => (CommandKind::Additivity, a),
        CliCommand::Sweep(a) => (CommandKind::Sweep, a),
    };

    let mut file = std::collections::BTreeMap::new();
    if let Some(text) = file_text {
        file = parse_config_file(text)?;
    }
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            QsaError::ConfigInvalid(format!("config file {path}: {e}"))
        })?;
        for (k, v) in parse_config_file(&text)? {
            file.entry(k).or_insert(v);
        }
    }

    let d = args.d.or(file_get(&file, "d")?).unwrap_or(2);
    let d_k = args.dk.or(file_get(&file, "dk")?).unwrap_or(2);
    let p = args.p.or(file_get(&file, "p")?).unwrap_or(0.5);
    let psi_p = args.psi_p.or(file_get(&file, "psi_p")?).unwrap_or(0.3);
    let psi_kind = PsiKind::parse(
        &args
            .psi
            .or(file_get(&file, "psi")?)
            .unwrap_or_else(|| "identity".to_string()),
    )?;
    let n_states = args.n_states.or(file_get(&file, "n_states")?).unwrap_or(10);
    let n_bases = args.n_bases.or(file_get(&file, "n_bases")?).unwrap_or(5);
    let restarts = args.restarts.or(file_get(&file, "restarts")?).unwrap_or(32);
    let max_iters = args
        .max_iters
        .or(file_get(&file, "max_iters")?)
        .unwrap_or(2000);
    let value_tol = args
        .value_tol
        .or(file_get(&file, "value_tol")?)
        .unwrap_or(1e-7);
    let step_tol = args
        .step_tol
        .or(file_get(&file, "step_tol")?)
        .unwrap_or(1e-10);
    let ensemble_cap = args.ensemble_cap.or(file_get(&file, "ensemble_cap")?);
    let env_seed = std::env::var("QSA_SEED")
        .ok()
        .and_then(|s| s.parse::<u64>().ok());
    let seed = args
        .seed
        .or(file_get(&file, "seed")?)
        .or(env_seed)
        .unwrap_or(0);
    let log_base = match args
        .log_base
        .or(file_get(&file, "log_base")?)
        .unwrap_or_else(|| "e".to_string())
        .as_str()
    {
        "e" => LogBase::E,
        "2" => LogBase::Two,
        other => {
            return Err(QsaError::ConfigInvalid(format!(
                "log_base: expected e or 2, got {other:?}"
            )))
        }
    };
    let output_format = match args
        .format
        .or(file_get(&file, "format")?)
        .unwrap_or_else(|| "table".to_string())
        .as_str()
    {
        "table" => OutputFormat::Table,
        "json" => OutputFormat::Json,
        "csv" => OutputFormat::Csv,
        other => {
            return Err(QsaError::ConfigInvalid(format!(
                "format: expected table, json or csv, got {other:?}"
            )))
        }
    };
    let output_path = args.output.or(file.get("output").cloned());
    let p_grid = match args.p_grid.or(file.get("p_grid").cloned()) {
        None => None,
        Some(raw) => Some(parse_p_grid(&raw)?),
    };
    let jobs = args
        .jobs
        .or(file_get(&file, "jobs")?)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });

    // Domain validation up front, with field-level messages.
    if d < 2 {
        return Err(QsaError::ConfigInvalid("d: must be >= 2".into()));
    }
    if d_k < 1 {
        return Err(QsaError::ConfigInvalid("dk: must be >= 1".into()));
    }
    let max_p = DepolarizingParams::max_p(d);
    if !(0.0..=max_p + 1e-12).contains(&p) {
        return Err(QsaError::ConfigInvalid(format!(
            "p: {p} exceeds the valid range [0, d²/(d²−1) = {max_p}]"
        )));
    }
    if psi_kind == PsiKind::Depolarizing {
        let max_psi = DepolarizingParams::max_p(d_k);
        if !(0.0..=max_psi + 1e-12).contains(&psi_p) {
            return Err(QsaError::ConfigInvalid(format!(
                "psi_p: {psi_p} exceeds the valid range [0, {max_psi}]"
            )));
        }
    }
    if restarts < 1 {
        return Err(QsaError::ConfigInvalid("restarts: must be >= 1".into()));
    }
    if value_tol <= 0.0 || step_tol <= 0.0 {
        return Err(QsaError::ConfigInvalid("tolerances must be > 0".into()));
    }
    if let Some(cap) = ensemble_cap {
        if cap < 1 {
            return Err(QsaError::ConfigInvalid("ensemble_cap: must be >= 1".into()));
        }
    }
    if command == CommandKind::Sweep && p_grid.is_none() {
        return Err(QsaError::ConfigInvalid(
            "p_grid: required for sweep (start:end:step)".into(),
        ));
    }

    Ok(RunConfig {
        command,
        d,
        d_k,
        p,
        psi_p,
        psi_kind,
        n_states,
        n_bases,
        restarts,
        max_iters,
        value_tol,
        step_tol,
        ensemble_cap,
        seed,
        log_base,
        output_format,
        output_path,
        p_grid,
        jobs,
    })
}

fn parse_p_grid(raw: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() != 3 {
        return Err(QsaError::ConfigInvalid(format!(
            "p_grid: expected start:end:step, got {raw:?}"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|s| {
            s.parse::<f64>().map_err(|_| {
                QsaError::ConfigInvalid(format!("p_grid: cannot parse {s:?}"))
            })
        })
        .collect::<Result<_>>()?;
    if nums[2] <= 0.0 || nums[1] < nums[0] {
        return Err(QsaError::ConfigInvalid(
            "p_grid: need end >= start and step > 0".into(),
        ));
    }
    Ok((nums[0], nums[1], nums[2]))
}

fn grid_points(grid: (f64, f64, f64)) -> Vec<f64> {
    let (start, end, step) = grid;
    let mut points = Vec::new();
    let mut i = 0usize;
    loop {
        let p = start + step * i as f64;
        if p > end + 1e-9 {
            break;
        }
        points.push(p.min(end));
        i += 1;
    }
    points
}

/// 12 significant digits, the serialization precision for all reals.
pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Round to 12 significant digits for JSON emission.
pub fn sig12(x: f64) -> f64 {
    fmt12(x).parse().unwrap()
}

#[derive(Debug, Clone)]
enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => fmt12(*v),
            Cell::Text(v) => v.clone(),
            Cell::Flag(v) => v.to_string(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => serde_json::json!(v),
            Cell::Real(v) => serde_json::json!(sig12(*v)),
            Cell::Text(v) => serde_json::json!(v),
            Cell::Flag(v) => serde_json::json!(v),
        }
    }
}

type Row = Vec<(&'static str, Cell)>;

fn render(rows: &[Row], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = String::new();
            if let Some(first) = rows.first() {
                out.push_str(
                    &first
                        .iter()
                        .map(|(k, _)| *k)
                        .collect::<Vec<_>>()
                        .join(","),
                );
                out.push('\n');
            }
            for row in rows {
                out.push_str(
                    &row.iter()
                        .map(|(_, v)| v.csv())
                        .collect::<Vec<_>>()
                        .join(","),
                );
                out.push('\n');
            }
            out
        }
        OutputFormat::Json => {
            let arr: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let mut map = serde_json::Map::new();
                    for (k, v) in row {
                        map.insert((*k).to_string(), v.json());
                    }
                    serde_json::Value::Object(map)
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&serde_json::Value::Array(arr)).unwrap();
            s.push('\n');
            s
        }
        OutputFormat::Table => {
            let mut out = String::new();
            if rows.is_empty() {
                return out;
            }
            let widths: Vec<usize> = rows[0]
                .iter()
                .enumerate()
                .map(|(i, (k, _))| {
                    rows.iter()
                        .map(|r| r[i].1.csv().len())
                        .chain(std::iter::once(k.len()))
                        .max()
                        .unwrap()
                })
                .collect();
            for (i, (k, _)) in rows[0].iter().enumerate() {
                out.push_str(&format!("{:width$}  ", k, width = widths[i]));
            }
            out.push('\n');
            for row in rows {
                for (i, (_, v)) in row.iter().enumerate() {
                    out.push_str(&format!("{:width$}  ", v.csv(), width = widths[i]));
                }
                out.push('\n');
            }
            out
        }
    }
}

fn build_psi(cfg: &RunConfig, instance: u64) -> Result<Channel> {
    match cfg.psi_kind {
        PsiKind::Identity => Ok(Channel::identity(cfg.d_k)),
        PsiKind::Depolarizing => {
            depolarizing_channel(DepolarizingParams::new(cfg.d_k, cfg.psi_p)?)
        }
        PsiKind::RandomKraus => Ok(random_kraus_channel(
            cfg.d_k,
            3,
            RngSeed(cfg.seed).stream(0xBEEF ^ instance),
        )),
    }
}

/// Dispatch a resolved configuration; returns (exit status, report text).
pub fn run(cfg: &RunConfig) -> Result<(i32, String)> {
    let scale = cfg.log_scale();
    let opt = cfg.optimizer();
    let mut rows: Vec<Row> = Vec::new();
    let mut flagged = false;
    let mut unconverged = false;

    match cfg.command {
        CommandKind::Smin => {
            let params = DepolarizingParams::new(cfg.d, cfg.p)
                .map_err(|e| QsaError::ConfigInvalid(e.to_string()))?;
            let closed = s_min_dep_closed(params)?;
            let ch = depolarizing_channel(params)?;
            let res = s_min_numeric(&ch, &opt);
            let diff = (res.value - closed).abs();
            flagged |= diff > SMIN_TOL;
            unconverged |= !res.converged;
            rows.push(vec![
                ("d", Cell::Int(cfg.d as i64)),
                ("p", Cell::Real(cfg.p)),
                ("seed", Cell::Int(cfg.seed as i64)),
                ("closed", Cell::Real(closed / scale)),
                ("numeric", Cell::Real(res.value / scale)),
                ("abs_diff", Cell::Real(diff / scale)),
                ("restarts_used", Cell::Int(res.restarts_used as i64)),
                ("converged", Cell::Flag(res.converged)),
            ]);
        }
        CommandKind::Hhat => {
            let params = DepolarizingParams::new(cfg.d, cfg.p)
                .map_err(|e| QsaError::ConfigInvalid(e.to_string()))?;
            let closed = s_min_dep_closed(params)?;
            let ch = depolarizing_channel(params)?;
            for i in 0..cfg.n_states {
                let rank = 1 + i % cfg.d;
                let rho =
                    random_density(cfg.d, rank, RngSeed(cfg.seed).stream(i as u64))?;
                let res = h_hat_numeric(&ch, &rho, &opt)?;
                let diff = (res.value - closed).abs();
                flagged |= diff > HHAT_TOL;
                unconverged |= !res.converged;
                rows.push(vec![
                    ("d", Cell::Int(cfg.d as i64)),
                    ("p", Cell::Real(cfg.p)),
                    ("state", Cell::Int(i as i64)),
                    ("rank", Cell::Int(rank as i64)),
                    ("seed", Cell::Int(cfg.seed as i64)),
                    ("closed", Cell::Real(closed / scale)),
                    ("numeric", Cell::Real(res.value / scale)),
                    ("abs_diff", Cell::Real(diff / scale)),
                    ("converged", Cell::Flag(res.converged)),
                ]);
            }
        }
        CommandKind::Lemma => {
            let params = DepolarizingParams::new(cfg.d, cfg.p)
                .map_err(|e| QsaError::ConfigInvalid(e.to_string()))?;
            let dims = BipartiteDims::new(cfg.d, cfg.d_k)?;
            let psi = build_psi(cfg, 0)?;
            for i in 0..cfg.n_states {
                let rank = 1 + i % dims.total();
                let rho = random_density(
                    dims.total(),
                    rank,
                    RngSeed(cfg.seed).stream(1000 + i as u64),
                )?;
                let reports = verify_lemma_instance(
                    &rho,
                    dims,
                    &psi,
                    params,
                    cfg.n_bases,
                    RngSeed(cfg.seed).stream(2000 + i as u64),
                )?;
                for (b, rep) in reports.iter().enumerate() {
                    flagged |= rep.margin < -LEMMA_TOL || rep.marginal_check > 1e-10;
                    rows.push(vec![
                        ("d", Cell::Int(cfg.d as i64)),
                        ("d_k", Cell::Int(cfg.d_k as i64)),
                        ("p", Cell::Real(cfg.p)),
                        ("psi_kind", Cell::Text(cfg.psi_kind.name().to_string())),
                        ("psi_param", Cell::Real(cfg.psi_p)),
                        ("state", Cell::Int(i as i64)),
                        ("basis", Cell::Int(b as i64)),
                        ("seed", Cell::Int(cfg.seed as i64)),
                        ("lhs", Cell::Real(rep.lhs / scale)),
                        ("bound", Cell::Real(rep.bound / scale)),
                        ("margin", Cell::Real(rep.margin / scale)),
                        ("marginal_check", Cell::Real(rep.marginal_check)),
                    ]);
                }
            }
        }
        CommandKind::Superadd => {
            let params = DepolarizingParams::new(cfg.d, cfg.p)
                .map_err(|e| QsaError::ConfigInvalid(e.to_string()))?;
            let dims = BipartiteDims::new(cfg.d, cfg.d_k)?;
            let psi = build_psi(cfg, 0)?;
            for i in 0..cfg.n_states {
                let rank = 1 + i % dims.total();
                let rho = random_density(
                    dims.total(),
                    rank,
                    RngSeed(cfg.seed).stream(3000 + i as u64),
                )?;
                let rep = strong_superadd_check(&psi, &rho, dims, params, &opt)?;
                flagged |= rep.margin < -MARGIN_TOL;
                unconverged |= !rep.lhs_converged || !rep.rhs_psi_converged;
                rows.push(superadd_row(cfg, cfg.p, i, &rep, scale));
            }
        }
        CommandKind::Additivity => {
            let params = DepolarizingParams::new(cfg.d, cfg.p)
                .map_err(|e| QsaError::ConfigInvalid(e.to_string()))?;
            let psi = build_psi(cfg, 0)?;
            let rep = smin_additivity_check(&psi, params, &opt)?;
            flagged |= rep.gap.abs() > MARGIN_TOL;
            unconverged |= !rep.joint_converged || !rep.psi_converged;
            rows.push(vec![
                ("d", Cell::Int(cfg.d as i64)),
                ("d_k", Cell::Int(cfg.d_k as i64)),
                ("p", Cell::Real(cfg.p)),
                ("psi_kind", Cell::Text(cfg.psi_kind.name().to_string())),
                ("psi_param", Cell::Real(cfg.psi_p)),
                ("seed", Cell::Int(cfg.seed as i64)),
                ("joint", Cell::Real(rep.joint / scale)),
                ("sum", Cell::Real(rep.sum / scale)),
                ("gap", Cell::Real(rep.gap / scale)),
                (
                    "converged",
                    Cell::Flag(rep.joint_converged && rep.psi_converged),
                ),
            ]);
        }
        CommandKind::Sweep => {
            let dims = BipartiteDims::new(cfg.d, cfg.d_k)?;
            let psi = build_psi(cfg, 0)?;
            let points = grid_points(cfg.p_grid.unwrap());
            let mut tasks = Vec::new();
            for (pi, &p) in points.iter().enumerate() {
                for i in 0..cfg.n_states {
                    tasks.push((pi, p, i));
                }
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.jobs.max(1))
                .build()
                .map_err(|e| QsaError::ConfigInvalid(e.to_string()))?;
            let results: Vec<Result<(usize, usize, f64, crate::superadd::SuperaddReport)>> =
                pool.install(|| {
                    use rayon::prelude::*;
                    tasks
                        .par_iter()
                        .map(|&(pi, p, i)| {
                            let params = DepolarizingParams::new(cfg.d, p)?;
                            let rank = 1 + i % dims.total();
                            let rho = random_density(
                                dims.total(),
                                rank,
                                RngSeed(cfg.seed).stream(3000 + i as u64),
                            )?;
                            let rep = strong_superadd_check(&psi, &rho, dims, params, &opt)?;
                            Ok((pi, i, p, rep))
                        })
                        .collect()
                });
            let mut collected = Vec::new();
            for r in results {
                collected.push(r?);
            }
            // Rows sorted by grid coordinates for deterministic emission.
            collected.sort_by_key(|(pi, i, _, _)| (*pi, *i));
            for (_, i, p, rep) in &collected {
                flagged |= rep.margin < -MARGIN_TOL;
                unconverged |= !rep.lhs_converged || !rep.rhs_psi_converged;
                rows.push(superadd_row(cfg, *p, *i, rep, scale));
            }
        }
    }

    let text = render(&rows, cfg.output_format);
    let status = if flagged {
        2
    } else if unconverged {
        2
    } else {
        0
    };
    Ok((status, text))
}

fn superadd_row(
    cfg: &RunConfig,
    p: f64,
    state: usize,
    rep: &crate::superadd::SuperaddReport,
    scale: f64,
) -> Row {
    vec![
        ("d", Cell::Int(cfg.d as i64)),
        ("d_k", Cell::Int(cfg.d_k as i64)),
        ("p", Cell::Real(p)),
        ("psi_kind", Cell::Text(cfg.psi_kind.name().to_string())),
        ("psi_param", Cell::Real(cfg.psi_p)),
        ("state", Cell::Int(state as i64)),
        ("seed", Cell::Int(cfg.seed as i64)),
        ("lhs", Cell::Real(rep.lhs / scale)),
        ("rhs_dep", Cell::Real(rep.rhs_dep / scale)),
        ("rhs_psi", Cell::Real(rep.rhs_psi / scale)),
        ("margin", Cell::Real(rep.margin / scale)),
        (
            "converged",
            Cell::Flag(rep.lhs_converged && rep.rhs_psi_converged),
        ),
    ]
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args(argv: Vec<String>) -> i32 {
    let cfg = match parse_config(&argv, None) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return 1;
        }
    };
    match run(&cfg) {
        Ok((status, text)) => {
            if let Some(path) = &cfg.output_path {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("cannot write {path}: {e}");
                    return 1;
                }
            } else {
                print!("{text}");
            }
            status
        }
        Err(e) => {
            eprintln!("{e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(parts: &[&str]) -> Vec<String> {
        std::iter::once("qsa")
            .chain(parts.iter().cloned())
            .map(String::from)
            .collect()
    }

    #[test]
    fn no_arguments_is_usage_error() {
        assert!(parse_config(&argv(&[]), None).is_err());
    }

    #[test]
    fn rejects_p_beyond_range() {
        let err = parse_config(&argv(&["smin", "--p", "1.5", "--d", "2"]), None);
        match err {
            Err(QsaError::ConfigInvalid(msg)) => assert!(msg.contains("p:"), "{msg}"),
            other => panic!("expected ConfigInvalid, got {other:?}"),
        }
    }

    #[test]
    fn flags_override_file() {
        let file = "restarts = 8\nseed = 3\n";
        let cfg =
            parse_config(&argv(&["smin", "--restarts", "64"]), Some(file)).unwrap();
        assert_eq!(cfg.restarts, 64);
        assert_eq!(cfg.seed, 3);
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = parse_config(&argv(&["superadd"]), None).unwrap();
        assert_eq!(cfg.d, 2);
        assert_eq!(cfg.restarts, 32);
        assert_eq!(cfg.log_base, LogBase::E);
        assert_eq!(cfg.output_format, OutputFormat::Table);
    }

    #[test]
    fn sweep_requires_grid() {
        assert!(parse_config(&argv(&["sweep"]), None).is_err());
        let cfg = parse_config(&argv(&["sweep", "--p-grid", "0:1:0.5"]), None).unwrap();
        assert_eq!(cfg.p_grid, Some((0.0, 1.0, 0.5)));
        assert_eq!(grid_points(cfg.p_grid.unwrap()), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn twelve_significant_digits() {
        let x = 0.5623351446188083;
        assert_eq!(fmt12(x), "5.62335144619e-1");
        assert!((sig12(x) - x).abs() < 1e-12);
    }

    #[test]
    fn smin_run_reports_closed_and_numeric() {
        let cfg = parse_config(
            &argv(&[
                "smin", "--d", "2", "--p", "0.5", "--restarts", "8", "--seed", "7",
                "--log-base", "2", "--format", "csv",
            ]),
            None,
        )
        .unwrap();
        let (status, text) = run(&cfg).unwrap();
        assert_eq!(status, 0, "{text}");
        // 0.562335 nats = 0.811278 bits
        assert!(text.contains("8.11278"), "{text}");
    }

    #[test]
    fn byte_identical_reruns() {
        let cfg = parse_config(
            &argv(&[
                "lemma", "--d", "2", "--dk", "2", "--p", "0.5", "--n-states", "3",
                "--n-bases", "2", "--seed", "5", "--format", "json",
            ]),
            None,
        )
        .unwrap();
        let (s1, t1) = run(&cfg).unwrap();
        let (s2, t2) = run(&cfg).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(t1, t2);
    }
}
