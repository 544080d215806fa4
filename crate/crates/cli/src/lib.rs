//! Command implementations behind the `mzhv` binary.
//!
//! Each command writes its human-readable output to the given writer and
//! returns the process exit code. JSON goes to `--out` when given, otherwise
//! to the same writer.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use majorana_hv::distribution::short_number;
use majorana_hv::engine::EngineError;
use majorana_hv::scenarios::{builtins, calibrate, get_builtin, CalibrationError, CatalogError};
use majorana_hv::{
    compare, enumerate_exact, hierarchy, parse_scenario, sample, CompareOptions, ComparisonReport, DistributionDoc,
    EngineHandle, EngineId, EvalError, Mode, Parity, Scenario,
};

#[derive(Debug, Parser)]
#[command(
    name = "mzhv",
    version,
    about = "Run Majorana box protocols on quantum, stabilizer and hidden-variable engines"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Outcome distribution of one scenario on one engine.
    Run(RunArgs),
    /// Pairwise TV distances and verdicts between engines.
    Compare(CompareArgs),
    /// Test-class by engine verdict table over the built-in suite.
    Hierarchy(HierarchyArgs),
    /// Check which hv2 braid convention reproduces an oracle.
    Calibrate(CalibrateArgs),
    /// List built-in scenarios.
    List,
}

#[derive(Debug, Args)]
pub struct ModeArgs {
    /// Enumerate every branch (the default).
    #[arg(long, conflicts_with = "shots")]
    pub exact: bool,
    /// Monte-Carlo sample this many shots instead of enumerating.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ModeArgs {
    pub fn mode(&self) -> Mode {
        match self.shots {
            Some(shots) => Mode::Sampled { shots, seed: self.seed },
            None => Mode::Exact,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Built-in name or path to a scenario file.
    pub scenario: String,
    #[arg(long, default_value = "quantum")]
    pub engine: EngineId,
    #[command(flatten)]
    pub mode: ModeArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub scenario: String,
    #[arg(long, value_delimiter = ',', default_value = "quantum,hv1,hv2,stab")]
    pub engines: Vec<EngineId>,
    #[command(flatten)]
    pub mode: ModeArgs,
    /// TV threshold for every pair; defaults depend on the arithmetic and mode.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Condition on the first outcomes, e.g. `even` or `even,odd`.
    #[arg(long, value_delimiter = ',')]
    pub condition: Vec<Parity>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HierarchyArgs {
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, default_value = "stab", value_parser = parse_oracle)]
    pub oracle: EngineId,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_oracle(s: &str) -> Result<EngineId, String> {
    let id: EngineId = s.parse()?;
    if id.is_oracle() {
        Ok(id)
    } else {
        Err(format!("`{id}` is not an oracle (expected quantum or stab)"))
    }
}

/// A failure that ends the command with a fixed exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, unparsable or invalid input: exit 2.
    Input(String),
    /// An evaluation guard tripped, such as the branch or box limits: exit 3.
    Guard(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Guard(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Engine(EngineError::Invalid(_) | EngineError::SectorConflict { .. }) | EvalError::ZeroShots => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Guard(e.to_string()),
        }
    }
}

/// Resolves a built-in name, or failing that a scenario file path.
pub fn load_scenario(arg: &str) -> Result<Scenario, CliError> {
    match get_builtin(arg) {
        Ok(b) => return Ok(b.scenario),
        Err(CatalogError::Reserved(name)) => {
            return Err(CliError::Input(format!("`{name}` is reserved and not available")))
        }
        Err(CatalogError::Unknown(_)) => {}
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(CliError::Input(format!("`{arg}` is neither a built-in scenario nor a file")));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{arg}: {e}")))?;
    let mut s = parse_scenario(&text).map_err(|e| CliError::Input(format!("{arg}: {e}")))?;
    if s.name.is_empty() {
        s.name = path.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    }
    Ok(s)
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

/// Writes `json` to `out` if given (returning true), else leaves it to the caller.
fn emit(json: &str, out: Option<&Path>) -> Result<bool, CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, json)?;
            Ok(true)
        }
        None => Ok(false),
    }
}

pub fn cmd_run(args: &RunArgs, w: &mut dyn Write) -> Result<i32, CliError> {
    let scenario = load_scenario(&args.scenario)?;
    let handle = EngineHandle::new(args.engine);
    let dist = match args.mode.mode() {
        Mode::Exact => enumerate_exact(handle, &scenario)?.distribution,
        Mode::Sampled { shots, seed } => sample(handle, &scenario, shots, seed)?,
    };
    let doc = DistributionDoc::new(&scenario.name, args.engine.as_str(), &dist);
    let json = to_json(&doc);
    if emit(&json, args.out.as_deref())? {
        for e in &doc.entries {
            let trace: Vec<&str> = e.trace.iter().map(|p| p.as_str()).collect();
            let p = match (e.p_num, e.p_den, e.p_float) {
                (Some(n), Some(d), _) => format!("{n}/{d}"),
                (_, _, Some(x)) => x.to_string(),
                _ => String::new(),
            };
            writeln!(w, "[{}]\t{p}", trace.join(","))?;
        }
    } else {
        w.write_all(json.as_bytes())?;
    }
    Ok(0)
}

pub fn render_comparison(r: &ComparisonReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} ({})", r.scenario, r.mode);
    for v in &r.verdicts {
        let word = match v.verdict {
            majorana_hv::Verdict::Match => "match",
            majorana_hv::Verdict::Mismatch => "MISMATCH",
        };
        let _ = writeln!(
            s,
            "  {} vs {}: tv={} tol={} {word}",
            v.engines[0],
            v.engines[1],
            short_number(v.tv),
            short_number(v.tol)
        );
    }
    s
}

pub fn cmd_compare(args: &CompareArgs, w: &mut dyn Write) -> Result<i32, CliError> {
    let scenario = load_scenario(&args.scenario)?;
    if args.condition.len() > scenario.measurement_count() {
        return Err(CliError::Input(format!(
            "condition has {} outcomes but the scenario records {}",
            args.condition.len(),
            scenario.measurement_count()
        )));
    }
    let handles: Vec<EngineHandle> = args.engines.iter().map(|&e| EngineHandle::new(e)).collect();
    let options = CompareOptions { mode: args.mode.mode(), tol: args.tol, condition: args.condition.clone() };
    let report = compare(&scenario, &handles, &options).map_err(|e| match e {
        EvalError::TooFewEngines => CliError::Input(e.to_string()),
        other => other.into(),
    })?;
    let json = to_json(&report);
    if emit(&json, args.out.as_deref())? {
        w.write_all(render_comparison(&report).as_bytes())?;
    } else {
        w.write_all(json.as_bytes())?;
    }
    Ok(if report.all_match() { 0 } else { 1 })
}

pub fn cmd_hierarchy(args: &HierarchyArgs, w: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let report = hierarchy(args.tol)?;
    w.write_all(report.to_markdown().as_bytes())?;
    emit(&to_json(&report), args.out.as_deref())?;
    let diff = report.diff();
    for line in &diff {
        writeln!(err, "{line}")?;
    }
    Ok(if diff.is_empty() { 0 } else { 1 })
}

pub fn cmd_calibrate(args: &CalibrateArgs, w: &mut dyn Write) -> Result<i32, CliError> {
    let report = calibrate(EngineHandle::new(args.oracle)).map_err(|e| match e {
        CalibrationError::NotAnOracle(_) => CliError::Input(e.to_string()),
        CalibrationError::Eval(e) => e.into(),
    })?;
    writeln!(w, "oracle: {}", report.oracle)?;
    match report.unique() {
        Some(c) => writeln!(w, "convention: ccw={} cw={}", c.ccw_sense, c.cw_sense())?,
        None => writeln!(w, "convention: {} satisfying, expected exactly one", report.satisfying.len())?,
    }
    writeln!(w, "\n| scenario | ccw sense | TV | pass |\n|---|---|---|---|")?;
    for row in &report.rows {
        writeln!(
            w,
            "| {} | {} | {} | {} |",
            row.scenario,
            row.ccw_sense,
            short_number(row.tv),
            if row.pass { "✓" } else { "✗" }
        )?;
    }
    emit(&to_json(&report), args.out.as_deref())?;
    Ok(if report.unique().is_some() { 0 } else { 1 })
}

pub fn cmd_list(w: &mut dyn Write) -> Result<i32, CliError> {
    for b in builtins() {
        writeln!(w, "{:<24} {}", b.name, b.description)?;
    }
    Ok(0)
}

pub fn execute(cli: &Cli, w: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Run(a) => cmd_run(a, w),
        Command::Compare(a) => cmd_compare(a, w),
        Command::Hierarchy(a) => cmd_hierarchy(a, w, err),
        Command::Calibrate(a) => cmd_calibrate(a, w),
        Command::List => cmd_list(w),
    }
}
