//! Command-line front end.
//!
//! Exit status: 0 success, 1 failed check or I/O error, 2 usage or parameter
//! error, 3 round limit exceeded.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::census;
use crate::dynamics::{self, DynamicsSchedule, Family, Period, ScheduleParams};
use crate::error::{Error, Result};
use crate::experiment::{self, SweepSpec};
use crate::format::g17;
use crate::protocol::{self, InvariantMonitor, Mode, ProtocolConfig, RunRecord};
use crate::topology::RanrutVariant;

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_ROUND_LIMIT: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "inccount",
    version,
    about = "Incremental Counting simulator for anonymous dynamic networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one topology and print it as JSON.
    Generate(GenerateArgs),
    /// Run the counting protocol once.
    Run(RunArgs),
    /// Run a parameter sweep.
    Sweep(SweepArgs),
    /// Check the rooted-tree count table against brute-force enumeration.
    CheckTables(CheckTablesArgs),
    /// Compare mean rounds of a sweep against Δ·n⁴.
    CheckBound(CheckBoundArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    n: usize,
    /// Degree bound; defaults to n - 1.
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "paper-literal")]
    ranrut_variant: RanrutVariant,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    delta: Option<usize>,
    /// Stability period; `inf` for a static network.
    #[arg(long = "T", default_value = "inf")]
    period: Period,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 1.01)]
    c: f64,
    #[arg(long, default_value = "experimental")]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_rounds: Option<u64>,
    /// Always on for gnp.
    #[arg(long)]
    disconnection_tolerant: bool,
    /// Permit theoretical budgets beyond n <= 8, delta <= 4.
    #[arg(long)]
    allow_large_budgets: bool,
    #[arg(long, default_value = "paper-literal")]
    ranrut_variant: RanrutVariant,
    /// Print the full record as JSON.
    #[arg(long)]
    json: bool,
    /// Write every snapshot change as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Check energy and flooding invariants every round.
    #[arg(long)]
    check_invariants: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON sweep specification.
    #[arg(long, conflicts_with = "grid")]
    spec: Option<PathBuf>,
    /// Use the built-in grid of the original evaluation (n <= 30, 10 reps).
    #[arg(long)]
    grid: bool,
    /// With --grid: n <= 75 and 100 repetitions.
    #[arg(long, requires = "grid")]
    full: bool,
    #[arg(long, default_value_t = 0, requires = "grid")]
    master_seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Defaults to stdout when no output is given.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckTablesArgs {
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    /// Add one to this (1-based) entry before checking.
    #[arg(long, hide = true)]
    corrupt_index: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CheckBoundArgs {
    /// Sweep result written by `sweep --out-json`.
    #[arg(long)]
    input: PathBuf,
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match execute(cli, &mut out) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let _ = out.flush();
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameters(_) | Error::InfeasibleDegreeBound { .. } | Error::Json { .. } => EXIT_USAGE,
        Error::RoundLimitExceeded { .. } => EXIT_ROUND_LIMIT,
        _ => EXIT_FAILURE,
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<u8> {
    match cli.command {
        Command::Generate(args) => generate(args, out),
        Command::Run(args) => run(args, out),
        Command::Sweep(args) => sweep(args, out),
        Command::CheckTables(args) => check_tables(args, out),
        Command::CheckBound(args) => check_bound(args, out),
    }
}

fn stdout_err(e: io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn write_file(path: &PathBuf, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn generate(args: GenerateArgs, out: &mut dyn Write) -> Result<u8> {
    let n = args.n;
    let mut params = ScheduleParams::new(args.family, n, Period::Every(1), args.seed)
        .with_delta(args.delta.unwrap_or(n.saturating_sub(1)))
        .with_variant(args.ranrut_variant);
    params.p = args.p;
    let topology = dynamics::generate_topology(&params)?;
    let json = format!("{}\n", topology.to_json());
    match &args.out {
        Some(path) => write_file(path, json.as_bytes())?,
        None => out.write_all(json.as_bytes()).map_err(stdout_err)?,
    }
    Ok(0)
}

fn print_record(record: &RunRecord, json: bool, out: &mut dyn Write) -> io::Result<()> {
    if json {
        serde_json::to_writer_pretty(&mut *out, record)?;
        return writeln!(out);
    }
    let s = &record.schedule;
    writeln!(out, "family: {}", s.family)?;
    writeln!(out, "n: {}", s.n)?;
    writeln!(out, "delta: {}", s.delta)?;
    writeln!(out, "T: {}", s.period)?;
    if let Some(p) = s.p {
        writeln!(out, "p: {}", g17(p))?;
    }
    writeln!(out, "mode: {}", record.config.mode.as_str())?;
    writeln!(out, "c: {}", g17(record.config.c))?;
    writeln!(out, "seed: {}", s.seed)?;
    writeln!(out, "status: {}", record.status.as_str())?;
    match record.estimate {
        Some(k) => writeln!(out, "estimate: {k}")?,
        None => writeln!(out, "estimate: none")?,
    }
    writeln!(out, "rounds_total: {}", record.rounds_total)?;
    writeln!(out, "rounds_collection: {}", record.rounds_collection)?;
    writeln!(out, "rounds_verification: {}", record.rounds_verification)?;
    writeln!(out, "rounds_notification: {}", record.rounds_notification)?;
    if !record.proven_regime {
        writeln!(out, "note: n <= 3 is outside the proven regime")?;
    }
    Ok(())
}

fn run(args: RunArgs, out: &mut dyn Write) -> Result<u8> {
    let n = args.n;
    let mut params = ScheduleParams::new(args.family, n, args.period, args.seed)
        .with_delta(args.delta.unwrap_or(n.saturating_sub(1)))
        .with_variant(args.ranrut_variant);
    params.p = args.p;
    let config = ProtocolConfig {
        c: args.c,
        mode: args.mode,
        max_rounds: args.max_rounds,
        disconnection_tolerant: args.disconnection_tolerant || args.family == Family::Gnp,
        allow_large_budgets: args.allow_large_budgets,
    };
    let mut schedule = DynamicsSchedule::new(params)?;
    config.validate(n, schedule.delta())?;
    if args.trace.is_some() {
        schedule.enable_trace();
    }
    let mut monitor = InvariantMonitor::default();
    let outcome = if args.check_invariants {
        protocol::count_with(&mut schedule, &config, &mut monitor)
    } else {
        protocol::count(&mut schedule, &config)
    };
    if let Some(path) = &args.trace {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        schedule
            .write_trace(&mut w)
            .and_then(|()| w.flush())
            .map_err(|e| Error::io(path, e))?;
    }
    let (record, code) = match outcome {
        Ok(record) => (record, 0),
        Err(Error::RoundLimitExceeded { partial, .. }) => (*partial, EXIT_ROUND_LIMIT),
        Err(e) => return Err(e),
    };
    print_record(&record, args.json, out).map_err(stdout_err)?;
    if args.check_invariants {
        eprintln!(
            "invariants: {} collection rounds checked, {} violations",
            monitor.collection_rounds,
            monitor.violations()
        );
        if monitor.violations() > 0 && code == 0 {
            return Ok(EXIT_FAILURE);
        }
    }
    Ok(code)
}

fn sweep(args: SweepArgs, out: &mut dyn Write) -> Result<u8> {
    let spec = match (&args.spec, args.grid) {
        (Some(path), _) => experiment::load_spec(path)?,
        (None, true) => SweepSpec::grid(args.full, args.master_seed),
        (None, false) => return Err(Error::invalid("either --spec or --grid is required")),
    };
    let result = experiment::run_sweep(&spec, args.workers)?;
    if let Some(path) = &args.out_csv {
        experiment::export_csv(&result, path)?;
    }
    if let Some(path) = &args.out_json {
        experiment::export_json(&result, path)?;
    }
    if args.out_csv.is_none() && args.out_json.is_none() {
        experiment::write_csv(&result, &mut *out)?;
    }
    let failures: usize = result.configurations.iter().map(|c| c.aggregate.failures).sum();
    eprintln!(
        "sweep: {} configurations, {} runs, {} hit the round limit",
        result.configurations.len(),
        result.run_count(),
        failures
    );
    Ok(0)
}

fn check_tables(args: CheckTablesArgs, out: &mut dyn Write) -> Result<u8> {
    let check = census::check_tables(args.n_max, args.corrupt_index)?;
    let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
    let mut report = String::new();
    report += &format!("recurrence: {}\n", join(&check.recurrence));
    report += &format!("enumerated: {}\n", join(&check.enumerated));
    report += &format!("max row-sum error: {}\n", g17(check.max_row_error));
    let code = match check.first_mismatch {
        None if check.passed() => {
            report += "PASS\n";
            0
        }
        None => {
            report += "FAIL: subtree distribution is not normalized\n";
            EXIT_FAILURE
        }
        Some(i) => {
            report += &format!("FAIL: first mismatch at size {i}\n");
            EXIT_FAILURE
        }
    };
    out.write_all(report.as_bytes()).map_err(stdout_err)?;
    Ok(code)
}

fn check_bound(args: CheckBoundArgs, out: &mut dyn Write) -> Result<u8> {
    let result = experiment::import_json(&args.input)?;
    if result.configurations.is_empty() {
        return Err(Error::invalid("sweep result has no configurations"));
    }
    let checks = experiment::check_bound(&result);
    let mut report = String::from("index,family,n,delta,T,p,rounds_mean,bound,within\n");
    for c in &checks {
        report += &format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.index,
            c.family,
            c.n,
            c.delta,
            c.period,
            c.p.map(g17).unwrap_or_default(),
            g17(c.rounds_mean),
            c.bound,
            c.within
        );
    }
    out.write_all(report.as_bytes()).map_err(stdout_err)?;
    Ok(if checks.iter().all(|c| c.within) {
        0
    } else {
        EXIT_FAILURE
    })
}
