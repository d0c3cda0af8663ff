//! Parameter sweeps over families, sizes, degree bounds and stability
//! periods, with deterministic per-run seeds and CSV/JSON export.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicsSchedule, Family, Period, ScheduleParams};
use crate::error::{Error, Result};
use crate::format::g17;
use crate::protocol::{self, Mode, ProtocolConfig, RunRecord, RunStatus};
use crate::seed;
use crate::topology::RanrutVariant;

pub const GRID_PERIODS: [Period; 10] = [
    Period::Every(1),
    Period::Every(10),
    Period::Every(20),
    Period::Every(40),
    Period::Every(80),
    Period::Every(160),
    Period::Every(320),
    Period::Every(640),
    Period::Every(1280),
    Period::Static,
];

pub const GRID_PROBABILITIES: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];

pub const CSV_HEADER: [&str; 15] = [
    "family",
    "n",
    "delta",
    "T",
    "p",
    "mode",
    "c",
    "seed",
    "rep",
    "estimate",
    "rounds_total",
    "rounds_collection",
    "rounds_verification",
    "rounds_notification",
    "status",
];

/// Degree bounds used for trees and paths. Stars and G(n, p) always use `n - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaRule {
    /// `2^i` for every `i >= 1` with `2^i <= n - 1`.
    PowersOfTwo,
    /// `n - 1`.
    Max,
    /// Listed values that are feasible for the family at this `n`.
    Values(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub families: Vec<Family>,
    /// Inclusive range of network sizes.
    pub n_range: (usize, usize),
    pub delta_rule: DeltaRule,
    #[serde(rename = "T")]
    pub periods: Vec<Period>,
    /// Periods for G(n, p); defaults to `T`.
    #[serde(rename = "gnp_T", default, skip_serializing_if = "Option::is_none")]
    pub gnp_periods: Option<Vec<Period>>,
    #[serde(rename = "p", default)]
    pub probabilities: Vec<f64>,
    pub repetitions: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default)]
    pub ranrut_variant: RanrutVariant,
    #[serde(default)]
    pub max_rounds: Option<u64>,
}

fn default_c() -> f64 {
    1.01
}

impl SweepSpec {
    /// The grid of the original evaluation. Desk scale is `n <= 30` with 10
    /// repetitions; `full` is `n <= 75` with 100.
    pub fn grid(full: bool, master_seed: u64) -> Self {
        SweepSpec {
            families: vec![Family::Tree, Family::Star, Family::Path, Family::Gnp],
            n_range: (3, if full { 75 } else { 30 }),
            delta_rule: DeltaRule::PowersOfTwo,
            periods: GRID_PERIODS.to_vec(),
            gnp_periods: Some(GRID_PERIODS[..9].to_vec()),
            probabilities: GRID_PROBABILITIES.to_vec(),
            repetitions: if full { 100 } else { 10 },
            master_seed,
            mode: Mode::Experimental,
            c: 1.01,
            ranrut_variant: RanrutVariant::PaperLiteral,
            max_rounds: None,
        }
    }

    fn deltas(&self, family: Family, n: usize) -> Vec<usize> {
        let min = if n >= 3 { 2 } else { 1 };
        match (family, &self.delta_rule) {
            (Family::Star | Family::Gnp, _) | (_, DeltaRule::Max) => vec![n - 1],
            (_, DeltaRule::PowersOfTwo) => (1..usize::BITS).map(|i| 1usize << i).take_while(|&d| d < n).collect(),
            (_, DeltaRule::Values(values)) => values.iter().copied().filter(|&d| d >= min && d < n).collect(),
        }
    }

    fn periods_for(&self, family: Family) -> &[Period] {
        match (family, &self.gnp_periods) {
            (Family::Gnp, Some(p)) => p,
            _ => &self.periods,
        }
    }

    pub fn protocol_config(&self, family: Family) -> ProtocolConfig {
        ProtocolConfig {
            c: self.c,
            mode: self.mode,
            max_rounds: self.max_rounds,
            disconnection_tolerant: family == Family::Gnp,
            allow_large_budgets: false,
        }
    }

    /// Every configuration in sweep order, validated. Seeds are left at 0.
    pub fn configurations(&self) -> Result<Vec<ScheduleParams>> {
        let (lo, hi) = self.n_range;
        if lo < 2 || lo > hi {
            return Err(Error::invalid(format!(
                "n range [{lo}, {hi}] must satisfy 2 <= lo <= hi"
            )));
        }
        if self.families.is_empty() || self.periods.is_empty() {
            return Err(Error::invalid("sweep needs at least one family and one T"));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be positive"));
        }
        let mut out = Vec::new();
        for &family in &self.families {
            let periods = self.periods_for(family);
            if family == Family::Gnp {
                if self.probabilities.is_empty() {
                    return Err(Error::invalid("gnp needs at least one p"));
                }
                if periods.contains(&Period::Static) {
                    return Err(Error::invalid("gnp cannot be evaluated with T = inf"));
                }
            }
            for n in lo..=hi {
                for delta in self.deltas(family, n) {
                    for &period in periods {
                        let base = ScheduleParams::new(family, n, period, 0)
                            .with_delta(delta)
                            .with_variant(self.ranrut_variant);
                        let variants: Vec<ScheduleParams> = if family == Family::Gnp {
                            self.probabilities.iter().map(|&p| base.clone().with_p(p)).collect()
                        } else {
                            vec![base]
                        };
                        for params in variants {
                            params.validate()?;
                            self.protocol_config(family).validate(n, delta)?;
                            out.push(params);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Summary of `rounds_total` over one configuration's repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub failures: usize,
    pub mean: f64,
    pub min: u64,
    pub max: u64,
    /// Population standard deviation.
    pub std_dev: f64,
}

impl Aggregate {
    pub fn of(runs: &[RunRecord]) -> Self {
        let count = runs.len();
        let failures = runs.iter().filter(|r| r.status != RunStatus::Ok).count();
        let totals: Vec<f64> = runs.iter().map(|r| r.rounds_total as f64).collect();
        let mean = totals.iter().sum::<f64>() / count.max(1) as f64;
        let var = totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / count.max(1) as f64;
        Aggregate {
            count,
            failures,
            mean,
            min: runs.iter().map(|r| r.rounds_total).min().unwrap_or(0),
            max: runs.iter().map(|r| r.rounds_total).max().unwrap_or(0),
            std_dev: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationResult {
    pub index: usize,
    /// Parameters shared by all repetitions (seed 0).
    pub params: ScheduleParams,
    /// One record per repetition, in repetition order.
    pub runs: Vec<RunRecord>,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub configurations: Vec<ConfigurationResult>,
}

impl SweepResult {
    pub fn run_count(&self) -> usize {
        self.configurations.iter().map(|c| c.runs.len()).sum()
    }
}

/// Seed of repetition `rep` of configuration `config`.
pub fn run_seed(master_seed: u64, config: usize, rep: usize) -> u64 {
    seed::derive2(master_seed, config as u64, rep as u64)
}

fn execute(params: ScheduleParams, config: &ProtocolConfig) -> Result<RunRecord> {
    let mut schedule = DynamicsSchedule::new(params)?;
    match protocol::count(&mut schedule, config) {
        Err(Error::RoundLimitExceeded { partial, .. }) => Ok(*partial),
        other => other,
    }
}

/// Runs every repetition of every configuration on `workers` threads.
/// Output order and content do not depend on `workers`.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    let configs = spec.configurations()?;
    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..spec.repetitions).map(move |r| (c, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("worker pool: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, rep)| {
                let mut params = configs[c].clone();
                params.seed = run_seed(spec.master_seed, c, rep);
                let config = spec.protocol_config(params.family);
                execute(params, &config)
            })
            .collect::<Result<_>>()
    })?;

    let mut records = records.into_iter();
    let configurations = configs
        .into_iter()
        .enumerate()
        .map(|(index, params)| {
            let runs: Vec<RunRecord> = records.by_ref().take(spec.repetitions).collect();
            ConfigurationResult {
                index,
                params,
                aggregate: Aggregate::of(&runs),
                runs,
            }
        })
        .collect();
    Ok(SweepResult {
        spec: spec.clone(),
        configurations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub index: usize,
    pub family: Family,
    pub n: usize,
    pub delta: usize,
    #[serde(rename = "T")]
    pub period: Period,
    pub p: Option<f64>,
    pub rounds_mean: f64,
    /// `Δ n^4`.
    pub bound: u64,
    /// Every run finished and the mean is strictly below the bound.
    pub within: bool,
}

pub fn polynomial_bound(n: usize, delta: usize) -> u64 {
    (delta as u64).saturating_mul((n as u64).saturating_pow(4))
}

pub fn check_bound(result: &SweepResult) -> Vec<BoundCheck> {
    result
        .configurations
        .iter()
        .map(|cfg| {
            let p = &cfg.params;
            let bound = polynomial_bound(p.n, p.delta);
            BoundCheck {
                index: cfg.index,
                family: p.family,
                n: p.n,
                delta: p.delta,
                period: p.period,
                p: p.p,
                rounds_mean: cfg.aggregate.mean,
                bound,
                within: cfg.aggregate.failures == 0 && cfg.aggregate.mean < bound as f64,
            }
        })
        .collect()
}

pub fn write_csv(result: &SweepResult, out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for cfg in &result.configurations {
        for (rep, run) in cfg.runs.iter().enumerate() {
            let s = &run.schedule;
            w.write_record([
                s.family.to_string(),
                s.n.to_string(),
                s.delta.to_string(),
                s.period.to_string(),
                s.p.map(g17).unwrap_or_default(),
                run.config.mode.as_str().to_string(),
                g17(run.config.c),
                s.seed.to_string(),
                rep.to_string(),
                run.estimate.map(|e| e.to_string()).unwrap_or_default(),
                run.rounds_total.to_string(),
                run.rounds_collection.to_string(),
                run.rounds_verification.to_string(),
                run.rounds_notification.to_string(),
                run.status.as_str().to_string(),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn csv_string(result: &SweepResult) -> String {
    let mut buf = Vec::new();
    write_csv(result, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn export_csv(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_csv(result, &mut out).map_err(|e| match e {
        Error::Csv(e) if e.is_io_error() => Error::io(path, std::io::Error::other(e.to_string())),
        other => other,
    })?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn export_json(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer(&mut out, result).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    out.write_all(b"\n")
        .and_then(|()| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn import_json(path: impl AsRef<Path>) -> Result<SweepResult> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_spec(path: impl AsRef<Path>) -> Result<SweepSpec> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}
