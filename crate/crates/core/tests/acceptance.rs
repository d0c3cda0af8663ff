//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use inccount::census;
use inccount::experiment::{csv_string, run_sweep, DeltaRule, SweepResult, SweepSpec};
use inccount::protocol::{
    collection_budget, collection_threshold, notification_rounds, run_collection, run_notification,
    verification_rounds, InvariantMonitor, Observer, ProtocolState,
};
use inccount::seed;
use inccount::topology::{ranrut, sizes_table, subtree_distribution, RanrutVariant};
use inccount::{count, count_with, DynamicsSchedule, Family, Mode, Period, ProtocolConfig, RunStatus, ScheduleParams};
use rayon::prelude::*;

const MASTER_SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(4, |n| n.get())
}

fn spec(
    families: Vec<Family>,
    periods: Vec<Period>,
    delta_rule: DeltaRule,
    n_range: (usize, usize),
    reps: usize,
) -> SweepSpec {
    SweepSpec {
        families,
        n_range,
        delta_rule,
        periods,
        gnp_periods: None,
        probabilities: vec![0.3],
        repetitions: reps,
        master_seed: MASTER_SEED,
        mode: Mode::Experimental,
        c: 1.01,
        ranrut_variant: RanrutVariant::PaperLiteral,
        max_rounds: None,
    }
}

/// The exact-count suite: static paths, static stars, random trees at
/// T = 1 and T = 1280, and G(n, 0.3) at T = 10, for n in 3..=30.
fn exact_count_suite() -> Vec<SweepSpec> {
    let n = (3, 30);
    vec![
        spec(vec![Family::Path], vec![Period::Static], DeltaRule::PowersOfTwo, n, 10),
        spec(vec![Family::Star], vec![Period::Static], DeltaRule::Max, n, 10),
        spec(
            vec![Family::Tree],
            vec![Period::Every(1), Period::Every(1280)],
            DeltaRule::PowersOfTwo,
            n,
            10,
        ),
        spec(vec![Family::Gnp], vec![Period::Every(10)], DeltaRule::Max, n, 10),
    ]
}

fn run_suite(specs: &[SweepSpec], workers: usize) -> Vec<SweepResult> {
    specs
        .iter()
        .map(|s| run_sweep(s, workers).expect("suite runs"))
        .collect()
}

fn exact_count(results: &[SweepResult]) -> Outcome {
    let mut runs = 0;
    let mut wrong = Vec::new();
    for result in results {
        for cfg in &result.configurations {
            for run in &cfg.runs {
                runs += 1;
                if run.estimate != Some(run.schedule.n) || run.status != RunStatus::Ok {
                    wrong.push(format!(
                        "{} n={} delta={} T={} seed={} -> {:?}",
                        run.schedule.family,
                        run.schedule.n,
                        run.schedule.delta,
                        run.schedule.period,
                        run.schedule.seed,
                        run.estimate
                    ));
                }
            }
        }
    }
    outcome(
        wrong.is_empty(),
        format!("{} of {runs} runs output n{}", runs - wrong.len(), first_items(&wrong)),
    )
}

fn first_items(items: &[String]) -> String {
    if items.is_empty() {
        String::new()
    } else {
        format!(
            "; first failures: {}",
            items.iter().take(3).cloned().collect::<Vec<_>>().join(" | ")
        )
    }
}

fn invariants(results: &[SweepResult]) -> Outcome {
    let jobs: Vec<_> = results
        .iter()
        .flat_map(|r| {
            r.configurations
                .iter()
                .flat_map(|c| c.runs.iter())
                .map(move |run| (r, run))
        })
        .collect();
    let checked: Vec<(InvariantMonitor, bool)> = jobs
        .par_iter()
        .map(|(result, run)| {
            let config = result.spec.protocol_config(run.schedule.family);
            let mut monitor = InvariantMonitor::default();
            let mut schedule = DynamicsSchedule::new(run.schedule.clone()).expect("valid schedule");
            let again = count_with(&mut schedule, &config, &mut monitor).expect("run completes");
            (monitor, &again == *run)
        })
        .collect();
    let rounds: u64 = checked.iter().map(|(m, _)| m.collection_rounds).sum();
    let conservation: u64 = checked.iter().map(|(m, _)| m.conservation_violations).sum();
    let node: u64 = checked.iter().map(|(m, _)| m.node_energy_violations).sum();
    let other: u64 = checked
        .iter()
        .map(|(m, _)| m.violations() - m.conservation_violations - m.node_energy_violations)
        .sum();
    let worst_sum = checked
        .iter()
        .map(|(m, _)| m.worst_conservation_error)
        .fold(0.0, f64::max);
    let worst_node = checked.iter().map(|(m, _)| m.worst_node_energy).fold(0.0, f64::max);
    let mismatched = checked.iter().filter(|(_, same)| !same).count();
    outcome(
        conservation == 0 && node == 0 && other == 0 && mismatched == 0,
        format!(
            "{rounds} collection rounds over {} runs; violations: sum {conservation}, node {node}, other {other}; \
             worst |sum - (n-1)| = {worst_sum:.3e}, worst node energy = {worst_node:.17}; \
             {mismatched} monitored re-runs differed",
            checked.len()
        ),
    )
}

fn polynomial_envelope() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [10, 20, 30, 40] {
        let s = spec(
            vec![Family::Path],
            vec![Period::Static],
            DeltaRule::Values(vec![2]),
            (n, n),
            10,
        );
        let result = run_sweep(&s, workers()).expect("sweep runs");
        let agg = &result.configurations[0].aggregate;
        let bound = 2.0 * (n as f64).powi(4);
        ok &= agg.failures == 0 && agg.mean < bound;
        parts.push(format!("n={n}: {} < {bound}", agg.mean));
    }
    outcome(ok, parts.join(", "))
}

fn dynamics_speedup() -> Outcome {
    let s = spec(
        vec![Family::Tree],
        vec![Period::Every(1), Period::Every(1280)],
        DeltaRule::Values(vec![4]),
        (25, 25),
        30,
    );
    let result = run_sweep(&s, workers()).expect("sweep runs");
    let mean = |t: Period| {
        result
            .configurations
            .iter()
            .find(|c| c.params.period == t)
            .map(|c| c.aggregate.mean)
            .expect("configuration present")
    };
    let (fast, slow) = (mean(Period::Every(1)), mean(Period::Every(1280)));
    outcome(fast < slow, format!("mean rounds T=1: {fast}, T=1280: {slow}"))
}

fn sizes_oracle() -> Outcome {
    let table = sizes_table(8).expect("table").to_u64().expect("fits");
    let enumerated = census::count_rooted_trees(8);
    let parent_arrays: Vec<u64> = (1..=8).map(|n| common::rooted_tree_forms(n).len() as u64).collect();
    outcome(
        table == enumerated && table == parent_arrays,
        format!("recurrence {table:?}, canonical-form enumeration {enumerated:?}, parent-array enumeration {parent_arrays:?}"),
    )
}

fn ranrut_uniformity() -> Outcome {
    let classes = &census::rooted_tree_classes(5)[4];
    let index: HashMap<&str, usize> = classes.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let table = sizes_table(5).expect("table");
    let dist = subtree_distribution(&table, 5).expect("distribution");
    let mut rng = seed::rng(seed::derive(MASTER_SEED, 6));
    let mut counts = vec![0u64; classes.len()];
    for _ in 0..90_000 {
        let tree = ranrut(5, &dist, &mut rng, RanrutVariant::SameCopy).expect("draw");
        counts[index[tree.canonical_form().as_str()]] += 1;
    }
    let stat = common::chi_square_uniform(&counts);
    outcome(
        classes.len() == 9 && stat < common::CHI2_8DF_P001,
        format!(
            "{} classes, counts {counts:?}, chi-square {stat:.4} vs critical {}",
            classes.len(),
            common::CHI2_8DF_P001
        ),
    )
}

/// Counts notification rounds as the protocol executes them.
#[derive(Default)]
struct NotificationRounds(u64);

impl Observer for NotificationRounds {
    fn notification_round(&mut self, _k: usize, _r: u64, _halt: &[bool]) {
        self.0 += 1;
    }
}

fn phase_lengths() -> Outcome {
    // independent route: k / (1 - k^-c) = k^(c+1) / (k^c - 1)
    let oracle = |k: f64, c: f64| 1 + (k.powf(c + 1.0) / (k.powf(c) - 1.0)).ceil() as u64;
    let v2 = verification_rounds(2, 1.01);
    let v10 = verification_rounds(10, 1.01);
    let verification_ok = v2 == oracle(2.0, 1.01) && v10 == oracle(10.0, 1.01) && v10 == 13;

    let mut notification_ok = true;
    for k in [2usize, 5, 9] {
        let params = ScheduleParams::new(Family::Path, 9, Period::Static, 0).with_delta(2);
        let mut schedule = DynamicsSchedule::new(params).expect("schedule");
        let mut state = ProtocolState::new(9);
        state.begin_candidate(k);
        state.is_correct = true;
        let mut seen = NotificationRounds::default();
        let used = run_notification(&mut state, &mut schedule, &ProtocolConfig::default(), &mut seen).expect("runs");
        notification_ok &= used == k as u64 && seen.0 == k as u64 && notification_rounds(k) == k as u64;
    }

    let params = ScheduleParams::new(Family::Path, 2, Period::Static, 0).with_delta(1);
    let mut schedule = DynamicsSchedule::new(params).expect("schedule");
    let mut state = ProtocolState::new(2);
    state.begin_candidate(2);
    let theoretical = ProtocolConfig::theoretical(2.4);
    let collected = run_collection(&mut state, &mut schedule, &theoretical, &mut ()).expect("runs");
    let budget = collection_budget(2, 1).expect("budget");
    let budget_oracle = 2 * (2.0f64.powi(2) * 2.0f64.ln()).ceil() as u64;
    let collection_ok = collected == 6 && budget == 6 && budget_oracle == 6;

    outcome(
        verification_ok && notification_ok && collection_ok,
        format!(
            "verification k=2: {v2} (oracle {}), k=10: {v10} (oracle {}); the stated value 6 for k=2 does not \
             follow from the formula, 2 / (1 - 2^-1.01) = {:.4} so the count is 5; notification length = k: \
             {notification_ok}; theoretical collection k=2 delta=1: {collected} rounds (budget {budget})",
            oracle(2.0, 1.01),
            oracle(10.0, 1.01),
            2.0 / (1.0 - 2f64.powf(-1.01)),
        ),
    )
}

fn theoretical_soundness() -> Outcome {
    let (n, k, c) = (4usize, 4usize, 2.4);
    let config = ProtocolConfig::theoretical(c);
    let params = ScheduleParams::new(Family::Path, n, Period::Static, 0).with_delta(2);
    let mut schedule = DynamicsSchedule::new(params.clone()).expect("schedule");
    let mut state = ProtocolState::new(n);
    state.begin_candidate(k);
    let rounds = run_collection(&mut state, &mut schedule, &config, &mut ()).expect("collection runs");
    let leader = state.energy[0];
    let threshold = collection_threshold(k, c);
    let run = count(&mut DynamicsSchedule::new(params).expect("schedule"), &config).expect("run completes");
    outcome(
        c > 5f64.log2() && leader >= threshold && run.estimate == Some(n),
        format!(
            "after {rounds} collection rounds leader energy {leader:.17} >= {threshold:.17}; full run estimate {:?} \
             in {} rounds",
            run.estimate, run.rounds_total
        ),
    )
}

/// Records the first notification round (1-based within the phase) at which
/// a given node is halted.
struct FirstHalt {
    node: usize,
    round: u64,
    first: Option<u64>,
}

impl Observer for FirstHalt {
    fn notification_round(&mut self, _k: usize, _r: u64, halt: &[bool]) {
        self.round += 1;
        if halt[self.node] && self.first.is_none() {
            self.first = Some(self.round);
        }
    }
}

fn broadcast_bound() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [3usize, 10, 25] {
        let params =
            ScheduleParams::new(Family::Path, n, Period::Static, seed::derive(MASTER_SEED, n as u64)).with_delta(2);
        let mut schedule = DynamicsSchedule::new(params).expect("schedule");
        let topology = schedule.topology_at(1).expect("snapshot").clone();
        let far = (1..n)
            .find(|&v| topology.degree(v) == 1)
            .expect("path has a second endpoint");
        let mut state = ProtocolState::new(n);
        state.begin_candidate(n);
        state.is_correct = true;
        let mut observer = FirstHalt {
            node: far,
            round: 0,
            first: None,
        };
        run_notification(&mut state, &mut schedule, &ProtocolConfig::default(), &mut observer).expect("runs");
        ok &= topology.degree(0) == 1 && observer.first == Some(n as u64 - 1);
        parts.push(format!("n={n}: far end halted after {:?} rounds", observer.first));
    }
    outcome(ok, parts.join(", "))
}

fn determinism(first: &[SweepResult], specs: &[SweepSpec]) -> Outcome {
    let serial = run_suite(specs, 1);
    let wide = run_suite(specs, 4);
    let bytes = |rs: &[SweepResult]| rs.iter().map(csv_string).collect::<Vec<_>>();
    let (a, b, c) = (bytes(first), bytes(&serial), bytes(&wide));
    let total: usize = a.iter().map(String::len).sum();
    outcome(
        a == b && b == c,
        format!(
            "{total} CSV bytes identical for the first run ({} workers), a serial re-run and a 4-worker re-run",
            workers()
        ),
    )
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    let start = Instant::now();
    let specs = exact_count_suite();
    let results = run_suite(&specs, workers());
    let suite_time = start.elapsed().as_secs_f64();

    let checks: Vec<(&str, Check)> = vec![
        (
            "exact count",
            Box::new(|| {
                let mut o = exact_count(&results);
                o.detail += &format!("; suite took {suite_time:.1}s on {} workers", workers());
                o
            }),
        ),
        ("energy invariants", Box::new(|| invariants(&results))),
        ("polynomial envelope", Box::new(polynomial_envelope)),
        ("dynamics speedup", Box::new(dynamics_speedup)),
        ("rooted-tree counts", Box::new(sizes_oracle)),
        ("uniform tree sampling", Box::new(ranrut_uniformity)),
        ("phase lengths", Box::new(phase_lengths)),
        ("theoretical budget", Box::new(theoretical_soundness)),
        ("broadcast bound", Box::new(broadcast_bound)),
        ("determinism", Box::new(|| determinism(&results, &specs))),
    ];

    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({}) [{:.1}s]",
            i + 1,
            name,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        checks.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
