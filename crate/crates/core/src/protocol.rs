//! Centralized simulation of Incremental Counting.
//!
//! For each candidate size `k = 2, 3, ..` the engine runs three phases over
//! the shared round counter `r`, which drives the dynamics schedule:
//!
//! * collection: non-leaders gossip energy towards the leader, which keeps
//!   everything it receives;
//! * verification: the maximum residual energy is flooded to the leader and
//!   compared against `1 / k^c`;
//! * notification: the leader's verdict is flooded as a halt flag.
//!
//! The leader confirms `k` exactly when `k = n`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicsSchedule, ScheduleParams};
use crate::error::{Error, Result};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Each collection phase runs until the leader's energy crosses the
    /// threshold `k - 1 - 1/k^c`.
    #[default]
    Experimental,
    /// Each collection phase runs for the fixed budget `k * ceil((2Δ)^k ln k)`.
    Theoretical,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Experimental => "experimental",
            Mode::Theoretical => "theoretical",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "experimental" => Ok(Mode::Experimental),
            "theoretical" => Ok(Mode::Theoretical),
            _ => Err(Error::invalid(format!("unknown mode `{s}`"))),
        }
    }
}

/// Largest network/degree for which theoretical budgets run without an override.
pub const THEORETICAL_MAX_N: usize = 8;
pub const THEORETICAL_MAX_DELTA: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Threshold exponent.
    pub c: f64,
    pub mode: Mode,
    /// Hard cap on the global round counter. `None` selects `10 Δ n^4` in
    /// experimental mode and no cap in theoretical mode.
    pub max_rounds: Option<u64>,
    /// Extend verification and notification until every node has been heard
    /// by (resp. has heard from) the leader.
    pub disconnection_tolerant: bool,
    /// Allow theoretical mode beyond `n <= 8`, `Δ <= 4`.
    #[serde(default)]
    pub allow_large_budgets: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            c: 1.01,
            mode: Mode::Experimental,
            max_rounds: None,
            disconnection_tolerant: false,
            allow_large_budgets: false,
        }
    }
}

impl ProtocolConfig {
    pub fn theoretical(c: f64) -> Self {
        ProtocolConfig {
            c,
            mode: Mode::Theoretical,
            ..Default::default()
        }
    }

    pub fn validate(&self, n: usize, delta: usize) -> Result<()> {
        if !self.c.is_finite() || self.c <= 1.0 {
            return Err(Error::invalid(format!(
                "threshold exponent c must exceed 1, got {}",
                self.c
            )));
        }
        if self.mode == Mode::Theoretical {
            if self.c <= 5f64.log2() {
                return Err(Error::invalid(format!(
                    "theoretical mode needs c > log2(5) ~ 2.3219, got {}",
                    self.c
                )));
            }
            if !self.allow_large_budgets && (n > THEORETICAL_MAX_N || delta > THEORETICAL_MAX_DELTA) {
                return Err(Error::invalid(format!(
                    "theoretical budgets grow like (2Δ)^k; n={n}, delta={delta} exceeds \
                     n <= {THEORETICAL_MAX_N}, delta <= {THEORETICAL_MAX_DELTA} without an override"
                )));
            }
        }
        if self.max_rounds == Some(0) {
            return Err(Error::invalid("max_rounds must be positive"));
        }
        Ok(())
    }

    /// The effective cap on the round counter.
    pub fn round_limit(&self, n: usize, delta: usize) -> u64 {
        self.max_rounds.unwrap_or(match self.mode {
            Mode::Experimental => default_round_limit(n, delta),
            Mode::Theoretical => u64::MAX,
        })
    }
}

/// `10 Δ n^4`, saturating.
pub fn default_round_limit(n: usize, delta: usize) -> u64 {
    let n = n as u64;
    n.checked_pow(4)
        .and_then(|n4| n4.checked_mul(delta as u64))
        .and_then(|x| x.checked_mul(10))
        .unwrap_or(u64::MAX)
}

/// `1 / k^c`: the largest residual energy any node may hold when `k = n`.
pub fn residual_threshold(k: usize, c: f64) -> f64 {
    1.0 / (k as f64).powf(c)
}

/// Leader energy at which the experimental collection phase stops.
pub fn collection_threshold(k: usize, c: f64) -> f64 {
    (k - 1) as f64 - residual_threshold(k, c)
}

/// Rounding allowance for the leader-energy check. Once collection has
/// converged the leader holds `n - 1` minus a vanishing residue, and binary64
/// summation can land it one ulp above `n - 1`. A wrong candidate `k < n`
/// leaves the leader at least about 1 above `k - 1`, far outside this margin.
pub fn leader_energy_slack(n: usize) -> f64 {
    1e-9 * n as f64
}

/// Fixed length of the verification flood: `1 + ceil(k / (1 - 1/k^c))`.
pub fn verification_rounds(k: usize, c: f64) -> u64 {
    1 + (k as f64 / (1.0 - residual_threshold(k, c))).ceil() as u64
}

/// Fixed length of the notification flood.
pub fn notification_rounds(k: usize) -> u64 {
    k as u64
}

/// Theoretical collection budget `k * ceil((2Δ)^k * ln k)`.
pub fn collection_budget(k: usize, delta: usize) -> Result<u128> {
    let overflow = || Error::BudgetOverflow { k, delta };
    let exp = u32::try_from(k).map_err(|_| overflow())?;
    let base = (2 * delta as u128).checked_pow(exp).ok_or_else(overflow)?;
    let rho = (base as f64 * (k as f64).ln()).ceil();
    if !rho.is_finite() || rho >= 2f64.powi(128) {
        return Err(overflow());
    }
    (rho as u128).checked_mul(k as u128).ok_or_else(overflow)
}

/// One synchronous energy exchange. Every non-leader `j` sends
/// `e[j] / (2Δ)` to each neighbour and keeps the rest; the leader sends
/// nothing and keeps all it receives.
pub fn collection_round(energy: &[f64], topology: &Topology, delta: usize) -> Result<Vec<f64>> {
    let mut next = vec![0.0; energy.len()];
    collection_round_into(energy, topology, delta, &mut next)?;
    Ok(next)
}

pub fn collection_round_into(energy: &[f64], topology: &Topology, delta: usize, next: &mut [f64]) -> Result<()> {
    let n = energy.len();
    assert_eq!(topology.n(), n, "energy vector and topology disagree on n");
    assert_eq!(next.len(), n);
    for node in 0..n {
        let degree = topology.degree(node);
        if degree > delta {
            return Err(Error::DegreeBoundViolated { node, degree, delta });
        }
    }
    let two_delta = 2.0 * delta as f64;
    next.fill(0.0);
    next[0] = energy[0];
    for j in 1..n {
        let neighbors = topology.neighbors(j);
        let share = energy[j] / two_delta;
        next[j] += energy[j] * (1.0 - neighbors.len() as f64 / two_delta);
        for &i in neighbors {
            next[i] += share;
        }
    }
    Ok(())
}

/// Max-flood step: each node takes the maximum over itself and its neighbours.
pub fn verification_step(max_heard: &[f64], topology: &Topology) -> Vec<f64> {
    (0..max_heard.len())
        .map(|i| {
            topology
                .neighbors(i)
                .iter()
                .fold(max_heard[i], |m, &j| m.max(max_heard[j]))
        })
        .collect()
}

/// OR-flood step: a node is halted if it or any neighbour was.
pub fn notification_step(halt: &[bool], topology: &Topology) -> Vec<bool> {
    (0..halt.len())
        .map(|i| halt[i] || topology.neighbors(i).iter().any(|&j| halt[j]))
        .collect()
}

/// Per-node sets of node labels, one bit per origin.
#[derive(Debug, Clone, PartialEq, Eq)]
struct HeardSets {
    words: usize,
    bits: Vec<u64>,
}

impl HeardSets {
    fn singletons(n: usize) -> Self {
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; n * words];
        for i in 0..n {
            bits[i * words + i / 64] |= 1 << (i % 64);
        }
        HeardSets { words, bits }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    fn spread(&self, topology: &Topology, out: &mut HeardSets) {
        out.bits.copy_from_slice(&self.bits);
        for i in 0..topology.n() {
            for &j in topology.neighbors(i) {
                for w in 0..self.words {
                    out.bits[i * self.words + w] |= self.bits[j * self.words + w];
                }
            }
        }
    }

    fn is_full(&self, i: usize, n: usize) -> bool {
        let row = self.row(i);
        (0..n).all(|b| row[b / 64] >> (b % 64) & 1 == 1)
    }
}

/// Everything that evolves during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolState {
    /// Current candidate size.
    pub k: usize,
    /// Next round to execute; starts at 1 and never resets.
    pub r: u64,
    pub energy: Vec<f64>,
    pub max_heard: Vec<f64>,
    pub halt: Vec<bool>,
    pub is_correct: bool,
    heard: Option<HeardSets>,
    scratch: Vec<f64>,
}

impl ProtocolState {
    pub fn new(n: usize) -> Self {
        ProtocolState {
            k: 1,
            r: 1,
            energy: vec![0.0; n],
            max_heard: vec![0.0; n],
            halt: vec![false; n],
            is_correct: false,
            heard: None,
            scratch: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.energy.len()
    }

    /// Starts checking candidate `k`: leader energy 0, every other node 1.
    pub fn begin_candidate(&mut self, k: usize) {
        self.k = k;
        self.is_correct = true;
        self.energy.fill(1.0);
        self.energy[0] = 0.0;
        self.max_heard.fill(0.0);
        self.halt.fill(false);
        self.heard = None;
    }

    /// Whether the leader has heard from every node in the current verification.
    pub fn leader_heard_all(&self) -> bool {
        self.heard.as_ref().is_some_and(|h| h.is_full(0, self.n()))
    }

    fn check_limit(&self, limit: u64) -> Result<()> {
        if self.r > limit {
            Err(Error::RoundLimitExceeded {
                max_rounds: limit,
                k: self.k,
                partial: Box::default(),
            })
        } else {
            Ok(())
        }
    }
}

/// Hooks called after every simulated round.
#[allow(unused_variables)]
pub trait Observer {
    fn collection_round(&mut self, k: usize, r: u64, energy: &[f64]) {}
    fn verification_round(&mut self, k: usize, r: u64, max_heard: &[f64]) {}
    fn notification_round(&mut self, k: usize, r: u64, halt: &[bool]) {}
}

impl Observer for () {}

/// Runs the collection phase for `state.k`; returns rounds used.
pub fn run_collection<O: Observer + ?Sized>(
    state: &mut ProtocolState,
    schedule: &mut DynamicsSchedule,
    config: &ProtocolConfig,
    observer: &mut O,
) -> Result<u64> {
    let (n, delta) = (schedule.n(), schedule.delta());
    let limit = config.round_limit(n, delta);
    let k = state.k;
    let start = state.r;
    let mut step = |state: &mut ProtocolState, schedule: &mut DynamicsSchedule| -> Result<()> {
        state.check_limit(limit)?;
        let topology = schedule.topology_at(state.r)?;
        collection_round_into(&state.energy, topology, delta, &mut state.scratch)?;
        std::mem::swap(&mut state.energy, &mut state.scratch);
        observer.collection_round(k, state.r, &state.energy);
        state.r += 1;
        Ok(())
    };
    match config.mode {
        Mode::Experimental => {
            let threshold = collection_threshold(k, config.c);
            while state.energy[0] < threshold {
                step(state, schedule)?;
            }
        }
        Mode::Theoretical => {
            let budget = collection_budget(k, delta)?;
            let budget = u64::try_from(budget).map_err(|_| Error::BudgetOverflow { k, delta })?;
            for _ in 0..budget {
                step(state, schedule)?;
            }
        }
    }
    Ok(state.r - start)
}

/// Runs the verification phase; sets `state.is_correct` and returns rounds used.
pub fn run_verification<O: Observer + ?Sized>(
    state: &mut ProtocolState,
    schedule: &mut DynamicsSchedule,
    config: &ProtocolConfig,
    observer: &mut O,
) -> Result<u64> {
    let n = schedule.n();
    let limit = config.round_limit(n, schedule.delta());
    let k = state.k;
    let start = state.r;

    if state.energy[0] > (k - 1) as f64 + leader_energy_slack(n) {
        state.is_correct = false;
    }
    state.max_heard.copy_from_slice(&state.energy);
    state.max_heard[0] = 0.0;
    state.heard = config.disconnection_tolerant.then(|| HeardSets::singletons(n));
    let mut heard_next = state.heard.clone();

    let mut step = |state: &mut ProtocolState, schedule: &mut DynamicsSchedule| -> Result<()> {
        state.check_limit(limit)?;
        let topology = schedule.topology_at(state.r)?;
        state.max_heard = verification_step(&state.max_heard, topology);
        if let (Some(cur), Some(next)) = (&mut state.heard, &mut heard_next) {
            cur.spread(topology, next);
            std::mem::swap(cur, next);
        }
        observer.verification_round(k, state.r, &state.max_heard);
        state.r += 1;
        Ok(())
    };
    for _ in 0..verification_rounds(k, config.c) {
        step(state, schedule)?;
    }
    if config.disconnection_tolerant {
        while !state.leader_heard_all() {
            step(state, schedule)?;
        }
    }
    if state.max_heard[0] > residual_threshold(k, config.c) {
        state.is_correct = false;
    }
    Ok(state.r - start)
}

/// Runs the notification phase; returns rounds used.
pub fn run_notification<O: Observer + ?Sized>(
    state: &mut ProtocolState,
    schedule: &mut DynamicsSchedule,
    config: &ProtocolConfig,
    observer: &mut O,
) -> Result<u64> {
    let limit = config.round_limit(schedule.n(), schedule.delta());
    let k = state.k;
    let start = state.r;
    state.halt.fill(false);
    state.halt[0] = state.is_correct;

    let mut step = |state: &mut ProtocolState, schedule: &mut DynamicsSchedule| -> Result<()> {
        state.check_limit(limit)?;
        let topology = schedule.topology_at(state.r)?;
        state.halt = notification_step(&state.halt, topology);
        observer.notification_round(k, state.r, &state.halt);
        state.r += 1;
        Ok(())
    };
    for _ in 0..notification_rounds(k) {
        step(state, schedule)?;
    }
    if config.disconnection_tolerant {
        while state.halt[0] && !state.halt.iter().all(|&h| h) {
            step(state, schedule)?;
        }
    }
    Ok(state.r - start)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    #[default]
    Ok,
    RoundLimit,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::RoundLimit => "round_limit",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTrace {
    pub k: usize,
    pub collection: u64,
    pub verification: u64,
    pub notification: u64,
}

impl PhaseTrace {
    pub fn total(&self) -> u64 {
        self.collection + self.verification + self.notification
    }
}

/// Outcome of one counting execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schedule: ScheduleParams,
    pub config: ProtocolConfig,
    pub round_limit: u64,
    pub status: RunStatus,
    /// The confirmed size; `None` if the run was cut short.
    pub estimate: Option<usize>,
    /// `n > 3`, the regime covered by the correctness argument.
    pub proven_regime: bool,
    pub rounds_total: u64,
    pub rounds_collection: u64,
    pub rounds_verification: u64,
    pub rounds_notification: u64,
    pub per_k_trace: Vec<PhaseTrace>,
}

impl Default for RunRecord {
    fn default() -> Self {
        RunRecord {
            schedule: ScheduleParams::new(crate::dynamics::Family::Path, 0, crate::dynamics::Period::Static, 0),
            config: ProtocolConfig::default(),
            round_limit: 0,
            status: RunStatus::Ok,
            estimate: None,
            proven_regime: false,
            rounds_total: 0,
            rounds_collection: 0,
            rounds_verification: 0,
            rounds_notification: 0,
            per_k_trace: Vec::new(),
        }
    }
}

impl RunRecord {
    fn push(&mut self, phase: PhaseTrace) {
        self.rounds_collection += phase.collection;
        self.rounds_verification += phase.verification;
        self.rounds_notification += phase.notification;
        self.rounds_total += phase.total();
        self.per_k_trace.push(phase);
    }
}

/// Runs the protocol to completion.
pub fn count(schedule: &mut DynamicsSchedule, config: &ProtocolConfig) -> Result<RunRecord> {
    count_with(schedule, config, &mut ())
}

/// [`count`] with per-round hooks.
pub fn count_with<O: Observer + ?Sized>(
    schedule: &mut DynamicsSchedule,
    config: &ProtocolConfig,
    observer: &mut O,
) -> Result<RunRecord> {
    let (n, delta) = (schedule.n(), schedule.delta());
    config.validate(n, delta)?;
    let mut record = RunRecord {
        schedule: schedule.params().clone(),
        config: config.clone(),
        round_limit: config.round_limit(n, delta),
        proven_regime: n > 3,
        ..RunRecord::default()
    };
    let mut state = ProtocolState::new(n);

    for k in 2.. {
        state.begin_candidate(k);
        let mut phase = PhaseTrace {
            k,
            ..PhaseTrace::default()
        };
        for stage in 0..3 {
            let mark = state.r;
            let outcome = match stage {
                0 => run_collection(&mut state, schedule, config, observer),
                1 => run_verification(&mut state, schedule, config, observer),
                _ => run_notification(&mut state, schedule, config, observer),
            };
            let used = state.r - mark;
            match stage {
                0 => phase.collection = used,
                1 => phase.verification = used,
                _ => phase.notification = used,
            }
            if let Err(err) = outcome {
                record.push(phase);
                return Err(match err {
                    Error::RoundLimitExceeded { max_rounds, k, .. } => {
                        record.status = RunStatus::RoundLimit;
                        Error::RoundLimitExceeded {
                            max_rounds,
                            k,
                            partial: Box::new(record),
                        }
                    }
                    other => other,
                });
            }
        }
        record.push(phase);
        if state.is_correct {
            record.estimate = Some(k);
            break;
        }
    }
    Ok(record)
}

/// Checks the per-round invariants of the protocol and counts violations.
///
/// * collection: `|sum e - (n - 1)| <= 1e-9 n`, non-leader `e <= 1 + 1e-12`,
///   all `e >= 0`, leader energy non-decreasing;
/// * verification: per-node maxima non-decreasing;
/// * notification: halt flags never revert.
#[derive(Debug, Clone, Default)]
pub struct InvariantMonitor {
    pub collection_rounds: u64,
    pub conservation_violations: u64,
    pub node_energy_violations: u64,
    pub negativity_violations: u64,
    pub leader_monotonicity_violations: u64,
    pub max_heard_violations: u64,
    pub halt_violations: u64,
    /// Largest `|sum e - (n - 1)|` seen.
    pub worst_conservation_error: f64,
    /// Largest non-leader energy seen.
    pub worst_node_energy: f64,
    last_k: usize,
    last_leader: f64,
    last_max_heard: Vec<f64>,
    last_halt: Vec<bool>,
}

impl InvariantMonitor {
    pub const CONSERVATION_TOLERANCE: f64 = 1e-9;
    pub const NODE_ENERGY_TOLERANCE: f64 = 1e-12;

    pub fn violations(&self) -> u64 {
        self.conservation_violations
            + self.node_energy_violations
            + self.negativity_violations
            + self.leader_monotonicity_violations
            + self.max_heard_violations
            + self.halt_violations
    }
}

impl Observer for InvariantMonitor {
    fn collection_round(&mut self, k: usize, _r: u64, energy: &[f64]) {
        let n = energy.len();
        self.collection_rounds += 1;
        if k != self.last_k {
            self.last_k = k;
            self.last_leader = 0.0;
            self.last_max_heard.clear();
            self.last_halt.clear();
        }
        let total: f64 = energy.iter().sum();
        let err = (total - (n - 1) as f64).abs();
        self.worst_conservation_error = self.worst_conservation_error.max(err);
        if err > Self::CONSERVATION_TOLERANCE * n as f64 {
            self.conservation_violations += 1;
        }
        let node_max = energy[1..].iter().copied().fold(0.0, f64::max);
        self.worst_node_energy = self.worst_node_energy.max(node_max);
        if node_max > 1.0 + Self::NODE_ENERGY_TOLERANCE {
            self.node_energy_violations += 1;
        }
        if energy.iter().any(|&e| e < 0.0) {
            self.negativity_violations += 1;
        }
        if energy[0] < self.last_leader {
            self.leader_monotonicity_violations += 1;
        }
        self.last_leader = energy[0];
    }

    fn verification_round(&mut self, _k: usize, _r: u64, max_heard: &[f64]) {
        if !self.last_max_heard.is_empty()
            && max_heard
                .iter()
                .zip(&self.last_max_heard)
                .any(|(now, before)| now < before)
        {
            self.max_heard_violations += 1;
        }
        self.last_max_heard.clear();
        self.last_max_heard.extend_from_slice(max_heard);
    }

    fn notification_round(&mut self, _k: usize, _r: u64, halt: &[bool]) {
        if !self.last_halt.is_empty() && halt.iter().zip(&self.last_halt).any(|(&now, &before)| before && !now) {
            self.halt_violations += 1;
        }
        self.last_halt.clear();
        self.last_halt.extend_from_slice(halt);
    }
}
