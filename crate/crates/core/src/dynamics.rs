//! T-stable sequences of topology snapshots.
//!
//! A new snapshot is produced after every round `r` with `r % T == 0` and is
//! in force from round `r + 1`, so round `r` sees snapshot `(r - 1) / T`.
//! Snapshot `i` is drawn from its own RNG seeded with `derive(seed, i)`,
//! which makes the sequence reproducible and independent of access pattern.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seed;
use crate::topology::{self, check_degree_feasible, RanrutVariant, Topology, TreeGenerator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Uniform random rooted tree, pruned to the degree bound.
    #[serde(alias = "random-tree")]
    Tree,
    Star,
    Path,
    Gnp,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Tree => "tree",
            Family::Star => "star",
            Family::Path => "path",
            Family::Gnp => "gnp",
        }
    }

    /// Families whose every snapshot is connected.
    pub fn always_connected(self) -> bool {
        self != Family::Gnp
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" | "random-tree" => Ok(Family::Tree),
            "star" => Ok(Family::Star),
            "path" => Ok(Family::Path),
            "gnp" => Ok(Family::Gnp),
            _ => Err(Error::invalid(format!("unknown family `{s}`"))),
        }
    }
}

/// Stability period `T`: links stay fixed for at least this many rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Period {
    Every(u64),
    Static,
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Period::Every(t) => write!(f, "{t}"),
            Period::Static => f.write_str("inf"),
        }
    }
}

impl FromStr for Period {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "infinity" | "∞" => Ok(Period::Static),
            _ => match s.parse::<u64>() {
                Ok(0) | Err(_) => Err(Error::invalid(format!(
                    "stability period must be a positive integer or `inf`, got `{s}`"
                ))),
                Ok(t) => Ok(Period::Every(t)),
            },
        }
    }
}

// JSON: a positive integer or the string "inf".
impl Serialize for Period {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Period::Every(t) => s.serialize_u64(*t),
            Period::Static => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Period {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Int(t) => Period::from_str(&t.to_string()),
            Raw::Str(s) => Period::from_str(&s),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Everything needed to reproduce a snapshot sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub family: Family,
    pub n: usize,
    pub delta: usize,
    /// Edge probability, G(n, p) only.
    pub p: Option<f64>,
    #[serde(rename = "T")]
    pub period: Period,
    pub seed: u64,
    #[serde(default)]
    pub ranrut_variant: RanrutVariant,
}

impl ScheduleParams {
    /// Parameters with the family's default degree bound (`n - 1`).
    pub fn new(family: Family, n: usize, period: Period, seed: u64) -> Self {
        ScheduleParams {
            family,
            n,
            delta: n.saturating_sub(1),
            p: None,
            period,
            seed,
            ranrut_variant: RanrutVariant::default(),
        }
    }

    pub fn with_delta(mut self, delta: usize) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_variant(mut self, variant: RanrutVariant) -> Self {
        self.ranrut_variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 2 {
            return Err(Error::invalid(format!("network needs at least 2 nodes, got {n}")));
        }
        if self.delta == 0 || self.delta > n - 1 {
            return Err(Error::invalid(format!(
                "degree bound {} outside 1..={} for n={n}",
                self.delta,
                n - 1
            )));
        }
        if let Period::Every(0) = self.period {
            return Err(Error::invalid("stability period must be positive"));
        }
        if self.family != Family::Gnp && self.p.is_some() {
            return Err(Error::invalid("edge probability only applies to gnp"));
        }
        match self.family {
            Family::Star if self.delta != n - 1 => {
                Err(Error::invalid(format!("star requires delta = n - 1 = {}", n - 1)))
            }
            Family::Star => Ok(()),
            Family::Path => check_degree_feasible(n, self.delta)
                .map_err(|_| Error::invalid(format!("path on {n} nodes needs delta >= 2"))),
            Family::Tree => check_degree_feasible(n, self.delta),
            Family::Gnp => {
                if self.delta != n - 1 {
                    return Err(Error::invalid(format!("gnp requires delta = n - 1 = {}", n - 1)));
                }
                match self.p {
                    Some(p) if (0.0..=1.0).contains(&p) => {}
                    Some(p) => return Err(Error::invalid(format!("edge probability {p} outside [0, 1]"))),
                    None => return Err(Error::invalid("gnp requires an edge probability")),
                }
                if self.period == Period::Static {
                    return Err(Error::invalid(
                        "gnp with a static topology may never be connected; use a finite T",
                    ));
                }
                Ok(())
            }
        }
    }
}

/// A stream of snapshots owned by one protocol run.
#[derive(Debug, Clone)]
pub struct DynamicsSchedule {
    params: ScheduleParams,
    trees: Option<TreeGenerator>,
    current: Topology,
    current_index: u64,
    last_round: u64,
    change_rounds: Vec<u64>,
    trace: Option<Vec<(u64, Topology)>>,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    round: u64,
    topology: &'a Topology,
}

impl DynamicsSchedule {
    pub fn new(params: ScheduleParams) -> Result<Self> {
        params.validate()?;
        let trees = match params.family {
            Family::Tree => Some(TreeGenerator::new(params.n, params.delta, params.ranrut_variant)?),
            _ => None,
        };
        let mut schedule = DynamicsSchedule {
            current: Topology::empty(params.n),
            params,
            trees,
            current_index: 0,
            last_round: 1,
            change_rounds: Vec::new(),
            trace: None,
        };
        schedule.current = schedule.snapshot(0);
        Ok(schedule)
    }

    pub fn params(&self) -> &ScheduleParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn delta(&self) -> usize {
        self.params.delta
    }

    /// Records every snapshot in force from now on, for [`Self::write_trace`].
    pub fn enable_trace(&mut self) {
        if self.trace.is_none() {
            let start = self.index_start(self.current_index);
            self.trace = Some(vec![(start, self.current.clone())]);
        }
    }

    /// Rounds at which a freshly drawn snapshot took effect (excluding round 1).
    pub fn change_rounds(&self) -> &[u64] {
        &self.change_rounds
    }

    fn index_start(&self, index: u64) -> u64 {
        match self.params.period {
            Period::Every(t) => index * t + 1,
            Period::Static => 1,
        }
    }

    fn snapshot(&self, index: u64) -> Topology {
        let mut rng = seed::rng(seed::derive(self.params.seed, index));
        let n = self.params.n;
        match self.params.family {
            Family::Tree => self.trees.as_ref().expect("tree generator").topology(&mut rng),
            Family::Star => topology::shuffled_star(n, &mut rng),
            Family::Path => topology::shuffled_path(n, &mut rng),
            Family::Gnp => {
                topology::gnp(n, self.params.p.expect("validated"), &mut rng).expect("validated probability")
            }
        }
    }

    /// The snapshot in force at round `r` (1-based). Rounds must be queried
    /// in non-decreasing order.
    pub fn topology_at(&mut self, r: u64) -> Result<&Topology> {
        if r == 0 {
            return Err(Error::invalid("rounds are numbered from 1"));
        }
        if r < self.last_round {
            return Err(Error::NonMonotoneAccess {
                requested: r,
                last: self.last_round,
            });
        }
        self.last_round = r;
        let index = match self.params.period {
            Period::Every(t) => (r - 1) / t,
            Period::Static => 0,
        };
        if index != self.current_index {
            self.current = self.snapshot(index);
            self.current_index = index;
            let start = self.index_start(index);
            self.change_rounds.push(start);
            if let Some(trace) = &mut self.trace {
                trace.push((start, self.current.clone()));
            }
        }
        Ok(&self.current)
    }

    /// JSON lines, one per snapshot: `{"round": r, "topology": {..}}`.
    pub fn write_trace(&self, mut out: impl Write) -> std::io::Result<()> {
        for (round, topology) in self.trace.iter().flatten() {
            let line = TraceLine {
                round: *round,
                topology,
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Draws a single topology for `params` (period ignored). Stars and paths
/// come out with canonical labels; trees and G(n, p) are drawn from
/// `rng(params.seed)`.
pub fn generate_topology(params: &ScheduleParams) -> Result<Topology> {
    let mut params = params.clone();
    params.period = Period::Every(1);
    params.validate()?;
    let n = params.n;
    let mut rng = seed::rng(params.seed);
    Ok(match params.family {
        Family::Tree => TreeGenerator::new(n, params.delta, params.ranrut_variant)?.topology(&mut rng),
        Family::Star => topology::star(n),
        Family::Path => topology::path(n),
        Family::Gnp => topology::gnp(n, params.p.expect("validated"), &mut rng)?,
    })
}

pub fn new_schedule(params: ScheduleParams) -> Result<DynamicsSchedule> {
    DynamicsSchedule::new(params)
}
