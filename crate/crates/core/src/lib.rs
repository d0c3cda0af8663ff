//! Simulation of the Incremental Counting protocol on anonymous dynamic
//! networks with a leader.
//!
//! * [`topology`]: input graph families, including uniform random rooted
//!   trees pruned to a degree bound;
//! * [`dynamics`]: T-stable snapshot streams;
//! * [`protocol`]: the counting engine;
//! * [`experiment`]: parameter sweeps and export;
//! * [`census`]: brute-force rooted-tree enumeration for table checks.

pub mod census;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod format;
pub mod protocol;
pub mod seed;
pub mod topology;

pub use dynamics::{DynamicsSchedule, Family, Period, ScheduleParams};
pub use error::{Error, Result};
pub use protocol::{count, count_with, Mode, ProtocolConfig, RunRecord, RunStatus};
pub use topology::{RanrutVariant, RootedTree, Topology};
