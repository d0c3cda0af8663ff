//! C ABI for the `inccount` simulator.
//!
//! Objects cross the boundary as opaque handles that must be released with
//! the matching `ic_*_free`. Every fallible call returns an [`IcStatus`]; on
//! failure `ic_last_error_message` describes the error. Strings returned by
//! the library are owned by the caller and freed with `ic_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use inccount::dynamics::{generate_topology, DynamicsSchedule, Family, Period, ScheduleParams};
use inccount::experiment::{self, SweepResult, SweepSpec};
use inccount::protocol::{self, Mode, ProtocolConfig, RunRecord};
use inccount::topology::{sizes_table, RanrutVariant, Topology};
use inccount::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcStatus {
    Ok = 0,
    InvalidArgument = 1,
    InfeasibleDegreeBound = 2,
    RoundLimitExceeded = 3,
    DegreeBoundViolated = 4,
    BudgetOverflow = 5,
    Overflow = 6,
    Io = 7,
    NullPointer = 8,
    Panic = 9,
    Internal = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcFamily {
    Tree = 0,
    Star = 1,
    Path = 2,
    Gnp = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcMode {
    Experimental = 0,
    Theoretical = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcRanrutVariant {
    PaperLiteral = 0,
    SameCopy = 1,
}

/// Parameters of a single run. Zero in `delta`, `period` or `max_rounds`
/// selects the default (n - 1, static, automatic).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IcRunParams {
    pub family: IcFamily,
    pub n: usize,
    pub delta: usize,
    pub period: u64,
    /// Edge probability, gnp only.
    pub p: f64,
    pub seed: u64,
    pub c: f64,
    pub mode: IcMode,
    pub max_rounds: u64,
    /// Forced on for gnp.
    pub disconnection_tolerant: bool,
    pub ranrut_variant: IcRanrutVariant,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IcRounds {
    pub total: u64,
    pub collection: u64,
    pub verification: u64,
    pub notification: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IcPhaseTrace {
    pub k: usize,
    pub collection: u64,
    pub verification: u64,
    pub notification: u64,
}

pub struct IcTopology(Topology);
pub struct IcRunRecord(RunRecord);
pub struct IcSweepResult(SweepResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> IcStatus {
    match err {
        Error::InvalidParameters(_) | Error::NonMonotoneAccess { .. } | Error::Json { .. } => IcStatus::InvalidArgument,
        Error::InfeasibleDegreeBound { .. } => IcStatus::InfeasibleDegreeBound,
        Error::RoundLimitExceeded { .. } => IcStatus::RoundLimitExceeded,
        Error::DegreeBoundViolated { .. } => IcStatus::DegreeBoundViolated,
        Error::BudgetOverflow { .. } => IcStatus::BudgetOverflow,
        Error::Overflow(_) => IcStatus::Overflow,
        Error::Io { .. } | Error::Csv(_) => IcStatus::Io,
    }
}

fn fail(err: Error) -> IcStatus {
    set_error(err.to_string());
    status_of(&err)
}

/// Runs `body`, converting panics into `IcStatus::Panic`.
fn guard(body: impl FnOnce() -> IcStatus) -> IcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("panic inside inccount");
            IcStatus::Panic
        }
    }
}

fn null_pointer(what: &str) -> IcStatus {
    set_error(format!("{what} is null"));
    IcStatus::NullPointer
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

impl From<IcFamily> for Family {
    fn from(f: IcFamily) -> Self {
        match f {
            IcFamily::Tree => Family::Tree,
            IcFamily::Star => Family::Star,
            IcFamily::Path => Family::Path,
            IcFamily::Gnp => Family::Gnp,
        }
    }
}

impl From<IcRanrutVariant> for RanrutVariant {
    fn from(v: IcRanrutVariant) -> Self {
        match v {
            IcRanrutVariant::PaperLiteral => RanrutVariant::PaperLiteral,
            IcRanrutVariant::SameCopy => RanrutVariant::SameCopy,
        }
    }
}

impl IcRunParams {
    fn schedule(&self) -> ScheduleParams {
        let family = Family::from(self.family);
        let period = if self.period == 0 {
            Period::Static
        } else {
            Period::Every(self.period)
        };
        let delta = if self.delta == 0 {
            self.n.saturating_sub(1)
        } else {
            self.delta
        };
        let mut params = ScheduleParams::new(family, self.n, period, self.seed)
            .with_delta(delta)
            .with_variant(self.ranrut_variant.into());
        if family == Family::Gnp {
            params.p = Some(self.p);
        }
        params
    }

    fn protocol(&self) -> ProtocolConfig {
        ProtocolConfig {
            c: self.c,
            mode: match self.mode {
                IcMode::Experimental => Mode::Experimental,
                IcMode::Theoretical => Mode::Theoretical,
            },
            max_rounds: (self.max_rounds != 0).then_some(self.max_rounds),
            disconnection_tolerant: self.disconnection_tolerant || self.family == IcFamily::Gnp,
            allow_large_budgets: false,
        }
    }
}

/// Message for the last failed call on this thread. Valid until the next
/// call into the library from the same thread.
#[no_mangle]
pub extern "C" fn ic_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Frees a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ic_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Defaults: static path, c = 1.01, experimental mode.
#[no_mangle]
pub extern "C" fn ic_run_params_default(n: usize) -> IcRunParams {
    IcRunParams {
        family: IcFamily::Path,
        n,
        delta: 0,
        period: 0,
        p: 0.0,
        seed: 0,
        c: 1.01,
        mode: IcMode::Experimental,
        max_rounds: 0,
        disconnection_tolerant: false,
        ranrut_variant: IcRanrutVariant::PaperLiteral,
    }
}

/// Number of unlabeled rooted trees on `1..=n_max` vertices, written to
/// `out[0..n_max]`. Fails with `Overflow` when a count exceeds 64 bits.
///
/// # Safety
/// `out` must point to at least `n_max` writable `uint64_t`.
#[no_mangle]
pub unsafe extern "C" fn ic_sizes_table(n_max: usize, out: *mut u64) -> IcStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    guard(|| match sizes_table(n_max).and_then(|t| t.to_u64()) {
        Ok(counts) => {
            std::slice::from_raw_parts_mut(out, n_max).copy_from_slice(&counts);
            IcStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Draws one topology. `delta == 0` means n - 1; `p` is read for gnp only.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn ic_topology_generate(
    family: IcFamily,
    n: usize,
    delta: usize,
    p: f64,
    seed: u64,
    variant: IcRanrutVariant,
    out: *mut *mut IcTopology,
) -> IcStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    *out = ptr::null_mut();
    guard(|| {
        let params = IcRunParams {
            family,
            n,
            delta,
            period: 1,
            p,
            seed,
            ranrut_variant: variant,
            ..ic_run_params_default(n)
        };
        match generate_topology(&params.schedule()) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(IcTopology(t)));
                IcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `t` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_topology_node_count(t: *const IcTopology) -> usize {
    t.as_ref().map_or(0, |t| t.0.n())
}

/// # Safety
/// `t` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_topology_edge_count(t: *const IcTopology) -> usize {
    t.as_ref().map_or(0, |t| t.0.edge_count())
}

/// Copies up to `capacity` edges as `(u, v)` pairs (`u < v`, sorted) into
/// `out`, which holds `2 * capacity` entries. Returns the number copied.
///
/// # Safety
/// `t` must be a live handle; `out` must have room for `2 * capacity` values.
#[no_mangle]
pub unsafe extern "C" fn ic_topology_edges(t: *const IcTopology, out: *mut usize, capacity: usize) -> usize {
    let Some(t) = t.as_ref() else { return 0 };
    if out.is_null() {
        return 0;
    }
    let edges = t.0.edges();
    let count = edges.len().min(capacity);
    let buf = std::slice::from_raw_parts_mut(out, 2 * count);
    for (i, (u, v)) in edges.into_iter().take(count).enumerate() {
        buf[2 * i] = u;
        buf[2 * i + 1] = v;
    }
    count
}

/// `{"n": .., "leader": 0, "edges": [[u, v], ..]}`.
///
/// # Safety
/// `t` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_topology_to_json(t: *const IcTopology) -> *mut c_char {
    t.as_ref().map_or(ptr::null_mut(), |t| to_c_string(t.0.to_json()))
}

/// # Safety
/// `t` must come from `ic_topology_generate` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ic_topology_free(t: *mut IcTopology) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Runs the protocol once. On `RoundLimitExceeded` a partial record is
/// still stored in `out`.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ic_count(params: *const IcRunParams, out: *mut *mut IcRunRecord) -> IcStatus {
    if params.is_null() {
        return null_pointer("params");
    }
    if out.is_null() {
        return null_pointer("out");
    }
    *out = ptr::null_mut();
    let params = *params;
    guard(|| {
        let config = params.protocol();
        let outcome =
            DynamicsSchedule::new(params.schedule()).and_then(|mut schedule| protocol::count(&mut schedule, &config));
        match outcome {
            Ok(record) => {
                *out = Box::into_raw(Box::new(IcRunRecord(record)));
                IcStatus::Ok
            }
            Err(Error::RoundLimitExceeded { max_rounds, k, partial }) => {
                *out = Box::into_raw(Box::new(IcRunRecord(*partial)));
                set_error(format!("round limit of {max_rounds} exceeded at k={k}"));
                IcStatus::RoundLimitExceeded
            }
            Err(e) => fail(e),
        }
    })
}

/// The confirmed size, or 0 if the run did not finish.
///
/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_run_record_estimate(r: *const IcRunRecord) -> usize {
    r.as_ref().and_then(|r| r.0.estimate).unwrap_or(0)
}

/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_run_record_rounds(r: *const IcRunRecord) -> IcRounds {
    r.as_ref().map_or_else(IcRounds::default, |r| IcRounds {
        total: r.0.rounds_total,
        collection: r.0.rounds_collection,
        verification: r.0.rounds_verification,
        notification: r.0.rounds_notification,
    })
}

/// Number of candidate sizes recorded.
///
/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_run_record_trace_len(r: *const IcRunRecord) -> usize {
    r.as_ref().map_or(0, |r| r.0.per_k_trace.len())
}

/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ic_run_record_trace(r: *const IcRunRecord, index: usize, out: *mut IcPhaseTrace) -> IcStatus {
    let (Some(r), Some(out)) = (r.as_ref(), out.as_mut()) else {
        return null_pointer("record or out");
    };
    match r.0.per_k_trace.get(index) {
        Some(p) => {
            *out = IcPhaseTrace {
                k: p.k,
                collection: p.collection,
                verification: p.verification,
                notification: p.notification,
            };
            IcStatus::Ok
        }
        None => {
            set_error(format!("trace index {index} out of range"));
            IcStatus::InvalidArgument
        }
    }
}

/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_run_record_to_json(r: *const IcRunRecord) -> *mut c_char {
    r.as_ref().map_or(ptr::null_mut(), |r| {
        to_c_string(serde_json::to_string(&r.0).expect("record serializes"))
    })
}

/// # Safety
/// `r` must come from `ic_count` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ic_run_record_free(r: *mut IcRunRecord) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Runs a sweep described by a JSON specification.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ic_sweep_run(
    spec_json: *const c_char,
    workers: usize,
    out: *mut *mut IcSweepResult,
) -> IcStatus {
    if spec_json.is_null() {
        return null_pointer("spec_json");
    }
    if out.is_null() {
        return null_pointer("out");
    }
    *out = ptr::null_mut();
    let Ok(text) = CStr::from_ptr(spec_json).to_str() else {
        set_error("spec is not valid UTF-8");
        return IcStatus::InvalidArgument;
    };
    guard(|| {
        let spec: SweepSpec = match serde_json::from_str(text) {
            Ok(spec) => spec,
            Err(e) => {
                set_error(format!("sweep spec: {e}"));
                return IcStatus::InvalidArgument;
            }
        };
        match experiment::run_sweep(&spec, workers) {
            Ok(result) => {
                *out = Box::into_raw(Box::new(IcSweepResult(result)));
                IcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// One row per run, with the sweep CSV header.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_sweep_result_to_csv(s: *const IcSweepResult) -> *mut c_char {
    s.as_ref()
        .map_or(ptr::null_mut(), |s| to_c_string(experiment::csv_string(&s.0)))
}

/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_sweep_result_to_json(s: *const IcSweepResult) -> *mut c_char {
    s.as_ref().map_or(ptr::null_mut(), |s| {
        to_c_string(serde_json::to_string(&s.0).expect("sweep result serializes"))
    })
}

/// # Safety
/// `s` must come from `ic_sweep_run` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ic_sweep_result_free(s: *mut IcSweepResult) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
