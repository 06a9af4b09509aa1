//! C ABI for the `tsp-edo` library.
//!
//! Every fallible call returns an [`EdoStatus`]; on failure the message is
//! available from [`edo_last_error`] on the same thread. Objects are opaque
//! handles created by `edo_*_new`/`edo_run` style calls and released with the
//! matching `*_free`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tsp_edo::ea::{self, EaConfig};
use tsp_edo::entropy::{entropy, entropy_bounds};
use tsp_edo::instance::{parse_opt_tour, parse_tsplib, unit_graph, Instance, OptimumInfo};
use tsp_edo::segments::build_table;
use tsp_edo::{CutBias, EdoError, Measure, OffspringScheme, RunRecord, Selection, Tour};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Validation = 4,
    Config = 5,
    Consistency = 6,
    Size = 7,
    Io = 8,
    Unsupported = 9,
    OutOfRange = 10,
    Panic = 11,
}

impl From<&EdoError> for EdoStatus {
    fn from(e: &EdoError) -> Self {
        match e {
            EdoError::Parse { .. } => EdoStatus::Parse,
            EdoError::Unsupported(_) => EdoStatus::Unsupported,
            EdoError::Validation(_) => EdoStatus::Validation,
            EdoError::Argument(_) | EdoError::InvalidMove { .. } => EdoStatus::InvalidArgument,
            EdoError::Consistency(_) => EdoStatus::Consistency,
            EdoError::Config(_) => EdoStatus::Config,
            EdoError::Size(_) => EdoStatus::Size,
            EdoError::Io(_) => EdoStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdoMeasure {
    Entropy = 0,
    Ed = 1,
    Pd = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdoMutation {
    Classic = 0,
    Biased = 1,
    Dual = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdoSelection {
    /// Parent-pool for entropy, full-population for ED and PD.
    Default = 0,
    ParentPool = 1,
    FullPopulation = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdoCutBias {
    First = 0,
    Both = 1,
}

/// Run parameters. Use `alpha = INFINITY` for unconstrained runs.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdoConfig {
    pub mu: usize,
    pub k: usize,
    pub alpha: f64,
    pub budget: u64,
    pub seed: u64,
    pub trace_every: u64,
    pub measure: EdoMeasure,
    pub mutation: EdoMutation,
    pub selection: EdoSelection,
    pub cut_bias: EdoCutBias,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdoRunSummary {
    pub evals_used: u64,
    pub steps: u64,
    /// -1 when `H_max` was not reached.
    pub evals_to_hmax: i64,
    pub final_h: f64,
    pub final_normalised: f64,
    /// Value of the configured measure on the final population.
    pub final_score: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub feasible_offspring: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdoTracePoint {
    pub eval: u64,
    pub h: f64,
    pub h_normalised: f64,
    pub f_min: u32,
    pub f_max: u32,
    pub c: u32,
    pub feasible: u64,
}

/// Opaque instance handle, optionally carrying a known optimum.
pub struct EdoInstance {
    inst: Instance,
    opt: Option<OptimumInfo>,
}

/// Opaque handle to a finished run.
pub struct EdoRun {
    rec: RunRecord,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard<F: FnOnce() -> Result<(), (EdoStatus, String)>>(f: F) -> EdoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EdoStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            EdoStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (EdoStatus, String)>;
}

impl<T> IntoFfi<T> for tsp_edo::Result<T> {
    fn ffi(self) -> Result<T, (EdoStatus, String)> {
        self.map_err(|e| (EdoStatus::from(&e), e.to_string()))
    }
}

fn null(what: &str) -> (EdoStatus, String) {
    (EdoStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (EdoStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (EdoStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn edo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn edo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Defaults matching the library: unconstrained, dual offspring, budget
/// 100000, seed 0, trace every 100 evaluations.
#[no_mangle]
pub extern "C" fn edo_config_default(mu: usize, k: usize) -> EdoConfig {
    let d = EaConfig::new(mu, k);
    EdoConfig {
        mu,
        k,
        alpha: d.alpha,
        budget: d.budget,
        seed: d.seed,
        trace_every: d.trace_every,
        measure: EdoMeasure::Entropy,
        mutation: EdoMutation::Dual,
        selection: EdoSelection::Default,
        cut_bias: EdoCutBias::First,
    }
}

fn to_config(c: &EdoConfig) -> EaConfig {
    let mut cfg = EaConfig::new(c.mu, c.k);
    cfg.alpha = c.alpha;
    cfg.budget = c.budget;
    cfg.seed = c.seed;
    cfg.trace_every = c.trace_every;
    cfg.measure = match c.measure {
        EdoMeasure::Entropy => Measure::Entropy,
        EdoMeasure::Ed => Measure::Ed,
        EdoMeasure::Pd => Measure::Pd,
    };
    cfg.mutation = match c.mutation {
        EdoMutation::Classic => OffspringScheme::Classic,
        EdoMutation::Biased => OffspringScheme::Biased,
        EdoMutation::Dual => OffspringScheme::Dual,
    };
    cfg.selection = match c.selection {
        EdoSelection::Default => Selection::default_for(cfg.measure),
        EdoSelection::ParentPool => Selection::ParentPool,
        EdoSelection::FullPopulation => Selection::FullPopulation,
    };
    cfg.cut_bias = match c.cut_bias {
        EdoCutBias::First => CutBias::First,
        EdoCutBias::Both => CutBias::Both,
    };
    cfg
}

/// Closed-form entropy bounds for `n` nodes, `mu` tours and segment length `k`.
///
/// # Safety
/// `h_min` and `h_max` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn edo_bounds(n: usize, mu: usize, k: usize, h_min: *mut f64, h_max: *mut f64) -> EdoStatus {
    guard(|| {
        if h_min.is_null() || h_max.is_null() {
            return Err(null("output pointer"));
        }
        let b = entropy_bounds(n, mu, k).ffi()?;
        *h_min = b.h_min;
        *h_max = b.h_max;
        Ok(())
    })
}

fn boxed_instance(inst: Instance, opt: Option<OptimumInfo>, out: *mut *mut EdoInstance) {
    unsafe { *out = Box::into_raw(Box::new(EdoInstance { inst, opt })) };
}

/// Complete graph with unit weights; the identity tour is recorded as optimal.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn edo_instance_unit(n: usize, out: *mut *mut EdoInstance) -> EdoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = unit_graph(n).ffi()?;
        let opt = OptimumInfo::from_tour(Tour::identity(&g));
        boxed_instance(g, Some(opt), out);
        Ok(())
    })
}

/// Parses a TSPLIB instance from NUL-terminated text.
///
/// # Safety
/// `text` must be a valid C string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn edo_instance_from_tsplib(text: *const c_char, out: *mut *mut EdoInstance) -> EdoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = parse_tsplib(str_arg(text, "text")?).ffi()?;
        boxed_instance(inst, None, out);
        Ok(())
    })
}

/// Attaches an optimum from TSPLIB `.tour` text (or a bare cost).
///
/// # Safety
/// `inst` must come from this library and `text` be a valid C string.
#[no_mangle]
pub unsafe extern "C" fn edo_instance_set_optimum(inst: *mut EdoInstance, text: *const c_char) -> EdoStatus {
    guard(|| {
        let h = inst.as_mut().ok_or_else(|| null("instance"))?;
        h.opt = Some(parse_opt_tour(str_arg(text, "text")?, &h.inst).ffi()?);
        Ok(())
    })
}

/// Node count, or 0 for NULL.
///
/// # Safety
/// `inst` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn edo_instance_n(inst: *const EdoInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inst.n())
}

/// # Safety
/// `inst` must be NULL or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn edo_instance_free(inst: *mut EdoInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Runs the EA to completion.
///
/// # Safety
/// `inst` and `cfg` must be valid, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn edo_run(inst: *const EdoInstance, cfg: *const EdoConfig, out: *mut *mut EdoRun) -> EdoStatus {
    guard(|| {
        let h = inst.as_ref().ok_or_else(|| null("instance"))?;
        let c = cfg.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rec = ea::run(&h.inst, h.opt.as_ref(), &to_config(c)).ffi()?;
        *out = Box::into_raw(Box::new(EdoRun { rec }));
        Ok(())
    })
}

/// # Safety
/// `run` must come from [`edo_run`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn edo_run_summary(run: *const EdoRun, out: *mut EdoRunSummary) -> EdoStatus {
    guard(|| {
        let r = &run.as_ref().ok_or_else(|| null("run"))?.rec;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = EdoRunSummary {
            evals_used: r.evals_used,
            steps: r.steps,
            evals_to_hmax: r.evals_to_hmax.map_or(-1, |e| e as i64),
            final_h: r.final_h,
            final_normalised: r.final_normalised,
            final_score: r.final_score.value,
            h_min: r.bounds.h_min,
            h_max: r.bounds.h_max,
            feasible_offspring: r.feasible_offspring,
        };
        Ok(())
    })
}

/// Number of trace points, or 0 for NULL.
///
/// # Safety
/// `run` must be NULL or come from [`edo_run`].
#[no_mangle]
pub unsafe extern "C" fn edo_run_trace_len(run: *const EdoRun) -> usize {
    run.as_ref().map_or(0, |r| r.rec.trace.len())
}

/// # Safety
/// `run` must come from [`edo_run`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn edo_run_trace_point(run: *const EdoRun, idx: usize, out: *mut EdoTracePoint) -> EdoStatus {
    guard(|| {
        let r = &run.as_ref().ok_or_else(|| null("run"))?.rec;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let p = r.trace.get(idx).ok_or_else(|| {
            (EdoStatus::OutOfRange, format!("trace index {idx} out of {}", r.trace.len()))
        })?;
        *out = EdoTracePoint {
            eval: p.eval,
            h: p.h,
            h_normalised: p.h_normalised,
            f_min: p.f_min,
            f_max: p.f_max,
            c: p.c,
            feasible: p.feasible,
        };
        Ok(())
    })
}

/// Population size of the final population, or 0 for NULL.
///
/// # Safety
/// `run` must be NULL or come from [`edo_run`].
#[no_mangle]
pub unsafe extern "C" fn edo_run_mu(run: *const EdoRun) -> usize {
    run.as_ref().map_or(0, |r| r.rec.population.mu())
}

/// Copies tour `p` of the final population (0-based nodes) into `buf`, which
/// must hold `len >= n` entries, and its cost into `cost` if not NULL.
///
/// # Safety
/// `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn edo_run_tour(run: *const EdoRun, p: usize, buf: *mut usize, len: usize, cost: *mut f64) -> EdoStatus {
    guard(|| {
        let r = &run.as_ref().ok_or_else(|| null("run"))?.rec;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let tours = r.population.tours();
        let t = tours.get(p).ok_or_else(|| {
            (EdoStatus::OutOfRange, format!("tour index {p} out of {}", tours.len()))
        })?;
        if len < t.n() {
            return Err((EdoStatus::OutOfRange, format!("buffer holds {len} nodes, tour has {}", t.n())));
        }
        std::slice::from_raw_parts_mut(buf, t.n()).copy_from_slice(t.perm());
        if let Some(c) = cost.as_mut() {
            *c = t.cost();
        }
        Ok(())
    })
}

/// # Safety
/// `run` must be NULL or come from [`edo_run`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn edo_run_free(run: *mut EdoRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Entropy of `mu` tours over `n` nodes given row-major as `perms[mu * n]`.
///
/// # Safety
/// `perms` must be valid for `mu * n` reads and `h` for writes.
#[no_mangle]
pub unsafe extern "C" fn edo_population_entropy(
    perms: *const usize,
    n: usize,
    mu: usize,
    k: usize,
    h: *mut f64,
) -> EdoStatus {
    guard(|| {
        if perms.is_null() || h.is_null() {
            return Err(null("argument"));
        }
        if mu == 0 {
            return Err((EdoStatus::InvalidArgument, "mu must be at least 1".into()));
        }
        let g = unit_graph(n).ffi()?;
        let all = std::slice::from_raw_parts(perms, n * mu);
        let tours = all
            .chunks(n)
            .map(|c| Tour::new(c.to_vec(), &g))
            .collect::<tsp_edo::Result<Vec<_>>>()
            .ffi()?;
        let tab = build_table(&tours, k).ffi()?;
        *h = entropy(&tab, n, mu).ffi()?.h;
        Ok(())
    })
}
