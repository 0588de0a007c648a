//! C interface to the sparse-pd solvers.
//!
//! Handles are opaque and owned by the caller; every `*_new`/`*_load`
//! result must be released with the matching `*_free`. Functions return an
//! [`SpdStatus`]; on failure `spd_last_error` describes the cause for the
//! calling thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use sparse_pd::bench::generator::{generate_file, ProblemFile};
use sparse_pd::config::SolverConfig;
use sparse_pd::problem::{Family, FnObjective, ProblemInstance};
use sparse_pd::record::{RunRecord, Termination};
use sparse_pd::sets::{SetDescriptor, SetKind};
use sparse_pd::solver::Solver;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidProblem = 3,
    Config = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpdSetKind {
    FullSpace = 0,
    NonnegOrthant = 1,
    Simplex = 2,
    UnitSum = 3,
    /// `a` = p, `b` = radius.
    LpBall = 4,
    /// `a` = lower, `b` = upper.
    Box = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpdTermination {
    Converged = 0,
    Budget = 1,
    Stagnation = 2,
    Failed = 3,
}

impl From<Termination> for SpdTermination {
    fn from(t: Termination) -> Self {
        match t {
            Termination::Converged => SpdTermination::Converged,
            Termination::Budget => SpdTermination::Budget,
            Termination::Stagnation => SpdTermination::Stagnation,
            Termination::Failed => SpdTermination::Failed,
        }
    }
}

pub struct SpdConfig(SolverConfig);
pub struct SpdProblem(ProblemInstance);
pub struct SpdRecord(RunRecord);

/// Objective value at `x` (length `n`).
pub type SpdValueFn = Option<unsafe extern "C" fn(x: *const f64, n: usize, user: *mut c_void) -> f64>;
/// Writes the gradient at `x` into `out` (both length `n`).
pub type SpdGradientFn = Option<unsafe extern "C" fn(x: *const f64, n: usize, out: *mut f64, user: *mut c_void)>;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

fn fail(status: SpdStatus, msg: impl Into<String>) -> SpdStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> SpdStatus) -> SpdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(SpdStatus::Panic, "internal panic"),
    }
}

fn status_of(e: &sparse_pd::error::Error) -> SpdStatus {
    use sparse_pd::error::Error;
    match e {
        Error::Config(_) => SpdStatus::Config,
        Error::Io(_) | Error::Json(_) | Error::Dataset(_) => SpdStatus::Io,
        Error::Usage(_) => SpdStatus::InvalidArgument,
        Error::Set(_) | Error::Problem(_) => SpdStatus::InvalidProblem,
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, SpdStatus> {
    if p.is_null() {
        return Err(fail(SpdStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SpdStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length.
#[no_mangle]
pub unsafe extern "C" fn spd_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && len > 0 {
            let k = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, k);
            *buf.add(k) = 0;
        }
        bytes.len()
    })
}

/// Static NUL-terminated version string.
#[no_mangle]
pub extern "C" fn spd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[no_mangle]
pub extern "C" fn spd_config_new() -> *mut SpdConfig {
    Box::into_raw(Box::new(SpdConfig(SolverConfig::default())))
}

#[no_mangle]
pub unsafe extern "C" fn spd_config_free(cfg: *mut SpdConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Sets one configuration key, using the same names as the key = value files.
#[no_mangle]
pub unsafe extern "C" fn spd_config_set(cfg: *mut SpdConfig, key: *const c_char, value: *const c_char) -> SpdStatus {
    guard(|| {
        let Some(cfg) = cfg.as_mut() else {
            return fail(SpdStatus::NullPointer, "config is null");
        };
        let (key, value) = match (str_arg(key, "key"), str_arg(value, "value")) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let mut next = cfg.0.clone();
        if let Err(e) = next.set(key, value).and_then(|_| next.validate()) {
            return fail(SpdStatus::Config, e.to_string());
        }
        cfg.0 = next;
        SpdStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn spd_config_load(path: *const c_char, out: *mut *mut SpdConfig) -> SpdStatus {
    guard(|| {
        if out.is_null() {
            return fail(SpdStatus::NullPointer, "out is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match SolverConfig::from_kv_file(Path::new(path)) {
            Ok(c) => {
                put(out, SpdConfig(c));
                SpdStatus::Ok
            }
            Err(e) => fail(SpdStatus::Config, e.to_string()),
        }
    })
}

fn make_set(kind: SpdSetKind, a: f64, b: f64) -> Result<SetDescriptor, SpdStatus> {
    let kind = match kind {
        SpdSetKind::FullSpace => SetKind::FullSpace,
        SpdSetKind::NonnegOrthant => SetKind::NonnegOrthant,
        SpdSetKind::Simplex => SetKind::Simplex,
        SpdSetKind::UnitSum => SetKind::UnitSum,
        SpdSetKind::LpBall => SetKind::LpBall { p: a, radius: b },
        SpdSetKind::Box => SetKind::Box { lower: a, upper: b },
    };
    SetDescriptor::new(kind).map_err(|e| fail(SpdStatus::InvalidArgument, e.to_string()))
}

/// Benchmark instance from a seed and a family name (`portfolio`, ...).
#[no_mangle]
pub unsafe extern "C" fn spd_problem_generate(seed: u64, family: *const c_char, out: *mut *mut SpdProblem) -> SpdStatus {
    guard(|| {
        if out.is_null() {
            return fail(SpdStatus::NullPointer, "out is null");
        }
        let family: Family = match str_arg(family, "family").map(str::parse) {
            Ok(Ok(f)) => f,
            Ok(Err(e)) => return fail(SpdStatus::InvalidArgument, e),
            Err(s) => return s,
        };
        match generate_file(seed, family, format!("{family}-{seed}")).and_then(|f| f.instance()) {
            Ok(p) => {
                put(out, SpdProblem(p));
                SpdStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Problem JSON file as written by `sparse-pd generate`.
#[no_mangle]
pub unsafe extern "C" fn spd_problem_load(path: *const c_char, out: *mut *mut SpdProblem) -> SpdStatus {
    guard(|| {
        if out.is_null() {
            return fail(SpdStatus::NullPointer, "out is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match ProblemFile::load(Path::new(path)).and_then(|f| f.instance()) {
            Ok(p) => {
                put(out, SpdProblem(p));
                SpdStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

struct UserData(*mut c_void);
// The caller promises the callbacks may be invoked from any thread.
unsafe impl Send for UserData {}
unsafe impl Sync for UserData {}

/// Problem defined by C callbacks. `x0` (length `n`) is copied. The
/// callbacks and `user` must stay valid, and be callable from any thread,
/// until the problem is freed.
#[no_mangle]
pub unsafe extern "C" fn spd_problem_from_callbacks(
    n: usize,
    s: usize,
    set: SpdSetKind,
    set_a: f64,
    set_b: f64,
    x0: *const f64,
    value: SpdValueFn,
    gradient: SpdGradientFn,
    user: *mut c_void,
    out: *mut *mut SpdProblem,
) -> SpdStatus {
    guard(|| {
        if out.is_null() || x0.is_null() {
            return fail(SpdStatus::NullPointer, "x0 or out is null");
        }
        let (Some(vf), Some(gf)) = (value, gradient) else {
            return fail(SpdStatus::NullPointer, "callback is null");
        };
        if n == 0 {
            return fail(SpdStatus::InvalidArgument, "n must be positive");
        }
        let set = match make_set(set, set_a, set_b) {
            Ok(s) => s,
            Err(st) => return st,
        };
        let x0 = std::slice::from_raw_parts(x0, n).to_vec();
        let ud = Arc::new(UserData(user));
        let ud2 = ud.clone();
        let obj = FnObjective::new(
            n,
            move |x: &[f64]| vf(x.as_ptr(), x.len(), ud.0),
            move |x: &[f64], g: &mut [f64]| gf(x.as_ptr(), x.len(), g.as_mut_ptr(), ud2.0),
        );
        match ProblemInstance::new("c-callback", set, s, x0, Arc::new(obj)) {
            Ok(p) => {
                put(out, SpdProblem(p));
                SpdStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn spd_problem_free(p: *mut SpdProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Dimension `n`, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn spd_problem_dim(p: *const SpdProblem) -> usize {
    p.as_ref().map_or(0, |p| p.0.n)
}

#[no_mangle]
pub unsafe extern "C" fn spd_problem_sparsity(p: *const SpdProblem) -> usize {
    p.as_ref().map_or(0, |p| p.0.s)
}

/// Runs `solver` (`pdqn`, `iht`, `pss`, `gss`, `bfs`, `zcws`). A null
/// `cfg` uses the defaults.
#[no_mangle]
pub unsafe extern "C" fn spd_solve(
    p: *const SpdProblem,
    cfg: *const SpdConfig,
    solver: *const c_char,
    out: *mut *mut SpdRecord,
) -> SpdStatus {
    guard(|| {
        let Some(p) = p.as_ref() else {
            return fail(SpdStatus::NullPointer, "problem is null");
        };
        if out.is_null() {
            return fail(SpdStatus::NullPointer, "out is null");
        }
        let solver: Solver = match str_arg(solver, "solver").map(str::parse) {
            Ok(Ok(s)) => s,
            Ok(Err(e)) => return fail(SpdStatus::InvalidArgument, e),
            Err(st) => return st,
        };
        let default = SolverConfig::default();
        let cfg = cfg.as_ref().map_or(&default, |c| &c.0);
        let mut rec = solver.solve(&p.0, cfg);
        rec.finalize(rec.f_best, cfg.nf2g_max, cfg.sec_max);
        put(out, SpdRecord(rec));
        SpdStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn spd_record_free(r: *mut SpdRecord) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn spd_record_f_best(r: *const SpdRecord) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.f_best)
}

/// Strong-stationarity residual of the best point; NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn spd_record_rgs(r: *const SpdRecord) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.rgs_best)
}

/// Writes `nf`, `ng` and `nf + 2 ng`; any output pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn spd_record_counts(r: *const SpdRecord, nf: *mut u64, ng: *mut u64, nf2g: *mut u64) -> SpdStatus {
    let Some(r) = r.as_ref() else {
        return fail(SpdStatus::NullPointer, "record is null");
    };
    if let Some(v) = nf.as_mut() {
        *v = r.0.nf;
    }
    if let Some(v) = ng.as_mut() {
        *v = r.0.ng;
    }
    if let Some(v) = nf2g.as_mut() {
        *v = r.0.nf2g;
    }
    SpdStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn spd_record_termination(r: *const SpdRecord) -> SpdTermination {
    r.as_ref().map_or(SpdTermination::Failed, |r| r.0.termination.into())
}

/// Copies the best point into `buf`, which must hold `n` entries.
#[no_mangle]
pub unsafe extern "C" fn spd_record_x_best(r: *const SpdRecord, buf: *mut f64, len: usize) -> SpdStatus {
    let Some(r) = r.as_ref() else {
        return fail(SpdStatus::NullPointer, "record is null");
    };
    if buf.is_null() {
        return fail(SpdStatus::NullPointer, "buffer is null");
    }
    let x = &r.0.x_best;
    if len < x.len() {
        return fail(SpdStatus::BufferTooSmall, format!("need {} entries, got {len}", x.len()));
    }
    ptr::copy_nonoverlapping(x.as_ptr(), buf, x.len());
    SpdStatus::Ok
}

/// Record as a JSON string; release with `spd_string_free`. Null on error.
#[no_mangle]
pub unsafe extern "C" fn spd_record_json(r: *const SpdRecord) -> *mut c_char {
    let Some(r) = r.as_ref() else {
        set_error("record is null");
        return ptr::null_mut();
    };
    match serde_json::to_string(&r.0).map(CString::new) {
        Ok(Ok(s)) => s.into_raw(),
        _ => {
            set_error("cannot serialize record");
            ptr::null_mut()
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn spd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
