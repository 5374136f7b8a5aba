//! C interface to the qmoves simulation, optimizer and archive reader.
//!
//! Every function returns a [`QmStatus`]. On failure the message of the most
//! recent error on the calling thread is available from [`qm_last_error`].
//! Handles are opaque and must be released with their `_free` function.
//! Controls cross the boundary as row-major `n_params × n_t` arrays of doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use qmoves::grape::{self, GrapeConfig};
use qmoves::optim::{StopSignal, Termination};
use qmoves::problems::{evaluate_fidelity, make_problem_ms, ControlVector, Level, ProblemSpec};
use qmoves::store::Archive;
use qmoves::Error;

/// Result codes of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BoundViolation = 3,
    Io = 4,
    Archive = 5,
    Numerical = 6,
    Panic = 7,
}

/// A state-transfer problem at a fixed duration.
pub struct QmProblem {
    inner: ProblemSpec,
}

/// A loaded solution archive.
pub struct QmArchive {
    inner: Archive,
}

/// Outcome of a GRAPE run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QmOptimizeResult {
    pub fidelity: f64,
    pub iterations: usize,
    pub wall_s: f64,
    /// 0 target fidelity reached, 1 step converged, 2 budget exhausted, 3 stopped.
    pub termination: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(QmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::BoundViolation { .. } | Error::EndpointViolation { .. } => QmStatus::BoundViolation,
            Error::Io(_) => QmStatus::Io,
            Error::Archive(_) | Error::Checksum | Error::Json(_) => QmStatus::Archive,
            Error::NonFinite | Error::NoConvergence(_) => QmStatus::Numerical,
            _ => QmStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(QmStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            QmStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(QmStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn problem_arg<'a>(p: *const QmProblem) -> Result<&'a ProblemSpec, Failure> {
    p.as_ref().map(|p| &p.inner).ok_or_else(|| null("problem"))
}

unsafe fn archive_arg<'a>(p: *const QmArchive) -> Result<&'a Archive, Failure> {
    p.as_ref().map(|a| &a.inner).ok_or_else(|| null("archive"))
}

fn expected_len(problem: &ProblemSpec) -> usize {
    problem.n_params() * problem.n_t
}

unsafe fn control_arg(problem: &ProblemSpec, values: *const f64, len: usize) -> Result<ControlVector, Failure> {
    if values.is_null() {
        return Err(null("values"));
    }
    if len != expected_len(problem) {
        return Err(Failure(
            QmStatus::InvalidArgument,
            format!("expected {} values, got {len}", expected_len(problem)),
        ));
    }
    let flat = std::slice::from_raw_parts(values, len);
    let series = flat.chunks(problem.n_t).map(<[f64]>::to_vec).collect();
    Ok(ControlVector::new(problem.dt, series, problem.bounds.clone(), problem.endpoints.clone())?)
}

/// Message of the last failure on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn qm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates the problem of `level` ("bhw", "splitting" or "shakeup") at `duration_ms`.
///
/// # Safety
/// `level` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qm_problem_new(level: *const c_char, duration_ms: f64, out: *mut *mut QmProblem) -> QmStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = std::ptr::null_mut();
        let level: Level = str_arg(level, "level")?.parse()?;
        let inner = make_problem_ms(level, duration_ms)?;
        *out = Box::into_raw(Box::new(QmProblem { inner }));
        Ok(())
    })
}

/// # Safety
/// `problem` must come from [`qm_problem_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qm_problem_free(problem: *mut QmProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Writes the number of time samples, control parameters and grid points, and δt in simulation units.
///
/// # Safety
/// `problem` must be a live handle; output pointers may be null to skip them.
#[no_mangle]
pub unsafe extern "C" fn qm_problem_shape(
    problem: *const QmProblem,
    n_t: *mut usize,
    n_params: *mut usize,
    n_x: *mut usize,
    dt: *mut f64,
) -> QmStatus {
    guard(|| {
        let p = problem_arg(problem)?;
        if let Some(v) = n_t.as_mut() {
            *v = p.n_t;
        }
        if let Some(v) = n_params.as_mut() {
            *v = p.n_params();
        }
        if let Some(v) = n_x.as_mut() {
            *v = p.grid.len();
        }
        if let Some(v) = dt.as_mut() {
            *v = p.dt;
        }
        Ok(())
    })
}

/// Bounds and the fixed first and last values of control parameter `param`.
///
/// # Safety
/// `problem` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qm_problem_bounds(
    problem: *const QmProblem,
    param: usize,
    lo: *mut f64,
    hi: *mut f64,
    start: *mut f64,
    end: *mut f64,
) -> QmStatus {
    guard(|| {
        let p = problem_arg(problem)?;
        let (l, h) = *p
            .bounds
            .get(param)
            .ok_or_else(|| Failure(QmStatus::InvalidArgument, format!("parameter {param} out of range")))?;
        *out_arg(lo, "lo")? = l;
        *out_arg(hi, "hi")? = h;
        *out_arg(start, "start")? = p.endpoints[param].0;
        *out_arg(end, "end")? = p.endpoints[param].1;
        Ok(())
    })
}

/// Fidelity of the control `values` (row-major, `len = n_params·n_t`).
///
/// # Safety
/// `values` must point to `len` doubles and `fidelity` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qm_evaluate_fidelity(
    problem: *const QmProblem,
    values: *const f64,
    len: usize,
    fidelity: *mut f64,
) -> QmStatus {
    guard(|| {
        let p = problem_arg(problem)?;
        let c = control_arg(p, values, len)?;
        *out_arg(fidelity, "fidelity")? = evaluate_fidelity(p, &c)?;
        Ok(())
    })
}

/// Runs GRAPE from `seed` and writes the optimized control to `out_values`.
///
/// A non-positive `wall_budget` keeps the default; `max_iterations = 0` means no cap.
///
/// # Safety
/// `seed` and `out_values` must each hold `len` doubles; `result` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qm_grape_optimize(
    problem: *const QmProblem,
    seed: *const f64,
    len: usize,
    max_iterations: usize,
    wall_budget: f64,
    out_values: *mut f64,
    result: *mut QmOptimizeResult,
) -> QmStatus {
    guard(|| {
        let p = problem_arg(problem)?;
        let c = control_arg(p, seed, len)?;
        if out_values.is_null() {
            return Err(null("out_values"));
        }
        let result = out_arg(result, "result")?;
        let mut config = GrapeConfig::default();
        if wall_budget > 0.0 {
            config.wall_budget = wall_budget;
        }
        config.max_iterations = (max_iterations > 0).then_some(max_iterations);
        let r = grape::optimize(p, &c, &config, &StopSignal::new())?;
        let out = std::slice::from_raw_parts_mut(out_values, len);
        for (chunk, series) in out.chunks_mut(p.n_t).zip(r.control.values()) {
            chunk.copy_from_slice(series);
        }
        *result = QmOptimizeResult {
            fidelity: r.fidelity,
            iterations: r.iterations,
            wall_s: r.wall_time,
            termination: match r.termination {
                Termination::FidelityReached => 0,
                Termination::StepConverged => 1,
                Termination::BudgetExhausted => 2,
                Termination::UserStopped => 3,
            },
        };
        Ok(())
    })
}

/// Loads and verifies an archive file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qm_archive_load(path: *const c_char, out: *mut *mut QmArchive) -> QmStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = std::ptr::null_mut();
        let inner = Archive::load(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(QmArchive { inner }));
        Ok(())
    })
}

/// # Safety
/// `archive` must come from [`qm_archive_load`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qm_archive_free(archive: *mut QmArchive) {
    if !archive.is_null() {
        drop(Box::from_raw(archive));
    }
}

/// Number of records.
///
/// # Safety
/// `archive` must be a live handle and `len` valid.
#[no_mangle]
pub unsafe extern "C" fn qm_archive_len(archive: *const QmArchive, len: *mut usize) -> QmStatus {
    guard(|| {
        *out_arg(len, "len")? = archive_arg(archive)?.len();
        Ok(())
    })
}

/// Duration in ms and fidelity of record `index`.
///
/// # Safety
/// `archive` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qm_archive_record(
    archive: *const QmArchive,
    index: usize,
    duration_ms: *mut f64,
    fidelity: *mut f64,
) -> QmStatus {
    guard(|| {
        let a = archive_arg(archive)?;
        let r = a
            .records()
            .get(index)
            .ok_or_else(|| Failure(QmStatus::InvalidArgument, format!("record {index} out of range")))?;
        *out_arg(duration_ms, "duration_ms")? = r.duration_ms;
        *out_arg(fidelity, "fidelity")? = r.fidelity;
        Ok(())
    })
}
