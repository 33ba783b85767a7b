//! C ABI over `tempo2plus`.
//!
//! Problems and compilations are opaque handles owned by the caller and
//! released with their `_free` function. Every fallible call returns a
//! [`T2pStatus`]; on failure a message is available from
//! [`t2p_last_error`] on the same thread. Strings returned through out
//! parameters are NUL-terminated UTF-8 and must be released with
//! [`t2p_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tempo2plus::bridge::{lift_plan, lower_plan, LiftError};
use tempo2plus::compiler::{compile_with, CompilationArtifacts, CompileOptions};
use tempo2plus::model::{format_rational, parse_rational, Rational, TemporalProblem};
use tempo2plus::pddl::{load_temporal, parse_plus_plan, parse_temporal_plan, print_plus, print_plus_plan, print_temporal_plan};
use tempo2plus::plus::{validate_plus, PlusError, PlusOptions};
use tempo2plus::solver::{solve, SolveError, SolveOptions, SolveResult};
use tempo2plus::temporal::validate_temporal;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum T2pStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument is not valid UTF-8.
    InvalidUtf8 = 2,
    /// The domain or problem could not be read.
    ParseError = 3,
    /// A plan could not be read or names an unknown action.
    PlanError = 4,
    /// The time quantum is not a positive number.
    InvalidDelta = 5,
    /// Event completion did not terminate.
    Divergence = 6,
    /// A PDDL+ plan has no temporal counterpart.
    LiftError = 7,
    /// The search hit its node budget.
    BudgetExceeded = 8,
    /// An internal error; the library state is unaffected.
    Panic = 99,
}

/// Outcome of [`t2p_solve`] when it returns [`T2pStatus::Ok`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum T2pSolveResult {
    Found = 0,
    Exhausted = 1,
}

/// A grounded temporal planning problem.
pub struct T2pProblem {
    inner: TemporalProblem,
}

/// A PDDL+ compilation of a temporal problem.
pub struct T2pCompilation {
    inner: CompilationArtifacts,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(T2pStatus, String);

impl Failure {
    fn new(status: T2pStatus, message: impl ToString) -> Self {
        Failure(status, message.to_string())
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, records its error message and turns panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> T2pStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => T2pStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "internal error".into());
            set_last_error(message);
            T2pStatus::Panic
        }
    }
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure::new(T2pStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(ptr).to_str().map_err(|e| Failure::new(T2pStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn handle<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| Failure::new(T2pStatus::NullArgument, format!("{what} is null")))
}

unsafe fn out<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or_else(|| Failure::new(T2pStatus::NullArgument, format!("{what} is null")))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("NUL bytes removed").into_raw()
}

fn delta_of(text: &str) -> Result<Rational, Failure> {
    parse_rational(text)
        .filter(|d| *d > Rational::from_integer(0.into()))
        .ok_or_else(|| Failure::new(T2pStatus::InvalidDelta, format!("time quantum must be a positive number, got `{text}`")))
}

fn plus_failure(e: PlusError) -> Failure {
    let status = match e {
        PlusError::NonPositiveDelta(_) => T2pStatus::InvalidDelta,
        PlusError::UnknownAction(_) => T2pStatus::PlanError,
        PlusError::Divergence { .. } => T2pStatus::Divergence,
    };
    Failure::new(status, e)
}

fn lift_failure(e: LiftError) -> Failure {
    let status = match e {
        LiftError::UnknownAction(_) => T2pStatus::PlanError,
        LiftError::UnmatchedStart { .. } => T2pStatus::LiftError,
    };
    Failure::new(status, e)
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn t2p_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn t2p_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn t2p_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and grounds a temporal domain and problem given as PDDL text.
///
/// # Safety
/// `domain` and `problem` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn t2p_problem_load(
    domain: *const c_char,
    problem: *const c_char,
    out_problem: *mut *mut T2pProblem,
) -> T2pStatus {
    guard(|| {
        let slot = out(out_problem, "out_problem")?;
        *slot = ptr::null_mut();
        let p = load_temporal(text(domain, "domain")?, text(problem, "problem")?)
            .map_err(|e| Failure::new(T2pStatus::ParseError, e))?;
        *slot = Box::into_raw(Box::new(T2pProblem { inner: p }));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a live handle from [`t2p_problem_load`].
#[no_mangle]
pub unsafe extern "C" fn t2p_problem_free(p: *mut T2pProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Counts of the problem's ground elements.
///
/// # Safety
/// `p` must be a live problem handle; each out pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn t2p_problem_sizes(
    p: *const T2pProblem,
    out_fluents: *mut usize,
    out_instant_actions: *mut usize,
    out_durative_actions: *mut usize,
) -> T2pStatus {
    guard(|| {
        let p = &handle(p, "problem")?.inner;
        for (slot, value) in [
            (out_fluents, p.fluents.len()),
            (out_instant_actions, p.instant_actions.len()),
            (out_durative_actions, p.durative_actions.len()),
        ] {
            if let Some(slot) = slot.as_mut() {
                *slot = value;
            }
        }
        Ok(())
    })
}

/// Compiles a problem into PDDL+. The compilation keeps its own copy of the
/// problem, so `p` may be freed afterwards.
///
/// # Safety
/// `p` must be a live problem handle; `out_compilation` must be writable.
#[no_mangle]
pub unsafe extern "C" fn t2p_compile(
    p: *const T2pProblem,
    expire_events: bool,
    out_compilation: *mut *mut T2pCompilation,
) -> T2pStatus {
    guard(|| {
        let slot = out(out_compilation, "out_compilation")?;
        *slot = ptr::null_mut();
        let p = &handle(p, "problem")?.inner;
        let c = compile_with(p, &CompileOptions { expire_events });
        *slot = Box::into_raw(Box::new(T2pCompilation { inner: c }));
        Ok(())
    })
}

/// # Safety
/// `c` must be null or a live handle from [`t2p_compile`].
#[no_mangle]
pub unsafe extern "C" fn t2p_compilation_free(c: *mut T2pCompilation) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// The compiled PDDL+ domain and problem text.
///
/// # Safety
/// `c` must be a live compilation handle; both out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn t2p_compilation_pddl(
    c: *const T2pCompilation,
    out_domain: *mut *mut c_char,
    out_problem: *mut *mut c_char,
) -> T2pStatus {
    guard(|| {
        let (d, p) = (out(out_domain, "out_domain")?, out(out_problem, "out_problem")?);
        let (domain, problem) = print_plus(&handle(c, "compilation")?.inner.result);
        *d = c_string(domain);
        *p = c_string(problem);
        Ok(())
    })
}

/// JSON map from compiled element and fluent names to their roles.
///
/// # Safety
/// `c` must be a live compilation handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn t2p_compilation_name_map(c: *const T2pCompilation, out_json: *mut *mut c_char) -> T2pStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        *slot = c_string(handle(c, "compilation")?.inner.name_map_json().to_string());
        Ok(())
    })
}

/// Validates a temporal plan (`t: (action args) [d]` lines). `out_report`
/// may be null; otherwise it receives a JSON report.
///
/// # Safety
/// `p` must be a live problem handle, `plan` a NUL-terminated string and
/// `out_valid` writable.
#[no_mangle]
pub unsafe extern "C" fn t2p_validate_temporal(
    p: *const T2pProblem,
    plan: *const c_char,
    out_valid: *mut bool,
    out_report: *mut *mut c_char,
) -> T2pStatus {
    guard(|| {
        let valid = out(out_valid, "out_valid")?;
        let p = &handle(p, "problem")?.inner;
        let plan = parse_temporal_plan(text(plan, "plan")?).map_err(|e| Failure::new(T2pStatus::PlanError, e))?;
        let report = validate_temporal(p, &plan).map_err(|e| Failure::new(T2pStatus::PlanError, e))?;
        *valid = report.valid;
        if let Some(slot) = out_report.as_mut() {
            *slot = c_string(report.to_json(p, false).to_string());
        }
        Ok(())
    })
}

/// Validates a PDDL+ plan (with a `;; makespan t` line) against the
/// compilation under the discretized semantics with quantum `delta`.
///
/// # Safety
/// `c` must be a live compilation handle, `plan` and `delta` NUL-terminated
/// strings and `out_valid` writable.
#[no_mangle]
pub unsafe extern "C" fn t2p_validate_plus(
    c: *const T2pCompilation,
    plan: *const c_char,
    delta: *const c_char,
    out_valid: *mut bool,
    out_report: *mut *mut c_char,
) -> T2pStatus {
    guard(|| {
        let valid = out(out_valid, "out_valid")?;
        let q = &handle(c, "compilation")?.inner.result;
        let plan = parse_plus_plan(text(plan, "plan")?).map_err(|e| Failure::new(T2pStatus::PlanError, e))?;
        let delta = delta_of(text(delta, "delta")?)?;
        let report = validate_plus(q, &plan, &PlusOptions::with_delta(delta)).map_err(plus_failure)?;
        *valid = report.valid;
        if let Some(slot) = out_report.as_mut() {
            *slot = c_string(report.to_json(q, false).to_string());
        }
        Ok(())
    })
}

/// Translates a temporal plan into a PDDL+ plan and the quantum that
/// validates it. Invalid input plans are still lowered.
///
/// # Safety
/// `c` must be a live compilation handle, `plan` a NUL-terminated string and
/// both out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn t2p_lower(
    c: *const T2pCompilation,
    plan: *const c_char,
    out_plan: *mut *mut c_char,
    out_delta: *mut *mut c_char,
) -> T2pStatus {
    guard(|| {
        let (p_slot, d_slot) = (out(out_plan, "out_plan")?, out(out_delta, "out_delta")?);
        let c = &handle(c, "compilation")?.inner;
        let plan = parse_temporal_plan(text(plan, "plan")?).map_err(|e| Failure::new(T2pStatus::PlanError, e))?;
        let lowered = lower_plan(&c.source, c, &plan).map_err(|e| Failure::new(T2pStatus::PlanError, e))?;
        *p_slot = c_string(print_plus_plan(&lowered.plan));
        *d_slot = c_string(format_rational(&lowered.delta.delta));
        Ok(())
    })
}

/// Translates a PDDL+ plan of the compilation back into a temporal plan.
///
/// # Safety
/// `c` must be a live compilation handle, `plan` a NUL-terminated string and
/// `out_plan` writable.
#[no_mangle]
pub unsafe extern "C" fn t2p_lift(c: *const T2pCompilation, plan: *const c_char, out_plan: *mut *mut c_char) -> T2pStatus {
    guard(|| {
        let slot = out(out_plan, "out_plan")?;
        let c = &handle(c, "compilation")?.inner;
        let plan = parse_plus_plan(text(plan, "plan")?).map_err(|e| Failure::new(T2pStatus::PlanError, e))?;
        let lifted = lift_plan(c, &plan).map_err(lift_failure)?;
        *slot = c_string(print_temporal_plan(&lifted));
        Ok(())
    })
}

/// Searches the compilation for a plan of at most `horizon` steps of
/// `delta`. `node_budget` 0 selects the default budget. On
/// [`T2pSolveResult::Found`], `out_plan` receives the PDDL+ plan and
/// `out_temporal_plan` (if not null) its temporal counterpart; otherwise
/// both are set to null.
///
/// # Safety
/// `c` must be a live compilation handle, `delta` a NUL-terminated string,
/// `out_result` and `out_plan` writable.
#[no_mangle]
pub unsafe extern "C" fn t2p_solve(
    c: *const T2pCompilation,
    delta: *const c_char,
    horizon: usize,
    node_budget: usize,
    out_result: *mut T2pSolveResult,
    out_plan: *mut *mut c_char,
    out_temporal_plan: *mut *mut c_char,
) -> T2pStatus {
    guard(|| {
        let (result, p_slot) = (out(out_result, "out_result")?, out(out_plan, "out_plan")?);
        *p_slot = ptr::null_mut();
        let mut t_slot = out_temporal_plan.as_mut();
        if let Some(t) = t_slot.as_deref_mut() {
            *t = ptr::null_mut();
        }
        let c = &handle(c, "compilation")?.inner;
        let mut options = SolveOptions::new(delta_of(text(delta, "delta")?)?, horizon);
        if node_budget > 0 {
            options.node_budget = node_budget;
        }
        let outcome = solve(&c.result, &options).map_err(|e| match e {
            SolveError::Plus(e) => plus_failure(e),
            e @ SolveError::Unsound(_) => Failure::new(T2pStatus::Panic, e),
        })?;
        match outcome.result {
            SolveResult::Found(plan) => {
                let lifted = lift_plan(c, &plan).map_err(|e| Failure::new(T2pStatus::LiftError, e))?;
                *result = T2pSolveResult::Found;
                *p_slot = c_string(print_plus_plan(&plan));
                if let Some(t) = t_slot {
                    *t = c_string(print_temporal_plan(&lifted));
                }
                Ok(())
            }
            SolveResult::Exhausted => {
                *result = T2pSolveResult::Exhausted;
                Ok(())
            }
            SolveResult::BudgetExceeded => Err(Failure::new(
                T2pStatus::BudgetExceeded,
                format!("node budget of {} exceeded", options.node_budget),
            )),
        }
    })
}
