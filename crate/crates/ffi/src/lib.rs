//! C ABI over `stsp-core`.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free` function. Every fallible call returns an [`StspStatus`];
//! on failure, [`stsp_last_error`] describes the cause for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use stsp_core::bnb::{BnbOptions, MilpStatus};
use stsp_core::formulations::{BuildOptions, FormulationTag};
use stsp_core::instance::Instance;
use stsp_core::oracle::{brute_force_stsp, verify_walk};
use stsp_core::solve::{solve_instance, SolveOptions, SolveOutcome};
use stsp_core::Error;

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StspStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    MissingPayload = 5,
    Infeasible = 6,
    BudgetExhausted = 7,
    SizeGuard = 8,
    Solver = 9,
    Io = 10,
    /// A Rust panic was caught at the boundary.
    Internal = 11,
}

/// Parsed problem instance.
pub struct StspInstance(Instance);

/// Outcome of a solve: status, objective and, when found, the walk.
pub struct StspSolution(SolveOutcome);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn code_of(err: &Error) -> StspStatus {
    match err {
        Error::Syntax { .. } | Error::Mps { .. } | Error::Json(_) => StspStatus::Parse,
        Error::InvalidInstance(_) | Error::InvalidArgument(_) | Error::Model(_) => StspStatus::InvalidArgument,
        Error::MissingPayload(_) => StspStatus::MissingPayload,
        Error::Infeasible(_) => StspStatus::Infeasible,
        Error::SizeGuard(_) => StspStatus::SizeGuard,
        Error::Io(_) => StspStatus::Io,
        _ => StspStatus::Solver,
    }
}

fn fail(err: Error) -> StspStatus {
    let code = code_of(&err);
    set_error(err.to_string());
    code
}

/// Runs `f`, turning panics into [`StspStatus::Internal`].
fn guard(f: impl FnOnce() -> StspStatus) -> StspStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic".into());
            StspStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, StspStatus> {
    if p.is_null() {
        set_error("null string argument".into());
        return Err(StspStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".into());
        StspStatus::InvalidUtf8
    })
}

fn null_arg() -> StspStatus {
    set_error("null handle or output pointer".into());
    StspStatus::NullPointer
}

/// Message for the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn stsp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses instance text and stores a new handle in `*out`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn stsp_instance_parse(text: *const c_char, out: *mut *mut StspInstance) -> StspStatus {
    guard(|| {
        if out.is_null() {
            return null_arg();
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(c) => return c,
        };
        match Instance::parse(text) {
            Ok(inst) => {
                *out = Box::into_raw(Box::new(StspInstance(inst)));
                StspStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `inst` must come from [`stsp_instance_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn stsp_instance_free(inst: *mut StspInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stsp_instance_node_count(inst: *const StspInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.node_count())
}

/// Edge count, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stsp_instance_edge_count(inst: *const StspInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.edge_count())
}

/// Solves `inst` with the formulation named by `tag` (for example `"SCF"`).
/// `node_limit == 0` and `time_limit_secs <= 0` mean unlimited. A handle is
/// stored in `*out` for optimal and budget-exhausted runs; the return value
/// is `Ok` or `BudgetExhausted` respectively.
///
/// # Safety
/// `inst` must be a live handle, `tag` a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stsp_solve(
    inst: *const StspInstance,
    tag: *const c_char,
    node_limit: u64,
    time_limit_secs: f64,
    out: *mut *mut StspSolution,
) -> StspStatus {
    guard(|| {
        let (Some(inst), false) = (inst.as_ref(), out.is_null()) else {
            return null_arg();
        };
        let tag: FormulationTag = match read_str(tag).map(str::parse) {
            Ok(Ok(t)) => t,
            Ok(Err(e)) => return fail(e),
            Err(c) => return c,
        };
        let opts = SolveOptions {
            build: BuildOptions::default(),
            bnb: BnbOptions {
                node_limit: (node_limit > 0).then_some(node_limit as usize),
                time_limit: (time_limit_secs > 0.0 && time_limit_secs.is_finite())
                    .then(|| Duration::from_secs_f64(time_limit_secs)),
                ..BnbOptions::default()
            },
        };
        match solve_instance(&inst.0, tag, &opts) {
            Ok(outcome) => {
                let code = match outcome.status {
                    MilpStatus::Optimal => StspStatus::Ok,
                    MilpStatus::BudgetExhausted => StspStatus::BudgetExhausted,
                    MilpStatus::Infeasible => {
                        set_error(format!("{tag} has no feasible solution"));
                        return StspStatus::Infeasible;
                    }
                    MilpStatus::Unbounded => {
                        set_error(format!("{tag} is unbounded"));
                        return StspStatus::Solver;
                    }
                };
                if code == StspStatus::BudgetExhausted {
                    set_error("solver budget exhausted".into());
                }
                *out = Box::into_raw(Box::new(StspSolution(outcome)));
                code
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `sol` must come from [`stsp_solve`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn stsp_solution_free(sol: *mut StspSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Objective of the incumbent. Fails with `Infeasible` when there is none.
///
/// # Safety
/// `sol` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stsp_solution_objective(sol: *const StspSolution, out: *mut f64) -> StspStatus {
    let (Some(sol), false) = (sol.as_ref(), out.is_null()) else {
        return null_arg();
    };
    match sol.0.objective {
        Some(v) => {
            *out = v;
            StspStatus::Ok
        }
        None => {
            set_error("no incumbent".into());
            StspStatus::Infeasible
        }
    }
}

/// Copies the closed walk (1-based node labels) into `buf` and returns its
/// full length; nothing is written past `cap`. Call with `cap == 0` to size
/// the buffer.
///
/// # Safety
/// `sol` must be a live handle; `buf` must hold `cap` entries when `cap > 0`.
#[no_mangle]
pub unsafe extern "C" fn stsp_solution_walk(sol: *const StspSolution, buf: *mut usize, cap: usize) -> usize {
    let Some(walk) = sol.as_ref().and_then(|s| s.0.solution.as_ref()).map(|w| &w.walk) else {
        return 0;
    };
    if !buf.is_null() {
        ptr::copy_nonoverlapping(walk.as_ptr(), buf, walk.len().min(cap));
    }
    walk.len()
}

/// Copies edge multiplicities, in instance edge order, like [`stsp_solution_walk`].
///
/// # Safety
/// As for [`stsp_solution_walk`].
#[no_mangle]
pub unsafe extern "C" fn stsp_solution_edge_uses(sol: *const StspSolution, buf: *mut u32, cap: usize) -> usize {
    let Some(uses) = sol.as_ref().and_then(|s| s.0.solution.as_ref()).map(|w| &w.edge_uses) else {
        return 0;
    };
    if !buf.is_null() {
        ptr::copy_nonoverlapping(uses.as_ptr(), buf, uses.len().min(cap));
    }
    uses.len()
}

/// The solve outcome as JSON; release with [`stsp_string_free`]. Null on failure.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stsp_solution_to_json(sol: *const StspSolution) -> *mut c_char {
    let Some(sol) = sol.as_ref() else {
        null_arg();
        return ptr::null_mut();
    };
    match serde_json::to_string(&sol.0) {
        Ok(s) => CString::new(s).map_or(ptr::null_mut(), CString::into_raw),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn stsp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Checks the solution's walk against the instance for its own problem.
/// Returns `Ok` on success and `InvalidArgument` with a message otherwise.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn stsp_verify(inst: *const StspInstance, sol: *const StspSolution) -> StspStatus {
    guard(|| {
        let (Some(inst), Some(sol)) = (inst.as_ref(), sol.as_ref()) else {
            return null_arg();
        };
        let Some(walk) = sol.0.solution.as_ref() else {
            set_error("solution holds no walk".into());
            return StspStatus::InvalidArgument;
        };
        match verify_walk(&inst.0, walk, sol.0.tag.problem()).first() {
            None => StspStatus::Ok,
            Some(msg) => {
                set_error(msg.to_string());
                StspStatus::InvalidArgument
            }
        }
    })
}

/// Exact optimum by enumeration, for small instances only (`SizeGuard` otherwise).
///
/// # Safety
/// `inst` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stsp_brute_force(inst: *const StspInstance, out: *mut f64) -> StspStatus {
    guard(|| {
        let (Some(inst), false) = (inst.as_ref(), out.is_null()) else {
            return null_arg();
        };
        match brute_force_stsp(&inst.0) {
            Ok(sol) => {
                *out = sol.cost;
                StspStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
