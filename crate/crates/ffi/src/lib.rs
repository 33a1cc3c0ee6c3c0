//! C ABI over the solver: opaque handles, integer status codes, and
//! thread-local error text. The matching declarations live in
//! `include/cmdp.h` (hand-maintained; a test keeps the two in sync).
//!
//! Conventions:
//! - Every fallible call returns a status code: 0 success, 2 infeasible,
//!   3 assumption violated, 4 validation error, 5 numerical failure —
//!   the same codes the command-line tool exits with.
//! - On failure, [`cmdp_last_error`] returns a thread-local message that
//!   stays valid until the next failing call on the same thread.
//! - Handles are created behind out-pointers and released with the
//!   matching `_free` function exactly once. All other pointer arguments
//!   are borrowed for the duration of the call.
//! - Out-of-range indices return 0, NaN, or null (per return type) rather
//!   than trapping; sizes come from the `num_*` accessors.
//! - Panics never unwind across the boundary; they convert to status 5.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use cmdp::files::{parse_model, parse_model_str};
use cmdp::mixture::{check_penalization_assumption, solve_constrained_with, SolveOptions};
use cmdp::{CmdpError, ConstrainedProblem, Tolerances};

pub const CMDP_OK: c_int = 0;
pub const CMDP_ERR_INFEASIBLE: c_int = 2;
pub const CMDP_ERR_ASSUMPTION: c_int = 3;
pub const CMDP_ERR_VALIDATION: c_int = 4;
pub const CMDP_ERR_NUMERICAL: c_int = 5;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn fail(err: &CmdpError) -> c_int {
    set_last_error(err.to_string());
    err.exit_code() as c_int
}

fn fail_validation(message: &str) -> c_int {
    set_last_error(message.to_string());
    CMDP_ERR_VALIDATION
}

/// Runs `f` with panics converted to status 5.
fn guarded(f: impl FnOnce() -> c_int) -> c_int {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_last_error("internal panic".to_string());
            CMDP_ERR_NUMERICAL
        }
    }
}

/// A validated constrained problem plus NUL-terminated copies of its names
/// (so name accessors can hand out stable `const char *` borrows).
pub struct CmdpProblem {
    problem: ConstrainedProblem,
    state_names: Vec<CString>,
    action_names: Vec<Vec<CString>>,
    cost_names: Vec<CString>,
}

impl CmdpProblem {
    fn wrap(problem: ConstrainedProblem) -> Box<CmdpProblem> {
        let m = &problem.model;
        let cstr = |s: &str| CString::new(s).expect("validated names contain no NUL");
        let state_names = (0..m.num_states()).map(|x| cstr(m.state_name(x))).collect();
        let action_names = (0..m.num_states())
            .map(|x| (0..m.num_actions(x)).map(|a| cstr(m.action_name(x, a))).collect())
            .collect();
        let cost_names = (0..m.num_costs()).map(|j| cstr(m.cost_name(j))).collect();
        Box::new(CmdpProblem {
            problem,
            state_names,
            action_names,
            cost_names,
        })
    }
}

/// Solver output flattened into plain arrays: the optimal occupation
/// measure, achieved costs, and the mixture certificate as per-component
/// weights and action choices.
pub struct CmdpSolution {
    costs: Vec<f64>,
    occupation: Vec<Vec<f64>>,
    weights: Vec<f64>,
    choices: Vec<Vec<usize>>,
    fallback: bool,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cmdp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the most recent failure on this thread, or null if none has
/// occurred. Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cmdp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |msg| msg.as_ptr())
    })
}

unsafe fn parse_into(
    out: *mut *mut CmdpProblem,
    parse: impl FnOnce() -> cmdp::Result<ConstrainedProblem>,
) -> c_int {
    if out.is_null() {
        return fail_validation("null out-pointer");
    }
    unsafe { *out = std::ptr::null_mut() };
    match parse() {
        Ok(problem) => {
            unsafe { *out = Box::into_raw(CmdpProblem::wrap(problem)) };
            CMDP_OK
        }
        Err(err) => fail(&err),
    }
}

/// Parses and validates a model document from NUL-terminated text.
///
/// # Safety
/// `text` must point to a valid NUL-terminated string; `out` must be a
/// valid pointer to a `CmdpProblem *`.
#[no_mangle]
pub unsafe extern "C" fn cmdp_problem_parse(
    text: *const c_char,
    out: *mut *mut CmdpProblem,
) -> c_int {
    guarded(|| {
        if text.is_null() {
            return fail_validation("null model text");
        }
        let Ok(text) = unsafe { CStr::from_ptr(text) }.to_str() else {
            return fail_validation("model text is not valid UTF-8");
        };
        unsafe { parse_into(out, || parse_model_str(text)) }
    })
}

/// Reads, parses, and validates a model file.
///
/// # Safety
/// `path` must point to a valid NUL-terminated string; `out` must be a
/// valid pointer to a `CmdpProblem *`.
#[no_mangle]
pub unsafe extern "C" fn cmdp_problem_read(
    path: *const c_char,
    out: *mut *mut CmdpProblem,
) -> c_int {
    guarded(|| {
        if path.is_null() {
            return fail_validation("null path");
        }
        let Ok(path) = unsafe { CStr::from_ptr(path) }.to_str() else {
            return fail_validation("path is not valid UTF-8");
        };
        unsafe { parse_into(out, || parse_model(Path::new(path))) }
    })
}

/// Releases a problem handle. Null is a no-op.
///
/// # Safety
/// `problem` must be null or a pointer obtained from `cmdp_problem_parse`
/// or `cmdp_problem_read` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn cmdp_problem_free(problem: *mut CmdpProblem) {
    if !problem.is_null() {
        drop(unsafe { Box::from_raw(problem) });
    }
}

unsafe fn problem_ref<'a>(problem: *const CmdpProblem) -> Option<&'a CmdpProblem> {
    unsafe { problem.as_ref() }
}

/// Number of states, or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_problem_num_states(problem: *const CmdpProblem) -> usize {
    unsafe { problem_ref(problem) }.map_or(0, |p| p.problem.model.num_states())
}

/// Number of actions at a state, or 0 when out of range.
///
/// # Safety
/// `problem` must be null or a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_problem_num_actions(
    problem: *const CmdpProblem,
    state: usize,
) -> usize {
    unsafe { problem_ref(problem) }.map_or(0, |p| {
        if state < p.problem.model.num_states() {
            p.problem.model.num_actions(state)
        } else {
            0
        }
    })
}

/// Number of cost tables (objective first), or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_problem_num_costs(problem: *const CmdpProblem) -> usize {
    unsafe { problem_ref(problem) }.map_or(0, |p| p.problem.model.num_costs())
}

/// Number of constraint bounds, or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_problem_num_constraints(problem: *const CmdpProblem) -> usize {
    unsafe { problem_ref(problem) }.map_or(0, |p| p.problem.num_constraints())
}

/// Index of the initial state, or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_problem_initial_state(problem: *const CmdpProblem) -> usize {
    unsafe { problem_ref(problem) }.map_or(0, |p| p.problem.model.initial_state())
}

/// Constraint bound `d_j` for the cost table `j` (1-based like the tables
/// themselves: `j = 1..=num_constraints`). NaN when out of range.
///
/// # Safety
/// `problem` must be null or a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_problem_bound(problem: *const CmdpProblem, j: usize) -> f64 {
    unsafe { problem_ref(problem) }.map_or(f64::NAN, |p| {
        if j >= 1 && j <= p.problem.bounds.len() {
            p.problem.bounds[j - 1]
        } else {
            f64::NAN
        }
    })
}

/// Borrowed state name, or null when out of range. Valid while the handle
/// lives.
///
/// # Safety
/// `problem` must be null or a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_problem_state_name(
    problem: *const CmdpProblem,
    state: usize,
) -> *const c_char {
    unsafe { problem_ref(problem) }.map_or(std::ptr::null(), |p| {
        p.state_names
            .get(state)
            .map_or(std::ptr::null(), |name| name.as_ptr())
    })
}

/// Borrowed action name, or null when out of range. Valid while the handle
/// lives.
///
/// # Safety
/// `problem` must be null or a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_problem_action_name(
    problem: *const CmdpProblem,
    state: usize,
    action: usize,
) -> *const c_char {
    unsafe { problem_ref(problem) }.map_or(std::ptr::null(), |p| {
        p.action_names
            .get(state)
            .and_then(|row| row.get(action))
            .map_or(std::ptr::null(), |name| name.as_ptr())
    })
}

/// Borrowed cost-table name (index 0 is the objective), or null when out
/// of range. Valid while the handle lives.
///
/// # Safety
/// `problem` must be null or a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_problem_cost_name(
    problem: *const CmdpProblem,
    j: usize,
) -> *const c_char {
    unsafe { problem_ref(problem) }.map_or(std::ptr::null(), |p| {
        p.cost_names
            .get(j)
            .map_or(std::ptr::null(), |name| name.as_ptr())
    })
}

/// Checks the penalization assumption: returns 0 when it holds and 3 when
/// a reachable zero-cost end component exists (the witness is reported via
/// `cmdp_last_error`).
///
/// # Safety
/// `problem` must be null or a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_check_assumption(problem: *const CmdpProblem) -> c_int {
    guarded(|| {
        let Some(p) = (unsafe { problem_ref(problem) }) else {
            return fail_validation("null problem handle");
        };
        let report = check_penalization_assumption(&p.problem);
        match report.witness {
            None => CMDP_OK,
            Some(ec) => fail(&cmdp::mixture::assumption_witness_error(&p.problem.model, &ec)),
        }
    })
}

/// Solves the constrained problem. On success stores a solution handle in
/// `*out`. `skip_assumption_check != 0` proceeds past a failing
/// penalization check. `tol_scale` multiplies every internal tolerance
/// (pass 1.0 for the defaults).
///
/// # Safety
/// `problem` must be a live problem handle; `out` must be a valid pointer
/// to a `CmdpSolution *`.
#[no_mangle]
pub unsafe extern "C" fn cmdp_solve(
    problem: *const CmdpProblem,
    skip_assumption_check: c_int,
    tol_scale: f64,
    out: *mut *mut CmdpSolution,
) -> c_int {
    guarded(|| {
        if out.is_null() {
            return fail_validation("null out-pointer");
        }
        unsafe { *out = std::ptr::null_mut() };
        let Some(p) = (unsafe { problem_ref(problem) }) else {
            return fail_validation("null problem handle");
        };
        if !(tol_scale.is_finite() && tol_scale > 0.0) {
            return fail_validation("tol_scale must be positive and finite");
        }
        let options = SolveOptions {
            skip_assumption_check: skip_assumption_check != 0,
            tol: Tolerances::scaled(tol_scale),
        };
        match solve_constrained_with(&p.problem, &options) {
            Ok(solution) => {
                let model = &p.problem.model;
                let occupation = (0..model.num_states())
                    .map(|x| solution.occupation.row(x).to_vec())
                    .collect();
                let mix = &solution.decomposition.mixture;
                let handle = CmdpSolution {
                    costs: solution.decomposition.achieved.0.clone(),
                    occupation,
                    weights: (0..mix.len()).map(|l| mix.weight(l)).collect(),
                    choices: (0..mix.len()).map(|l| mix.component(l).choices().to_vec()).collect(),
                    fallback: solution.decomposition.fallback,
                };
                unsafe { *out = Box::into_raw(Box::new(handle)) };
                CMDP_OK
            }
            Err(err) => fail(&err),
        }
    })
}

/// Releases a solution handle. Null is a no-op.
///
/// # Safety
/// `solution` must be null or a pointer obtained from `cmdp_solve` that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn cmdp_solution_free(solution: *mut CmdpSolution) {
    if !solution.is_null() {
        drop(unsafe { Box::from_raw(solution) });
    }
}

unsafe fn solution_ref<'a>(solution: *const CmdpSolution) -> Option<&'a CmdpSolution> {
    unsafe { solution.as_ref() }
}

/// Achieved objective value (cost table 0), or NaN for a null handle.
///
/// # Safety
/// `solution` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_solution_objective(solution: *const CmdpSolution) -> f64 {
    unsafe { solution_ref(solution) }.map_or(f64::NAN, |s| s.costs[0])
}

/// Achieved expected cost of table `j`, or NaN when out of range.
///
/// # Safety
/// `solution` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_solution_cost(solution: *const CmdpSolution, j: usize) -> f64 {
    unsafe { solution_ref(solution) }
        .map_or(f64::NAN, |s| s.costs.get(j).copied().unwrap_or(f64::NAN))
}

/// Optimal occupation-measure entry for a state-action pair, or NaN when
/// out of range.
///
/// # Safety
/// `solution` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_solution_occupation(
    solution: *const CmdpSolution,
    state: usize,
    action: usize,
) -> f64 {
    unsafe { solution_ref(solution) }.map_or(f64::NAN, |s| {
        s.occupation
            .get(state)
            .and_then(|row| row.get(action))
            .copied()
            .unwrap_or(f64::NAN)
    })
}

/// Number of deterministic components in the mixture certificate, or 0 for
/// a null handle.
///
/// # Safety
/// `solution` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_solution_num_components(solution: *const CmdpSolution) -> usize {
    unsafe { solution_ref(solution) }.map_or(0, |s| s.weights.len())
}

/// Mixture weight of component `l`, or NaN when out of range.
///
/// # Safety
/// `solution` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_solution_component_weight(
    solution: *const CmdpSolution,
    l: usize,
) -> f64 {
    unsafe { solution_ref(solution) }
        .map_or(f64::NAN, |s| s.weights.get(l).copied().unwrap_or(f64::NAN))
}

/// Action index chosen by component `l` at `state`, or `SIZE_MAX` when out
/// of range.
///
/// # Safety
/// `solution` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_solution_component_action(
    solution: *const CmdpSolution,
    l: usize,
    state: usize,
) -> usize {
    unsafe { solution_ref(solution) }.map_or(usize::MAX, |s| {
        s.choices
            .get(l)
            .and_then(|row| row.get(state))
            .copied()
            .unwrap_or(usize::MAX)
    })
}

/// 1 when the mixture certificate exceeded the guaranteed `J+1` component
/// bound (fallback decomposition), else 0.
///
/// # Safety
/// `solution` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn cmdp_solution_is_fallback(solution: *const CmdpSolution) -> c_int {
    unsafe { solution_ref(solution) }.map_or(0, |s| c_int::from(s.fallback))
}
