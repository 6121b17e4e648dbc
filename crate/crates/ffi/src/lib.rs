//! C ABI for the cexpr engine.
//!
//! A problem is loaded from the same JSON spec the CLI reads and is handed out
//! as an opaque `CexprProblem*`. Every fallible call returns a `CexprStatus`;
//! on failure a message is available from `cexpr_last_error()` on the same
//! thread until the next failing call.
//!
//! Buffers are caller-owned. Functions that fill a buffer take its length and
//! report the number of values needed through `out_len`, so a call with a
//! null buffer and zero length can be used to size it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cexpr::engine::ConstrainedExpression;
use cexpr::problem::{Model, Problem, ProblemError};
use cexpr::spec::ProblemSpec;

/// Result codes. `CEXPR_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CexprStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Singular = 4,
    Evaluation = 5,
    NotAnEngine = 6,
    OutOfRange = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Opaque handle to a resolved problem.
pub struct CexprProblem {
    problem: Problem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(status: CexprStatus, message: impl Into<String>) -> CexprStatus {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
    status
}

fn problem_status(e: &ProblemError) -> CexprStatus {
    match e {
        e if e.is_singular() => CexprStatus::Singular,
        ProblemError::Eval(_) => CexprStatus::Evaluation,
        _ => CexprStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (CexprStatus, String)>) -> CexprStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CexprStatus::Ok,
        Ok(Err((status, msg))) => set_error(status, msg),
        Err(_) => set_error(CexprStatus::Panic, "internal panic"),
    }
}

fn fail<T>(status: CexprStatus, msg: impl Into<String>) -> Result<T, (CexprStatus, String)> {
    Err((status, msg.into()))
}

fn from_problem_error(e: ProblemError) -> (CexprStatus, String) {
    (problem_status(&e), e.to_string())
}

unsafe fn handle<'a>(p: *const CexprProblem) -> Result<&'a Problem, (CexprStatus, String)> {
    match p.as_ref() {
        Some(h) => Ok(&h.problem),
        None => fail(CexprStatus::NullPointer, "problem handle is null"),
    }
}

fn member(problem: &Problem, index: usize) -> Result<&Model, (CexprStatus, String)> {
    problem.members.get(index).ok_or_else(|| {
        (
            CexprStatus::OutOfRange,
            format!("member {index} out of range (problem has {})", problem.members.len()),
        )
    })
}

fn engine(problem: &Problem, index: usize) -> Result<&ConstrainedExpression, (CexprStatus, String)> {
    match member(problem, index)? {
        Model::Engine(e) => Ok(e),
        Model::Form(f) => fail(CexprStatus::NotAnEngine, format!("member {index} is a {} form", f.kind_name())),
    }
}

unsafe fn write_out(values: &[f64], buf: *mut f64, len: usize, out_len: *mut usize) -> Result<(), (CexprStatus, String)> {
    if let Some(n) = out_len.as_mut() {
        *n = values.len();
    }
    if len < values.len() {
        return fail(
            CexprStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        );
    }
    if buf.is_null() {
        return fail(CexprStatus::NullPointer, "output buffer is null");
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

unsafe fn load(json: *const c_char, seed: Option<u64>, out: *mut *mut CexprProblem) -> CexprStatus {
    guard(|| {
        if out.is_null() {
            return fail(CexprStatus::NullPointer, "output pointer is null");
        }
        *out = ptr::null_mut();
        if json.is_null() {
            return fail(CexprStatus::NullPointer, "spec text is null");
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (CexprStatus::InvalidUtf8, format!("spec text is not UTF-8: {e}")))?;
        let problem = ProblemSpec::from_json(text)
            .and_then(|s| s.resolve(seed))
            .map_err(from_problem_error)?;
        *out = Box::into_raw(Box::new(CexprProblem { problem }));
        Ok(())
    })
}

/// Parses and solves a JSON spec. On success `*out` receives a handle that
/// must be released with `cexpr_problem_free`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cexpr_problem_from_json(json: *const c_char, out: *mut *mut CexprProblem) -> CexprStatus {
    load(json, None, out)
}

/// Like `cexpr_problem_from_json`, with an explicit seed for ensemble draws.
///
/// # Safety
/// Same as `cexpr_problem_from_json`.
#[no_mangle]
pub unsafe extern "C" fn cexpr_problem_from_json_seeded(
    json: *const c_char,
    seed: u64,
    out: *mut *mut CexprProblem,
) -> CexprStatus {
    load(json, Some(seed), out)
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `problem` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cexpr_problem_free(problem: *mut CexprProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of models in the problem (1 unless the spec is an ensemble).
///
/// # Safety
/// `problem` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cexpr_member_count(problem: *const CexprProblem, out: *mut usize) -> CexprStatus {
    guard(|| {
        let p = handle(problem)?;
        match out.as_mut() {
            Some(o) => *o = p.members.len(),
            None => return fail(CexprStatus::NullPointer, "output pointer is null"),
        }
        Ok(())
    })
}

/// Evaluates one sample row: the abscissa followed by every member's columns
/// up to `derivatives`, in the same order as the CLI's CSV output.
///
/// # Safety
/// `problem` must be a valid handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cexpr_sample_row(
    problem: *const CexprProblem,
    x: f64,
    derivatives: usize,
    buf: *mut f64,
    len: usize,
    out_len: *mut usize,
) -> CexprStatus {
    guard(|| {
        let row = handle(problem)?
            .row(x, derivatives)
            .map_err(|err| (CexprStatus::Evaluation, err.to_string()))?;
        write_out(&row, buf, len, out_len)
    })
}

/// The `order`-th derivative of a scalar member at `x`.
///
/// # Safety
/// `problem` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cexpr_evaluate(
    problem: *const CexprProblem,
    member_index: usize,
    x: f64,
    order: usize,
    out: *mut f64,
) -> CexprStatus {
    guard(|| {
        let model = member(handle(problem)?, member_index)?;
        if out.is_null() {
            return fail(CexprStatus::NullPointer, "output pointer is null");
        }
        let row = model.row(x, order).map_err(|err| (CexprStatus::Evaluation, err.to_string()))?;
        if row.len() != order + 1 {
            return fail(CexprStatus::InvalidInput, "member is vector-valued; use cexpr_sample_row");
        }
        *out = row[order];
        Ok(())
    })
}

/// Number of constraints of an engine member.
///
/// # Safety
/// `problem` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cexpr_constraint_count(
    problem: *const CexprProblem,
    member_index: usize,
    out: *mut usize,
) -> CexprStatus {
    guard(|| {
        let e = engine(handle(problem)?, member_index)?;
        match out.as_mut() {
            Some(o) => *o = e.n(),
            None => return fail(CexprStatus::NullPointer, "output pointer is null"),
        }
        Ok(())
    })
}

/// Reciprocal condition number of an engine member's support matrix.
///
/// # Safety
/// `problem` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cexpr_rcond(problem: *const CexprProblem, member_index: usize, out: *mut f64) -> CexprStatus {
    guard(|| {
        let e = engine(handle(problem)?, member_index)?;
        match out.as_mut() {
            Some(o) => *o = e.support().rcond(),
            None => return fail(CexprStatus::NullPointer, "output pointer is null"),
        }
        Ok(())
    })
}

/// The switching functions beta_k^(order)(x) of an engine member, one per
/// constraint.
///
/// # Safety
/// `problem` must be a valid handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cexpr_beta(
    problem: *const CexprProblem,
    member_index: usize,
    x: f64,
    order: usize,
    buf: *mut f64,
    len: usize,
    out_len: *mut usize,
) -> CexprStatus {
    guard(|| {
        let e = engine(handle(problem)?, member_index)?;
        let beta = e.beta(x, order).map_err(|err| (CexprStatus::Evaluation, err.to_string()))?;
        write_out(&beta, buf, len, out_len)
    })
}

/// Constraint residuals (value minus target) of an engine member.
///
/// # Safety
/// `problem` must be a valid handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cexpr_residuals(
    problem: *const CexprProblem,
    member_index: usize,
    buf: *mut f64,
    len: usize,
    out_len: *mut usize,
) -> CexprStatus {
    guard(|| {
        let e = engine(handle(problem)?, member_index)?;
        let r = e.residuals().map_err(|err| (CexprStatus::Evaluation, err.to_string()))?;
        write_out(&r, buf, len, out_len)
    })
}

/// Checks every constraint of every member against `tolerance * scale`.
/// `*passed` is set to 1 when all checks pass and 0 otherwise.
///
/// # Safety
/// `problem` must be a valid handle and `passed` writable.
#[no_mangle]
pub unsafe extern "C" fn cexpr_verify(problem: *const CexprProblem, tolerance: f64, passed: *mut i32) -> CexprStatus {
    guard(|| {
        let p = handle(problem)?;
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return fail(CexprStatus::InvalidInput, "tolerance must be positive");
        }
        let checks = p.checks().map_err(from_problem_error)?;
        match passed.as_mut() {
            Some(o) => *o = i32::from(checks.iter().all(|c| c.passes(tolerance))),
            None => return fail(CexprStatus::NullPointer, "output pointer is null"),
        }
        Ok(())
    })
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cexpr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Short description of a status code. The string is static.
#[no_mangle]
pub extern "C" fn cexpr_status_name(status: CexprStatus) -> *const c_char {
    let s: &'static CStr = match status {
        CexprStatus::Ok => c"ok",
        CexprStatus::NullPointer => c"null pointer",
        CexprStatus::InvalidUtf8 => c"invalid UTF-8",
        CexprStatus::InvalidInput => c"invalid input",
        CexprStatus::Singular => c"singular support matrix",
        CexprStatus::Evaluation => c"evaluation error",
        CexprStatus::NotAnEngine => c"member is not an engine build",
        CexprStatus::OutOfRange => c"index out of range",
        CexprStatus::BufferTooSmall => c"buffer too small",
        CexprStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}
