//! C ABI over crasp-kit.
//!
//! Conventions: every fallible function returns a [`CraspStatus`]. Strings
//! passed in are NUL-terminated UTF-8 and are only borrowed for the call.
//! Strings handed out are owned by the caller and must be released with
//! [`crasp_string_free`]. After a non-OK status, [`crasp_last_error`]
//! describes the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use crasp_kit::crasp::{EvalError, Runner};
use crasp_kit::glitch::{analyze, Scoring};
use crasp_kit::oracles::{oracle_copy, oracle_retrieval, CopyInstance, RetrievalInstance};
use crasp_kit::symbol::{detokenize, tokenize};
use crasp_kit::{Next, Program, Symbol, TaskKind};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CraspStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    EvalError = 4,
    AmbiguousNext = 5,
    UnknownTask = 6,
    InvalidInstance = 7,
    Panic = 8,
}

/// A parsed and validated program. Opaque to C.
pub struct CraspProgram {
    program: Program,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: CraspStatus, msg: impl Into<String>) -> CraspStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning a panic into [`CraspStatus::Panic`].
fn guarded(f: impl FnOnce() -> CraspStatus) -> CraspStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(CraspStatus::Panic, "internal panic"))
}

unsafe fn borrow_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, CraspStatus> {
    if s.is_null() {
        return Err(fail(CraspStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(CraspStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn hand_out(out: *mut *mut c_char, text: String) -> CraspStatus {
    match CString::new(text) {
        Ok(c) => {
            *out = c.into_raw();
            CraspStatus::Ok
        }
        Err(_) => fail(CraspStatus::InvalidUtf8, "result contains a NUL byte"),
    }
}

fn eval_status(e: &EvalError) -> CraspStatus {
    let status = match e {
        EvalError::AmbiguousNext { .. } => CraspStatus::AmbiguousNext,
        _ => CraspStatus::EvalError,
    };
    fail(status, e.to_string())
}

macro_rules! arg {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Message for the last failure on this thread, or NULL. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn crasp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn crasp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn crasp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates program text. On success `*out` receives a handle
/// to release with [`crasp_program_free`].
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn crasp_program_parse(text: *const c_char, out: *mut *mut CraspProgram) -> CraspStatus {
    guarded(|| {
        if out.is_null() {
            return fail(CraspStatus::NullArgument, "out is NULL");
        }
        let text = arg!(borrow_str(text, "text"));
        match Program::parse(text) {
            Ok(program) => {
                *out = Box::into_raw(Box::new(CraspProgram { program }));
                CraspStatus::Ok
            }
            Err(e) => fail(CraspStatus::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `p` must be NULL or a handle from [`crasp_program_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crasp_program_free(p: *mut CraspProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of operations in the compiled program.
///
/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn crasp_program_op_count(p: *const CraspProgram) -> usize {
    p.as_ref().map_or(0, |p| p.program.ops().len())
}

/// Feeds whitespace-separated `input` and reports the next token. `*out`
/// receives the token, or NULL when the program halts.
///
/// # Safety
/// `p` must be a live handle, `input` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crasp_program_next_token(
    p: *const CraspProgram,
    input: *const c_char,
    out: *mut *mut c_char,
) -> CraspStatus {
    guarded(|| {
        let Some(p) = p.as_ref() else { return fail(CraspStatus::NullArgument, "program is NULL") };
        if out.is_null() {
            return fail(CraspStatus::NullArgument, "out is NULL");
        }
        let input = tokenize(arg!(borrow_str(input, "input")));
        *out = ptr::null_mut();
        let mut runner = match Runner::new(&p.program) {
            Ok(r) => r,
            Err(e) => return eval_status(&e),
        };
        if let Err(e) = runner.extend(&input) {
            return eval_status(&e);
        }
        match runner.next() {
            Ok(Next::Token(t)) => hand_out(out, t.as_str().to_string()),
            Ok(Next::Halt) => CraspStatus::Ok,
            Err(e) => eval_status(&e),
        }
    })
}

/// Feeds `input`, then generates until the program halts or `max_steps`
/// tokens have been emitted. `*out` receives the space-separated tokens.
///
/// # Safety
/// As for [`crasp_program_next_token`].
#[no_mangle]
pub unsafe extern "C" fn crasp_program_generate(
    p: *const CraspProgram,
    input: *const c_char,
    max_steps: usize,
    out: *mut *mut c_char,
) -> CraspStatus {
    guarded(|| {
        let Some(p) = p.as_ref() else { return fail(CraspStatus::NullArgument, "program is NULL") };
        if out.is_null() {
            return fail(CraspStatus::NullArgument, "out is NULL");
        }
        let input = tokenize(arg!(borrow_str(input, "input")));
        let mut runner = match Runner::new(&p.program) {
            Ok(r) => r,
            Err(e) => return eval_status(&e),
        };
        if let Err(e) = runner.extend(&input) {
            return eval_status(&e);
        }
        let mut emitted: Vec<Symbol> = Vec::new();
        while emitted.len() < max_steps {
            match runner.next() {
                Ok(Next::Token(t)) => {
                    if let Err(e) = runner.push(&t) {
                        return eval_status(&e);
                    }
                    emitted.push(t);
                }
                Ok(Next::Halt) => break,
                Err(e) => return eval_status(&e),
            }
        }
        hand_out(out, detokenize(&emitted))
    })
}

fn parse_task(name: &str) -> Result<TaskKind, CraspStatus> {
    name.parse().map_err(|e| fail(CraspStatus::UnknownTask, format!("{e}")))
}

/// Expected answer of a retrieval task (UL, UR, NLFirst, ...) for a
/// whitespace-separated `context` and a single `query` token.
///
/// # Safety
/// All pointers must be NUL-terminated strings except `out`, which must be writable.
#[no_mangle]
pub unsafe extern "C" fn crasp_oracle_retrieval(
    task: *const c_char,
    context: *const c_char,
    query: *const c_char,
    out: *mut *mut c_char,
) -> CraspStatus {
    guarded(|| {
        if out.is_null() {
            return fail(CraspStatus::NullArgument, "out is NULL");
        }
        let task = arg!(parse_task(arg!(borrow_str(task, "task"))));
        if !task.is_retrieval() {
            return fail(CraspStatus::UnknownTask, format!("{task} is not a retrieval task"));
        }
        let context = tokenize(arg!(borrow_str(context, "context")));
        let query = Symbol::new(arg!(borrow_str(query, "query")).trim());
        match oracle_retrieval(task, &RetrievalInstance::new(context, query)) {
            Ok(s) => hand_out(out, s.as_str().to_string()),
            Err(e) => fail(CraspStatus::InvalidInstance, e.to_string()),
        }
    })
}

/// Expected output of a copy task (UF, UB, NF, NB) for a
/// whitespace-separated `source`.
///
/// # Safety
/// As for [`crasp_oracle_retrieval`].
#[no_mangle]
pub unsafe extern "C" fn crasp_oracle_copy(
    task: *const c_char,
    source: *const c_char,
    out: *mut *mut c_char,
) -> CraspStatus {
    guarded(|| {
        if out.is_null() {
            return fail(CraspStatus::NullArgument, "out is NULL");
        }
        let task = arg!(parse_task(arg!(borrow_str(task, "task"))));
        if !task.is_copy() {
            return fail(CraspStatus::UnknownTask, format!("{task} is not a copy task"));
        }
        let source = tokenize(arg!(borrow_str(source, "source")));
        match oracle_copy(task, &CopyInstance { source }) {
            Ok(s) => hand_out(out, detokenize(&s)),
            Err(e) => fail(CraspStatus::InvalidInstance, e.to_string()),
        }
    })
}

/// Aligns whitespace-separated `output` against `source` and writes the
/// transition report as JSON to `*out`.
///
/// # Safety
/// As for [`crasp_oracle_retrieval`].
#[no_mangle]
pub unsafe extern "C" fn crasp_analyze(
    source: *const c_char,
    output: *const c_char,
    match_score: i32,
    mismatch_score: i32,
    gap_score: i32,
    out: *mut *mut c_char,
) -> CraspStatus {
    guarded(|| {
        if out.is_null() {
            return fail(CraspStatus::NullArgument, "out is NULL");
        }
        let src: Vec<&str> = arg!(borrow_str(source, "source")).split_whitespace().collect();
        let dst: Vec<&str> = arg!(borrow_str(output, "output")).split_whitespace().collect();
        let scoring = Scoring { matched: match_score, mismatch: mismatch_score, gap: gap_score };
        let report = analyze(&src, &dst, &scoring);
        hand_out(out, serde_json::to_string(&report).expect("report serializes"))
    })
}
