//! C ABI over `parcheck`.
//!
//! Handles are opaque and owned by the caller once returned; free them with the
//! matching `*_free` function. Every fallible call returns a [`PcStatus`] and, on
//! failure, stores a message retrievable with [`pc_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use parcheck::cli::{json_report, run_checks, CheckOutcome};
use parcheck::dsl::{self, BoundCheck};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    /// Every check ran and at least one failed.
    CheckFailed = 1,
    /// The source did not parse or bind.
    Diagnostics = 2,
    Io = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Compiled checks of one `.grs` document.
pub struct PcDocument {
    checks: Vec<BoundCheck>,
}

/// Results of running a document.
pub struct PcReport {
    outcomes: Vec<CheckOutcome>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> PcStatus) -> PcStatus {
    clear_error();
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| {
        set_error("internal panic");
        PcStatus::Panic
    })
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, PcStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(PcStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        PcStatus::InvalidUtf8
    })
}

fn compile_into(src: &str, out: *mut *mut PcDocument) -> PcStatus {
    match dsl::compile(src) {
        Ok(checks) => {
            unsafe { *out = Box::into_raw(Box::new(PcDocument { checks })) };
            PcStatus::Ok
        }
        Err(diags) => {
            set_error(diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"));
            PcStatus::Diagnostics
        }
    }
}

/// Compiles `.grs` source text into `*out`.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_document_compile(source: *const c_char, out: *mut *mut PcDocument) -> PcStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return PcStatus::NullPointer;
        }
        *out = ptr::null_mut();
        match str_arg(source, "source") {
            Ok(src) => compile_into(src, out),
            Err(s) => s,
        }
    })
}

/// Reads and compiles the `.grs` file at `path` into `*out`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_document_open(path: *const c_char, out: *mut *mut PcDocument) -> PcStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return PcStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match std::fs::read_to_string(path) {
            Ok(src) => compile_into(&src, out),
            Err(e) => {
                set_error(format!("cannot read {path}: {e}"));
                PcStatus::Io
            }
        }
    })
}

/// Number of checks in a document; 0 for null.
///
/// # Safety
/// `doc` must be null or a live document handle.
#[no_mangle]
pub unsafe extern "C" fn pc_document_check_count(doc: *const PcDocument) -> usize {
    doc.as_ref().map_or(0, |d| d.checks.len())
}

/// # Safety
/// `doc` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_document_free(doc: *mut PcDocument) {
    if !doc.is_null() {
        drop(Box::from_raw(doc));
    }
}

/// Runs every check of `doc` into `*out`.
///
/// `tol` overrides checks without an explicit tolerance when positive; `points`
/// and `seed` override random sample sets when nonzero. Returns `PC_STATUS_OK`
/// when all checks pass and `PC_STATUS_CHECK_FAILED` otherwise; the report is
/// produced in both cases.
///
/// # Safety
/// `doc` must be a live document handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_run(
    doc: *const PcDocument,
    tol: f64,
    points: usize,
    seed: u64,
    out: *mut *mut PcReport,
) -> PcStatus {
    guard(|| {
        if out.is_null() || doc.is_null() {
            set_error("null argument");
            return PcStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let tol = (tol > 0.0 && tol.is_finite()).then_some(tol);
        let points = (points > 0).then_some(points);
        let seed = (seed > 0).then_some(seed);
        let outcomes = run_checks(&(*doc).checks, tol, points, seed, false);
        let failed: Vec<String> = outcomes.iter().filter(|o| !o.pass()).map(|o| o.name.clone()).collect();
        *out = Box::into_raw(Box::new(PcReport { outcomes }));
        if failed.is_empty() {
            PcStatus::Ok
        } else {
            set_error(format!("failed checks: {}", failed.join(", ")));
            PcStatus::CheckFailed
        }
    })
}

/// Number of checks in a report; 0 for null.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn pc_report_check_count(report: *const PcReport) -> usize {
    report.as_ref().map_or(0, |r| r.outcomes.len())
}

/// Whether check `index` passed, written to `*pass`.
///
/// # Safety
/// `report` must be a live report handle and `pass` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_report_check_pass(report: *const PcReport, index: usize, pass: *mut bool) -> PcStatus {
    guard(|| match (report.as_ref(), pass.is_null()) {
        (Some(r), false) => match r.outcomes.get(index) {
            Some(o) => {
                *pass = o.pass();
                PcStatus::Ok
            }
            None => {
                set_error(format!("check index {index} out of range"));
                PcStatus::OutOfRange
            }
        },
        _ => {
            set_error("null argument");
            PcStatus::NullPointer
        }
    })
}

/// Largest residual of check `index` over all labels, written to `*linf`.
///
/// # Safety
/// `report` must be a live report handle and `linf` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_report_check_linf(report: *const PcReport, index: usize, linf: *mut f64) -> PcStatus {
    guard(|| match (report.as_ref(), linf.is_null()) {
        (Some(r), false) => match r.outcomes.get(index).map(|o| &o.result) {
            Some(Ok(rep)) => {
                *linf = rep.linf();
                PcStatus::Ok
            }
            Some(Err(e)) => {
                set_error(e.clone());
                PcStatus::CheckFailed
            }
            None => {
                set_error(format!("check index {index} out of range"));
                PcStatus::OutOfRange
            }
        },
        _ => {
            set_error("null argument");
            PcStatus::NullPointer
        }
    })
}

/// The JSON report as a new string; free it with [`pc_string_free`]. Null on error.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn pc_report_json(report: *const PcReport) -> *mut c_char {
    clear_error();
    let Some(r) = report.as_ref() else {
        set_error("report is null");
        return ptr::null_mut();
    };
    match catch_unwind(AssertUnwindSafe(|| json_report(&r.outcomes))) {
        Ok(s) => CString::new(s).map_or(ptr::null_mut(), CString::into_raw),
        Err(_) => {
            set_error("internal panic");
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_report_free(report: *mut PcReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failing call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn pc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
