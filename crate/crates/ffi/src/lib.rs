//! C ABI over `drc-core`.
//!
//! Every function returns a [`DrcStatus`]; values come back through out
//! pointers. Decompositions are opaque handles released with
//! [`drc_decomposition_free`]; strings returned by the library are released
//! with [`drc_string_free`]. After a failure, [`drc_last_error`] describes
//! it until the next call on the same thread. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use drc_core::archive::{parse_archive, run_enumerate, DecompositionArchive, RunConfig};
use drc_core::graph::Limits;
use drc_core::rational::Rational;
use drc_core::residue::step1_closed_form;
use drc_core::strata::StrataConfig;
use drc_core::DrcError;

/// Status codes; the nonzero ones mirror the `drc` exit codes where they
/// overlap.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DrcStatus {
    Ok = 0,
    InputError = 2,
    GuardExceeded = 3,
    InvariantViolation = 4,
    NullPointer = 5,
    IndexOutOfRange = 6,
    /// A value does not fit the requested integer type.
    Overflow = 7,
    Panic = 8,
}

/// Opaque handle to an enumerated, archived decomposition.
pub struct DrcDecomposition {
    archive: DecompositionArchive,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &DrcError) -> DrcStatus {
    match e {
        DrcError::Input(_) | DrcError::Io(_) => DrcStatus::InputError,
        DrcError::Guard { .. } => DrcStatus::GuardExceeded,
        DrcError::Invariant(_) => DrcStatus::InvariantViolation,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guarded(f: impl FnOnce() -> Result<(), (DrcStatus, String)>) -> DrcStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DrcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside drc");
            DrcStatus::Panic
        }
    }
}

fn lift(e: DrcError) -> (DrcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (DrcStatus, String) {
    (DrcStatus::NullPointer, format!("{what} is null"))
}

fn to_i64_pair(q: &Rational) -> Result<(i64, i64), (DrcStatus, String)> {
    let n = i64::try_from(q.numer()).map_err(|_| (DrcStatus::Overflow, "numerator exceeds i64".to_string()))?;
    let d = i64::try_from(q.denom()).map_err(|_| (DrcStatus::Overflow, "denominator exceeds i64".to_string()))?;
    Ok((n, d))
}

/// Message for the last failure on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn drc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn drc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Enumerates the decomposition for genus `g`, order `k` and the `n` leg
/// weights at `m`.
///
/// # Safety
/// `m` must point to `n` readable values (it may be null when `n` is 0) and
/// `out` must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn drc_enumerate(
    g: u32,
    k: u32,
    m: *const i64,
    n: usize,
    out: *mut *mut DrcDecomposition,
) -> DrcStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if m.is_null() && n > 0 {
            return Err(null("m"));
        }
        let weights = if n == 0 { Vec::new() } else { std::slice::from_raw_parts(m, n).to_vec() };
        let config = RunConfig::new(g, Some(n), k, weights, StrataConfig::default()).map_err(lift)?;
        let (archive, _) = run_enumerate(&config).map_err(lift)?;
        *out = Box::into_raw(Box::new(DrcDecomposition { archive }));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `d` must come from [`drc_enumerate`] or [`drc_archive_parse`] and not
/// have been freed.
#[no_mangle]
pub unsafe extern "C" fn drc_decomposition_free(d: *mut DrcDecomposition) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn drc_decomposition_num_strata(d: *const DrcDecomposition, out: *mut usize) -> DrcStatus {
    guarded(|| {
        let d = d.as_ref().ok_or_else(|| null("decomposition"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = d.archive.strata.len();
        Ok(())
    })
}

/// Weight of stratum `index` as a reduced fraction.
///
/// # Safety
/// `d` must be a live handle; `num` and `den` writable.
#[no_mangle]
pub unsafe extern "C" fn drc_decomposition_weight(
    d: *const DrcDecomposition,
    index: usize,
    num: *mut i64,
    den: *mut i64,
) -> DrcStatus {
    guarded(|| {
        let d = d.as_ref().ok_or_else(|| null("decomposition"))?;
        let (num, den) = (num.as_mut().ok_or_else(|| null("num"))?, den.as_mut().ok_or_else(|| null("den"))?);
        let s = d
            .archive
            .strata
            .get(index)
            .ok_or_else(|| (DrcStatus::IndexOutOfRange, format!("no stratum {index}")))?;
        (*num, *den) = to_i64_pair(&s.weight)?;
        Ok(())
    })
}

/// Fibre count and local-ring length of stratum `index`.
///
/// # Safety
/// `d` must be a live handle; `fibre` and `length` writable.
#[no_mangle]
pub unsafe extern "C" fn drc_decomposition_drl(
    d: *const DrcDecomposition,
    index: usize,
    fibre: *mut u64,
    length: *mut u64,
) -> DrcStatus {
    guarded(|| {
        let d = d.as_ref().ok_or_else(|| null("decomposition"))?;
        let fibre = fibre.as_mut().ok_or_else(|| null("fibre"))?;
        let length = length.as_mut().ok_or_else(|| null("length"))?;
        let s = d
            .archive
            .strata
            .get(index)
            .ok_or_else(|| (DrcStatus::IndexOutOfRange, format!("no stratum {index}")))?;
        *fibre = s.drl_local.fibre_count;
        *length = s.drl_local.length;
        Ok(())
    })
}

/// The archive as JSON; free the result with [`drc_string_free`].
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn drc_decomposition_to_json(d: *const DrcDecomposition, out: *mut *mut c_char) -> DrcStatus {
    guarded(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let d = d.as_ref().ok_or_else(|| null("decomposition"))?;
        let s = CString::new(d.archive.to_json()).map_err(|_| (DrcStatus::InvariantViolation, "NUL in JSON".to_string()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// Parses and re-verifies an archive.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn drc_archive_parse(json: *const c_char, out: *mut *mut DrcDecomposition) -> DrcStatus {
    guarded(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(null("json"));
        }
        let bytes = CStr::from_ptr(json).to_bytes();
        let archive = parse_archive(bytes, &Limits::default()).map_err(lift)?;
        *out = Box::into_raw(Box::new(DrcDecomposition { archive }));
        Ok(())
    })
}

/// Closed-form k-residue at 0 of `z^{m1} (1 - z)^{m2} (dz)^k`.
///
/// # Safety
/// `num` and `den` must be writable.
#[no_mangle]
pub unsafe extern "C" fn drc_step1_k_residue(k: u32, m1: i64, m2: i64, num: *mut i64, den: *mut i64) -> DrcStatus {
    guarded(|| {
        let (num, den) = (num.as_mut().ok_or_else(|| null("num"))?, den.as_mut().ok_or_else(|| null("den"))?);
        let q = step1_closed_form(k, m1, m2).map_err(lift)?;
        (*num, *den) = to_i64_pair(&q)?;
        Ok(())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn drc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
