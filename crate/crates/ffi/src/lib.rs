//! C ABI for the `latticewave` library.
//!
//! Objects cross the boundary as opaque handles released with their `_free`
//! function. Every call returns an [`LwStatus`]; on failure a message is kept
//! per thread and read with [`lw_last_error`]. Strings handed out by the
//! library are NUL-terminated JSON and must be released with [`lw_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use latticewave::catalog;
use latticewave::classify::{classify_with, ClassLabel};
use latticewave::cli::parse_matrix;
use latticewave::construct::{assemble_psi_r, construct, CompletionConfig};
use latticewave::freqset::FrequencySet;
use latticewave::lattice::{digit_set, DilationMatrix};
use latticewave::rational;
use latticewave::tiling::verify_wavelet_set;
use latticewave::wavelet::{verify_all, PiecewiseWavelet};
use latticewave::Error;

/// Result code of every exported function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LwStatus {
    Ok = 0,
    /// A check ran to completion and failed; the report explains why.
    CheckFailed = 1,
    NullPointer = 2,
    InvalidUtf8 = 3,
    Parse = 4,
    InvalidMatrix = 5,
    DimensionMismatch = 6,
    NoProgress = 7,
    Unsupported = 8,
    Internal = 9,
    Panic = 10,
}

#[derive(serde::Serialize)]
struct DigitsDoc<'a> {
    digits: &'a [Vec<i64>],
    a: u64,
}

/// Dilation matrix handle.
pub struct LwMatrix(DilationMatrix);

/// Frequency set handle.
pub struct LwSet(FrequencySet);

/// Piecewise-constant wavelet handle.
pub struct LwWavelet(PiecewiseWavelet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LwStatus {
    match e {
        Error::Parse(_) | Error::Json(_) => LwStatus::Parse,
        Error::NotSquare { .. } | Error::SingularOrUnimodular { .. } | Error::NotExpansive { .. } => {
            LwStatus::InvalidMatrix
        }
        Error::DimensionMismatch { .. } => LwStatus::DimensionMismatch,
        Error::NoProgress { .. }
        | Error::MaxIterations { .. }
        | Error::PieceLimit { .. }
        | Error::SearchExhausted { .. } => LwStatus::NoProgress,
        Error::DimensionCap { .. } | Error::OriginInClosure { .. } | Error::Unbounded => LwStatus::Unsupported,
        Error::NotAWavelet(_) | Error::Inexact { .. } => LwStatus::CheckFailed,
        _ => LwStatus::Internal,
    }
}

/// Runs `f`, recording its error or panic message for [`lw_last_error`].
fn guard(f: impl FnOnce() -> Result<LwStatus, (LwStatus, String)>) -> LwStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            LwStatus::Panic
        }
    }
}

fn lib<T>(r: latticewave::Result<T>) -> Result<T, (LwStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null() -> (LwStatus, String) {
    (LwStatus::NullPointer, "null pointer argument".into())
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, (LwStatus, String)> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s).to_str().map_err(|e| (LwStatus::InvalidUtf8, e.to_string()))
}

unsafe fn borrow<'a, T>(p: *const T) -> Result<&'a T, (LwStatus, String)> {
    p.as_ref().ok_or_else(null)
}

unsafe fn give<T>(out: *mut *mut T, value: T) -> Result<(), (LwStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Stores `s` in `*out` when `out` is non-null.
unsafe fn give_string(out: *mut *mut c_char, s: String) -> Result<(), (LwStatus, String)> {
    if !out.is_null() {
        *out = CString::new(s).map_err(|e| (LwStatus::Internal, e.to_string()))?.into_raw();
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, (LwStatus, String)> {
    serde_json::to_string(v).map_err(|e| (LwStatus::Internal, e.to_string()))
}

fn verdict(ok: bool) -> LwStatus {
    if ok {
        LwStatus::Ok
    } else {
        LwStatus::CheckFailed
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn lw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Looks up `dyadic1d`, `triadic1d`, `quincunx` or `dyadic2d`, or parses a
/// JSON document `{"matrix": [[...]]}` / `[[...]]` holding the rows of `A`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lw_matrix_new(spec: *const c_char, out: *mut *mut LwMatrix) -> LwStatus {
    guard(|| {
        let spec = text(spec)?;
        let m = match catalog::matrix_entries(spec) {
            Some(_) => lib(catalog::matrix(spec))?,
            None => lib(parse_matrix(spec))?,
        };
        give(out, LwMatrix(m))?;
        Ok(LwStatus::Ok)
    })
}

/// # Safety
/// `m` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn lw_matrix_free(m: *mut LwMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension `n` and `a = |det A|`.
///
/// # Safety
/// `m` must be a live handle; `n` and `a` valid pointers or NULL.
#[no_mangle]
pub unsafe extern "C" fn lw_matrix_info(m: *const LwMatrix, n: *mut usize, a: *mut u64) -> LwStatus {
    guard(|| {
        let m = borrow(m)?;
        if !n.is_null() {
            *n = m.0.n();
        }
        if !a.is_null() {
            *a = m.0.det_abs();
        }
        Ok(LwStatus::Ok)
    })
}

/// `{"digits": [[...]], "a": a}` for the canonical digit set of `A`.
///
/// # Safety
/// `m` must be a live handle and `json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lw_matrix_digits(m: *const LwMatrix, json: *mut *mut c_char) -> LwStatus {
    guard(|| {
        let m = borrow(m)?;
        let d = digit_set(&m.0);
        if json.is_null() {
            return Err(null());
        }
        give_string(json, to_json(&DigitsDoc { digits: d.digits(), a: m.0.det_abs() })?)?;
        Ok(LwStatus::Ok)
    })
}

/// Parses the frequency-set JSON schema, or looks up `shannon-set` / `journe-set`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lw_set_new(spec: *const c_char, out: *mut *mut LwSet) -> LwStatus {
    guard(|| {
        let spec = text(spec)?;
        let s = match catalog::set(spec) {
            Some((s, _)) => s,
            None => serde_json::from_str(spec).map_err(|e| (LwStatus::Parse, e.to_string()))?,
        };
        give(out, LwSet(s))?;
        Ok(LwStatus::Ok)
    })
}

/// # Safety
/// `s` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn lw_set_free(s: *mut LwSet) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Exact volume in 2π-units as a `"p/q"` string.
///
/// # Safety
/// `s` must be a live handle and `volume` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lw_set_volume(s: *const LwSet, volume: *mut *mut c_char) -> LwStatus {
    guard(|| {
        let s = borrow(s)?;
        if volume.is_null() {
            return Err(null());
        }
        let v = lib(s.0.volume())?;
        give_string(volume, rational::format(&v))?;
        Ok(LwStatus::Ok)
    })
}

/// Checks both tiling conditions. Returns `Ok` on pass and `CheckFailed`
/// otherwise; the report JSON is stored in `*report` when it is non-null.
///
/// # Safety
/// `s` and `m` must be live handles; `report` a valid pointer or NULL.
#[no_mangle]
pub unsafe extern "C" fn lw_verify_set(
    s: *const LwSet,
    m: *const LwMatrix,
    samples: usize,
    seed: u64,
    report: *mut *mut c_char,
) -> LwStatus {
    guard(|| {
        let (s, m) = (borrow(s)?, borrow(m)?);
        let r = lib(verify_wavelet_set(&s.0, &m.0, samples, seed))?;
        give_string(report, to_json(&r)?)?;
        Ok(verdict(r.passed()))
    })
}

/// Parses the wavelet schema. `m` may be NULL when the document names its matrix.
///
/// # Safety
/// `json` must be NUL-terminated, `m` NULL or a live handle, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lw_wavelet_new(json: *const c_char, m: *const LwMatrix, out: *mut *mut LwWavelet) -> LwStatus {
    guard(|| {
        let json = text(json)?;
        let m = m.as_ref().map(|m| &m.0);
        let w = lib(PiecewiseWavelet::from_json(json, m))?;
        give(out, LwWavelet(w))?;
        Ok(LwStatus::Ok)
    })
}

/// `χ_K` for a wavelet set `K`.
///
/// # Safety
/// `s` and `m` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lw_wavelet_indicator(
    s: *const LwSet,
    m: *const LwMatrix,
    out: *mut *mut LwWavelet,
) -> LwStatus {
    guard(|| {
        let (s, m) = (borrow(s)?, borrow(m)?);
        let w = lib(PiecewiseWavelet::indicator(s.0.clone(), m.0.clone()))?;
        give(out, LwWavelet(w))?;
        Ok(LwStatus::Ok)
    })
}

/// # Safety
/// `w` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn lw_wavelet_free(w: *mut LwWavelet) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Serializes the wavelet schema.
///
/// # Safety
/// `w` must be a live handle and `json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lw_wavelet_to_json(w: *const LwWavelet, json: *mut *mut c_char) -> LwStatus {
    guard(|| {
        let w = borrow(w)?;
        if json.is_null() {
            return Err(null());
        }
        give_string(json, to_json(&w.0)?)?;
        Ok(LwStatus::Ok)
    })
}

/// Runs every wavelet check of `verify_all`.
///
/// # Safety
/// `w` must be a live handle; `report` a valid pointer or NULL.
#[no_mangle]
pub unsafe extern "C" fn lw_verify_wavelet(
    w: *const LwWavelet,
    samples: usize,
    seed: u64,
    report: *mut *mut c_char,
) -> LwStatus {
    guard(|| {
        let w = borrow(w)?;
        let r = lib(verify_all(&w.0, samples, seed))?;
        give_string(report, to_json(&r)?)?;
        Ok(verdict(r.passed))
    })
}

/// Verifies `w` and stores its class: `r` for `M_r`, `-1` for `M_inf`.
/// A wavelet that fails verification gives `CheckFailed`.
///
/// # Safety
/// `w` must be a live handle, `class_r` valid, `report` valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn lw_classify(
    w: *const LwWavelet,
    samples: usize,
    seed: u64,
    class_r: *mut i32,
    report: *mut *mut c_char,
) -> LwStatus {
    guard(|| {
        let w = borrow(w)?;
        if class_r.is_null() {
            return Err(null());
        }
        let c = lib(classify_with(&w.0, samples, seed))?;
        *class_r = match c.label {
            ClassLabel::Finite(r) => i32::try_from(r).map_err(|e| (LwStatus::Internal, e.to_string()))?,
            ClassLabel::Infinity => -1,
        };
        give_string(report, to_json(&c.to_doc())?)?;
        Ok(LwStatus::Ok)
    })
}

/// Builds the wavelet of class `M_r` from a seed drawn with `seed`, requiring
/// an exact completion within `max_iter` iterations. The construction report
/// JSON is stored in `*report` when it is non-null.
///
/// # Safety
/// `m` must be a live handle, `out` valid, `report` valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn lw_construct(
    m: *const LwMatrix,
    r: u32,
    seed: u64,
    max_iter: u32,
    out: *mut *mut LwWavelet,
    report: *mut *mut c_char,
) -> LwStatus {
    guard(|| {
        let m = borrow(m)?;
        if out.is_null() {
            return Err(null());
        }
        let config = CompletionConfig::new(rational::ratio(1, 1_000_000), max_iter);
        let rep = lib(construct(&m.0, r, 1, seed, &config))?;
        give_string(report, to_json(&rep)?)?;
        let w = lib(assemble_psi_r(&m.0, &rep, false))?;
        give(out, LwWavelet(w))?;
        Ok(LwStatus::Ok)
    })
}
