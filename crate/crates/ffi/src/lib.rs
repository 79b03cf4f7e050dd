//! C interface to the semiperm library.
//!
//! Models and term sequences are opaque handles created and released through
//! this API. Every fallible call returns a [`SemipermStatus`]; on failure a
//! message for the calling thread is available from
//! [`semiperm_last_error`]. Strings returned to the caller must be released
//! with [`semiperm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use semiperm::asymptotics::{fit, fit_returns, fit_returns_logs, fit_logs, LogTerms, LogValue};
use semiperm::cache::{SequenceKind, Storage, TermCache, TermValues};
use semiperm::checks::{run_check, CheckKind, CheckOptions};
use semiperm::guess::{guess_search, SearchOptions};
use semiperm::model::{catalog_model, ModelSpec};
use semiperm::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemipermStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidModel = 3,
    ResourceLimit = 4,
    InsufficientTerms = 5,
    Parse = 6,
    Io = 7,
    Unsupported = 8,
    /// An index past the end of a sequence, or a value of the wrong storage.
    OutOfRange = 9,
    Internal = 10,
}

/// A walk model.
pub struct SemipermModel(ModelSpec);

/// A cached sequence of walk counts.
pub struct SemipermTerms(TermCache);

/// Storage of enumerated counts.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemipermStorage {
    Exact = 0,
    /// Residues modulo the prime given alongside.
    Modular = 1,
    /// Natural logarithms from a floating-point run.
    Log = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemipermKind {
    Totals = 0,
    Returns = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(e: &Error) -> SemipermStatus {
    match e {
        Error::InvalidModel(_) => SemipermStatus::InvalidModel,
        Error::ResourceLimit { .. } => SemipermStatus::ResourceLimit,
        Error::InsufficientTerms { .. } => SemipermStatus::InsufficientTerms,
        Error::Parse(_) | Error::ParseLine { .. } | Error::Json(_) => SemipermStatus::Parse,
        Error::Io(_) => SemipermStatus::Io,
        Error::Unsupported(_) | Error::NoHalf(_) => SemipermStatus::Unsupported,
        _ => SemipermStatus::InvalidArgument,
    }
}

/// Runs `body`, recording any error or panic for the calling thread.
fn guarded(body: impl FnOnce() -> Result<(), (SemipermStatus, String)>) -> SemipermStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            SemipermStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SemipermStatus::Internal
        }
    }
}

fn lib<T>(r: semiperm::Result<T>) -> Result<T, (SemipermStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SemipermStatus, String) {
    (SemipermStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SemipermStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SemipermStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), (SemipermStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, text: String) -> Result<(), (SemipermStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = CString::new(text).expect("no interior nul").into_raw();
    Ok(())
}

/// Message describing the last failure on this thread; empty after a
/// success. Owned by the library and valid until the next call.
#[no_mangle]
pub extern "C" fn semiperm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn semiperm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Looks up a catalog model (`S2`, `S3`, `S4a`, `S4b`, `S5`, `QP`, `TQP`).
///
/// # Safety
/// `id` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semiperm_model_catalog(id: *const c_char, out: *mut *mut SemipermModel) -> SemipermStatus {
    guarded(|| {
        let id = str_arg(id, "id")?;
        let model = catalog_model(id).ok_or((SemipermStatus::InvalidModel, format!("unknown model '{id}'")))?;
        put(out, SemipermModel(model))
    })
}

/// Parses a model from its JSON description.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semiperm_model_from_json(
    json: *const c_char,
    out: *mut *mut SemipermModel,
) -> SemipermStatus {
    guarded(|| {
        let model = lib(ModelSpec::from_json(str_arg(json, "json")?))?;
        put(out, SemipermModel(model))
    })
}

/// JSON description of a model.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semiperm_model_to_json(model: *const SemipermModel, out: *mut *mut c_char) -> SemipermStatus {
    guarded(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        put_string(out, model.0.to_json())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn semiperm_model_free(model: *mut SemipermModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Counts walks of lengths `0..=order`. `prime` is read only for modular
/// storage.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semiperm_enumerate(
    model: *const SemipermModel,
    order: usize,
    storage: SemipermStorage,
    prime: u32,
    kind: SemipermKind,
    out: *mut *mut SemipermTerms,
) -> SemipermStatus {
    guarded(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let storage = match storage {
            SemipermStorage::Exact => Storage::Exact,
            SemipermStorage::Modular => Storage::Mod(lib(semiperm::PrimeField::new(prime))?.p()),
            SemipermStorage::Log => Storage::Log,
        };
        let kind = match kind {
            SemipermKind::Totals => SequenceKind::Totals,
            SemipermKind::Returns => SequenceKind::Returns,
        };
        put(out, SemipermTerms(lib(TermCache::enumerate(&model.0, order, storage, kind))?))
    })
}

/// Reads a term cache file.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semiperm_terms_load(path: *const c_char, out: *mut *mut SemipermTerms) -> SemipermStatus {
    guarded(|| {
        let path = str_arg(path, "path")?;
        put(out, SemipermTerms(lib(TermCache::load(Path::new(path)))?))
    })
}

/// Writes a term cache file.
///
/// # Safety
/// `terms` must be a live handle and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn semiperm_terms_save(terms: *const SemipermTerms, path: *const c_char) -> SemipermStatus {
    guarded(|| {
        let terms = terms.as_ref().ok_or_else(|| null("terms"))?;
        lib(terms.0.save(Path::new(str_arg(path, "path")?)))
    })
}

/// Number of stored terms, or 0 for a null handle.
///
/// # Safety
/// `terms` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn semiperm_terms_len(terms: *const SemipermTerms) -> usize {
    terms.as_ref().map_or(0, |t| t.0.values.len())
}

/// Decimal text of an exact term.
///
/// # Safety
/// `terms` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semiperm_terms_get_decimal(
    terms: *const SemipermTerms,
    index: usize,
    out: *mut *mut c_char,
) -> SemipermStatus {
    guarded(|| {
        let terms = terms.as_ref().ok_or_else(|| null("terms"))?;
        let text = match &terms.0.values {
            TermValues::Exact(v) => v.get(index).map(ToString::to_string),
            TermValues::Mod { values, .. } => values.get(index).map(ToString::to_string),
            TermValues::Log(_) => return Err((SemipermStatus::OutOfRange, "log terms have no decimal form".into())),
        };
        put_string(out, text.ok_or((SemipermStatus::OutOfRange, format!("index {index} past the end")))?)
    })
}

/// A term reduced modulo `prime`; not available for log storage.
///
/// # Safety
/// `terms` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semiperm_terms_get_mod(
    terms: *const SemipermTerms,
    index: usize,
    prime: u32,
    out: *mut u32,
) -> SemipermStatus {
    guarded(|| {
        let terms = terms.as_ref().ok_or_else(|| null("terms"))?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        if index >= terms.0.values.len() {
            return Err((SemipermStatus::OutOfRange, format!("index {index} past the end")));
        }
        let single = match &terms.0.values {
            TermValues::Exact(v) => TermValues::Exact(vec![v[index].clone()]),
            TermValues::Mod { p, values } => TermValues::Mod {
                p: *p,
                values: vec![values[index]],
            },
            TermValues::Log(_) => TermValues::Log(Vec::new()),
        };
        let values = lib(single.residues(prime))?;
        *out = values[0];
        Ok(())
    })
}

/// Natural log of a term; `-inf` for a zero count.
///
/// # Safety
/// `terms` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semiperm_terms_get_log(terms: *const SemipermTerms, index: usize, out: *mut f64) -> SemipermStatus {
    guarded(|| {
        let terms = terms.as_ref().ok_or_else(|| null("terms"))?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = match &terms.0.values {
            TermValues::Exact(v) => v.get(index).map(semiperm::asymptotics::ln_bigint),
            TermValues::Log(v) => v.get(index).copied(),
            TermValues::Mod { .. } => {
                return Err((SemipermStatus::OutOfRange, "modular terms have no logarithm".into()))
            }
        }
        .ok_or((SemipermStatus::OutOfRange, format!("index {index} past the end")))?;
        Ok(())
    })
}

/// # Safety
/// `terms` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn semiperm_terms_free(terms: *mut SemipermTerms) {
    if !terms.is_null() {
        drop(Box::from_raw(terms));
    }
}

/// Runs a named check (`kernel-q`, `s2-forms`, `s3-form`, `star`,
/// `x0-identity`, `feq`, `orbit`) through `t^order` with default options.
/// `passed` receives 1 or 0; `report` receives the one-line outcome and may
/// be null.
///
/// # Safety
/// `name` must be a nul-terminated string and `passed` a valid pointer;
/// `report` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn semiperm_check(
    name: *const c_char,
    order: usize,
    passed: *mut i32,
    report: *mut *mut c_char,
) -> SemipermStatus {
    guarded(|| {
        let kind: CheckKind = lib(str_arg(name, "name")?.parse())?;
        if passed.is_null() {
            return Err(null("passed"));
        }
        let outcome = lib(run_check(kind, order, &CheckOptions::default()))?;
        *passed = outcome.passed.into();
        if !report.is_null() {
            put_string(report, outcome.to_string())?;
        }
        Ok(())
    })
}

/// Recurrence search over shapes with `(r+1)(d+1) <= budget`; writes the
/// report as JSON. Exact terms are reduced modulo `prime`.
///
/// # Safety
/// `terms` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semiperm_guess_json(
    terms: *const SemipermTerms,
    prime: u32,
    budget: usize,
    holdout: f64,
    out: *mut *mut c_char,
) -> SemipermStatus {
    guarded(|| {
        let terms = terms.as_ref().ok_or_else(|| null("terms"))?;
        let p = match &terms.0.values {
            TermValues::Mod { p, .. } => *p,
            _ => prime,
        };
        let residues = lib(terms.0.values.residues(p))?;
        let report = lib(guess_search(&[(p, residues)], SearchOptions { budget, holdout }))?;
        put_string(out, report.to_json())
    })
}

/// Fits `c mu^n n^alpha` and writes the fit as JSON. Return counts are
/// fitted on their even terms.
///
/// # Safety
/// `terms` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semiperm_asymptotics_json(
    terms: *const SemipermTerms,
    kind: SemipermKind,
    depth: usize,
    out: *mut *mut c_char,
) -> SemipermStatus {
    guarded(|| {
        let terms = terms.as_ref().ok_or_else(|| null("terms"))?;
        let fitted = match (&terms.0.values, kind) {
            (TermValues::Exact(v), SemipermKind::Totals) => fit(v, depth),
            (TermValues::Exact(v), SemipermKind::Returns) => fit_returns(v, depth),
            (TermValues::Log(v), SemipermKind::Returns) => fit_returns_logs(v, depth),
            (TermValues::Log(v), SemipermKind::Totals) => fit_logs(
                &LogTerms {
                    start: 0,
                    values: v.iter().map(|&x| LogValue::from_f64_ln(x)).collect(),
                },
                depth,
            ),
            (TermValues::Mod { .. }, _) => Err(Error::Unsupported("asymptotics needs exact or log terms".into())),
        };
        let text = serde_json::to_string(&lib(fitted)?).expect("serializable");
        put_string(out, text)
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn semiperm_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn status_mapping() {
        assert_eq!(
            status_of(&Error::ResourceLimit { needed: 2, budget: 1 }),
            SemipermStatus::ResourceLimit
        );
        assert_eq!(status_of(&Error::Parse("x".into())), SemipermStatus::Parse);
    }

    #[test]
    fn panics_become_internal() {
        let status = guarded(|| panic!("boom"));
        assert_eq!(status, SemipermStatus::Internal);
        let msg = unsafe { CStr::from_ptr(semiperm_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
    }

    #[test]
    fn null_handles_are_rejected() {
        let mut out = ptr::null_mut();
        let status = unsafe { semiperm_model_catalog(ptr::null(), &mut out) };
        assert_eq!(status, SemipermStatus::NullPointer);
        assert!(out.is_null());
        assert_eq!(unsafe { semiperm_terms_len(ptr::null()) }, 0);
    }
}
