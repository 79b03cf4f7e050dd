use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use semiperm_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { semiperm_string_free(p) };
    s
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(semiperm_last_error()) }.to_str().unwrap().to_owned()
}

fn catalog(id: &str) -> *mut SemipermModel {
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { semiperm_model_catalog(cstr(id).as_ptr(), &mut model) }, SemipermStatus::Ok);
    model
}

fn enumerate(model: *const SemipermModel, order: usize, storage: SemipermStorage, prime: u32) -> *mut SemipermTerms {
    let mut terms = ptr::null_mut();
    let status = unsafe { semiperm_enumerate(model, order, storage, prime, SemipermKind::Totals, &mut terms) };
    assert_eq!(status, SemipermStatus::Ok, "{}", last_error());
    terms
}

#[test]
fn exact_terms_round_trip() {
    let model = catalog("S2");
    let terms = enumerate(model, 5, SemipermStorage::Exact, 0);
    assert_eq!(unsafe { semiperm_terms_len(terms) }, 6);
    let mut text = ptr::null_mut();
    let expected = ["1", "4", "14", "48", "170", "600"];
    for (i, want) in expected.iter().enumerate() {
        assert_eq!(unsafe { semiperm_terms_get_decimal(terms, i, &mut text) }, SemipermStatus::Ok);
        assert_eq!(take_string(text), *want);
    }
    let mut r = 0u32;
    assert_eq!(unsafe { semiperm_terms_get_mod(terms, 5, 7, &mut r) }, SemipermStatus::Ok);
    assert_eq!(r, 600 % 7);
    let mut ln = 0.0;
    assert_eq!(unsafe { semiperm_terms_get_log(terms, 3, &mut ln) }, SemipermStatus::Ok);
    assert!((ln - 48f64.ln()).abs() < 1e-12);

    assert_eq!(
        unsafe { semiperm_terms_get_decimal(terms, 6, &mut text) },
        SemipermStatus::OutOfRange
    );
    assert!(last_error().contains("past the end"));

    let dir = tempfile::tempdir().unwrap();
    let path = cstr(dir.path().join("s2.txt").to_str().unwrap());
    assert_eq!(unsafe { semiperm_terms_save(terms, path.as_ptr()) }, SemipermStatus::Ok);
    let mut loaded = ptr::null_mut();
    assert_eq!(unsafe { semiperm_terms_load(path.as_ptr(), &mut loaded) }, SemipermStatus::Ok);
    assert_eq!(unsafe { semiperm_terms_len(loaded) }, 6);

    unsafe {
        semiperm_terms_free(loaded);
        semiperm_terms_free(terms);
        semiperm_model_free(model);
    }
}

#[test]
fn modular_storage_and_bad_prime() {
    let model = catalog("QP");
    let terms = enumerate(model, 4, SemipermStorage::Modular, 5);
    let mut r = 0u32;
    // 1, 2, 6, 18, 60
    assert_eq!(unsafe { semiperm_terms_get_mod(terms, 3, 5, &mut r) }, SemipermStatus::Ok);
    assert_eq!(r, 3);
    assert_eq!(unsafe { semiperm_terms_get_mod(terms, 3, 7, &mut r) }, SemipermStatus::InvalidArgument);
    let mut ln = 0.0;
    assert_eq!(unsafe { semiperm_terms_get_log(terms, 0, &mut ln) }, SemipermStatus::OutOfRange);

    let mut none = ptr::null_mut();
    let status = unsafe { semiperm_enumerate(model, 4, SemipermStorage::Modular, 8, SemipermKind::Totals, &mut none) };
    assert_eq!(status, SemipermStatus::InvalidArgument);
    assert!(none.is_null());
    unsafe {
        semiperm_terms_free(terms);
        semiperm_model_free(model);
    }
}

#[test]
fn models_from_json() {
    let model = catalog("S5");
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { semiperm_model_to_json(model, &mut json) }, SemipermStatus::Ok);
    let json = cstr(&take_string(json));
    let mut copy = ptr::null_mut();
    assert_eq!(unsafe { semiperm_model_from_json(json.as_ptr(), &mut copy) }, SemipermStatus::Ok);
    let a = enumerate(model, 10, SemipermStorage::Modular, 45007);
    let b = enumerate(copy, 10, SemipermStorage::Modular, 45007);
    for i in 0..11 {
        let (mut x, mut y) = (0, 0);
        unsafe {
            semiperm_terms_get_mod(a, i, 45007, &mut x);
            semiperm_terms_get_mod(b, i, 45007, &mut y);
        }
        assert_eq!(x, y);
    }
    let mut bad = ptr::null_mut();
    assert_eq!(
        unsafe { semiperm_model_from_json(cstr("{").as_ptr(), &mut bad) },
        SemipermStatus::Parse
    );
    assert_eq!(
        unsafe { semiperm_model_catalog(cstr("S9").as_ptr(), &mut bad) },
        SemipermStatus::InvalidModel
    );
    unsafe {
        semiperm_terms_free(a);
        semiperm_terms_free(b);
        semiperm_model_free(copy);
        semiperm_model_free(model);
    }
}

#[test]
fn checks_guessing_and_fits() {
    let mut passed = -1;
    let mut report = ptr::null_mut();
    let status = unsafe { semiperm_check(cstr("kernel-q").as_ptr(), 12, &mut passed, &mut report) };
    assert_eq!(status, SemipermStatus::Ok);
    assert_eq!(passed, 1);
    assert_eq!(take_string(report), "PASS kernel-q through t^12");
    assert_eq!(
        unsafe { semiperm_check(cstr("nope").as_ptr(), 3, &mut passed, ptr::null_mut()) },
        SemipermStatus::Parse
    );

    let model = catalog("S2");
    let terms = enumerate(model, 120, SemipermStorage::Exact, 0);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { semiperm_guess_json(terms, 45007, 24, 0.25, &mut json) }, SemipermStatus::Ok);
    let report: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert!(!report["found"].as_array().unwrap().is_empty());

    assert_eq!(
        unsafe { semiperm_asymptotics_json(terms, SemipermKind::Totals, 6, &mut json) },
        SemipermStatus::Ok
    );
    let fit: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert!((fit["mu"].as_f64().unwrap() - 4.0).abs() < 1e-3);
    unsafe {
        semiperm_terms_free(terms);
        semiperm_model_free(model);
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/semiperm.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["semiperm_enumerate", "semiperm_terms_free", "semiperm_last_error", "SEMIPERM_STATUS_RESOURCE_LIMIT"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c"]).arg(&header).output() else {
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
