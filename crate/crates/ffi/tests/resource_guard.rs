use std::ffi::{CStr, CString};
use std::ptr;

use semiperm_ffi::*;

#[test]
fn resource_guard_is_reported() {
    // Runs in its own binary so the budget cannot leak into other tests.
    std::env::set_var("SEMIPERM_CELL_BUDGET", "10");
    let mut model = ptr::null_mut();
    let id = CString::new("S2").unwrap();
    assert_eq!(unsafe { semiperm_model_catalog(id.as_ptr(), &mut model) }, SemipermStatus::Ok);
    let mut terms = ptr::null_mut();
    let status = unsafe { semiperm_enumerate(model, 200, SemipermStorage::Exact, 0, SemipermKind::Totals, &mut terms) };
    std::env::remove_var("SEMIPERM_CELL_BUDGET");
    assert_eq!(status, SemipermStatus::ResourceLimit);
    let msg = unsafe { CStr::from_ptr(semiperm_last_error()) }.to_str().unwrap();
    assert!(msg.contains("budget"), "{msg}");
    unsafe { semiperm_model_free(model) };
}
