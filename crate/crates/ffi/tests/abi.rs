use std::ffi::{CStr, CString};
use std::ptr;

use dyadic_walsh_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(dw_last_error_message()) }.to_string_lossy().into_owned()
}

fn values(f: *const DwStepFunction) -> Vec<f64> {
    let mut len = 0usize;
    assert_eq!(unsafe { dw_step_function_len(f, &mut len) }, DwStatus::Ok);
    let mut buf = vec![0.0; len];
    assert_eq!(unsafe { dw_step_function_values_f64(f, buf.as_mut_ptr(), len) }, DwStatus::Ok);
    buf
}

#[test]
fn kernel_and_norms() {
    unsafe {
        let mut d3 = ptr::null_mut();
        assert_eq!(dw_dirichlet(3, 2, &mut d3), DwStatus::Ok);
        assert_eq!(values(d3), vec![3.0, 1.0, 1.0, -1.0]);
        let mut exact = 0;
        assert_eq!(dw_step_function_is_exact(d3, &mut exact), DwStatus::Ok);
        assert_eq!(exact, 1);
        let mut l1 = 0.0;
        assert_eq!(dw_lp_norm(d3, 1.0, &mut l1), DwStatus::Ok);
        assert_eq!(l1, 1.5);
        let mut weak = 0.0;
        assert_eq!(dw_weak_lp_norm(d3, 1.0, &mut weak), DwStatus::Ok);
        assert_eq!(weak, 1.0);
        let mut h = 0.0;
        assert_eq!(dw_hp_norm(d3, 1.0, &mut h), DwStatus::Ok);
        assert!(h >= l1);

        let mut c = [0.0; 4];
        assert_eq!(dw_fwht_f64(d3, c.as_mut_ptr(), 4), DwStatus::Ok);
        assert_eq!(c, [1.0, 1.0, 1.0, 0.0]);
        assert_eq!(dw_fwht_f64(d3, c.as_mut_ptr(), 3), DwStatus::BufferTooSmall);

        let mut s2 = ptr::null_mut();
        assert_eq!(dw_partial_sum(d3, 2, &mut s2), DwStatus::Ok);
        assert_eq!(values(s2), vec![2.0, 0.0, 2.0, 0.0]);
        dw_step_function_free(s2);
        dw_step_function_free(d3);
    }
}

#[test]
fn walsh_and_values_roundtrip() {
    unsafe {
        let mut w = ptr::null_mut();
        assert_eq!(dw_walsh(3, 2, &mut w), DwStatus::Ok);
        assert_eq!(values(w), vec![1.0, -1.0, -1.0, 1.0]);
        let mut json = ptr::null_mut();
        assert_eq!(dw_step_function_to_json(w, &mut json), DwStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(dw_step_function_from_json(json, &mut back), DwStatus::Ok);
        assert_eq!(values(back), values(w));
        let mut level = 0;
        assert_eq!(dw_step_function_level(back, &mut level), DwStatus::Ok);
        assert_eq!(level, 2);
        dw_string_free(json);
        dw_step_function_free(back);
        dw_step_function_free(w);

        let v = [0.5, -0.25, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0];
        let mut f = ptr::null_mut();
        assert_eq!(dw_step_function_from_values(3, v.as_ptr(), v.len(), &mut f), DwStatus::Ok);
        assert_eq!(values(f), v.to_vec());
        dw_step_function_free(f);
    }
}

#[test]
fn index_and_lebesgue() {
    unsafe {
        let mut e = DwIndexExpansion::default();
        assert_eq!(dw_index_expand(1025, &mut e), DwStatus::Ok);
        assert_eq!(e, DwIndexExpansion { order: 10, low: 0, gap: 10, variation: 4 });
        let mut l = 0.0;
        let mut s = ptr::null_mut();
        assert_eq!(dw_lebesgue_constant(3, &mut l, &mut s), DwStatus::Ok);
        assert_eq!(l, 1.5);
        assert_eq!(CStr::from_ptr(s).to_str().unwrap(), "3/2^1");
        dw_string_free(s);
        assert_eq!(dw_lebesgue_constant(5, &mut l, ptr::null_mut()), DwStatus::Ok);
        assert_eq!(l, 1.75);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(dw_dirichlet(9, 2, &mut f), DwStatus::OutOfRange);
        assert!(f.is_null());
        assert!(last_error().contains("out of range"));
        assert_eq!(dw_index_expand(0, ptr::null_mut()), DwStatus::NullPointer);
        let mut e = DwIndexExpansion::default();
        assert_eq!(dw_index_expand(0, &mut e), DwStatus::Domain);
        let v = [1.0; 3];
        assert_eq!(dw_step_function_from_values(2, v.as_ptr(), 3, &mut f), DwStatus::OutOfRange);
        let bad = CString::new("{not json").unwrap();
        assert_eq!(dw_step_function_from_json(bad.as_ptr(), &mut f), DwStatus::Parse);
        let mut x = 0.0;
        assert_eq!(dw_lp_norm(ptr::null(), 1.0, &mut x), DwStatus::NullPointer);
        assert_eq!(dw_walsh(1, 1, &mut f), DwStatus::Ok);
        assert_eq!(last_error(), "");
        assert_eq!(dw_lp_norm(f, -1.0, &mut x), DwStatus::Domain);
        dw_step_function_free(f);
        dw_step_function_free(ptr::null_mut());
        dw_string_free(ptr::null_mut());
        assert!(!CStr::from_ptr(dw_version()).to_bytes().is_empty());
    }
}

#[test]
fn header_parses_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/dyadic_walsh.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["dw_dirichlet", "dw_partial_sum", "dw_last_error_message", "DW_STATUS_OK", "DwStepFunction"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{header}\"\nint main(void) {{ DwStepFunction *f = 0; DwStatus s = dw_dirichlet(3, 2, &f); dw_step_function_free(f); return s == DW_STATUS_OK ? 0 : 1; }}\n"
        ),
    )
    .unwrap();
    match std::process::Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).status() {
        Ok(status) => assert!(status.success(), "header does not compile"),
        Err(_) => eprintln!("no C compiler; syntax check skipped"),
    }
}
