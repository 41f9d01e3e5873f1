use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use bscrit_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    bscrit_string_free(s);
    out
}

unsafe fn last_error() -> String {
    let p = bscrit_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

#[test]
fn critical_order() {
    let (mut num, mut den) = (0i64, 0i64);
    unsafe {
        assert_eq!(bscrit_critical_order(c("4").as_ptr(), c("4").as_ptr(), 1, 0, &mut num, &mut den), BSCRIT_OK);
        assert_eq!((num, den), (-1, 2));
        // 1 - x - y = 1/2 only matters without the tilde
        assert_eq!(bscrit_critical_order(c("inf").as_ptr(), c("inf").as_ptr(), 2, 0, &mut num, &mut den), BSCRIT_OK);
        assert_eq!((num, den), (-2, 1));
        assert_eq!(bscrit_critical_order(c("inf").as_ptr(), c("inf").as_ptr(), 2, 1, &mut num, &mut den), BSCRIT_OK);
        assert_eq!((num, den), (-1, 1));
        assert_eq!(bscrit_critical_order(c("0").as_ptr(), c("2").as_ptr(), 1, 0, &mut num, &mut den), BSCRIT_CONFIG);
        assert_eq!(bscrit_critical_order(ptr::null(), c("2").as_ptr(), 1, 0, &mut num, &mut den), BSCRIT_NULL_POINTER);
        assert!(last_error().contains("p1"));
    }
}

#[test]
fn invalid_utf8() {
    let bytes = [0xffu8, 0];
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(bscrit_config_parse(bytes.as_ptr().cast(), &mut out), BSCRIT_UTF8);
    }
    assert!(out.is_null());
}

#[test]
fn derivation_handles() {
    unsafe {
        let mut trace = ptr::null_mut();
        let code = bscrit_derive(c("2").as_ptr(), c("2").as_ptr(), c("2").as_ptr(), c("1/2").as_ptr(), 1, &mut trace);
        assert_eq!(code, BSCRIT_CONTRADICTION);
        let mut concl = -5;
        assert_eq!(bscrit_trace_conclusion(trace, &mut concl), BSCRIT_OK);
        assert_eq!(concl, BSCRIT_CONCLUSION_CONTRADICTION);
        let mut steps = 0usize;
        assert_eq!(bscrit_trace_step_count(trace, &mut steps), BSCRIT_OK);
        assert!(steps >= 2);
        assert_eq!(bscrit_trace_replay(trace), BSCRIT_OK);
        let mut text = ptr::null_mut();
        assert_eq!(bscrit_trace_text(trace, &mut text), BSCRIT_OK);
        assert!(take(text).ends_with("# conclusion Contradiction\n"));
        bscrit_trace_free(trace);

        let mut trace = ptr::null_mut();
        let code = bscrit_derive(c("4").as_ptr(), c("4/3").as_ptr(), c("1").as_ptr(), c("1/3").as_ptr(), 1, &mut trace);
        assert_eq!(code, BSCRIT_OK);
        bscrit_trace_free(trace);

        let mut trace = ptr::null_mut();
        let code = bscrit_derive(c("2").as_ptr(), c("2").as_ptr(), c("1").as_ptr(), c("3/2").as_ptr(), 1, &mut trace);
        assert_eq!(code, BSCRIT_CONFIG);
        assert!(trace.is_null());
        assert!(last_error().contains("rho"));

        assert_eq!(bscrit_trace_replay(ptr::null()), BSCRIT_NULL_POINTER);
        bscrit_trace_free(ptr::null_mut());
    }
}

#[test]
fn config_and_blowup() {
    unsafe {
        let mut cfg = ptr::null_mut();
        let code = bscrit_config_for_triple(c("2").as_ptr(), c("2").as_ptr(), c("2").as_ptr(), c("1/2").as_ptr(), &mut cfg);
        assert_eq!(code, BSCRIT_OK);
        assert_eq!(bscrit_config_set_j_range(cfg, 9, 4), BSCRIT_CONFIG);
        assert_eq!(bscrit_config_set_j_range(cfg, 4, 7), BSCRIT_OK);
        let mut text = ptr::null_mut();
        assert_eq!(bscrit_config_to_text(cfg, &mut text), BSCRIT_OK);
        let text = take(text);
        assert!(text.contains("j_min = 4\nj_max = 7\n"));

        let mut report = ptr::null_mut();
        let code = bscrit_run_blowup(cfg, &mut report);
        assert!(code == BSCRIT_OK || code == BSCRIT_CHECK_FAILED);
        assert!(!report.is_null());
        let mut verdict = -7;
        assert_eq!(bscrit_report_verdict(report, &mut verdict), BSCRIT_OK);
        assert!(verdict == BSCRIT_VERDICT_UNBOUNDED_WITNESS || verdict == BSCRIT_VERDICT_CONSISTENT);
        let mut count = 0usize;
        assert_eq!(bscrit_report_check_count(report, &mut count), BSCRIT_OK);
        assert_eq!(count, 1);
        let (mut fitted, mut predicted, mut pass) = (0.0, 0.0, -1);
        assert_eq!(bscrit_report_check(report, 0, &mut fitted, &mut predicted, &mut pass), BSCRIT_OK);
        assert!((predicted - 0.2).abs() < 1e-12);
        assert_eq!(pass == 1, code == BSCRIT_OK);
        assert_eq!(bscrit_report_check(report, 1, &mut fitted, &mut predicted, &mut pass), BSCRIT_CONFIG);
        let mut json = ptr::null_mut();
        assert_eq!(bscrit_report_json(report, &mut json), BSCRIT_OK);
        let parsed = bscrit::harness::ScalingReport::from_json(&take(json)).unwrap();
        assert_eq!(parsed.rows.len(), 4);
        bscrit_report_free(report);

        // text configs go through the same parser as the CLI
        let mut other = ptr::null_mut();
        assert_eq!(bscrit_config_parse(c(&text).as_ptr(), &mut other), BSCRIT_OK);
        bscrit_config_free(other);
        bscrit_config_free(cfg);

        let mut bad = ptr::null_mut();
        assert_eq!(bscrit_config_parse(c("rho = 2").as_ptr(), &mut bad), BSCRIT_CONFIG);
        assert!(bad.is_null());
        assert!(last_error().contains("rho"));
        assert_eq!(bscrit_run_lemma_suite(ptr::null(), &mut report), BSCRIT_NULL_POINTER);
    }
}

// `cargo test` does not rebuild the static library, so the C side is only compiled
// here; the same entry points run above through the Rust bindings.
#[test]
fn header_compiles_as_c() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let out = tempfile::tempdir().unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-c"])
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-o")
        .arg(out.path().join("smoke.o"))
        .status()
        .unwrap();
    assert!(status.success());
}
