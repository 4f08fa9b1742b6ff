use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

use latticewave_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

/// Copies and frees a library string.
unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    lw_string_free(s);
    out
}

unsafe fn last_error() -> String {
    let p = lw_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_str().unwrap().to_string()
}

unsafe fn matrix(spec: &str) -> *mut LwMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(lw_matrix_new(cstr(spec).as_ptr(), &mut m), LwStatus::Ok);
    m
}

unsafe fn set(spec: &str) -> *mut LwSet {
    let mut s = ptr::null_mut();
    assert_eq!(lw_set_new(cstr(spec).as_ptr(), &mut s), LwStatus::Ok);
    s
}

#[test]
fn digits_of_quincunx() {
    unsafe {
        let m = matrix("quincunx");
        let (mut n, mut a) = (0usize, 0u64);
        assert_eq!(lw_matrix_info(m, &mut n, &mut a), LwStatus::Ok);
        assert_eq!((n, a), (2, 2));
        let mut json = ptr::null_mut();
        assert_eq!(lw_matrix_digits(m, &mut json), LwStatus::Ok);
        assert_eq!(take(json), r#"{"digits":[[0,0],[1,0]],"a":2}"#);
        lw_matrix_free(m);
    }
}

#[test]
fn matrix_from_json_and_rejections() {
    unsafe {
        let m = matrix(r#"{"matrix": [[0, 1], [2, 0]]}"#);
        let mut a = 0u64;
        assert_eq!(lw_matrix_info(m, ptr::null_mut(), &mut a), LwStatus::Ok);
        assert_eq!(a, 2);
        lw_matrix_free(m);

        let mut bad = ptr::null_mut();
        assert_eq!(lw_matrix_new(cstr("[[1, 0], [0, 1]]").as_ptr(), &mut bad), LwStatus::InvalidMatrix);
        assert!(bad.is_null());
        assert!(last_error().contains("det"));
        assert_eq!(lw_matrix_new(cstr("not json").as_ptr(), &mut bad), LwStatus::Parse);
        assert_eq!(lw_matrix_new(ptr::null(), &mut bad), LwStatus::NullPointer);
    }
}

#[test]
fn error_message_is_cleared_by_success() {
    unsafe {
        let mut bad = ptr::null_mut();
        assert_eq!(lw_matrix_new(cstr("nope").as_ptr(), &mut bad), LwStatus::Parse);
        assert!(!lw_last_error().is_null());
        let m = matrix("dyadic1d");
        assert!(lw_last_error().is_null());
        lw_matrix_free(m);
    }
}

#[test]
fn catalog_sets_verify() {
    unsafe {
        let m = matrix("dyadic1d");
        for name in ["shannon-set", "journe-set"] {
            let s = set(name);
            let mut vol = ptr::null_mut();
            assert_eq!(lw_set_volume(s, &mut vol), LwStatus::Ok);
            assert_eq!(take(vol), "1/1");
            let mut report = ptr::null_mut();
            assert_eq!(lw_verify_set(s, m, 2000, 7, &mut report), LwStatus::Ok);
            let v: serde_json::Value = serde_json::from_str(&take(report)).unwrap();
            assert_eq!(v["translation_ok"], true);

            let mut w = ptr::null_mut();
            assert_eq!(lw_wavelet_indicator(s, m, &mut w), LwStatus::Ok);
            let mut class = 0i32;
            assert_eq!(lw_classify(w, 1000, 3, &mut class, ptr::null_mut()), LwStatus::Ok);
            assert_eq!(class, -1);
            lw_wavelet_free(w);
            lw_set_free(s);
        }
        lw_matrix_free(m);
    }
}

#[test]
fn failing_set_reports_check_failed() {
    unsafe {
        let m = matrix("dyadic1d");
        let s = set(r#"{"n": 1, "pieces": [{"halfspaces": [{"a": ["1"], "b": "3/2"}, {"a": ["-1"], "b": "-1/2"}]}]}"#);
        let mut report = ptr::null_mut();
        assert_eq!(lw_verify_set(s, m, 500, 1, &mut report), LwStatus::CheckFailed);
        let v: serde_json::Value = serde_json::from_str(&take(report)).unwrap();
        assert_eq!(v["dilation_ok"], false);
        assert!(!v["witnesses"].as_array().unwrap().is_empty());
        lw_set_free(s);
        lw_matrix_free(m);
    }
}

#[test]
fn dimension_mismatch_is_reported() {
    unsafe {
        let m = matrix("quincunx");
        let s = set("shannon-set");
        let mut w = ptr::null_mut();
        assert_eq!(lw_wavelet_indicator(s, m, &mut w), LwStatus::DimensionMismatch);
        assert!(w.is_null());
        lw_set_free(s);
        lw_matrix_free(m);
    }
}

#[test]
fn construct_and_classify_round_trip() {
    unsafe {
        let m = matrix("dyadic1d");
        let mut w = ptr::null_mut();
        let mut report = ptr::null_mut();
        assert_eq!(lw_construct(m, 2, 7, 500, &mut w, &mut report), LwStatus::Ok, "{}", last_error());
        let rep: serde_json::Value = serde_json::from_str(&take(report)).unwrap();
        assert_eq!(rep["exact"], true);

        let mut json = ptr::null_mut();
        assert_eq!(lw_wavelet_to_json(w, &mut json), LwStatus::Ok);
        let text = cstr(&take(json));
        let mut w2 = ptr::null_mut();
        assert_eq!(lw_wavelet_new(text.as_ptr(), ptr::null(), &mut w2), LwStatus::Ok);

        assert_eq!(lw_verify_wavelet(w2, 1000, 5, ptr::null_mut()), LwStatus::Ok);
        let mut class = -7;
        let mut doc = ptr::null_mut();
        assert_eq!(lw_classify(w2, 1000, 5, &mut class, &mut doc), LwStatus::Ok);
        assert_eq!(class, 2);
        assert!(take(doc).contains("\"M_2\""));
        lw_wavelet_free(w);
        lw_wavelet_free(w2);
        lw_matrix_free(m);
    }
}

#[test]
fn null_handles_are_rejected() {
    unsafe {
        let mut class = 0;
        assert_eq!(lw_classify(ptr::null(), 10, 0, &mut class, ptr::null_mut()), LwStatus::NullPointer);
        assert_eq!(lw_verify_set(ptr::null(), ptr::null(), 10, 0, ptr::null_mut()), LwStatus::NullPointer);
        lw_string_free(ptr::null_mut());
        lw_matrix_free(ptr::null_mut());
        lw_set_free(ptr::null_mut());
        lw_wavelet_free(ptr::null_mut());
    }
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(manifest_dir().join("include/latticewave.h")).unwrap();
    let source = std::fs::read_to_string(manifest_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    for ty in
        ["typedef struct LwMatrix LwMatrix;", "typedef struct LwSet LwSet;", "typedef struct LwWavelet LwWavelet;"]
    {
        assert!(header.contains(ty), "{ty}");
    }
}

/// Compiles and links a C client against the header and the static library.
#[test]
fn c_client_links_and_runs() {
    let Some(cc) =
        ["cc", "gcc", "clang"].into_iter().find(|c| std::process::Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let exe_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let mut build = std::process::Command::new(std::env::var("CARGO").unwrap_or_else(|_| "cargo".into()));
    build.args(["build", "-q", "-p", "latticewave-ffi", "--lib"]);
    if exe_dir.ends_with("release") {
        build.arg("--release");
    }
    assert!(build.status().unwrap().success());
    let lib = exe_dir.join("liblatticewave_ffi.a");
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("client.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <string.h>
#include "latticewave.h"
int main(void) {
    LwMatrix *m = NULL;
    LwSet *s = NULL;
    LwWavelet *w = NULL;
    char *digits = NULL;
    int32_t cls = 0;
    if (lw_matrix_new("quincunx", &m) != LW_STATUS_OK) return 10;
    if (lw_matrix_digits(m, &digits) != LW_STATUS_OK) return 11;
    if (strcmp(digits, "{\"digits\":[[0,0],[1,0]],\"a\":2}") != 0) return 12;
    lw_string_free(digits);
    lw_matrix_free(m);
    if (lw_matrix_new("dyadic1d", &m) != LW_STATUS_OK) return 13;
    if (lw_set_new("shannon-set", &s) != LW_STATUS_OK) return 14;
    if (lw_verify_set(s, m, 500, 7, NULL) != LW_STATUS_OK) return 15;
    if (lw_wavelet_indicator(s, m, &w) != LW_STATUS_OK) return 16;
    if (lw_classify(w, 500, 7, &cls, NULL) != LW_STATUS_OK || cls != -1) return 17;
    if (lw_matrix_new("[[1]]", &m) != LW_STATUS_INVALID_MATRIX || lw_last_error() == NULL) return 18;
    lw_wavelet_free(w);
    lw_set_free(s);
    lw_matrix_free(m);
    puts("ok");
    return 0;
}
"#,
    )
    .unwrap();
    let exe = tmp.path().join("client");
    let status = std::process::Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "client exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
