use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use kernelint_ffi::*;

fn last_error() -> String {
    let p = ki_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn brownian_sums_depend_on_tags() {
    unsafe {
        let mut k = ptr::null_mut();
        assert_eq!(ki_kernel_new_brownian_wn(&mut k), KiStatus::Ok);
        let (mut left, mut mid) = (f64::NAN, f64::NAN);
        assert_eq!(ki_riemann_sum(k, KiScheme::Uniform, KiTag::Left, 0, 64, &mut left), KiStatus::Ok);
        assert_eq!(ki_riemann_sum(k, KiScheme::Uniform, KiTag::Midpoint, 0, 64, &mut mid), KiStatus::Ok);
        assert_eq!((left, mid), (0.0, 0.5));

        let mut report = ptr::null_mut();
        assert_eq!(ki_estimate_self_integral(k, 1024, 1e-3, 1, &mut report), KiStatus::Ok);
        let mut verdict = KiVerdict::Converged;
        assert_eq!(ki_report_verdict(report, &mut verdict), KiStatus::Ok);
        assert_eq!(verdict, KiVerdict::TagDependent);
        let mut value = 0.0;
        assert_eq!(ki_report_value(report, &mut value), KiStatus::NotConverged);
        assert!(last_error().contains("brownian_wn"));
        ki_report_free(report);
        ki_kernel_free(k);
    }
}

#[test]
fn fbm_report_round_trips_through_json() {
    unsafe {
        let mut k = ptr::null_mut();
        let spec = CString::new(r#"{"name":"fbm","hurst":0.75}"#).unwrap();
        assert_eq!(ki_kernel_new_from_json(spec.as_ptr(), &mut k), KiStatus::Ok);
        assert!(ki_last_error_message().is_null());
        let mut report = ptr::null_mut();
        assert_eq!(ki_estimate_self_integral(k, 4096, 1e-3, 1, &mut report), KiStatus::Ok);
        let mut value = 0.0;
        assert_eq!(ki_report_value(report, &mut value), KiStatus::Ok);
        assert!((value - 0.5).abs() <= 1e-3);
        let mut json = ptr::null_mut();
        assert_eq!(ki_report_to_json(report, &mut json), KiStatus::Ok);
        let parsed: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(parsed["verdict"]["kind"], "converged");
        ki_string_free(json);
        ki_report_free(report);
        ki_kernel_free(k);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut k = ptr::null_mut();
        assert_eq!(ki_kernel_new_fbm(1.5, &mut k), KiStatus::InvalidArgument);
        assert!(k.is_null());
        assert!(last_error().contains("1.5"));

        let bad = CString::new(r#"{"name":"nope"}"#).unwrap();
        assert_eq!(ki_kernel_new_from_json(bad.as_ptr(), &mut k), KiStatus::Parse);
        assert_eq!(ki_kernel_new_from_json(ptr::null(), &mut k), KiStatus::NullArgument);

        assert_eq!(ki_kernel_new_singular(&mut k), KiStatus::Ok);
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(ki_kernel_domain(k, &mut lo, &mut hi), KiStatus::Ok);
        assert_eq!((lo, hi), (-1.0, 1.0));
        let mut v = 0.0;
        assert_eq!(ki_kernel_eval(k, 0.0, -1.0, 2.0, &mut v), KiStatus::OutsideDomain);
        assert_eq!(ki_kernel_eval(k, 0.0, 1.0, -1.0, &mut v), KiStatus::InvalidArgument);
        assert_eq!(ki_kernel_eval(k, 0.0, -1.0, 1.0, &mut v), KiStatus::Ok);
        assert!((v - 16.0 / 7.0).abs() < 1e-12);
        assert_eq!(ki_riemann_sum(k, KiScheme::Uniform, KiTag::Left, 0, 0, &mut v), KiStatus::InvalidArgument);
        assert_eq!(ki_riemann_sum(ptr::null(), KiScheme::Uniform, KiTag::Left, 0, 4, &mut v), KiStatus::NullArgument);
        ki_kernel_free(k);
        ki_kernel_free(ptr::null_mut());
    }
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(ki_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(crate_dir().join("include").join("kernelint.h")).unwrap();
    for name in [
        "typedef struct KiKernel KiKernel",
        "typedef struct KiReport KiReport",
        "KI_STATUS_FACTORIZATION = 4",
        "ki_kernel_new_fbm(double hurst, KiKernel **out)",
        "ki_estimate_self_integral",
        "ki_last_error_message(void)",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

fn static_lib() -> PathBuf {
    // tests live in target/<profile>/deps; the static library one level up.
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().join("libkernelint_ffi.a")
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = static_lib();
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let compiled = Command::new("cc")
        .arg(crate_dir().join("examples").join("smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("a C compiler is available");
    assert!(compiled.success());
    let run = Command::new(&bin).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{stdout}");
    assert!(stdout.contains("sum 0.500000 verdict 0 value 0.5"), "{stdout}");
    assert!(stdout.contains("bad hurst status 2"), "{stdout}");
}
