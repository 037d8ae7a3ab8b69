//! Exercises the C ABI from Rust: status codes, ownership rules, and the
//! generated header.

use a11ymeter_ffi::*;
use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take_string(ptr: *mut libc::c_char) -> String {
    assert!(!ptr.is_null());
    let out = CStr::from_ptr(ptr).to_str().unwrap().to_string();
    am_string_free(ptr);
    out
}

fn last_error() -> String {
    unsafe {
        CStr::from_ptr(am_last_error())
            .to_str()
            .unwrap()
            .to_string()
    }
}

#[test]
fn version_is_non_null() {
    let version = unsafe { CStr::from_ptr(am_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn full_session_round_trip() {
    unsafe {
        let session = am_audit_new();
        assert!(!session.is_null());

        let config = cstr(r#"{"languages": {"state": "uk"}}"#);
        assert_eq!(
            am_audit_set_config_json(session, config.as_ptr()),
            AmStatus::Ok
        );

        let html = br#"<html lang="uk"><body><h1>Title</h1><p>Text</p>
            <img src="a.png" alt="Campus map"><img src="b.png">
            <a href="/next">next</a></body></html>"#;
        let origin = cstr("home.html");
        assert_eq!(
            am_audit_add_page(session, origin.as_ptr(), html.as_ptr(), html.len(), 0),
            AmStatus::Ok
        );

        let mut out: *mut libc::c_char = ptr::null_mut();
        assert_eq!(
            am_audit_run(session, AmFormat::Json, &mut out),
            AmStatus::Ok
        );
        let report: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(report["schema"], 1);
        assert_eq!(report["pages"][0]["origin"], "home.html");
        assert_eq!(report["attributes"][0]["numerator"], 1.0);
        assert_eq!(report["attributes"][0]["denominator"], 2.0);

        // The session can be rendered again in another format.
        let mut md: *mut libc::c_char = ptr::null_mut();
        assert_eq!(
            am_audit_run(session, AmFormat::Markdown, &mut md),
            AmStatus::Ok
        );
        assert!(take_string(md).contains("# Accessibility audit"));

        am_audit_free(session);
    }
}

#[test]
fn null_arguments_are_rejected() {
    unsafe {
        assert_eq!(
            am_audit_set_config_json(ptr::null_mut(), ptr::null()),
            AmStatus::NullArgument
        );
        let session = am_audit_new();
        let origin = cstr("x");
        assert_eq!(
            am_audit_add_page(session, ptr::null(), b"x".as_ptr(), 1, 0),
            AmStatus::NullArgument
        );
        assert_eq!(
            am_audit_add_page(session, origin.as_ptr(), ptr::null(), 0, 0),
            AmStatus::NullArgument
        );
        let mut out: *mut libc::c_char = ptr::null_mut();
        assert_eq!(
            am_audit_run(ptr::null_mut(), AmFormat::Json, &mut out),
            AmStatus::NullArgument
        );
        assert!(!last_error().is_empty());
        am_audit_free(session);
        am_audit_free(ptr::null_mut()); // tolerated
        am_string_free(ptr::null_mut()); // tolerated
    }
}

#[test]
fn config_errors_carry_messages() {
    unsafe {
        let session = am_audit_new();
        let broken = cstr("{not json");
        assert_eq!(
            am_audit_set_config_json(session, broken.as_ptr()),
            AmStatus::InvalidJson
        );
        assert!(last_error().contains("config JSON"));

        let bad_weights = cstr(r#"{"weights": {"UAC-1-G": 0.9}}"#);
        assert_eq!(
            am_audit_set_config_json(session, bad_weights.as_ptr()),
            AmStatus::InvalidConfig
        );
        assert!(last_error().contains("sum to 1"));

        // Null config resets to defaults.
        assert_eq!(am_audit_set_config_json(session, ptr::null()), AmStatus::Ok);
        assert!(last_error().is_empty());
        am_audit_free(session);
    }
}

#[test]
fn unparseable_page_fails_the_run() {
    unsafe {
        let session = am_audit_new();
        let origin = cstr("noise.bin");
        let junk = b"no markup at all";
        assert_eq!(
            am_audit_add_page(session, origin.as_ptr(), junk.as_ptr(), junk.len(), 0),
            AmStatus::Ok
        );
        let mut out: *mut libc::c_char = ptr::null_mut();
        assert_eq!(
            am_audit_run(session, AmFormat::Json, &mut out),
            AmStatus::ParseFailed
        );
        assert!(out.is_null());
        assert!(last_error().contains("noise.bin"));
        am_audit_free(session);
    }
}

#[test]
fn score_report_reproduces_reference_value() {
    let scores = cstr(
        r#"{
            "UAC-1.1.1-G": 0.15, "UAC-1.1.2-G": 0.99, "UAC-1.1.3-G": 0.0,
            "UAC-1.2.1-G": 1.0, "UAC-1.2.2-G": 0.47,
            "UAC-1.3.1-G": 1.0, "UAC-1.3.2-G": 0.0, "UAC-1.3.3-G": 0.83,
            "UAC-2.1-S": 0.8
        }"#,
    );
    unsafe {
        let mut out: *mut libc::c_char = ptr::null_mut();
        assert_eq!(
            am_score_report(scores.as_ptr(), ptr::null(), AmFormat::Markdown, &mut out),
            AmStatus::Ok
        );
        let report = take_string(out);
        assert!(report.contains("| UAC | 0.67916 |"), "report:\n{report}");

        let oob = cstr(r#"{"UAC-1.1.1-G": 2.0}"#);
        let mut out: *mut libc::c_char = ptr::null_mut();
        assert_eq!(
            am_score_report(oob.as_ptr(), ptr::null(), AmFormat::Json, &mut out),
            AmStatus::InvalidConfig
        );
    }
}

#[test]
fn facts_json_lists_elements() {
    let html = br#"<body><img src="a.png" alt="Campus map"><video></video></body>"#;
    let origin = cstr("page.html");
    unsafe {
        let mut out: *mut libc::c_char = ptr::null_mut();
        assert_eq!(
            am_facts_json(origin.as_ptr(), html.as_ptr(), html.len(), 2, &mut out),
            AmStatus::Ok
        );
        let dump: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(dump["path_depth"], 2);
        assert_eq!(dump["facts"]["images_total"], 1);
        assert_eq!(
            dump["elements"]["media"][0]["reference"],
            "page.html::media[0]"
        );
    }
}

#[test]
fn scalar_helpers() {
    assert_eq!(am_contrast_ratio(0, 0, 0, 255, 255, 255), 21.0);
    assert_eq!(am_contrast_ratio(0x12, 0x34, 0x56, 0x12, 0x34, 0x56), 1.0);
    assert_eq!(am_relative_luminance(255, 255, 255), 1.0);

    assert_eq!(am_classify(0.0), 0);
    assert_eq!(am_classify(0.67916), 4);
    assert_eq!(am_classify(0.5), 3);
    assert_eq!(am_classify(1.5), -1);
    unsafe {
        assert_eq!(
            CStr::from_ptr(am_level_name(4)).to_str().unwrap(),
            "excellent"
        );
        assert_eq!(
            CStr::from_ptr(am_level_name(0)).to_str().unwrap(),
            "very poor"
        );
        assert!(am_level_name(9).is_null());
        assert!(am_level_name(-1).is_null());
    }
}

#[test]
fn generated_header_declares_the_api() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/a11ymeter.h");
    let text = std::fs::read_to_string(&header).expect("header generated at build time");
    for symbol in [
        "am_audit_new",
        "am_audit_free",
        "am_audit_set_config_json",
        "am_audit_add_page",
        "am_audit_run",
        "am_score_report",
        "am_facts_json",
        "am_contrast_ratio",
        "am_classify",
        "am_string_free",
        "am_last_error",
        "AM_STATUS_OK",
    ] {
        assert!(text.contains(symbol), "header missing {symbol}");
    }

    // When a C compiler is around, make sure the header stands alone.
    let cc = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", header.to_str().unwrap()])
        .output();
    if let Ok(output) = cc {
        assert!(
            output.status.success(),
            "header does not compile: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
}
