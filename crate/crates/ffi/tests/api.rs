use std::ffi::{CStr, CString};
use std::ptr;

use cexpr_ffi::*;

const FOUR_CONSTRAINT: &str = r#"{
  "basis": ["monomial:0", "monomial:1", "monomial:2", "monomial:3"],
  "constraints": [
    {"derivative": {"x": -1, "d": 2, "v": 0}},
    {"point": {"x": 0, "y": 0}},
    {"point": {"x": 2, "y": 0}},
    {"derivative": {"x": 2, "d": 1, "v": 0}}
  ],
  "free": "sin(x)"
}"#;

fn load(json: &str) -> (CexprStatus, *mut CexprProblem) {
    let text = CString::new(json).unwrap();
    let mut p = ptr::null_mut();
    let status = unsafe { cexpr_problem_from_json(text.as_ptr(), &mut p) };
    (status, p)
}

fn last_error() -> String {
    let p = cexpr_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn engine_round_trip() {
    let (status, p) = load(FOUR_CONSTRAINT);
    assert_eq!(status, CexprStatus::Ok, "{}", last_error());
    unsafe {
        let mut n = 0;
        assert_eq!(cexpr_constraint_count(p, 0, &mut n), CexprStatus::Ok);
        assert_eq!(n, 4);
        let mut members = 0;
        assert_eq!(cexpr_member_count(p, &mut members), CexprStatus::Ok);
        assert_eq!(members, 1);

        let mut y = f64::NAN;
        assert_eq!(cexpr_evaluate(p, 0, 0.0, 0, &mut y), CexprStatus::Ok);
        assert!(y.abs() < 1e-14);
        assert_eq!(cexpr_evaluate(p, 0, 2.0, 1, &mut y), CexprStatus::Ok);
        assert!(y.abs() < 1e-13);

        let mut beta = [0.0; 4];
        let mut len = 0;
        assert_eq!(cexpr_beta(p, 0, 0.0, 0, beta.as_mut_ptr(), 4, &mut len), CexprStatus::Ok);
        assert_eq!(len, 4);
        for (k, b) in beta.iter().enumerate() {
            assert!((b - if k == 1 { 1.0 } else { 0.0 }).abs() < 1e-14);
        }

        let mut r = [1.0; 4];
        assert_eq!(cexpr_residuals(p, 0, r.as_mut_ptr(), 4, &mut len), CexprStatus::Ok);
        assert!(r.iter().all(|v| v.abs() < 1e-12));

        let mut rcond = 0.0;
        assert_eq!(cexpr_rcond(p, 0, &mut rcond), CexprStatus::Ok);
        assert!(rcond > 1e-3 && rcond <= 1.0);

        let mut passed = 0;
        assert_eq!(cexpr_verify(p, 1e-8, &mut passed), CexprStatus::Ok);
        assert_eq!(passed, 1);
        cexpr_problem_free(p);
    }
}

#[test]
fn buffers_report_their_required_size() {
    let (_, p) = load(FOUR_CONSTRAINT);
    unsafe {
        let mut len = 0;
        assert_eq!(cexpr_sample_row(p, 1.0, 2, ptr::null_mut(), 0, &mut len), CexprStatus::BufferTooSmall);
        assert_eq!(len, 4);
        let mut row = vec![0.0; len];
        assert_eq!(cexpr_sample_row(p, 1.0, 2, row.as_mut_ptr(), len, &mut len), CexprStatus::Ok);
        assert_eq!(row[0], 1.0);
        let mut y = 0.0;
        cexpr_evaluate(p, 0, 1.0, 2, &mut y);
        assert_eq!(row[3], y);
        cexpr_problem_free(p);
    }
}

#[test]
fn error_codes() {
    let (status, p) = load("{ not json");
    assert_eq!(status, CexprStatus::InvalidInput);
    assert!(p.is_null());
    assert!(last_error().contains("JSON"));

    let singular = r#"{
      "basis": ["monomial:0", "monomial:1", "monomial:2", "monomial:3"],
      "constraints": [
        {"derivative": {"x": -1, "d": 3, "v": 0}},
        {"point": {"x": 0.5, "y": 1}},
        {"derivative": {"x": 0.5, "d": 3, "v": 0}},
        {"derivative": {"x": 2, "d": 3, "v": 0}}
      ]
    }"#;
    let (status, p) = load(singular);
    assert_eq!(status, CexprStatus::Singular);
    assert!(p.is_null());
    assert!(last_error().contains("rank 2"));

    unsafe {
        assert_eq!(cexpr_problem_from_json(ptr::null(), &mut ptr::null_mut()), CexprStatus::NullPointer);
        let bad = [0xffu8, 0];
        let mut out = ptr::null_mut();
        assert_eq!(cexpr_problem_from_json(bad.as_ptr().cast(), &mut out), CexprStatus::InvalidUtf8);
        let mut n = 0;
        assert_eq!(cexpr_member_count(ptr::null(), &mut n), CexprStatus::NullPointer);

        let (_, p) = load(FOUR_CONSTRAINT);
        assert_eq!(cexpr_constraint_count(p, 3, &mut n), CexprStatus::OutOfRange);
        let mut passed = 0;
        assert_eq!(cexpr_verify(p, -1.0, &mut passed), CexprStatus::InvalidInput);
        cexpr_problem_free(p);

        let (status, p) = load(r#"{"form": {"kind": "waring", "points": [[0, 1], [1, 3]]}, "free": "exp(x)"}"#);
        assert_eq!(status, CexprStatus::Ok, "{}", last_error());
        let mut y = 0.0;
        assert_eq!(cexpr_evaluate(p, 0, 1.0, 0, &mut y), CexprStatus::Ok);
        assert!((y - 3.0).abs() < 1e-14);
        assert_eq!(cexpr_constraint_count(p, 0, &mut n), CexprStatus::NotAnEngine);
        cexpr_problem_free(p);
        cexpr_problem_free(ptr::null_mut());
    }
    let name = unsafe { CStr::from_ptr(cexpr_status_name(CexprStatus::Singular)) };
    assert_eq!(name.to_str().unwrap(), "singular support matrix");
}

#[test]
fn seeded_ensembles_are_reproducible() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../specs/relative-random.json");
    let text = CString::new(std::fs::read_to_string(path).unwrap()).unwrap();
    let sample = |seed| unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(cexpr_problem_from_json_seeded(text.as_ptr(), seed, &mut p), CexprStatus::Ok);
        let mut members = 0;
        cexpr_member_count(p, &mut members);
        assert_eq!(members, 10);
        let mut row = vec![0.0; 11];
        let mut len = 0;
        assert_eq!(cexpr_sample_row(p, 0.3, 0, row.as_mut_ptr(), 11, &mut len), CexprStatus::Ok);
        cexpr_problem_free(p);
        row
    };
    assert_eq!(sample(7), sample(7));
    assert_ne!(sample(7), sample(8));
}

#[test]
fn header_is_current() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cexpr.h")).unwrap();
    for name in [
        "cexpr_problem_from_json",
        "cexpr_problem_free",
        "cexpr_evaluate",
        "cexpr_beta",
        "cexpr_residuals",
        "cexpr_last_error",
        "CEXPR_STATUS_SINGULAR",
        "typedef struct CexprProblem CexprProblem",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
