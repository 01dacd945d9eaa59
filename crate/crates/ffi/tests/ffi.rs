use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use bequest_core::earmarked::{earmarked_boundary, smooth_fit_solve};
use bequest_core::model::ModelParams;
use bequest_core::{controlled, predetermined, Model};
use bequest_ffi::*;

fn baseline() -> BqParams {
    let mut p = unsafe { std::mem::zeroed() };
    assert_eq!(unsafe { bq_params_baseline(&mut p) }, BqStatus::Ok);
    p
}

fn handle(p: &BqParams) -> *mut BqModel {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { bq_model_new(p, &mut m) }, BqStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe { bq_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn baseline_params_round_trip() {
    assert_eq!(ModelParams::from(baseline()), ModelParams::baseline());
}

#[test]
fn results_match_core() {
    let m = handle(&baseline());
    let core = Model::new(ModelParams::baseline()).unwrap();
    let pre = predetermined::solve(&core).unwrap();
    let ctl = controlled::solve(&core).unwrap();
    unsafe {
        let (mut b, mut c1, mut v) = (0.0, 0.0, 0.0);
        assert_eq!(bq_predetermined_boundary(m, &mut b, &mut c1), BqStatus::Ok);
        let fb = pre.boundary.unwrap();
        assert_eq!((b, c1), (fb.b, fb.c1));

        assert_eq!(bq_predetermined_value(m, 1.0, 1.0, &mut v), BqStatus::Ok);
        assert_eq!(v, pre.value(1.0, 1.0).unwrap());
        assert_eq!(bq_predetermined_wealth_boundary(m, 1.0, &mut v), BqStatus::Ok);
        assert_eq!(v, pre.primal_boundary(1.0).unwrap());
        assert_eq!(bq_controlled_value(m, 1.0, 1.0, &mut v), BqStatus::Ok);
        assert_eq!(v, ctl.value(1.0, 1.0).unwrap());

        let mut pol: BqPolicy = std::mem::zeroed();
        assert_eq!(bq_predetermined_policy(m, 1.0, 1.0, &mut pol), BqStatus::Ok);
        assert_eq!(pol, BqPolicy::from(pre.policy(1.0, 1.0).unwrap()));
        assert_eq!(pol.region, BqRegion::Continue);
        assert_eq!(bq_controlled_policy(m, 1.0, 1.0, &mut pol), BqStatus::Ok);
        assert_eq!(pol, BqPolicy::from(ctl.policy(1.0, 1.0).unwrap()));

        assert_eq!(bq_earmarked_boundary(m, 1.0, 10.0, &mut v), BqStatus::Ok);
        assert_eq!(v, earmarked_boundary(&core, 1.0, 10.0).unwrap().b_bar);
        bq_model_free(m);
    }
}

#[test]
fn earmarked_controlled_matches_core() {
    let mut p = baseline();
    p.gamma = 1.8;
    let m = handle(&p);
    let core = Model::new(p.into()).unwrap();
    let s = smooth_fit_solve(&core, 1.0).unwrap();
    let mut out: BqEarmarked = unsafe { std::mem::zeroed() };
    assert_eq!(unsafe { bq_earmarked_controlled(m, 1.0, &mut out) }, BqStatus::Ok);
    assert_eq!((out.b_tilde, out.l_bar), (s.b_tilde, s.l_bar));
    assert_eq!(out.conditions_ok, 1);
    unsafe { bq_model_free(m) };
}

#[test]
fn error_codes() {
    let mut p = baseline();
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(bq_model_new(ptr::null(), &mut m), BqStatus::NullPointer);
        p.sigma = -0.1;
        assert_eq!(bq_model_new(&p, &mut m), BqStatus::InvalidParams);
        assert!(m.is_null());
        assert!(!last_error().is_empty());

        let m = handle(&baseline());
        let mut v = 0.0;
        assert_eq!(bq_predetermined_value(m, 1.0, 1.0, ptr::null_mut()), BqStatus::NullPointer);
        assert_ne!(bq_predetermined_value(m, -1e6, 1.0, &mut v), BqStatus::Ok);
        assert!(!last_error().is_empty());
        bq_model_free(m);
        bq_model_free(ptr::null_mut());
    }
}

#[test]
fn last_error_truncates() {
    let mut m = ptr::null_mut();
    let mut p = baseline();
    p.sigma = -0.1;
    unsafe {
        bq_model_new(&p, &mut m);
        let full = bq_last_error(ptr::null_mut(), 0);
        let mut buf = [1 as std::ffi::c_char; 4];
        assert_eq!(bq_last_error(buf.as_mut_ptr(), 4), full);
        assert_eq!(buf[3], 0);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_bytes().len(), 3);
    }
}

#[test]
fn status_messages_are_distinct() {
    let all = [
        BqStatus::Ok,
        BqStatus::NullPointer,
        BqStatus::InvalidParams,
        BqStatus::Domain,
        BqStatus::Solver,
        BqStatus::Unsupported,
        BqStatus::Panic,
    ];
    let msgs: std::collections::HashSet<_> =
        all.iter().map(|s| unsafe { CStr::from_ptr(bq_status_message(*s)) }.to_str().unwrap()).collect();
    assert_eq!(msgs.len(), all.len());
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_lists_every_export() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let h = std::fs::read_to_string(dir.join("include/bequest.h")).unwrap();
    let src = std::fs::read_to_string(dir.join("src/lib.rs")).unwrap();
    for line in src.lines().filter(|l| l.contains("extern \"C\" fn ")) {
        let name = line.split("fn ").nth(1).unwrap().split('(').next().unwrap();
        assert!(h.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(h.contains("typedef struct BqModel BqModel;"));
}

#[test]
fn c_program_links_and_runs() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libbequest_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("C compiler");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    let b: f64 = text.split_whitespace().next().unwrap().parse().unwrap();
    let core = predetermined::solve(&Model::new(ModelParams::baseline()).unwrap()).unwrap();
    assert!((b / core.b().unwrap() - 1.0).abs() < 1e-8, "{text}");
}
