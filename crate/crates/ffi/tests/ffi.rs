use std::ffi::{CStr, CString};
use std::ptr;

use millerpole::cli::analyze_json;
use millerpole::netlist::{Circuit, TwoStageParams};
use millerpole_ffi::*;

fn two_stage() -> MpTwoStageParams {
    MpTwoStageParams { gm: 1e-3, r1: 1e6, r2: 3e5, c1: 1e-13, c2: 1e-11, cc: 1e-12, gm0: f64::NAN }
}

fn nmc(gm2: f64) -> MpNmcParams {
    MpNmcParams {
        gm0: 1e-4,
        gm1: 1e-4,
        gm2,
        r0: 1e6,
        r1: 1e6,
        r2: 1e6,
        c0: 1e-14,
        c1: 1e-14,
        c2: 1e-10,
        cc0: 1e-12,
        cc1: 5e-13,
    }
}

fn new_two_stage(p: &MpTwoStageParams) -> *mut MpCircuit {
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { mp_circuit_two_stage(p, &mut c) }, MpStatus::Ok);
    c
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(mp_last_error()) }.to_string_lossy().into_owned()
}

fn poles(c: *const MpCircuit, model: MpModel) -> Vec<MpComplex> {
    let mut len = 0;
    let st = unsafe { mp_circuit_poles(c, model, ptr::null_mut(), 0, &mut len) };
    assert!(st == MpStatus::BufferTooSmall || (st == MpStatus::Ok && len == 0));
    let mut buf = vec![MpComplex::default(); len];
    assert_eq!(unsafe { mp_circuit_poles(c, model, buf.as_mut_ptr(), buf.len(), &mut len) }, MpStatus::Ok);
    buf
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(mp_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn oracle_poles_match_quadratic() {
    let p = two_stage();
    let c = new_two_stage(&p);
    let got = poles(c, MpModel::Oracle);
    // 1 + s[R1C1 + R2C2 + (gmR1R2 + R1 + R2)Cc] + s²R1R2[C1C2 + Cc(C1 + C2)]
    let b1 = p.r1 * p.c1 + p.r2 * p.c2 + (p.gm * p.r1 * p.r2 + p.r1 + p.r2) * p.cc;
    let b2 = p.r1 * p.r2 * (p.c1 * p.c2 + p.cc * (p.c1 + p.c2));
    let d = (b1 * b1 - 4.0 * b2).sqrt();
    let q = -0.5 * (b1 + d);
    let want = [1.0 / q, q / b2];
    assert_eq!(got.len(), 2);
    for (g, w) in got.iter().zip(want) {
        assert!((g.re - w).abs() <= 1e-9 * w.abs() && g.im == 0.0, "{g:?} vs {w}");
    }
    unsafe { mp_circuit_free(c) };
}

#[test]
fn feedforward_adds_rhp_zero() {
    let p = two_stage();
    let c = new_two_stage(&p);
    let mut buf = [MpComplex::default(); 4];
    let mut len = 0;
    assert_eq!(unsafe { mp_circuit_zeros(c, MpModel::ClosedLoopFeedforward, buf.as_mut_ptr(), 4, &mut len) }, MpStatus::Ok);
    assert_eq!(len, 1);
    assert!((buf[0].re - p.gm / p.cc).abs() <= 1e-12 * p.gm / p.cc);
    assert_eq!(unsafe { mp_circuit_zeros(c, MpModel::ClosedLoop, buf.as_mut_ptr(), 4, &mut len) }, MpStatus::Ok);
    assert_eq!(len, 0);
    unsafe { mp_circuit_free(c) };
}

#[test]
fn invalid_parameter_reports_key() {
    let mut c = ptr::null_mut();
    let p = MpTwoStageParams { c2: -1.0, ..two_stage() };
    assert_eq!(unsafe { mp_circuit_two_stage(&p, &mut c) }, MpStatus::InvalidArgument);
    assert!(c.is_null());
    assert!(last_error().contains("c2"), "{}", last_error());
}

#[test]
fn null_pointers_rejected() {
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { mp_circuit_two_stage(ptr::null(), &mut c) }, MpStatus::NullPointer);
    assert_eq!(unsafe { mp_circuit_two_stage(&two_stage(), ptr::null_mut()) }, MpStatus::NullPointer);
    let mut s = std::mem::MaybeUninit::<MpSplit>::uninit();
    assert_eq!(unsafe { mp_circuit_split(ptr::null(), s.as_mut_ptr()) }, MpStatus::NullPointer);
    assert_eq!(unsafe { mp_locus_len(ptr::null()) }, 0);
    unsafe {
        mp_circuit_free(ptr::null_mut());
        mp_locus_free(ptr::null_mut());
        mp_string_free(ptr::null_mut());
    }
}

#[test]
fn two_pole_split_matches_closed_form() {
    let mut s = std::mem::MaybeUninit::<MpSplit>::uninit();
    assert_eq!(unsafe { mp_split_two_pole(-1.0, -1e4, 1e3, s.as_mut_ptr()) }, MpStatus::Ok);
    let s = unsafe { s.assume_init() };
    // p_cd = p_od/a0b0 and p_cnd = a0b0·p_ond
    assert!((s.p_cd.re + 1e-3).abs() <= 1e-15);
    assert!((s.p_cd.re * s.p_cnd1.re - 1e4).abs() <= 1e-9);
    assert!(s.p_cnd2.re.is_nan());
    let mut s = std::mem::MaybeUninit::<MpSplit>::uninit();
    assert_eq!(unsafe { mp_split_two_pole(-10.0, -1.0, 1e3, s.as_mut_ptr()) }, MpStatus::Numeric);
}

#[test]
fn pm_complex_pair_values() {
    let mut pm = 0.0;
    // ω_n = GBW, ξ = 1/√2: 90° − atan(√2/0) = 0°
    assert_eq!(unsafe { mp_pm_complex_pair(0.5f64.sqrt(), 1e8, 1e8, &mut pm) }, MpStatus::Ok);
    assert!(pm.abs() < 1e-9, "{pm}");
    assert_eq!(unsafe { mp_pm_complex_pair(0.5f64.sqrt(), 2e8, 1e8, &mut pm) }, MpStatus::Ok);
    let x = 0.5f64;
    let want = 90.0 - (2.0 * 0.5f64.sqrt() * x / (1.0 - x * x)).atan().to_degrees();
    assert!((pm - want).abs() < 1e-12);
    assert_eq!(unsafe { mp_pm_complex_pair(-1.0, 1.0, 1.0, &mut pm) }, MpStatus::InvalidArgument);
}

#[test]
fn nmc_stability_scenarios() {
    for (gm2, scenario) in [(1.0, MpScenario::Fig11a), (0.08, MpScenario::Fig11b), (0.04, MpScenario::Fig11c)] {
        let mut c = ptr::null_mut();
        assert_eq!(unsafe { mp_circuit_nmc(&nmc(gm2), &mut c) }, MpStatus::Ok);
        let mut r = std::mem::MaybeUninit::<MpStability>::uninit();
        assert_eq!(unsafe { mp_circuit_stability(c, 10.0, r.as_mut_ptr()) }, MpStatus::Ok);
        let r = unsafe { r.assume_init() };
        assert_eq!(r.scenario, scenario);
        assert!((r.gbw - 1e8).abs() <= 1e-6);
        assert!(r.pm_deg > 59.0 && r.pm_deg < 65.0);
        let mut t = MpTopology::TwoStage;
        assert_eq!(unsafe { mp_circuit_topology(c, &mut t) }, MpStatus::Ok);
        assert_eq!(t, MpTopology::Nmc);
        unsafe { mp_circuit_free(c) };
    }
}

#[test]
fn analyze_json_matches_library() {
    let p = two_stage();
    let c = new_two_stage(&p);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { mp_circuit_analyze_json(c, false, 10.0, &mut s) }, MpStatus::Ok);
    let json = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { mp_string_free(s) };
    let circuit = Circuit::TwoStage(TwoStageParams { gm: p.gm, r1: p.r1, r2: p.r2, c1: p.c1, c2: p.c2, cc: p.cc, gm0: None });
    assert_eq!(json, analyze_json(&circuit, false, 10.0).unwrap());
    assert!(json.contains("\"command\": \"analyze\""));
    assert_eq!(unsafe { mp_circuit_analyze_json(c, false, 0.5, &mut s) }, MpStatus::InvalidArgument);
    unsafe { mp_circuit_free(c) };
}

#[test]
fn locus_endpoints_and_growth() {
    let p = two_stage();
    let c = new_two_stage(&p);
    let mut l = ptr::null_mut();
    assert_eq!(unsafe { mp_locus_sweep(c, false, 1e-6, 1e-2, 50, &mut l) }, MpStatus::Ok);
    let (n, b) = unsafe { (mp_locus_len(l), mp_locus_branch_count(l)) };
    assert!(n >= 50);
    assert_eq!(b, 2);
    let (mut g, mut z) = (0.0, MpComplex::default());
    assert_eq!(unsafe { mp_locus_point(l, 0, 0, &mut g, &mut z) }, MpStatus::Ok);
    assert_eq!(g, 1e-6);
    assert_eq!(unsafe { mp_locus_point(l, 0, n - 1, &mut g, &mut z) }, MpStatus::Ok);
    assert!((g - 1e-2).abs() <= 1e-15);
    assert_eq!(unsafe { mp_locus_point(l, 2, 0, &mut g, &mut z) }, MpStatus::InvalidArgument);
    unsafe { mp_locus_free(l) };

    assert_eq!(unsafe { mp_locus_sweep(c, false, 1e-2, 1e-6, 50, &mut l) }, MpStatus::InvalidArgument);
    unsafe { mp_circuit_free(c) };
}

#[test]
fn current_buffer_rejects_feedforward_locus() {
    let p = MpCurrentBufferParams { gm: 1e-3, gmc: 1e-3, r1: 1e6, r2: 1e5, c1: 1e-13, c2: 1e-11, cc: 1e-12, gm0: 1e-4 };
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { mp_circuit_current_buffer(&p, &mut c) }, MpStatus::Ok);
    let mut l = ptr::null_mut();
    assert_eq!(unsafe { mp_locus_sweep(c, true, 1e-4, 1e-2, 10, &mut l) }, MpStatus::Numeric);
    assert!(l.is_null());
    assert!(!last_error().is_empty());
    unsafe { mp_circuit_free(c) };
}

#[test]
fn circuit_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("deck.toml");
    std::fs::write(&path, "[two-stage]\ngm = 1e-3\nr1 = 1e6\nr2 = 3e5\nc1 = 1e-13\nc2 = 1e-11\ncc = 1e-12\n").unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { mp_circuit_from_file(cpath.as_ptr(), ptr::null(), &mut c) }, MpStatus::Ok);
    let direct = new_two_stage(&two_stage());
    assert_eq!(poles(c, MpModel::Oracle), poles(direct, MpModel::Oracle));
    unsafe {
        mp_circuit_free(c);
        mp_circuit_free(direct);
    }
    std::fs::write(&path, "[two-stage]\ngm = 1e-3\nbogus = 1\n").unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { mp_circuit_from_file(cpath.as_ptr(), ptr::null(), &mut c) }, MpStatus::InvalidArgument);
    assert!(last_error().contains("bogus"));
}
