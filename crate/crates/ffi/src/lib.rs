//! C ABI for `millerpole`.
//!
//! Every function returns an [`MpStatus`]; on failure a description is
//! available from [`mp_last_error`] on the same thread. Circuits and locus
//! trajectories are opaque handles released with their `_free` function.
//! Absent optional values are reported as NaN.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use millerpole::cli::{analyze_json, load_circuit, CliError};
use millerpole::feedback::{close_loop, decompose, oracle_transfer};
use millerpole::netlist::{Circuit, CurrentBufferParams, NmcParams, Topology, TwoStageParams};
use millerpole::polesplit::{cb_ideal_split, nmc_split, split, two_stage_split, SplitResult, TwoPoleLoop};
use millerpole::polyalg::{roots, Polynomial, PolyError};
use millerpole::rootlocus::{gain_normalized_loop, sweep, LocusTrajectory};
use millerpole::stability::{pm_complex_pair, scenario_report, Scenario};
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numeric = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpTopology {
    TwoStage = 0,
    CurrentBuffer = 1,
    Nmc = 2,
}

/// Transfer function whose poles or zeros are requested.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpModel {
    /// Exact nodal analysis.
    Oracle = 0,
    /// Feedback model without the feedforward path.
    ClosedLoop = 1,
    /// Feedback model including the feedforward path (two-stage only).
    ClosedLoopFeedforward = 2,
    /// Loop transmission.
    Loop = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpScenario {
    Fig7a = 0,
    Fig7b = 1,
    Fig7c = 2,
    Fig7d = 3,
    Fig7e = 4,
    Fig11a = 5,
    Fig11b = 6,
    Fig11c = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MpComplex {
    pub re: f64,
    pub im: f64,
}

/// `gm0` is optional; pass NaN when absent.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MpTwoStageParams {
    pub gm: f64,
    pub r1: f64,
    pub r2: f64,
    pub c1: f64,
    pub c2: f64,
    pub cc: f64,
    pub gm0: f64,
}

/// `gm0` is optional; pass NaN when absent.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MpCurrentBufferParams {
    pub gm: f64,
    pub gmc: f64,
    pub r1: f64,
    pub r2: f64,
    pub c1: f64,
    pub c2: f64,
    pub cc: f64,
    pub gm0: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MpNmcParams {
    pub gm0: f64,
    pub gm1: f64,
    pub gm2: f64,
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub cc0: f64,
    pub cc1: f64,
}

/// Split poles; absent poles are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MpSplit {
    pub p_cd: MpComplex,
    pub p_cnd1: MpComplex,
    pub p_cnd2: MpComplex,
    pub warning_count: usize,
}

/// Phase margins in degrees; absent values are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MpStability {
    pub scenario: MpScenario,
    pub gbw: f64,
    pub pm_deg: f64,
    pub pm_numeric_deg: f64,
    pub crossover: f64,
    pub pm_oracle_deg: f64,
}

pub struct MpCircuit(Circuit);

pub struct MpLocus(LocusTrajectory);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(MpStatus, String);

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = match e {
            CliError::Config(_) => MpStatus::InvalidArgument,
            CliError::Numeric(_) => MpStatus::Numeric,
        };
        Failure(status, e.to_string())
    }
}

fn fail<E: Into<CliError>>(e: E) -> Failure {
    Failure::from(e.into())
}

fn null(what: &str) -> Failure {
    Failure(MpStatus::NullPointer, format!("{what}: null pointer"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(MpStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MpStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => return MpStatus::Ok,
        Ok(Err(Failure(s, m))) => (s, m),
        Err(_) => (MpStatus::Panic, "internal panic".to_string()),
    };
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
    status
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what}: not valid UTF-8")))
}

fn opt(x: f64) -> Option<f64> {
    (!x.is_nan()).then_some(x)
}

fn nan_c() -> MpComplex {
    MpComplex { re: f64::NAN, im: f64::NAN }
}

impl From<Complex64> for MpComplex {
    fn from(z: Complex64) -> Self {
        MpComplex { re: z.re, im: z.im }
    }
}

impl From<Topology> for MpTopology {
    fn from(t: Topology) -> Self {
        match t {
            Topology::TwoStage => MpTopology::TwoStage,
            Topology::CurrentBuffer => MpTopology::CurrentBuffer,
            Topology::Nmc => MpTopology::Nmc,
        }
    }
}

impl From<Scenario> for MpScenario {
    fn from(s: Scenario) -> Self {
        match s {
            Scenario::Fig7a => MpScenario::Fig7a,
            Scenario::Fig7b => MpScenario::Fig7b,
            Scenario::Fig7c => MpScenario::Fig7c,
            Scenario::Fig7d => MpScenario::Fig7d,
            Scenario::Fig7e => MpScenario::Fig7e,
            Scenario::Fig11a => MpScenario::Fig11a,
            Scenario::Fig11b => MpScenario::Fig11b,
            Scenario::Fig11c => MpScenario::Fig11c,
        }
    }
}

impl From<&SplitResult> for MpSplit {
    fn from(s: &SplitResult) -> Self {
        MpSplit {
            p_cd: s.p_cd.map_or_else(nan_c, Into::into),
            p_cnd1: s.p_cnd1.into(),
            p_cnd2: s.p_cnd2.map_or_else(nan_c, Into::into),
            warning_count: s.warnings.len(),
        }
    }
}

unsafe fn publish(circuit: Circuit, dst: *mut *mut MpCircuit) -> Result<(), Failure> {
    let dst = out(dst, "out")?;
    circuit.validate().map_err(fail)?;
    *dst = Box::into_raw(Box::new(MpCircuit(circuit)));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string obtained from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn mp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `params` must be NULL or point to a valid struct; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn mp_circuit_two_stage(params: *const MpTwoStageParams, out: *mut *mut MpCircuit) -> MpStatus {
    guard(|| {
        let p = deref(params, "params")?;
        let c = Circuit::TwoStage(TwoStageParams {
            gm: p.gm,
            r1: p.r1,
            r2: p.r2,
            c1: p.c1,
            c2: p.c2,
            cc: p.cc,
            gm0: opt(p.gm0),
        });
        publish(c, out)
    })
}

/// # Safety
/// `params` must be NULL or point to a valid struct; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn mp_circuit_current_buffer(
    params: *const MpCurrentBufferParams,
    out: *mut *mut MpCircuit,
) -> MpStatus {
    guard(|| {
        let p = deref(params, "params")?;
        let c = Circuit::CurrentBuffer(CurrentBufferParams {
            gm: p.gm,
            gmc: p.gmc,
            r1: p.r1,
            r2: p.r2,
            c1: p.c1,
            c2: p.c2,
            cc: p.cc,
            gm0: opt(p.gm0),
        });
        publish(c, out)
    })
}

/// # Safety
/// `params` must be NULL or point to a valid struct; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn mp_circuit_nmc(params: *const MpNmcParams, out: *mut *mut MpCircuit) -> MpStatus {
    guard(|| {
        let p = deref(params, "params")?;
        let c = Circuit::Nmc(NmcParams {
            gm0: p.gm0,
            gm1: p.gm1,
            gm2: p.gm2,
            r0: p.r0,
            r1: p.r1,
            r2: p.r2,
            c0: p.c0,
            c1: p.c1,
            c2: p.c2,
            cc0: p.cc0,
            cc1: p.cc1,
        });
        publish(c, out)
    })
}

/// Loads a TOML or JSON parameter file. `topology` ("two-stage",
/// "current-buffer", "nmc") may be NULL when the file has one section.
///
/// # Safety
/// String arguments must be NULL or NUL-terminated; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn mp_circuit_from_file(
    path: *const c_char,
    topology: *const c_char,
    out: *mut *mut MpCircuit,
) -> MpStatus {
    guard(|| {
        let path = text(path, "path")?;
        let topology = match topology.is_null() {
            true => None,
            false => Some(text(topology, "topology")?.parse::<Topology>().map_err(|e| invalid(format!("topology: {e}")))?),
        };
        publish(load_circuit(Path::new(path), topology)?, out)
    })
}

/// # Safety
/// `c` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn mp_circuit_free(c: *mut MpCircuit) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// `c` must be a valid handle or NULL; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn mp_circuit_topology(c: *const MpCircuit, out: *mut MpTopology) -> MpStatus {
    guard(|| {
        *self::out(out, "out")? = deref(c, "circuit")?.0.topology().into();
        Ok(())
    })
}

fn model_poly(c: &Circuit, model: MpModel, zeros: bool) -> Result<Polynomial, Failure> {
    let tf = match model {
        MpModel::Oracle => oracle_transfer(c).map_err(fail)?,
        MpModel::ClosedLoop => close_loop(&decompose(c).map_err(fail)?, false).map_err(fail)?,
        MpModel::ClosedLoopFeedforward => close_loop(&decompose(c).map_err(fail)?, true).map_err(fail)?,
        MpModel::Loop => decompose(c).map_err(fail)?.loop_tx,
    }
    .to_f64();
    Ok(if zeros { tf.num().clone() } else { tf.den().clone() })
}

unsafe fn fill(set: &[Complex64], buf: *mut MpComplex, cap: usize, len: *mut usize) -> Result<(), Failure> {
    *out(len, "len")? = set.len();
    if set.len() > cap {
        return Err(Failure(MpStatus::BufferTooSmall, format!("buffer holds {cap}, need {}", set.len())));
    }
    if !set.is_empty() {
        if buf.is_null() {
            return Err(null("buf"));
        }
        for (i, z) in set.iter().enumerate() {
            *buf.add(i) = (*z).into();
        }
    }
    Ok(())
}

unsafe fn roots_of(
    c: *const MpCircuit,
    model: MpModel,
    zeros: bool,
    buf: *mut MpComplex,
    cap: usize,
    len: *mut usize,
) -> MpStatus {
    guard(|| {
        let p = model_poly(&deref(c, "circuit")?.0, model, zeros)?;
        let set = match roots(&p) {
            Ok(r) => r.as_slice().to_vec(),
            Err(PolyError::NoRoots) => Vec::new(),
            Err(e) => return Err(fail(e)),
        };
        fill(&set, buf, cap, len)
    })
}

/// Poles of `model`, ascending in magnitude. `*len` receives the count; when
/// it exceeds `cap`, nothing is written and `BufferTooSmall` is returned.
///
/// # Safety
/// `buf` must hold `cap` elements; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mp_circuit_poles(
    c: *const MpCircuit,
    model: MpModel,
    buf: *mut MpComplex,
    cap: usize,
    len: *mut usize,
) -> MpStatus {
    roots_of(c, model, false, buf, cap, len)
}

/// Finite zeros of `model`, with the same buffer protocol as [`mp_circuit_poles`].
///
/// # Safety
/// `buf` must hold `cap` elements; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mp_circuit_zeros(
    c: *const MpCircuit,
    model: MpModel,
    buf: *mut MpComplex,
    cap: usize,
    len: *mut usize,
) -> MpStatus {
    roots_of(c, model, true, buf, cap, len)
}

/// Full analysis report as JSON, identical to the `analyze` command output.
/// Release with [`mp_string_free`].
///
/// # Safety
/// `c` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mp_circuit_analyze_json(
    c: *const MpCircuit,
    feedforward: bool,
    tolerance: f64,
    out: *mut *mut c_char,
) -> MpStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        let json = analyze_json(&deref(c, "circuit")?.0, feedforward, tolerance)?;
        *dst = CString::new(json).expect("json has no nul").into_raw();
        Ok(())
    })
}

/// Scenario and phase margins. `tolerance` is the validity ratio (10 by default in the CLI).
///
/// # Safety
/// `c` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mp_circuit_stability(c: *const MpCircuit, tolerance: f64, out: *mut MpStability) -> MpStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        let r = scenario_report(&deref(c, "circuit")?.0, tolerance).map_err(fail)?;
        *dst = MpStability {
            scenario: r.scenario.into(),
            gbw: r.gbw,
            pm_deg: r.pm_deg,
            pm_numeric_deg: r.pm_numeric_deg.unwrap_or(f64::NAN),
            crossover: r.crossover.unwrap_or(f64::NAN),
            pm_oracle_deg: r.pm_oracle_deg.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Pole-splitting result for the circuit's main loop.
///
/// # Safety
/// `c` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mp_circuit_split(c: *const MpCircuit, out: *mut MpSplit) -> MpStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        let s = match &deref(c, "circuit")?.0 {
            Circuit::TwoStage(p) => two_stage_split(p),
            Circuit::CurrentBuffer(p) => cb_ideal_split(p),
            Circuit::Nmc(p) => nmc_split(p),
        }
        .map_err(fail)?;
        *dst = (&s).into();
        Ok(())
    })
}

/// Pole splitting of a two-pole loop with dominant pole `p_od`,
/// nondominant pole `p_ond` (both negative) and midband gain `a0b0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mp_split_two_pole(p_od: f64, p_ond: f64, a0b0: f64, out: *mut MpSplit) -> MpStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        let s = split(&TwoPoleLoop::new(p_od, p_ond, a0b0).map_err(fail)?).map_err(fail)?;
        *dst = (&s).into();
        Ok(())
    })
}

/// Phase margin in degrees of a dominant-pole loop with a nondominant
/// complex pair of damping `xi` and natural frequency `omega_n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mp_pm_complex_pair(xi: f64, omega_n: f64, gbw: f64, out: *mut f64) -> MpStatus {
    guard(|| {
        if !(xi > 0.0 && omega_n > 0.0 && gbw > 0.0) {
            return Err(invalid("xi, omega_n and gbw must be positive"));
        }
        *self::out(out, "out")? = pm_complex_pair(xi, omega_n, gbw);
        Ok(())
    })
}

/// Root locus of the closed-loop poles over the main-loop gain
/// (`gm`, or `gm1` for NMC) from `k_min` to `k_max` with `n` log-spaced
/// base points. With `feedforward` the two-stage feedforward loop is swept.
///
/// # Safety
/// `c` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mp_locus_sweep(
    c: *const MpCircuit,
    feedforward: bool,
    k_min: f64,
    k_max: f64,
    n: usize,
    out: *mut *mut MpLocus,
) -> MpStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        let d = decompose(&deref(c, "circuit")?.0).map_err(fail)?;
        let (hat, rule) = gain_normalized_loop(&d, feedforward).map_err(fail)?;
        let t = sweep(&hat, k_min, k_max, n, rule).map_err(fail)?;
        *dst = Box::into_raw(Box::new(MpLocus(t)));
        Ok(())
    })
}

/// # Safety
/// `l` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn mp_locus_free(l: *mut MpLocus) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// Number of gain points, including adaptive refinement; 0 for NULL.
///
/// # Safety
/// `l` must be NULL or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn mp_locus_len(l: *const MpLocus) -> usize {
    l.as_ref().map_or(0, |l| l.0.gains.len())
}

/// Number of branches; 0 for NULL.
///
/// # Safety
/// `l` must be NULL or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn mp_locus_branch_count(l: *const MpLocus) -> usize {
    l.as_ref().map_or(0, |l| l.0.branch_count())
}

/// Gain at point `i` and the position of `branch` there.
///
/// # Safety
/// `l` must be a valid handle; `gain` and `root` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mp_locus_point(
    l: *const MpLocus,
    branch: usize,
    i: usize,
    gain: *mut f64,
    root: *mut MpComplex,
) -> MpStatus {
    guard(|| {
        let t = &deref(l, "locus")?.0;
        let (gain, root) = (out(gain, "gain")?, out(root, "root")?);
        let z = t
            .branches
            .get(branch)
            .and_then(|b| b.get(i))
            .ok_or_else(|| invalid(format!("point ({branch}, {i}) out of range")))?;
        *gain = t.gains[i];
        *root = (*z).into();
        Ok(())
    })
}
