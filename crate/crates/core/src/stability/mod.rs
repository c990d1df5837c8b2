//! Gain-bandwidth, phase margin and scenario classification.
//!
//! Phase margin is taken on the unity-feedback voltage-gain model: the loop
//! is `gm0·A(s)` with the inversion of the transimpedance removed, so its DC
//! phase is zero and its unity-gain frequency is close to `gm0/Cc`.

mod optimize;
mod pm;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feedback::{oracle_transfer, FeedbackError};
use crate::netlist::{Circuit, CurrentBufferParams, NmcParams, Topology, TwoStageParams};
use crate::polesplit::{
    cb_nondominant_pair, damping, nmc_nondominant_pair, nmc_split, two_stage_pcnd, SplitError, Warning,
};
use crate::polyalg::{min_displacement_assignment, partial_assignment, roots, ComplexRootSet, PolyError};

pub use optimize::{cancellation_distance, optimize_gmc, GmcOptimum};
pub use pm::{numeric_pm, phase_margin, pm_complex_pair, PhaseMargin};

/// Relative distance to `z_a` under which a pole counts as cancelled.
pub const CANCELLATION_PROXIMITY: f64 = 0.1;
/// Imaginary parts below this fraction of the magnitude count as real.
const PAIR_REAL_TOL: f64 = 1e-6;

pub const PM_CONVENTION: &str =
    "loop = gm0*A(s) with the output inversion removed (unity-feedback voltage-gain model); PM = 180 deg + phase at |loop| = 1";

pub const SEPARATE_POLE_NOTE: &str =
    "placing p_cnd1 and p_cnd2 as separate real poles is not achievable once p_o2 is at a lower frequency (recorded claim, not computed)";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("input transconductance required (gm0 must be present and > 0)")]
    InputTransconductanceRequired,
    #[error("feedback: {0}")]
    Feedback(#[from] FeedbackError),
    #[error("polesplit: {0}")]
    Split(#[from] SplitError),
    #[error("polyalg: {0}")]
    Poly(#[from] PolyError),
}

/// `gm0/Cc`, or `gm0/Cc0` for the nested topology, in rad/s.
pub fn gbw(circuit: &Circuit) -> Result<f64, StabilityError> {
    let gm0 = circuit.gm0().filter(|g| *g > 0.0).ok_or(StabilityError::InputTransconductanceRequired)?;
    Ok(match circuit {
        Circuit::TwoStage(p) => gm0 / p.cc,
        Circuit::CurrentBuffer(p) => gm0 / p.cc,
        Circuit::Nmc(p) => gm0 / p.cc0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Fig7a,
    Fig7b,
    Fig7c,
    Fig7d,
    Fig7e,
    Fig11a,
    Fig11b,
    Fig11c,
}

impl Scenario {
    pub fn description(self) -> &'static str {
        match self {
            Scenario::Fig7a => "two-stage Miller, no current buffer",
            Scenario::Fig7b => "current buffer, effectively ideal (very large gmc)",
            Scenario::Fig7c => "current buffer, large gmc: real nondominant pair",
            Scenario::Fig7d => "current buffer, small gmc: complex nondominant pair",
            Scenario::Fig7e => "current buffer, near-optimum gmc: pair clustered at z_a",
            Scenario::Fig11a => "NMC, p_o2 at very high frequency",
            Scenario::Fig11b => "NMC, p_o2 lowered: real nondominant pair",
            Scenario::Fig11c => "NMC, p_o2 lowered further: complex nondominant pair",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Damping {
    pub xi: f64,
    pub omega_n: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub topology: Topology,
    pub scenario: Scenario,
    pub gbw: f64,
    /// Closed-form dominant-pole phase margin, degrees.
    pub pm_deg: f64,
    /// Phase margin at the numeric unity-gain crossover of the approximate model.
    pub pm_numeric_deg: Option<f64>,
    pub crossover: Option<f64>,
    /// Phase margin of the exact nodal model.
    pub pm_oracle_deg: Option<f64>,
    pub pm_convention: String,
    /// Closed-form (approximate) poles and zeros.
    pub poles: ComplexRootSet,
    pub zeros: ComplexRootSet,
    pub oracle_poles: ComplexRootSet,
    pub oracle_zeros: ComplexRootSet,
    /// Relative distance from each approximate pole to its matched oracle pole.
    pub pole_deviation: Vec<f64>,
    pub damping: Option<Damping>,
    pub warnings: Vec<Warning>,
    pub annotations: Vec<String>,
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Relative distance of each `approx` pole to the oracle pole it is matched
/// to. Empty when the approximation has more poles than the oracle.
pub fn pole_deviation(approx: &ComplexRootSet, oracle: &ComplexRootSet) -> Vec<f64> {
    let (a, b) = (approx.as_slice(), oracle.as_slice());
    if a.len() > b.len() {
        return Vec::new();
    }
    let perm = if a.len() == b.len() {
        min_displacement_assignment(a, b).into_iter().map(Some).collect()
    } else {
        partial_assignment(a, b)
    };
    a.iter()
        .zip(perm)
        .map(|(x, j)| {
            let y = b[j.expect("smaller set fully matched")];
            (x - y).norm() / x.norm().max(y.norm()).max(f64::MIN_POSITIVE)
        })
        .collect()
}

fn pair_damping(p: Complex64) -> Option<Damping> {
    if p.im.abs() > PAIR_REAL_TOL * p.norm() {
        let (xi, omega_n) = damping(p);
        Some(Damping { xi, omega_n })
    } else {
        None
    }
}

struct Approx {
    scenario: Scenario,
    poles: Vec<Complex64>,
    zeros: Vec<Complex64>,
    damping: Option<Damping>,
    warnings: Vec<Warning>,
    annotations: Vec<String>,
}

fn approx_two_stage(p: &TwoStageParams) -> Approx {
    Approx {
        scenario: Scenario::Fig7a,
        poles: vec![real(-1.0 / (p.gm * p.r1 * p.r2 * p.cc)), two_stage_pcnd(p, false)],
        zeros: vec![real(p.gm / p.cc)],
        damping: None,
        warnings: Vec::new(),
        annotations: Vec::new(),
    }
}

/// Scenario of the current-buffer amplifier from its nondominant pair.
pub fn classify_current_buffer(p: &CurrentBufferParams, ratio: f64) -> Result<Scenario, StabilityError> {
    let pair = cb_nondominant_pair(p, ratio)?;
    let za = real(-p.gmc / p.cc);
    let (p1, p2) = (pair.split.p_cnd1, pair.split.p_cnd2.expect("pair"));
    let near = |z: Complex64| (z - za).norm() < CANCELLATION_PROXIMITY * za.norm();
    Ok(if near(p1) && near(p2) {
        Scenario::Fig7e
    } else if pair_damping(p1).is_some() {
        Scenario::Fig7d
    } else if pair.attraction_factor.norm() <= 1.01 {
        Scenario::Fig7b
    } else {
        Scenario::Fig7c
    })
}

fn approx_current_buffer(p: &CurrentBufferParams, ratio: f64) -> Result<Approx, StabilityError> {
    let pair = cb_nondominant_pair(p, ratio)?;
    let (p1, p2) = (pair.split.p_cnd1, pair.split.p_cnd2.expect("pair"));
    Ok(Approx {
        scenario: classify_current_buffer(p, ratio)?,
        poles: vec![real(-1.0 / (p.gm * p.r1 * p.r2 * p.cc)), p1, p2],
        zeros: vec![real(-p.gmc / p.cc)],
        damping: pair_damping(p1),
        warnings: pair.split.warnings,
        annotations: Vec::new(),
    })
}

fn approx_nmc(p: &NmcParams, ratio: f64) -> Result<Approx, StabilityError> {
    let dominant = nmc_split(p)?;
    let pair = nmc_nondominant_pair(p, ratio)?;
    let (p1, p2) = (pair.split.p_cnd1, pair.split.p_cnd2.expect("pair"));
    let damping = pair_damping(p1);
    let scenario = if damping.is_some() {
        Scenario::Fig11c
    } else if p2.norm() >= 10.0 * p1.norm() {
        Scenario::Fig11a
    } else {
        Scenario::Fig11b
    };
    let mut warnings = dominant.warnings;
    warnings.extend(pair.split.warnings);
    Ok(Approx {
        scenario,
        poles: vec![dominant.p_cd.expect("dominant pole"), p1, p2],
        zeros: Vec::new(),
        damping,
        warnings,
        annotations: vec![SEPARATE_POLE_NOTE.to_string()],
    })
}

/// Full stability report: closed-form poles, exact nodal poles, both phase
/// margin variants and the figure scenario. `ratio` is the "≫" threshold for
/// validity warnings.
pub fn scenario_report(circuit: &Circuit, ratio: f64) -> Result<StabilityReport, StabilityError> {
    circuit.validate().map_err(FeedbackError::from)?;
    let gbw = gbw(circuit)?;
    let approx = match circuit {
        Circuit::TwoStage(p) => approx_two_stage(p),
        Circuit::CurrentBuffer(p) => approx_current_buffer(p, ratio)?,
        Circuit::Nmc(p) => approx_nmc(p, ratio)?,
    };
    let mut warnings = approx.warnings;
    let pm = phase_margin(&approx.poles, &approx.zeros, gbw);
    if pm.numeric_deg.is_none() {
        warnings.push(Warning::new("pm-numeric", "no unity crossover found for the approximate model"));
    }

    let exact = oracle_transfer(circuit)?.to_f64();
    let oracle_poles = roots(exact.den())?;
    let oracle_zeros = crate::feedback::real_roots_or_empty(exact.num())?;
    let gm0 = circuit.gm0().expect("checked by gbw");
    let dc = -gm0 * exact.dc_value().unwrap_or(0.0);
    let oracle_pm = numeric_pm(dc, oracle_poles.as_slice(), oracle_zeros.as_slice());
    if oracle_pm.is_none() {
        warnings.push(Warning::new("pm-oracle", "no unity crossover found for the exact model"));
    }

    let poles = ComplexRootSet::new(approx.poles);
    let pole_deviation = pole_deviation(&poles, &oracle_poles);
    Ok(StabilityReport {
        topology: circuit.topology(),
        scenario: approx.scenario,
        gbw,
        pm_deg: pm.closed_form_deg,
        pm_numeric_deg: pm.numeric_deg,
        crossover: pm.crossover,
        pm_oracle_deg: oracle_pm.map(|(pm, _)| pm),
        pm_convention: PM_CONVENTION.to_string(),
        poles,
        zeros: ComplexRootSet::new(approx.zeros),
        oracle_poles,
        oracle_zeros,
        pole_deviation,
        damping: approx.damping,
        warnings,
        annotations: approx.annotations,
    })
}
