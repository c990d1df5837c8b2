use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::netlist::{Circuit, Topology};
use crate::polesplit::{NondominantPair, SplitMethod, SplitResult, Warning};
use crate::polyalg::ComplexRootSet;
use crate::stability::{Damping, Scenario, StabilityReport};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Freq {
    pub rad_s: f64,
    pub hz: f64,
}

impl Freq {
    pub fn new(w: f64) -> Self {
        Freq { rad_s: w, hz: w / TAU }
    }
}

/// A pole or zero in rad/s with its Hz counterpart.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Root {
    pub re: f64,
    pub im: f64,
    pub re_hz: f64,
    pub im_hz: f64,
    pub mag_hz: f64,
}

impl From<Complex64> for Root {
    fn from(z: Complex64) -> Self {
        Root { re: z.re, im: z.im, re_hz: z.re / TAU, im_hz: z.im / TAU, mag_hz: z.norm() / TAU }
    }
}

pub fn roots_out(set: &[Complex64]) -> Vec<Root> {
    set.iter().copied().map(Root::from).collect()
}

pub fn set_out(set: &ComplexRootSet) -> Vec<Root> {
    roots_out(set.as_slice())
}

#[derive(Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub topology: Topology,
    pub config: Circuit,
    pub options: Options,
}

#[derive(Debug, Serialize)]
pub struct Options {
    pub feedforward: bool,
    pub tolerance: f64,
}

#[derive(Debug, Serialize)]
pub struct PoleZero {
    pub model: String,
    pub poles: Vec<Root>,
    pub zeros: Vec<Root>,
    /// DC value of the transfer function (Ω for transimpedances).
    pub dc: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct LoopOut {
    pub swept_gain: &'static str,
    pub swept_gain_value: f64,
    pub open_poles: Vec<Root>,
    pub loop_zeros: Vec<Root>,
    pub midband: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SplitOut {
    pub method: SplitMethod,
    pub p_cd: Option<Root>,
    pub p_cnd1: Root,
    pub p_cnd2: Option<Root>,
    pub warnings: Vec<Warning>,
}

impl From<&SplitResult> for SplitOut {
    fn from(s: &SplitResult) -> Self {
        SplitOut {
            method: s.method,
            p_cd: s.p_cd.map(Root::from),
            p_cnd1: s.p_cnd1.into(),
            p_cnd2: s.p_cnd2.map(Root::from),
            warnings: s.warnings.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PairOut {
    pub split: SplitOut,
    pub quadratic: [f64; 3],
    pub product_formula: f64,
    pub product_roots: Complex64,
    pub attractor: Root,
    pub attraction_factor: Complex64,
    pub attraction_estimate: Root,
}

impl From<&NondominantPair> for PairOut {
    fn from(p: &NondominantPair) -> Self {
        PairOut {
            split: (&p.split).into(),
            quadratic: p.quadratic,
            product_formula: p.product_formula,
            product_roots: p.product_roots,
            attractor: Complex64::new(p.attractor, 0.0).into(),
            attraction_factor: p.attraction_factor,
            attraction_estimate: p.attraction_estimate.into(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct StabilityOut {
    pub scenario: Scenario,
    pub scenario_description: &'static str,
    pub gbw: Freq,
    pub pm_deg: f64,
    pub pm_numeric_deg: Option<f64>,
    pub crossover: Option<Freq>,
    pub pm_oracle_deg: Option<f64>,
    pub pm_convention: String,
    pub poles: Vec<Root>,
    pub zeros: Vec<Root>,
    pub oracle_poles: Vec<Root>,
    pub oracle_zeros: Vec<Root>,
    pub pole_deviation: Vec<f64>,
    pub damping: Option<DampingOut>,
    pub warnings: Vec<Warning>,
    pub annotations: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct DampingOut {
    pub xi: f64,
    pub omega_n: Freq,
}

impl From<Damping> for DampingOut {
    fn from(d: Damping) -> Self {
        DampingOut { xi: d.xi, omega_n: Freq::new(d.omega_n) }
    }
}

impl From<&StabilityReport> for StabilityOut {
    fn from(r: &StabilityReport) -> Self {
        StabilityOut {
            scenario: r.scenario,
            scenario_description: r.scenario.description(),
            gbw: Freq::new(r.gbw),
            pm_deg: r.pm_deg,
            pm_numeric_deg: r.pm_numeric_deg,
            crossover: r.crossover.map(Freq::new),
            pm_oracle_deg: r.pm_oracle_deg,
            pm_convention: r.pm_convention.clone(),
            poles: set_out(&r.poles),
            zeros: set_out(&r.zeros),
            oracle_poles: set_out(&r.oracle_poles),
            oracle_zeros: set_out(&r.oracle_zeros),
            pole_deviation: r.pole_deviation.clone(),
            damping: r.damping.map(DampingOut::from),
            warnings: r.warnings.clone(),
            annotations: r.annotations.clone(),
        }
    }
}
