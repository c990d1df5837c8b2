//! The pole-splitting relation for a loop with two real poles and an origin
//! zero, and the closed-form pole estimates built on it.
//!
//! For a loop `a0b0·(s/|p_od|) / ((1 − s/p_od)(1 − s/p_ond))` with a large
//! midband value `a0b0`, the closed-loop poles are approximately
//! `p_od/a0b0` and `p_ond·a0b0`.

use num_complex::Complex64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{CurrentBufferParams, NetlistError, NmcParams, TwoStageParams};
use crate::polyalg::{roots, Coeff, Exact, PolyError, RationalFunction};

/// Default ratio for "≫" in validity checks.
pub const DEFAULT_VALIDITY_RATIO: f64 = 10.0;
/// Below this midband value the relation is refused.
pub const MIN_MIDBAND: f64 = 2.0;
/// Below this midband value the relation is applied with a warning.
pub const QUIET_MIDBAND: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("pole ordering: require |p_od| < |p_ond| with both poles real and negative")]
    PoleOrdering,
    #[error("midband loop gain {0} too small for pole splitting (need >= 2)")]
    MidbandTooSmall(f64),
    #[error("midband undefined: loop needs a simple zero at the origin and a finite DC denominator")]
    MidbandUndefined,
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Structured advisory attached to results whose approximations are used
/// outside their comfortable range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Warning {
    pub code: String,
    pub message: String,
}

impl Warning {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Self { code: code.to_string(), message: message.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPoleLoop {
    pub p_od: f64,
    pub p_ond: f64,
    pub a0b0: f64,
}

impl TwoPoleLoop {
    pub fn new(p_od: f64, p_ond: f64, a0b0: f64) -> Result<Self, SplitError> {
        let ok = p_od.is_finite() && p_ond.is_finite() && p_od < 0.0 && p_ond < 0.0 && p_od.abs() < p_ond.abs();
        if !ok {
            return Err(SplitError::PoleOrdering);
        }
        if !(a0b0.is_finite() && a0b0 > 0.0) {
            return Err(SplitError::MidbandTooSmall(a0b0));
        }
        Ok(Self { p_od, p_ond, a0b0 })
    }

    /// Exact closed-loop characteristic `1 + c1·s + c2·s²` of `1 + loop`.
    pub fn characteristic(&self) -> [f64; 3] {
        let (wd, wn) = (-self.p_od, -self.p_ond);
        [1.0, (1.0 + self.a0b0) / wd + 1.0 / wn, 1.0 / (wd * wn)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMethod {
    Theorem,
    QuadraticExact,
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub p_cd: Option<Complex64>,
    pub p_cnd1: Complex64,
    pub p_cnd2: Option<Complex64>,
    pub method: SplitMethod,
    pub warnings: Vec<Warning>,
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Plateau value of `|L(jω)|` between the first two poles of a loop with a
/// simple origin zero: the `s` coefficient of the numerator over the
/// denominator constant, times the smallest pole magnitude.
pub fn midband(loop_tx: &RationalFunction) -> Result<f64, SplitError> {
    let (num, den) = (loop_tx.num(), loop_tx.den());
    if num.coeff(0) != 0.0 || num.coeff(1) == 0.0 || den.coeff(0) == 0.0 {
        return Err(SplitError::MidbandUndefined);
    }
    let poles = roots(den)?;
    let w1 = poles.smallest().ok_or(SplitError::MidbandUndefined)?.norm();
    Ok((num.coeff(1) / den.coeff(0) * w1).abs())
}

fn midband_warnings(a0b0: f64) -> Result<Vec<Warning>, SplitError> {
    if a0b0.is_nan() || a0b0 < MIN_MIDBAND {
        return Err(SplitError::MidbandTooSmall(a0b0));
    }
    if a0b0 < QUIET_MIDBAND {
        return Ok(vec![Warning::new(
            "midband-small",
            format!("midband loop gain {a0b0:.3} < {QUIET_MIDBAND}; pole-splitting estimate is coarse"),
        )]);
    }
    Ok(Vec::new())
}

/// Pole splitting of a two-pole loop with a large midband loop gain.
pub fn split(tp: &TwoPoleLoop) -> Result<SplitResult, SplitError> {
    let warnings = midband_warnings(tp.a0b0)?;
    Ok(SplitResult {
        p_cd: Some(real(tp.p_od / tp.a0b0)),
        p_cnd1: real(tp.p_ond * tp.a0b0),
        p_cnd2: None,
        method: SplitMethod::Theorem,
        warnings,
    })
}

/// Damping ratio of the closed-loop pair, `½·sqrt(p_ond/p_od)·a0b0`.
pub fn xi_check(tp: &TwoPoleLoop) -> f64 {
    0.5 * (tp.p_ond / tp.p_od).sqrt() * tp.a0b0
}

/// Nondominant pole of the two-stage amplifier with the RHP zero neglected;
/// with `textbook` set, the classical expression lacking the `Cc²` term.
pub fn two_stage_pcnd(p: &TwoStageParams, textbook: bool) -> Complex64 {
    let cap = (p.c1 + p.cc) * (p.c2 + p.cc);
    let den = if textbook { p.c1 * p.c2 + p.cc * (p.c1 + p.c2) } else { cap };
    real(-p.gm * p.cc / den)
}

/// Open-loop poles of the two-stage loop, input side first.
pub fn two_stage_open_poles(p: &TwoStageParams) -> (f64, f64) {
    (-1.0 / (p.r1 * (p.c1 + p.cc)), -1.0 / (p.r2 * (p.c2 + p.cc)))
}

/// Midband loop gain of the two-stage amplifier for either pole ordering.
pub fn two_stage_midband(p: &TwoStageParams) -> f64 {
    let (po1, po2) = two_stage_open_poles(p);
    if po1.abs() < po2.abs() {
        p.gm * p.r2 * p.cc / (p.c1 + p.cc)
    } else {
        p.gm * p.r1 * p.cc / (p.c2 + p.cc)
    }
}

fn ordered(pa: f64, pb: f64) -> (f64, f64) {
    if pa.abs() < pb.abs() {
        (pa, pb)
    } else {
        (pb, pa)
    }
}

/// Pole splitting applied to the two-stage loop.
pub fn two_stage_split(p: &TwoStageParams) -> Result<SplitResult, SplitError> {
    p.validate()?;
    let (po1, po2) = two_stage_open_poles(p);
    let (pd, pnd) = ordered(po1, po2);
    split(&TwoPoleLoop::new(pd, pnd, two_stage_midband(p))?)
}

/// Open-loop poles `p_o1, p_o2, p_o3` and zero `z_a` of the current-buffer
/// a-circuit.
pub fn cb_open_loop(p: &CurrentBufferParams) -> (f64, f64, f64, f64) {
    let po1 = -1.0 / (p.r1 * p.c1);
    let po2 = -1.0 / (p.r2 * (p.c2 + p.cc));
    let po3 = -p.gmc * (p.c2 + p.cc) / (p.c2 * p.cc);
    let za = -p.gmc / p.cc;
    (po1, po2, po3, za)
}

/// Split poles with an ideal (infinite-`gmc`) buffer.
pub fn cb_ideal_split(p: &CurrentBufferParams) -> Result<SplitResult, SplitError> {
    p.validate()?;
    let (po1, po2, _, _) = cb_open_loop(p);
    let a0b0 = if po1.abs() < po2.abs() {
        p.gm * p.r2 * p.cc / p.c1
    } else {
        p.gm * p.r1 * p.cc / (p.c2 + p.cc)
    };
    let (pd, pnd) = ordered(po1, po2);
    split(&TwoPoleLoop::new(pd, pnd, a0b0)?)
}

/// A nondominant pole pair from a closed-form quadratic, with the
/// product and attraction relations evaluated as post-hoc checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NondominantPair {
    pub split: SplitResult,
    /// `[c0, c1, c2]` of `c0 + c1·s + c2·s²`.
    pub quadratic: [f64; 3],
    /// Closed-form product `p_cnd1·p_cnd2`.
    pub product_formula: f64,
    /// `p_cnd1·p_cnd2` from the roots.
    pub product_roots: Complex64,
    /// The pole that attracts `p_cnd1` (`p_o3` or `p_o2`).
    pub attractor: f64,
    /// `attractor / p_cnd2`.
    pub attraction_factor: Complex64,
    /// `attraction_factor · p_cnd1(ideal)`, expected to equal `p_cnd1`.
    pub attraction_estimate: Complex64,
}

/// Roots of `c0 + c1·s + c2·s²` with the discriminant taken exactly, so that
/// an exact double root stays double. Ordered by magnitude; complex roots
/// come out as an exact conjugate pair.
pub fn quadratic_roots_exact(c0: &Exact, c1: &Exact, c2: &Exact) -> [Complex64; 2] {
    let four = Exact::from_f64(4.0);
    let disc = c1.clone() * c1.clone() - four * c0.clone() * c2.clone();
    let two_c2 = Exact::from_f64(2.0) * c2.clone();
    let center = Coeff::to_f64(&(-c1.clone() / two_c2.clone()));
    if disc.is_zero() {
        return [real(center); 2];
    }
    let half_width = (Coeff::to_f64(&disc.abs())).sqrt() / Coeff::to_f64(&two_c2).abs();
    if disc.is_negative() {
        return [Complex64::new(center, -half_width), Complex64::new(center, half_width)];
    }
    // cancellation-free form for the smaller root
    let (c0f, c1f, c2f) = (Coeff::to_f64(c0), Coeff::to_f64(c1), Coeff::to_f64(c2));
    let q = -0.5 * (c1f + c1f.signum() * Coeff::to_f64(&disc).sqrt());
    let (a, b) = (q / c2f, c0f / q);
    if a.abs() <= b.abs() {
        [real(a), real(b)]
    } else {
        [real(b), real(a)]
    }
}

fn check_ratio(warnings: &mut Vec<Warning>, label: &str, big: f64, small: f64, ratio: f64) {
    if big < ratio * small {
        warnings.push(Warning::new(
            "validity",
            format!("assumption {label} holds only by {:.3}x (< {ratio}x)", big / small),
        ));
    }
}

fn pair_from(
    q: [Exact; 3],
    product_formula: f64,
    attractor: f64,
    ideal_pcnd1: f64,
    warnings: Vec<Warning>,
) -> NondominantPair {
    let r = quadratic_roots_exact(&q[0], &q[1], &q[2]);
    let (p1, p2) = (r[0], r[1]);
    let factor = real(attractor) / p2;
    NondominantPair {
        split: SplitResult { p_cd: None, p_cnd1: p1, p_cnd2: Some(p2), method: SplitMethod::QuadraticExact, warnings },
        quadratic: [Coeff::to_f64(&q[0]), Coeff::to_f64(&q[1]), Coeff::to_f64(&q[2])],
        product_formula,
        product_roots: p1 * p2,
        attractor,
        attraction_factor: factor,
        attraction_estimate: factor * ideal_pcnd1,
    }
}

/// Nondominant pair of the current-buffer amplifier from the denominator
/// quadratic `1 + s·[CcC2 + gmcR1C1(Cc+C2)]/(gmR1gmcCc) + s²·C1C2/(gm·gmc)`.
pub fn cb_nondominant_pair(p: &CurrentBufferParams, ratio: f64) -> Result<NondominantPair, SplitError> {
    p.validate()?;
    let mut warnings = Vec::new();
    for (label, g) in [("gm >> 1/R1", p.gm * p.r1), ("gm >> 1/R2", p.gm * p.r2), ("gmc >> 1/R1", p.gmc * p.r1), ("gmc >> 1/R2", p.gmc * p.r2)] {
        check_ratio(&mut warnings, label, g, 1.0, ratio);
    }
    check_ratio(&mut warnings, "Cc >> C1", p.cc, p.c1, ratio);
    check_ratio(&mut warnings, "C2 >> C1", p.c2, p.c1, ratio);
    check_ratio(&mut warnings, "gm*R1 >> C2/Cc", p.gm * p.r1, p.c2 / p.cc, ratio);

    let e = Exact::from_f64;
    let (gm, gmc, r1, c1, c2, cc) = (e(p.gm), e(p.gmc), e(p.r1), e(p.c1), e(p.c2), e(p.cc));
    let c1q = (cc.clone() * c2.clone() + gmc.clone() * r1.clone() * c1.clone() * (cc.clone() + c2.clone()))
        / (gm.clone() * r1 * gmc.clone() * cc);
    let c2q = c1.clone() * c2.clone() / (gm.clone() * gmc.clone());
    let product = Coeff::to_f64(&(gm * gmc / (c1 * c2)));
    let (_, _, po3, _) = cb_open_loop(p);
    let ideal = -p.gm * p.cc / ((p.c2 + p.cc) * p.c1);
    Ok(pair_from([e(1.0), c1q, c2q], product, po3, ideal, warnings))
}

/// Open-loop poles `p_o0, p_o1, p_o2` of the nested loop; with `approx`, the
/// large-load forms `−1/(R0Cc0)` and `−gm2/C2`.
pub fn nmc_open_poles(p: &NmcParams, approx: bool) -> (f64, f64, f64) {
    let po1 = -1.0 / (p.gm2 * p.r1 * p.r2 * p.cc1);
    if approx {
        (-1.0 / (p.r0 * p.cc0), po1, -p.gm2 / p.c2)
    } else {
        (
            -1.0 / (p.r0 * (p.c0 + p.cc0)),
            po1,
            -p.gm2 * p.cc1 / ((p.c1 + p.cc1) * (p.c2 + p.cc0 + p.cc1)),
        )
    }
}

/// Midband loop gain of the nested loop with `p_o2` at high frequency.
pub fn nmc_midband(p: &NmcParams) -> f64 {
    p.gm1 * p.r0 * p.cc0 / p.cc1
}

/// Split poles of the nested loop with `p_o2` neglected.
pub fn nmc_split(p: &NmcParams) -> Result<SplitResult, SplitError> {
    p.validate()?;
    let (po0, po1, _) = nmc_open_poles(p, true);
    split(&TwoPoleLoop::new(po1, po0, nmc_midband(p))?)
}

/// Nondominant pair of the NMC amplifier from
/// `1 + s·Cc1/gm1 + s²·Cc1C2/(gm1gm2)`.
pub fn nmc_nondominant_pair(p: &NmcParams, ratio: f64) -> Result<NondominantPair, SplitError> {
    p.validate()?;
    let mut warnings = Vec::new();
    for (label, g) in [
        ("gm1 >> 1/R0", p.gm1 * p.r0),
        ("gm1 >> 1/R1", p.gm1 * p.r1),
        ("gm1 >> 1/R2", p.gm1 * p.r2),
        ("gm2 >> 1/R0", p.gm2 * p.r0),
        ("gm2 >> 1/R1", p.gm2 * p.r1),
        ("gm2 >> 1/R2", p.gm2 * p.r2),
    ] {
        check_ratio(&mut warnings, label, g, 1.0, ratio);
    }
    check_ratio(&mut warnings, "C2 >> Cc0", p.c2, p.cc0, ratio);
    check_ratio(&mut warnings, "C2 >> Cc1", p.c2, p.cc1, ratio);
    let cc_min = p.cc0.min(p.cc1);
    check_ratio(&mut warnings, "Cc >> C0", cc_min, p.c0, ratio);
    check_ratio(&mut warnings, "Cc >> C1", cc_min, p.c1, ratio);

    let e = Exact::from_f64;
    let (gm1, gm2, c2, cc1) = (e(p.gm1), e(p.gm2), e(p.c2), e(p.cc1));
    let c1q = cc1.clone() / gm1.clone();
    let c2q = cc1.clone() * c2.clone() / (gm1.clone() * gm2.clone());
    let product = Coeff::to_f64(&(gm1 * gm2 / (cc1 * c2)));
    let (_, _, po2) = nmc_open_poles(p, true);
    let ideal = -p.gm1 / p.cc1;
    Ok(pair_from([e(1.0), c1q, c2q], product, po2, ideal, warnings))
}

/// `p_o2/2 ∓ (p_o2/2)·sqrt(1 + 8·GBW/p_o2)`, the nondominant NMC pair under
/// the design condition `gm1/Cc1 = 2·GBW`. A negative radicand gives an
/// exact conjugate pair.
pub fn nmc_design_pair(p_o2: f64, gbw: f64) -> [Complex64; 2] {
    let half = 0.5 * p_o2;
    let radical = Complex64::new(1.0 + 8.0 * gbw / p_o2, 0.0).sqrt();
    let a = half - half * radical;
    let b = half + half * radical;
    let mut out = if a.norm() <= b.norm() { [a, b] } else { [b, a] };
    if out[0].im != 0.0 {
        out = [Complex64::new(half, -(half * radical).im.abs()), Complex64::new(half, (half * radical).im.abs())];
    }
    out
}

/// `ξ` and `ω_n` of a complex pole `p`.
pub fn damping(p: Complex64) -> (f64, f64) {
    let wn = p.norm();
    (-p.re / wn, wn)
}
