//! Shunt–shunt two-port decompositions: the loaded open-loop transimpedance
//! `a(s)`, the feedback network `β(s)` and the loop transmission `a(s)β(s)`.
//!
//! All models are built over exact rationals. The loop transmission is
//! stored as `a·β` with the negative-feedback sign convention, so its midband value
//! is positive and the characteristic polynomial is `den + num` of the loop.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::netlist::{
    build_mna, mna_input_impedance, mna_transfer, Circuit, CurrentBufferParams, NetlistError, NmcParams, Topology,
    TwoStageParams,
};
use crate::polyalg::{rational_close, roots, Coeff, ComplexRootSet, Exact, PolyError, Polynomial, RationalFunction};

type Rf = RationalFunction<Exact>;
type Poly = Polynomial<Exact>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeedbackError {
    #[error("no feedback path")]
    NoFeedbackPath,
    #[error("feedforward model unavailable")]
    FeedforwardUnavailable,
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopDecomposition {
    pub topology: Topology,
    /// Open-loop transimpedance without feedforward.
    pub a: Rf,
    /// Open-loop transimpedance including the feedforward current, where modeled.
    pub a_ff: Option<Rf>,
    pub beta: Rf,
    /// `a·β`, with any exact pole/zero cancellation applied.
    pub loop_tx: Rf,
    /// Transconductance the loop is proportional to (`gm`, or `gm1` for NMC).
    pub loop_gain: f64,
    pub open_poles: ComplexRootSet,
    pub loop_zeros: ComplexRootSet,
}

impl LoopDecomposition {
    /// Loop transmission including feedforward, `a'(s)β(s)`.
    pub fn loop_ff(&self) -> Option<Rf> {
        self.a_ff.as_ref().map(|a| a.mul(&self.beta))
    }
}

fn ex(x: f64) -> Exact {
    Exact::from_f64(x)
}

/// `1 + s·tau`
fn lin(tau: Exact) -> Poly {
    Poly::linear(Exact::one(), tau)
}

fn s_times(c: Exact) -> Poly {
    Poly::monomial(c, 1)
}

pub(crate) fn real_roots_or_empty(p: &Polynomial<f64>) -> Result<ComplexRootSet, PolyError> {
    match roots(p) {
        Ok(r) => Ok(r),
        Err(PolyError::NoRoots) => Ok(ComplexRootSet::default()),
        Err(e) => Err(e),
    }
}

fn finish(topology: Topology, a: Rf, a_ff: Option<Rf>, beta: Rf, loop_tx: Rf, loop_gain: f64) -> Result<LoopDecomposition, FeedbackError> {
    let open_poles = real_roots_or_empty(&a.den().to_f64())?;
    let loop_zeros = real_roots_or_empty(&loop_tx.num().to_f64())?;
    Ok(LoopDecomposition { topology, a, a_ff, beta, loop_tx, loop_gain, open_poles, loop_zeros })
}

pub fn decompose_two_stage(p: &TwoStageParams) -> Result<LoopDecomposition, FeedbackError> {
    p.validate()?;
    if p.cc == 0.0 {
        return Err(FeedbackError::NoFeedbackPath);
    }
    let (gm, r1, r2, c1, c2, cc) = (ex(p.gm), ex(p.r1), ex(p.r2), ex(p.c1), ex(p.c2), ex(p.cc));
    let r12 = r1.clone() * r2.clone();
    let den = &lin(r1 * (c1 + cc.clone())) * &lin(r2 * (c2 + cc.clone()));
    let a = Rf::new(Poly::constant(-(gm.clone() * r12.clone())), den.clone())?;
    // feedforward current sCc·V_i replaces gm by (gm − sCc)
    let a_ff = Rf::new(Poly::linear(gm, -cc.clone()).scale(&(-r12)), den)?;
    let beta = Rf::from_poly(s_times(-cc));
    let loop_tx = a.mul(&beta);
    finish(Topology::TwoStage, a, Some(a_ff), beta, loop_tx, p.gm)
}

/// The buffer's `z_a` and `β`'s `p_β` are the same factor `1 + sCc/gmc`;
/// it is cancelled when forming the loop transmission.
pub fn decompose_current_buffer(p: &CurrentBufferParams) -> Result<LoopDecomposition, FeedbackError> {
    p.validate()?;
    if p.cc == 0.0 {
        return Err(FeedbackError::NoFeedbackPath);
    }
    let (gm, gmc, r1, r2, c1, c2, cc) = (ex(p.gm), ex(p.gmc), ex(p.r1), ex(p.r2), ex(p.c1), ex(p.c2), ex(p.cc));
    let r12 = r1.clone() * r2.clone();
    let series = c2.clone() * cc.clone() / (c2.clone() + cc.clone());
    let den = &(&lin(r1 * c1) * &lin(r2 * (c2 + cc.clone()))) * &lin(series / gmc.clone());
    let za_factor = lin(cc.clone() / gmc);
    let a = Rf::new(za_factor.scale(&-(gm.clone() * r12.clone())), den.clone())?;
    let beta = Rf::new(s_times(-cc.clone()), za_factor)?;
    let loop_tx = Rf::new(s_times(gm * r12 * cc), den)?;
    finish(Topology::CurrentBuffer, a, None, beta, loop_tx, p.gm)
}

pub fn decompose_nmc(p: &NmcParams) -> Result<LoopDecomposition, FeedbackError> {
    p.validate()?;
    if p.cc0 == 0.0 || p.cc1 == 0.0 {
        return Err(FeedbackError::NoFeedbackPath);
    }
    if p.gm2 == 0.0 {
        return Err(NetlistError::InvalidParam { key: "gm2", reason: "must be > 0 for a nested loop" }.into());
    }
    let (gm1, gm2) = (ex(p.gm1), ex(p.gm2));
    let (r0, r1, r2) = (ex(p.r0), ex(p.r1), ex(p.r2));
    let (c0, c1, c2, cc0, cc1) = (ex(p.c0), ex(p.c1), ex(p.c2), ex(p.cc0), ex(p.cc1));
    let den = &(&lin(r0.clone() * (c0 + cc0.clone())) * &lin(gm2.clone() * r1.clone() * r2.clone() * cc1.clone()))
        * &lin((c1 + cc1.clone()) * (c2 + cc0.clone() + cc1.clone()) / (gm2.clone() * cc1));
    let gain = gm1 * gm2 * r0 * r1 * r2;
    let a = Rf::new(Poly::constant(-gain.clone()), den.clone())?;
    let beta = Rf::from_poly(s_times(-cc0.clone()));
    let loop_tx = Rf::new(s_times(gain * cc0), den)?;
    finish(Topology::Nmc, a, None, beta, loop_tx, p.gm1)
}

pub fn decompose(circuit: &Circuit) -> Result<LoopDecomposition, FeedbackError> {
    match circuit {
        Circuit::TwoStage(p) => decompose_two_stage(p),
        Circuit::CurrentBuffer(p) => decompose_current_buffer(p),
        Circuit::Nmc(p) => decompose_nmc(p),
    }
}

/// `A(s) = a/(1 + aβ)`, with `a'` in place of `a` when `with_feedforward`.
pub fn close_loop(d: &LoopDecomposition, with_feedforward: bool) -> Result<Rf, FeedbackError> {
    let a = if with_feedforward {
        d.a_ff.as_ref().ok_or(FeedbackError::FeedforwardUnavailable)?
    } else {
        &d.a
    };
    Ok(rational_close(a, &d.beta)?)
}

/// Exact closed-loop transimpedance from nodal analysis.
pub fn oracle_transfer(circuit: &Circuit) -> Result<Rf, FeedbackError> {
    let sys = build_mna(circuit)?;
    Ok(mna_transfer(&sys, circuit.input_node(), circuit.output_node())?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImpedancePz {
    pub poles: ComplexRootSet,
    pub zeros: ComplexRootSet,
    /// Low-frequency resistance `Z(0)` in ohms.
    pub dc: f64,
}

/// Poles, zeros and DC value of the input impedance, after exact
/// cancellation of common factors.
pub fn input_impedance_pz(circuit: &Circuit) -> Result<ImpedancePz, FeedbackError> {
    let sys = build_mna(circuit)?;
    let z = mna_input_impedance(&sys, circuit.input_node())?.reduce();
    let dc = z.dc_value().unwrap_or_else(Exact::zero);
    Ok(ImpedancePz {
        poles: real_roots_or_empty(&z.den().to_f64())?,
        zeros: real_roots_or_empty(&z.num().to_f64())?,
        dc: Coeff::to_f64(&dc),
    })
}
