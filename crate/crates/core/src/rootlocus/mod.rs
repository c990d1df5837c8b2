//! Root-locus sweeps of the characteristic polynomial `den + k·num` of a
//! loop transmission with the swept gain factored out.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feedback::{FeedbackError, LoopDecomposition};
use crate::parallel::par_map;
use crate::polyalg::{Coeff, Exact, min_displacement_assignment, roots, total_displacement, ComplexRootSet, PolyError, Polynomial, RationalFunction};

/// Displacement between consecutive grid points, relative to the local root
/// magnitude, above which the step is bisected.
const REFINE_THRESHOLD: f64 = 0.1;
const MAX_REFINE_DEPTH: usize = 16;
/// Relative cost difference under which two assignments count as tied.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocusError {
    #[error("invalid sweep: {0}")]
    InvalidSweep(&'static str),
    #[error("feedback: {0}")]
    Feedback(#[from] FeedbackError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocusRule {
    /// `1 + k·L = 0`
    Positive,
    /// `1 − k·L = 0`
    Negative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocusTrajectory {
    pub gains: Vec<f64>,
    /// `branches[b][i]` is branch `b` at `gains[i]`.
    pub branches: Vec<Vec<Complex64>>,
}

impl LocusTrajectory {
    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    /// All branch points at grid index `i`.
    pub fn roots_at(&self, i: usize) -> Vec<Complex64> {
        self.branches.iter().map(|b| b[i]).collect()
    }
}

/// `den(L̂) + k·num(L̂)`.
pub fn characteristic(loop_hat: &RationalFunction, k: f64) -> Polynomial {
    loop_hat.den() + &loop_hat.num().scale(&k)
}

fn signed(rule: LocusRule, k: f64) -> f64 {
    match rule {
        LocusRule::Positive => k,
        LocusRule::Negative => -k,
    }
}

fn solve(loop_hat: &RationalFunction, k: f64, rule: LocusRule) -> Result<Vec<Complex64>, PolyError> {
    roots(&characteristic(loop_hat, signed(rule, k))).map(ComplexRootSet::into_vec)
}

/// Assignment of `next` onto the branches ending at `prev`. Exact ties (as at
/// a coalescence point) are resolved toward the extrapolated motion.
fn match_step(prev: &[Complex64], before: Option<&[Complex64]>, next: &[Complex64]) -> Vec<Complex64> {
    let mut perm = min_displacement_assignment(prev, next);
    if let Some(before) = before {
        let cost = total_displacement(prev, next, &perm);
        let predicted: Vec<Complex64> = prev.iter().zip(before).map(|(p, b)| p + (p - b)).collect();
        let mut best_pred = total_displacement(&predicted, next, &perm);
        let base = perm.clone();
        for i in 0..base.len() {
            for j in i + 1..base.len() {
                let mut cand = base.clone();
                cand.swap(i, j);
                let c = total_displacement(prev, next, &cand);
                if (c - cost).abs() <= TIE_TOL * cost.max(f64::MIN_POSITIVE) {
                    let pc = total_displacement(&predicted, next, &cand);
                    if pc < best_pred {
                        best_pred = pc;
                        perm = cand;
                    }
                }
            }
        }
    }
    perm.into_iter().map(|j| next[j]).collect()
}

fn needs_refinement(a: &[Complex64], b: &[Complex64]) -> bool {
    let perm = min_displacement_assignment(a, b);
    a.iter().zip(perm).any(|(x, j)| {
        let y = b[j];
        let scale = x.norm().max(y.norm());
        scale > 0.0 && (x - y).norm() > REFINE_THRESHOLD * scale
    })
}

/// Loop transmission per unit of the decomposition's swept transconductance.
///
/// Without feedforward this is `a·β / g` on the positive rule. With
/// feedforward the zero of `a'·β` stays at its nominal position and the
/// negated loop `−a'·β / g` is swept on the negative rule, so that
/// `k = g` reproduces the nominal closed loop.
pub fn gain_normalized_loop(d: &LoopDecomposition, feedforward: bool) -> Result<(RationalFunction, LocusRule), LocusError> {
    if d.loop_gain.is_nan() || d.loop_gain <= 0.0 {
        return Err(LocusError::Feedback(FeedbackError::NoFeedbackPath));
    }
    let inv = <Exact as num_traits::One>::one() / <Exact as Coeff>::from_f64(d.loop_gain);
    if feedforward {
        let l = d.loop_ff().ok_or(FeedbackError::FeedforwardUnavailable)?;
        let hat = RationalFunction::new(l.num().scale(&-inv), l.den().clone())?;
        Ok((hat.to_f64(), LocusRule::Negative))
    } else {
        let hat = RationalFunction::new(d.loop_tx.num().scale(&inv), d.loop_tx.den().clone())?;
        Ok((hat.to_f64(), LocusRule::Positive))
    }
}

/// Log-spaced sweep of `k` over `[k_min, k_max]` with `n` base points.
///
/// Base points are solved in parallel; intervals whose roots move by more
/// than 10% of their magnitude are bisected geometrically before branches
/// are linked by minimal total displacement.
pub fn sweep(loop_hat: &RationalFunction, k_min: f64, k_max: f64, n: usize, rule: LocusRule) -> Result<LocusTrajectory, LocusError> {
    if !(k_min > 0.0 && k_max.is_finite() && k_max >= k_min) {
        return Err(LocusError::InvalidSweep("require 0 < k_min <= k_max"));
    }
    if n < 2 {
        return Err(LocusError::InvalidSweep("need at least two points"));
    }
    let ratio = (k_max / k_min).ln();
    let base: Vec<f64> = (0..n)
        .map(|i| {
            if i + 1 == n {
                k_max
            } else {
                k_min * (ratio * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect();
    let solved = par_map(&base, |&k| solve(loop_hat, k, rule));
    let mut grid: Vec<(f64, Vec<Complex64>)> = Vec::with_capacity(n);
    for (k, r) in base.iter().zip(solved) {
        grid.push((*k, r?));
    }

    let mut refined: Vec<(f64, Vec<Complex64>)> = Vec::with_capacity(grid.len());
    for pair in grid.windows(2) {
        if refined.is_empty() {
            refined.push(pair[0].clone());
        }
        refine(loop_hat, rule, &pair[0], &pair[1], 0, &mut refined)?;
        refined.push(pair[1].clone());
    }

    let width = refined[0].1.len();
    let mut branches: Vec<Vec<Complex64>> = vec![Vec::with_capacity(refined.len()); width];
    let mut prev: Vec<Complex64> = refined[0].1.clone();
    let mut before: Option<Vec<Complex64>> = None;
    for (i, (_, r)) in refined.iter().enumerate() {
        let row = if i == 0 { prev.clone() } else { match_step(&prev, before.as_deref(), r) };
        for (b, z) in branches.iter_mut().zip(&row) {
            b.push(*z);
        }
        before = Some(std::mem::replace(&mut prev, row));
    }
    Ok(LocusTrajectory { gains: refined.into_iter().map(|(k, _)| k).collect(), branches })
}

fn refine(
    loop_hat: &RationalFunction,
    rule: LocusRule,
    lo: &(f64, Vec<Complex64>),
    hi: &(f64, Vec<Complex64>),
    depth: usize,
    out: &mut Vec<(f64, Vec<Complex64>)>,
) -> Result<(), LocusError> {
    if depth >= MAX_REFINE_DEPTH || lo.1.len() != hi.1.len() || !needs_refinement(&lo.1, &hi.1) {
        return Ok(());
    }
    let k = (lo.0 * hi.0).sqrt();
    if k <= lo.0 || k >= hi.0 {
        return Ok(());
    }
    let mid = (k, solve(loop_hat, k, rule)?);
    refine(loop_hat, rule, lo, &mid, depth + 1, out)?;
    out.push(mid.clone());
    refine(loop_hat, rule, &mid, hi, depth + 1, out)
}

/// Real solutions of `N·D′ − N′·D = 0` away from the zeros of `N`.
///
/// Each point lies on the positive or the negative locus depending on the
/// sign of its gain; see [`breakaway_gain`].
pub fn breakaway_points(loop_hat: &RationalFunction) -> ComplexRootSet {
    let (n, d) = (loop_hat.num(), loop_hat.den());
    let eq = &(n * &d.derivative()) - &(&n.derivative() * d);
    let Ok(candidates) = roots(&eq) else {
        return ComplexRootSet::default();
    };
    let scale = n.max_abs_coeff();
    let pts = candidates
        .iter()
        .filter(|z| z.im == 0.0)
        .filter(|z| n.abs_eval(**z) > 0.0 && n.eval(**z).norm() > 1e-9 * n.abs_eval(**z).max(scale * f64::EPSILON))
        .copied()
        .collect();
    ComplexRootSet::new(pts)
}

/// Gain `k` at which a real point `s` is on the locus, and the rule that
/// reaches it with `k ≥ 0`.
pub fn breakaway_gain(loop_hat: &RationalFunction, s: f64) -> Option<(f64, LocusRule)> {
    let z = Complex64::new(s, 0.0);
    let n = loop_hat.num().eval(z).re;
    if n == 0.0 {
        return None;
    }
    let k = -loop_hat.den().eval(z).re / n;
    Some(if k >= 0.0 { (k, LocusRule::Positive) } else { (-k, LocusRule::Negative) })
}
