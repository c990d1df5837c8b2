use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{matching, PolyError, Polynomial};

const MAX_ITERATIONS: usize = 600;
const RESIDUAL_TOL: f64 = 1e-9;
/// Imaginary parts below this fraction of the magnitude are treated as real.
const REAL_SNAP: f64 = 1e-9;

/// Multiset of complex roots, sorted by magnitude then imaginary part.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexRootSet {
    roots: Vec<Complex64>,
}

impl ComplexRootSet {
    pub fn new(mut roots: Vec<Complex64>) -> Self {
        roots.sort_by(|a, b| {
            a.norm()
                .total_cmp(&b.norm())
                .then(a.im.total_cmp(&b.im))
        });
        Self { roots }
    }

    pub fn from_real(roots: &[f64]) -> Self {
        Self::new(roots.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex64> {
        self.roots.iter()
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.roots
    }

    /// Roots whose imaginary part is exactly zero.
    pub fn real(&self) -> Vec<f64> {
        self.roots.iter().filter(|r| r.im == 0.0).map(|r| r.re).collect()
    }

    /// Smallest-magnitude root.
    pub fn smallest(&self) -> Option<Complex64> {
        self.roots.first().copied()
    }

    pub fn largest(&self) -> Option<Complex64> {
        self.roots.last().copied()
    }

    /// Every non-real root has a conjugate partner within `rel_tol`.
    pub fn is_conjugate_closed(&self, rel_tol: f64) -> bool {
        let mut used = vec![false; self.roots.len()];
        for i in 0..self.roots.len() {
            let z = self.roots[i];
            if z.im == 0.0 || used[i] {
                continue;
            }
            let target = z.conj();
            let partner = (0..self.roots.len())
                .filter(|&j| j != i && !used[j])
                .min_by(|&a, &b| {
                    (self.roots[a] - target)
                        .norm()
                        .total_cmp(&(self.roots[b] - target).norm())
                });
            match partner {
                Some(j) if (self.roots[j] - target).norm() <= rel_tol * z.norm() => {
                    used[i] = true;
                    used[j] = true;
                }
                _ => return false,
            }
        }
        true
    }

    /// Largest relative distance between matched roots of two equally sized
    /// sets, under the minimal-displacement assignment.
    pub fn max_relative_deviation(&self, other: &ComplexRootSet) -> Option<f64> {
        if self.len() != other.len() {
            return None;
        }
        let perm = matching::min_displacement_assignment(&self.roots, &other.roots);
        Some(
            self.roots
                .iter()
                .zip(perm)
                .map(|(a, j)| {
                    let b = other.roots[j];
                    let scale = a.norm().max(b.norm());
                    if scale == 0.0 {
                        0.0
                    } else {
                        (a - b).norm() / scale
                    }
                })
                .fold(0.0, f64::max),
        )
    }
}

/// Roots of `c0 + c1·s + c2·s²` by the cancellation-free quadratic formula.
/// A negative discriminant yields an exact conjugate pair.
pub fn quadratic_roots(c0: f64, c1: f64, c2: f64) -> [Complex64; 2] {
    let disc = c1 * c1 - 4.0 * c0 * c2;
    if disc >= 0.0 {
        let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        let (a, b) = (q / c2, c0 / q);
        if a.abs() <= b.abs() {
            [Complex64::new(a, 0.0), Complex64::new(b, 0.0)]
        } else {
            [Complex64::new(b, 0.0), Complex64::new(a, 0.0)]
        }
    } else {
        let re = -c1 / (2.0 * c2);
        let im = (-disc).sqrt() / (2.0 * c2.abs());
        [Complex64::new(re, -im), Complex64::new(re, im)]
    }
}

/// All complex roots of a real polynomial.
///
/// Zero roots are deflated exactly; the rest are found by Aberth–Ehrlich
/// iteration on the scaled polynomial `p(σ·x)` with `σ` the geometric mean of
/// the root magnitudes, started from Newton-polygon radii and polished by
/// Newton steps on the unscaled polynomial. Non-real roots are returned as
/// exact conjugate pairs.
pub fn roots(p: &Polynomial<f64>) -> Result<ComplexRootSet, PolyError> {
    let deg = match p.degree() {
        None | Some(0) => return Err(PolyError::NoRoots),
        Some(d) => d,
    };
    if !p.is_finite() {
        return Err(PolyError::NonFinite);
    }
    let c = p.coeffs();
    let zeros = c.iter().take_while(|&&x| x == 0.0).count();
    let reduced = Polynomial::new(c[zeros..].to_vec());
    let mut found = vec![Complex64::new(0.0, 0.0); zeros];
    let m = deg - zeros;
    match m {
        0 => {}
        1 => {
            let rc = reduced.coeffs();
            found.push(Complex64::new(-rc[0] / rc[1], 0.0));
        }
        _ => found.extend(aberth(&reduced)),
    }
    let out = ComplexRootSet::new(pair_conjugates(found));

    let scale = p.max_abs_coeff();
    let worst = out
        .iter()
        .map(|r| p.eval(*r).norm() / (scale * r.norm().max(1.0).powi(deg as i32)))
        .fold(0.0, f64::max);
    if worst.is_nan() || worst > RESIDUAL_TOL {
        return Err(PolyError::NotConverged(worst));
    }
    Ok(out)
}

fn eval_with_derivative(c: &[f64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut bound = 0.0;
    let r = z.norm();
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
        bound = bound * r + a.abs();
    }
    (p, dp, bound)
}

/// Upper convex hull of `(k, ln|c_k|)` gives one radius per hull edge;
/// roots are seeded on those circles.
fn initial_guesses(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let pts: Vec<(usize, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != 0.0)
        .map(|(k, a)| (k, a.abs().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut out = Vec::with_capacity(n);
    for (seg, w) in hull.windows(2).enumerate() {
        let (i, li) = w[0];
        let (j, lj) = w[1];
        let count = j - i;
        let radius = ((li - lj) / count as f64).exp();
        for k in 0..count {
            let angle = 2.0 * PI * k as f64 / count as f64 + 2.0 * PI * seg as f64 / n as f64 + 0.4;
            out.push(Complex64::from_polar(radius, angle));
        }
    }
    out
}

fn aberth(p: &Polynomial<f64>) -> Vec<Complex64> {
    let c = p.coeffs();
    let n = c.len() - 1;
    let sigma = (c[0].abs() / c[n].abs()).powf(1.0 / n as f64);
    let mut scaled: Vec<f64> = c.iter().enumerate().map(|(k, a)| a * sigma.powi(k as i32)).collect();
    let top = scaled.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    scaled.iter_mut().for_each(|a| *a /= top);

    let mut z = initial_guesses(&scaled);
    let mut done = vec![false; n];
    for _ in 0..MAX_ITERATIONS {
        let mut all = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (pv, dpv, bound) = eval_with_derivative(&scaled, z[k]);
            if pv.norm() <= 4.0 * f64::EPSILON * bound {
                done[k] = true;
                continue;
            }
            let ratio = pv / dpv;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                // derivative vanished; nudge off the critical point
                z[k] *= Complex64::from_polar(1.0 + 1e-3, 0.1);
                all = false;
                continue;
            }
            z[k] -= step;
            if step.norm() <= f64::EPSILON * z[k].norm() {
                done[k] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }

    z.into_iter().map(|r| polish(c, r * sigma)).collect()
}

fn polish(c: &[f64], mut z: Complex64) -> Complex64 {
    let (mut pv, _, _) = eval_with_derivative(c, z);
    for _ in 0..3 {
        let (p_now, dp, bound) = eval_with_derivative(c, z);
        if p_now.norm() <= f64::EPSILON * bound || dp.norm() == 0.0 {
            break;
        }
        let cand = z - p_now / dp;
        let (p_cand, _, _) = eval_with_derivative(c, cand);
        if p_cand.norm() < pv.norm() {
            z = cand;
            pv = p_cand;
        } else {
            break;
        }
    }
    z
}

/// Snaps near-real roots onto the axis and replaces each remaining
/// upper/lower pair with an exact conjugate pair.
fn pair_conjugates(raw: Vec<Complex64>) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for z in raw {
        if z.im.abs() <= REAL_SNAP * z.norm() {
            out.push(Complex64::new(z.re, 0.0));
        } else if z.im > 0.0 {
            upper.push(z);
        } else {
            lower.push(z);
        }
    }
    // An unmatched extra can only come from a root that was nearly real.
    while upper.len() > lower.len() {
        let k = argmin_abs_im(&upper);
        let z = upper.swap_remove(k);
        out.push(Complex64::new(z.re, 0.0));
    }
    while lower.len() > upper.len() {
        let k = argmin_abs_im(&lower);
        let z = lower.swap_remove(k);
        out.push(Complex64::new(z.re, 0.0));
    }
    let mirrored: Vec<Complex64> = lower.iter().map(|z| z.conj()).collect();
    let perm = matching::min_displacement_assignment(&upper, &mirrored);
    for (u, j) in upper.iter().zip(perm) {
        let avg = (u + mirrored[j]) * 0.5;
        out.push(avg);
        out.push(avg.conj());
    }
    out
}

fn argmin_abs_im(v: &[Complex64]) -> usize {
    (0..v.len())
        .min_by(|&a, &b| v[a].im.abs().total_cmp(&v[b].im.abs()))
        .expect("nonempty")
}
