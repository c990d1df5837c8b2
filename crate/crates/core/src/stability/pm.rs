use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const SCAN_POINTS: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseMargin {
    pub closed_form_deg: f64,
    pub numeric_deg: Option<f64>,
    pub crossover: Option<f64>,
}

/// `90° − atan[2ξx/(1 − x²)]` with `x = gbw/ω_n`, taking the arctangent on
/// the branch that stays continuous through `x = 1`.
pub fn pm_complex_pair(xi: f64, omega_n: f64, gbw: f64) -> f64 {
    90.0 - pair_phase(xi, gbw / omega_n)
}

/// Phase lag in degrees of `1 + 2ξs/ω_n + s²/ω_n²` at `s = jω`, `x = ω/ω_n`.
fn pair_phase(xi: f64, x: f64) -> f64 {
    (2.0 * xi * x).atan2(1.0 - x * x).to_degrees()
}

/// Wraps into `(−180, 180]`.
fn wrap(deg: f64) -> f64 {
    let mut d = deg % 360.0;
    if d > 180.0 {
        d -= 360.0;
    } else if d <= -180.0 {
        d += 360.0;
    }
    d
}

/// Phase in degrees contributed by the factor `1 − s/r` at `s = jω`.
fn factor_phase(r: Complex64, w: f64) -> f64 {
    let f = Complex64::new(1.0, 0.0) - Complex64::new(0.0, w) / r;
    f.arg().to_degrees()
}

/// Phase lag at `ω` of `Π 1/(1 − s/r)` over `roots`, with complex pairs
/// combined through the second-order form. Negated, it is the lead of the
/// same roots used as zeros.
fn closed_form_lag(poles: &[Complex64], w: f64) -> f64 {
    let mut lag = 0.0;
    for p in poles {
        if p.im == 0.0 {
            lag -= (w / p.re.abs()).atan().to_degrees() * p.re.signum();
        } else if p.im > 0.0 {
            let (xi, wn) = (-p.re / p.norm(), p.norm());
            lag += pair_phase(xi, w / wn);
        }
    }
    lag
}

/// Dominant-pole phase margin. The smallest pole is taken as dominant; the
/// others and the zeros contribute their phase at `ω = gbw`. The numeric
/// variant finds the true unity crossover of
/// `(gbw/|p_d|)·Π(1 − s/z)/Π(1 − s/p)`.
pub fn phase_margin(poles: &[Complex64], zeros: &[Complex64], gbw: f64) -> PhaseMargin {
    let mut sorted = poles.to_vec();
    sorted.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let closed = match sorted.split_first() {
        Some((_, rest)) => 90.0 - closed_form_lag(rest, gbw) + closed_form_lag(zeros, gbw),
        None => 180.0,
    };
    let numeric = sorted
        .first()
        .and_then(|pd| numeric_pm(gbw / pd.norm(), &sorted, zeros));
    PhaseMargin {
        closed_form_deg: wrap(closed),
        numeric_deg: numeric.map(|(pm, _)| pm),
        crossover: numeric.map(|(_, w)| w),
    }
}

fn loop_at(dc: f64, poles: &[Complex64], zeros: &[Complex64], w: f64) -> (f64, f64) {
    let s = Complex64::new(0.0, w);
    let one = Complex64::new(1.0, 0.0);
    let mut mag = dc.abs();
    let mut phase = if dc < 0.0 { 180.0 } else { 0.0 };
    for z in zeros {
        mag *= (one - s / z).norm();
        phase += factor_phase(*z, w);
    }
    for p in poles {
        mag /= (one - s / p).norm();
        phase -= factor_phase(*p, w);
    }
    (mag, phase)
}

/// Phase margin and crossover of `dc·Π(1 − s/z)/Π(1 − s/p)`; `None` when
/// the magnitude never falls through unity.
pub fn numeric_pm(dc: f64, poles: &[Complex64], zeros: &[Complex64]) -> Option<(f64, f64)> {
    if !(dc.is_finite() && dc.abs() > 1.0) {
        return None;
    }
    let mags = poles.iter().chain(zeros).map(|r| r.norm()).filter(|m| *m > 0.0);
    let lo = mags.clone().fold(f64::INFINITY, f64::min) * 1e-3;
    let hi = mags.fold(0.0, f64::max) * 1e3 * dc.abs().max(1.0).sqrt();
    if !(lo.is_finite() && hi > lo) {
        return None;
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let at = |i: usize| (llo + (lhi - llo) * i as f64 / SCAN_POINTS as f64).exp();
    let mut prev = at(0);
    if loop_at(dc, poles, zeros, prev).0 < 1.0 {
        return None;
    }
    for i in 1..=SCAN_POINTS {
        let w = at(i);
        if loop_at(dc, poles, zeros, w).0 < 1.0 {
            let (mut a, mut b) = (prev.ln(), w.ln());
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if loop_at(dc, poles, zeros, m.exp()).0 >= 1.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            let wc = (0.5 * (a + b)).exp();
            let (_, phase) = loop_at(dc, poles, zeros, wc);
            return Some((wrap(180.0 + phase), wc));
        }
        prev = w;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn single_nondominant_at_twice_gbw() {
        let g = 1e8;
        let pm = phase_margin(&[re(-g * 1e-6), re(-2.0 * g)], &[], g);
        assert!((pm.closed_form_deg - 63.43).abs() < 0.01);
    }

    #[test]
    fn double_pole_at_four_gbw() {
        let g = 1e8;
        let pm = phase_margin(&[re(-g * 1e-6), re(-4.0 * g), re(-4.0 * g)], &[], g);
        let want = 90.0 - 2.0 * (0.25f64).atan().to_degrees();
        assert!((pm.closed_form_deg - want).abs() < 1e-9);
    }

    #[test]
    fn complex_pair_examples() {
        let g = 1.0;
        // ≈ 60.26°: 90° − atan(0.5/0.875)
        let want = 90.0 - (0.5f64 / 0.875).atan().to_degrees();
        assert!((pm_complex_pair(1.0 / 2f64.sqrt(), 2.0 * 2f64.sqrt() * g, g) - want).abs() < 1e-9);
        assert!((want - 60.0).abs() < 1.0);
        assert!((pm_complex_pair(0.5, 1e12, 1.0) - 90.0).abs() < 1e-9);
        let want = 90.0 - (2.0 * 0.5 * 0.5 / 0.75f64).atan().to_degrees();
        assert!((pm_complex_pair(0.5, 2.0, 1.0) - want).abs() < 1e-9);
        assert!((pm_complex_pair(0.3, 1.0, 1.0)).abs() < 1e-12);
        // past ω_n the lag exceeds 90°
        assert!(pm_complex_pair(0.3, 1.0, 2.0) < 0.0);
    }

    #[test]
    fn pair_in_pole_list_matches_second_order_form() {
        let g = 1e6;
        let p = Complex64::from_polar(2.0 * 2f64.sqrt() * g, std::f64::consts::PI * 0.75);
        let pm = phase_margin(&[re(-1.0), p, p.conj()], &[], g);
        assert!((pm.closed_form_deg - pm_complex_pair(1.0 / 2f64.sqrt(), p.norm(), g)).abs() < 1e-9);
    }

    #[test]
    fn zeros_add_or_subtract_phase() {
        let g = 1.0;
        let base = phase_margin(&[re(-1e-6), re(-3.0)], &[], g).closed_form_deg;
        let lhp = phase_margin(&[re(-1e-6), re(-3.0)], &[re(-5.0)], g).closed_form_deg;
        let rhp = phase_margin(&[re(-1e-6), re(-3.0)], &[re(5.0)], g).closed_form_deg;
        let z = (0.2f64).atan().to_degrees();
        assert!((lhp - base - z).abs() < 1e-9);
        assert!((base - rhp - z).abs() < 1e-9);
    }

    #[test]
    fn numeric_matches_closed_form_for_far_dominant_pole() {
        let g = 1e8;
        let pm = phase_margin(&[re(-g * 1e-4), re(-3.0 * g)], &[], g);
        assert!((pm.numeric_deg.unwrap() - pm.closed_form_deg).abs() < 2.0);
    }

    #[test]
    fn no_crossover_for_small_gain() {
        assert_eq!(numeric_pm(0.5, &[re(-1.0)], &[]), None);
    }
}
