use serde::{Deserialize, Serialize};

use super::{scenario_report, StabilityError, StabilityReport};
use crate::netlist::{Circuit, CurrentBufferParams};
use crate::parallel::par_map;
use crate::polesplit::{cb_nondominant_pair, Warning};

const DECADES_EACH_SIDE: f64 = 6.0;
const POINTS_PER_DECADE: usize = 40;
const GOLDEN_ITERATIONS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmcOptimum {
    pub gmc: f64,
    /// `max_i |p_cnd,i − z_a| / |z_a|` at the optimum.
    pub objective: f64,
    pub report: StabilityReport,
}

fn with_gmc(p: &CurrentBufferParams, gmc: f64) -> CurrentBufferParams {
    CurrentBufferParams { gmc, ..p.clone() }
}

/// Largest relative distance of the nondominant pair from `z_a = −gmc/Cc`.
pub fn cancellation_distance(p: &CurrentBufferParams, ratio: f64) -> Result<f64, StabilityError> {
    let pair = cb_nondominant_pair(p, ratio)?;
    let za = num_complex::Complex64::new(-p.gmc / p.cc, 0.0);
    let far = [pair.split.p_cnd1, pair.split.p_cnd2.expect("pair")]
        .iter()
        .map(|z| (z - za).norm() / za.norm())
        .fold(0.0, f64::max);
    Ok(far)
}

/// Buffer transconductance that clusters the nondominant pair at `z_a`.
///
/// A log grid of ±6 decades around `gm` is searched, then the best bracket
/// is refined by golden section in `ln gmc`. `gm` and all other parameters
/// stay fixed.
pub fn optimize_gmc(p: &CurrentBufferParams, ratio: f64) -> Result<GmcOptimum, StabilityError> {
    p.validate().map_err(crate::feedback::FeedbackError::from)?;
    let center = p.gm.max(f64::MIN_POSITIVE).ln();
    let span = DECADES_EACH_SIDE * std::f64::consts::LN_10;
    let n = 2 * DECADES_EACH_SIDE as usize * POINTS_PER_DECADE + 1;
    let grid: Vec<f64> = (0..n).map(|i| center - span + 2.0 * span * i as f64 / (n - 1) as f64).collect();
    let values = par_map(&grid, |&lg| cancellation_distance(&with_gmc(p, lg.exp()), ratio));
    let values: Vec<f64> = values.into_iter().collect::<Result<_, _>>()?;

    let best = (0..n).min_by(|&a, &b| values[a].total_cmp(&values[b])).expect("nonempty grid");
    let minima = (0..n)
        .filter(|&i| {
            let left = i == 0 || values[i] < values[i - 1];
            let right = i + 1 == n || values[i] <= values[i + 1];
            left && right
        })
        .count();

    let mut warnings = Vec::new();
    if minima > 1 {
        warnings.push(Warning::new(
            "non-unimodal",
            format!("objective has {minima} local minima on the gmc grid; refining around the global grid minimum"),
        ));
    }
    if best == 0 || best + 1 == n {
        warnings.push(Warning::new("grid-edge", "optimum lies at the edge of the gmc search range"));
    }

    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(n - 1)]);
    let f = |lg: f64| cancellation_distance(&with_gmc(p, lg.exp()), ratio);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..GOLDEN_ITERATIONS {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let (lg, objective) = [(grid[best], values[best]), (c, fc), (d, fd)]
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("candidates");
    let gmc = lg.exp();
    let mut report = scenario_report(&Circuit::CurrentBuffer(with_gmc(p, gmc)), ratio)?;
    report.warnings.extend(warnings);
    Ok(GmcOptimum { gmc, objective, report })
}
