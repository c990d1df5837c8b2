//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines are always printed; exits nonzero if any fail.

use std::process::{Command, ExitCode};

use millerpole::feedback::{close_loop, decompose_two_stage, oracle_transfer};
use millerpole::netlist::{build_mna, mna_transfer, Circuit, CurrentBufferParams, NmcParams, TwoStageParams};
use millerpole::polesplit::{
    cb_ideal_split, cb_nondominant_pair, nmc_nondominant_pair, split, two_stage_pcnd, TwoPoleLoop, DEFAULT_VALIDITY_RATIO,
};
use millerpole::polyalg::{roots, Coeff, Exact};
use millerpole::rootlocus::{gain_normalized_loop, sweep};
use millerpole::stability::{scenario_report, Scenario};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x4d69_6c6c_6572;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn ex(x: f64) -> Exact {
    Exact::from_f64(x)
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

fn random_two_stage(rng: &mut ChaCha8Rng) -> TwoStageParams {
    TwoStageParams {
        gm: log_uniform(rng, 1e-7, 1e-1),
        r1: log_uniform(rng, 1e2, 1e8),
        r2: log_uniform(rng, 1e2, 1e8),
        c1: log_uniform(rng, 1e-16, 1e-10),
        c2: log_uniform(rng, 1e-16, 1e-10),
        cc: log_uniform(rng, 1e-16, 1e-10),
        gm0: None,
    }
}

/// Roots of `c0 + c1·s + c2·s²`, smaller magnitude first (cancellation-free).
fn quad(c0: f64, c1: f64, c2: f64) -> [Complex64; 2] {
    let d = c1 * c1 - 4.0 * c0 * c2;
    if d < 0.0 {
        let re = -c1 / (2.0 * c2);
        let im = (-d).sqrt() / (2.0 * c2).abs();
        return [Complex64::new(re, -im), Complex64::new(re, im)];
    }
    let q = -0.5 * (c1 + c1.signum() * d.sqrt());
    let (a, b) = (c0 / q, q / c2);
    if a.abs() <= b.abs() {
        [Complex64::new(a, 0.0), Complex64::new(b, 0.0)]
    } else {
        [Complex64::new(b, 0.0), Complex64::new(a, 0.0)]
    }
}

fn criterion_1(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = random_two_stage(rng);
        let closed = close_loop(&decompose_two_stage(&p).unwrap(), true).unwrap();
        let c = Circuit::TwoStage(p);
        let mna = mna_transfer(&build_mna(&c).unwrap(), c.input_node(), c.output_node()).unwrap();
        let pairs = [(closed.num(), mna.num()), (closed.den(), mna.den())];
        for (a, b) in pairs {
            let n = a.coeffs().len().max(b.coeffs().len());
            for i in 0..n {
                worst = worst.max(rel(Coeff::to_f64(&a.coeff(i)), Coeff::to_f64(&b.coeff(i))));
            }
        }
    }
    outcome(worst <= 1e-12, format!("1000 sets, worst coefficient deviation {worst:.2e} (limit 1e-12)"))
}

fn criterion_2(rng: &mut ChaCha8Rng) -> Outcome {
    let mut bad = 0;
    for _ in 0..100 {
        let p = random_two_stage(rng);
        let closed = close_loop(&decompose_two_stage(&p).unwrap(), false).unwrap();
        let (r1, r2, c1, c2, cc) = (ex(p.r1), ex(p.r2), ex(p.c1), ex(p.c2), ex(p.cc));
        let want = r1 * r2 * (c1.clone() * c2.clone() + cc.clone() * (c1 + c2) + cc.clone() * cc);
        if closed.den().coeff(2) != want || closed.den().coeff(0) != ex(1.0) {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("100 sets, {bad} mismatches of the s^2 coefficient (exact comparison)"))
}

fn criterion_3(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let wd = 10f64.powf(rng.gen_range(-3.0..9.0));
        let wn = wd * 10f64.powf(rng.gen_range(2.0..6.0));
        let g = 10f64.powf(rng.gen_range(2.0..6.0));
        let tp = TwoPoleLoop::new(-wd, -wn, g).unwrap();
        let s = split(&tp).unwrap();
        // exact closed loop 1 + L with L = g·(s/wd)/((1 + s/wd)(1 + s/wn))
        let [a, b] = quad(1.0, (1.0 + g) / wd + 1.0 / wn, 1.0 / (wd * wn));
        worst = worst.max((s.p_cd.unwrap() - a).norm() / a.norm());
        worst = worst.max((s.p_cnd1 - b).norm() / b.norm());
    }
    outcome(worst <= 0.02, format!("10000 loops, worst relative error {worst:.3e} (limit 2e-2)"))
}

fn criterion_4(rng: &mut ChaCha8Rng) -> Outcome {
    let (mut n, mut order_fail, mut closer) = (0, 0, 0);
    while n < 1000 {
        let p = random_two_stage(rng);
        if p.gm * p.r1 < 100.0 || p.gm * p.r2 < 100.0 {
            continue;
        }
        n += 1;
        let (e8, e9) = (two_stage_pcnd(&p, false).re, two_stage_pcnd(&p, true).re);
        if e8.abs() >= e9.abs() || e8.is_nan() {
            order_fail += 1;
        }
        let den = close_loop(&decompose_two_stage(&p).unwrap(), false).unwrap().den().to_f64();
        let [_, nd] = quad(den.coeff(0), den.coeff(1), den.coeff(2));
        if (e8 - nd.re).abs() <= (e9 - nd.re).abs() {
            closer += 1;
        }
    }
    let share = closer as f64 / n as f64;
    outcome(
        order_fail == 0 && share >= 0.99,
        format!("1000 sets, ordering violations {order_fail}, closer in {:.1}% (need 99%)", 100.0 * share),
    )
}

fn second_pole(c: &Circuit) -> Complex64 {
    let tf = oracle_transfer(c).unwrap().to_f64();
    roots(tf.den()).unwrap().as_slice()[1]
}

fn criterion_5(rng: &mut ChaCha8Rng) -> Outcome {
    // closed forms: the exact ratio 1 + Cc/C1
    let mut worst_closed = 0.0f64;
    let mut worst_oracle = 0.0f64;
    let (mut n, mut over) = (0, 0);
    while n < 200 {
        let gm = log_uniform(rng, 1e-5, 1e-2);
        let p = CurrentBufferParams {
            gm,
            gmc: gm * log_uniform(rng, 100.0, 1e4),
            r1: log_uniform(rng, 1e4, 1e8),
            r2: log_uniform(rng, 1e4, 1e8),
            c1: log_uniform(rng, 1e-15, 1e-13),
            c2: log_uniform(rng, 1e-12, 1e-10),
            cc: log_uniform(rng, 1e-13, 1e-11),
            gm0: None,
        };
        // validity domain of the pair and split approximations, "≫" as 10×
        let r = DEFAULT_VALIDITY_RATIO;
        let valid = p.cc >= r * p.c1
            && p.c2 >= r * p.cc
            && p.gm * p.r1.min(p.r2) >= r
            && p.gm * p.r1 >= r * p.c2 / p.cc
            && cb_ideal_split(&p).is_ok_and(|s| s.warnings.is_empty())
            && millerpole::polesplit::two_stage_split(&p.two_stage()).is_ok_and(|s| s.warnings.is_empty());
        // ideal buffer: p_o3 well above the split pole it would attract
        let po3 = p.gmc * (p.c2 + p.cc) / (p.c2 * p.cc);
        if !valid || po3 < r * cb_ideal_split(&p).unwrap().p_cnd1.norm() {
            continue;
        }
        n += 1;
        let factor = 1.0 + p.cc / p.c1;
        let closed = cb_ideal_split(&p).unwrap().p_cnd1.re / two_stage_pcnd(&p.two_stage(), false).re;
        worst_closed = worst_closed.max(rel(closed, factor));
        let cbp = second_pole(&Circuit::CurrentBuffer(p.clone()));
        let tsp = second_pole(&Circuit::TwoStage(p.two_stage()));
        let e = rel(cbp.norm() / tsp.norm(), factor);
        worst_oracle = worst_oracle.max(e);
        over += usize::from(e > 0.10);
    }
    outcome(
        worst_closed <= 1e-14 && worst_oracle <= 0.10,
        format!(
            "closed-form ratio error {worst_closed:.1e}; 200 valid sets, {over} beyond 10%, worst oracle ratio error {:.2}%",
            100.0 * worst_oracle
        ),
    )
}

fn criterion_6(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst_formula = 0.0f64;
    let mut worst_roots = 0.0f64;
    for _ in 0..500 {
        let gm = log_uniform(rng, 1e-6, 1e-1);
        let p = CurrentBufferParams {
            gm,
            gmc: log_uniform(rng, 1e-6, 1e-1),
            r1: log_uniform(rng, 1e3, 1e8),
            r2: log_uniform(rng, 1e3, 1e8),
            c1: log_uniform(rng, 1e-15, 1e-11),
            c2: log_uniform(rng, 1e-13, 1e-9),
            cc: log_uniform(rng, 1e-14, 1e-11),
            gm0: None,
        };
        let pair = cb_nondominant_pair(&p, DEFAULT_VALIDITY_RATIO).unwrap();
        let [c0, _, c2] = pair.quadratic;
        worst_formula = worst_formula.max(rel(pair.product_formula, c0 / c2));
        worst_roots = worst_roots.max((pair.product_roots - pair.product_formula).norm() / pair.product_formula.abs());

        let q = NmcParams {
            gm0: log_uniform(rng, 1e-6, 1e-3),
            gm1: log_uniform(rng, 1e-6, 1e-2),
            gm2: log_uniform(rng, 1e-4, 1.0),
            r0: log_uniform(rng, 1e4, 1e7),
            r1: log_uniform(rng, 1e4, 1e7),
            r2: log_uniform(rng, 1e4, 1e7),
            c0: log_uniform(rng, 1e-15, 1e-13),
            c1: log_uniform(rng, 1e-15, 1e-13),
            c2: log_uniform(rng, 1e-12, 1e-9),
            cc0: log_uniform(rng, 1e-13, 1e-11),
            cc1: log_uniform(rng, 1e-13, 1e-11),
        };
        let pair = nmc_nondominant_pair(&q, DEFAULT_VALIDITY_RATIO).unwrap();
        let [c0, _, c2] = pair.quadratic;
        worst_formula = worst_formula.max(rel(pair.product_formula, c0 / c2));
        worst_roots = worst_roots.max((pair.product_roots - pair.product_formula).norm() / pair.product_formula.abs());
    }
    // the formula and c0/c2 are each one rounding of the same exact rational
    outcome(
        worst_formula <= 4.0 * f64::EPSILON && worst_roots <= 1e-12,
        format!("1000 pairs, formula vs c0/c2 {worst_formula:.1e}, root product {worst_roots:.1e} (limits 4 ulp, 1e-12)"),
    )
}

/// GBW = 2^27 rad/s; gm1/Cc1 = 2·GBW and p_o2 = −2^m·GBW hold exactly.
fn nmc_dyadic(m: i32) -> NmcParams {
    let t = |e: i32| 2f64.powi(e);
    NmcParams {
        gm0: t(-13),
        gm1: t(-13),
        gm2: t(-6 + m),
        r0: t(20),
        r1: t(20),
        r2: t(20),
        c0: t(-47),
        c1: t(-47),
        c2: t(-33),
        cc0: t(-40),
        cc1: t(-41),
    }
}

fn criterion_7() -> Outcome {
    let gbw = 2f64.powi(27);
    let r = DEFAULT_VALIDITY_RATIO;
    let a = nmc_nondominant_pair(&nmc_dyadic(3), r).unwrap();
    let target = Complex64::new(-4.0 * gbw, 0.0);
    let e1 = [a.split.p_cnd1, a.split.p_cnd2.unwrap()].iter().map(|z| (z - target).norm() / target.norm()).fold(0.0, f64::max);
    let b = nmc_nondominant_pair(&nmc_dyadic(2), r).unwrap();
    let want = [Complex64::new(-2.0 * gbw, -2.0 * gbw), Complex64::new(-2.0 * gbw, 2.0 * gbw)];
    let got = [b.split.p_cnd1, b.split.p_cnd2.unwrap()];
    let e2 = got.iter().zip(&want).map(|(g, w)| (g - w).norm() / w.norm()).fold(0.0, f64::max);
    let xi = -got[1].re / got[1].norm();
    let pass = e1 <= 1e-9 && e2 <= 1e-9 && (xi - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-9;
    outcome(pass, format!("double pole error {e1:.1e}, complex pair error {e2:.1e}, xi {xi:.5}"))
}

fn criterion_8() -> Outcome {
    let nmc = |gm2: f64| NmcParams {
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
    };
    let mut pass = true;
    let mut parts = Vec::new();
    // p_o2 = −100·GBW, −8·GBW, −4·GBW
    for (gm2, tag, target) in [(1.0, Scenario::Fig11a, 63.0), (0.08, Scenario::Fig11b, 62.0), (0.04, Scenario::Fig11c, 60.0)] {
        let r = scenario_report(&Circuit::Nmc(nmc(gm2)), DEFAULT_VALIDITY_RATIO).unwrap();
        let num = r.pm_numeric_deg.unwrap_or(f64::NAN);
        let ok = r.scenario == tag && (r.pm_deg - target).abs() <= 1.0 && (num - r.pm_deg).abs() <= 2.0;
        pass &= ok;
        parts.push(format!("{tag:?} closed {:.2} numeric {num:.2}{}", r.pm_deg, if ok { "" } else { " (out of band)" }));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_9() -> Outcome {
    let base = TwoStageParams { gm: 1e-3, r1: 1e6, r2: 1e5, c1: 1e-13, c2: 1e-11, cc: 1e-12, gm0: None };
    let orderings = [
        ("|p_o1| < |p_o2|", TwoStageParams { r1: 1e7, ..base.clone() }),
        ("|p_o1| > |p_o2|", TwoStageParams { r1: 1e4, r2: 1e7, ..base }),
    ];
    let mut violations = 0;
    let mut parts = Vec::new();
    for (label, p) in orderings {
        let (hat, rule) = gain_normalized_loop(&decompose_two_stage(&p).unwrap(), false).unwrap();
        let t = sweep(&hat, 1e-8, 1e-1, 400, rule).unwrap();
        let mags = |i: usize| {
            let r = t.roots_at(i);
            let lo = r.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
            let hi = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
            (lo, hi)
        };
        let mut v = 0;
        for i in 1..t.gains.len() {
            let ((lo0, hi0), (lo1, hi1)) = (mags(i - 1), mags(i));
            if lo1 > lo0 || hi1 < hi0 {
                v += 1;
            }
        }
        violations += v;
        parts.push(format!("{label}: {} points, {v} violations", t.gains.len()));
    }
    outcome(violations == 0, parts.join("; "))
}

fn criterion_10() -> Outcome {
    let p = TwoStageParams { gm: 1e-3, r1: 1e6, r2: 1e5, c1: 1e-13, c2: 1e-11, cc: 1e-12, gm0: None };
    let (hat, rule) = gain_normalized_loop(&decompose_two_stage(&p).unwrap(), true).unwrap();
    let t = sweep(&hat, p.gm, 1e6 * p.gm, 200, rule).unwrap();
    let last = t.roots_at(t.gains.len() - 1);
    let rhp: Vec<Complex64> = last.into_iter().filter(|z| z.re > 0.0 && z.im == 0.0).collect();
    let z_rhp = p.gm / p.cc;
    match rhp.as_slice() {
        [z] => {
            let e = rel(z.re, z_rhp);
            outcome(e <= 0.05, format!("RHP root {:.4e} vs gm/Cc {z_rhp:.4e}, error {:.2}% (limit 5%)", z.re, 100.0 * e))
        }
        other => outcome(false, format!("expected one real RHP root, found {}", other.len())),
    }
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.toml");
    std::fs::write(&cfg, "[current-buffer]\ngm = 1e-3\ngmc = 1e-3\nr1 = 1e6\nr2 = 1e5\nc1 = 1e-13\nc2 = 1e-11\ncc = 1e-12\ngm0 = 1e-4\n").unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_millerpole"))
            .args(["analyze", "--config", cfg.to_str().unwrap()])
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    let ok = a.status.success() && b.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout;
    outcome(ok, format!("two analyze runs, {} bytes each, identical: {}", a.stdout.len(), a.stdout == b.stdout))
}

fn main() -> ExitCode {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let results = [
        ("two-port equivalence", criterion_1(&mut rng)),
        ("Cc^2 term", criterion_2(&mut rng)),
        ("pole-splitting theorem", criterion_3(&mut rng)),
        ("textbook pole ordering and accuracy", criterion_4(&mut rng)),
        ("current-buffer factor", criterion_5(&mut rng)),
        ("Vieta products", criterion_6(&mut rng)),
        ("nondominant NMC pair", criterion_7()),
        ("phase margins", criterion_8()),
        ("root-locus splitting", criterion_9()),
        ("negative locus", criterion_10()),
        ("CLI determinism", criterion_11()),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("criterion {:>2} {}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
