use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::CliError;
use crate::rootlocus::LocusTrajectory;

/// Writes `contents` next to `path` and renames it into place, so a failed
/// run never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &str, flag: &str) -> Result<(), CliError> {
    let err = |e: std::io::Error| CliError::Config(format!("{flag} '{}': {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(contents.as_bytes()).map_err(err)?;
    tmp.flush().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

pub const CSV_HEADER: &str = "gain,branch,re,im";

/// One row per (gain, branch), gains ascending, LF line endings.
pub fn locus_csv(t: &LocusTrajectory) -> String {
    let mut out = String::with_capacity(64 * t.gains.len() * t.branch_count().max(1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (i, k) in t.gains.iter().enumerate() {
        for (b, branch) in t.branches.iter().enumerate() {
            let z = branch[i];
            let _ = writeln!(out, "{k:.16e},{b},{:.16e},{:.16e}", z.re, z.im);
        }
    }
    out
}

/// Inverse of [`locus_csv`].
pub fn parse_locus_csv(text: &str) -> Result<LocusTrajectory, String> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(format!("expected header '{CSV_HEADER}'"));
    }
    let mut gains: Vec<f64> = Vec::new();
    let mut branches: Vec<Vec<Complex64>> = Vec::new();
    for (n, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let [k, b, re, im] = f.as_slice() else {
            return Err(format!("line {}: expected four fields", n + 2));
        };
        let num = |s: &str| s.parse::<f64>().map_err(|e| format!("line {}: {e}", n + 2));
        let (k, re, im) = (num(k)?, num(re)?, num(im)?);
        let b: usize = b.parse().map_err(|e| format!("line {}: {e}", n + 2))?;
        if b == 0 {
            gains.push(k);
        }
        if b >= branches.len() {
            branches.resize_with(b + 1, Vec::new);
        }
        branches[b].push(Complex64::new(re, im));
    }
    if branches.iter().any(|br| br.len() != gains.len()) {
        return Err("ragged branch data".into());
    }
    Ok(LocusTrajectory { gains, branches })
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 40.0;

/// asinh-compressed axis so that poles many decades apart share one plot.
struct Axis {
    scale: f64,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64> + Clone) -> Self {
        let scale = values
            .clone()
            .map(f64::abs)
            .filter(|v| *v > 0.0 && v.is_finite())
            .fold(f64::INFINITY, f64::min);
        let scale = if scale.is_finite() { scale } else { 1.0 };
        let squash = |v: f64| (v / scale).asinh();
        let (mut lo, mut hi) = values
            .filter(|v| v.is_finite())
            .map(squash)
            .fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi - lo < 1e-12 {
            lo -= 1.0;
            hi += 1.0;
        }
        let pad = 0.05 * (hi - lo);
        Axis { scale, lo: lo - pad, hi: hi + pad }
    }

    fn map(&self, v: f64, px: f64) -> f64 {
        ((v / self.scale).asinh() - self.lo) / (self.hi - self.lo) * px
    }
}

/// Pole/zero plot with optional locus branches.
pub fn svg_plot(title: &str, poles: &[Complex64], zeros: &[Complex64], branches: &[Vec<Complex64>]) -> String {
    let all = || poles.iter().chain(zeros).chain(branches.iter().flatten());
    let xa = Axis::new(all().map(|z| z.re));
    let ya = Axis::new(all().map(|z| z.im));
    let pw = W - 2.0 * MARGIN;
    let ph = H - 2.0 * MARGIN;
    let x = |v: f64| MARGIN + xa.map(v, pw);
    let y = |v: f64| H - MARGIN - ya.map(v, ph);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    let _ = writeln!(s, r##"<line x1="{MARGIN}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888"/>"##, y(0.0), W - MARGIN, y(0.0));
    let _ = writeln!(s, r##"<line x1="{:.2}" y1="{MARGIN}" x2="{:.2}" y2="{:.2}" stroke="#888"/>"##, x(0.0), x(0.0), H - MARGIN);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">Re(s), asinh scale {:.3e} rad/s</text>"#,
        W - MARGIN,
        H - 12.0,
        xa.scale
    );
    for (i, br) in branches.iter().enumerate() {
        let pts: Vec<String> = br.iter().map(|z| format!("{:.2},{:.2}", x(z.re), y(z.im))).collect();
        let hue = (i * 97) % 360;
        let _ = writeln!(s, r#"<polyline fill="none" stroke="hsl({hue},70%,40%)" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
    }
    for p in poles {
        let (cx, cy) = (x(p.re), y(p.im));
        let _ = writeln!(
            s,
            r#"<path d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}" stroke="black" stroke-width="2"/>"#,
            cx - 5.0,
            cy - 5.0,
            cx + 5.0,
            cy + 5.0,
            cx - 5.0,
            cy + 5.0,
            cx + 5.0,
            cy - 5.0
        );
    }
    for z in zeros {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="none" stroke="black" stroke-width="2"/>"#, x(z.re), y(z.im));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
