//! Command-line front end: parameter decks in, JSON/CSV/SVG reports out.
//!
//! Exit codes: 0 success, 2 configuration error (the message names the
//! offending key or flag), 3 numeric failure.

mod config;
mod export;
mod report;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub use config::{default_circuit, load_circuit, parse_sweep, SweepSpec};
pub use export::{locus_csv, parse_locus_csv, svg_plot, write_atomic, CSV_HEADER};
pub use report::{Freq, Root};

use crate::feedback::{self, real_roots_or_empty, FeedbackError};
use crate::netlist::{Circuit, NetlistError, Topology};
use crate::polesplit::{self, SplitError, Warning};
use crate::polyalg::{partial_assignment, roots, ComplexRootSet, PolyError};
use crate::rootlocus::{self, LocusError};
use crate::stability::{self, StabilityError};
use report::{set_out, Header, LoopOut, Options, PairOut, PoleZero, SplitOut, StabilityOut};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

const DEFAULT_LOCUS_POINTS: usize = 400;
const DEFAULT_LOCUS_DECADES: f64 = 3.0;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<NetlistError> for CliError {
    fn from(e: NetlistError) -> Self {
        match e {
            NetlistError::InvalidParam { .. } | NetlistError::UnknownTopology(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(format!("netlist: {e}")),
        }
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        CliError::Numeric(format!("polyalg: {e}"))
    }
}

impl From<FeedbackError> for CliError {
    fn from(e: FeedbackError) -> Self {
        match e {
            FeedbackError::Netlist(n) => n.into(),
            FeedbackError::Poly(p) => p.into(),
            other => CliError::Numeric(format!("feedback: {other}")),
        }
    }
}

impl From<SplitError> for CliError {
    fn from(e: SplitError) -> Self {
        match e {
            SplitError::Netlist(n) => n.into(),
            SplitError::Poly(p) => p.into(),
            other => CliError::Numeric(format!("polesplit: {other}")),
        }
    }
}

impl From<LocusError> for CliError {
    fn from(e: LocusError) -> Self {
        match e {
            LocusError::Feedback(f) => f.into(),
            LocusError::Poly(p) => p.into(),
            e @ LocusError::InvalidSweep(_) => CliError::Config(format!("sweep: {e}")),
        }
    }
}

impl From<StabilityError> for CliError {
    fn from(e: StabilityError) -> Self {
        match e {
            StabilityError::InputTransconductanceRequired => CliError::Config(format!("gm0: {e}")),
            StabilityError::Feedback(f) => f.into(),
            StabilityError::Split(s) => s.into(),
            StabilityError::Poly(p) => p.into(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "millerpole", version, about = "Feedback and root-locus analysis of Miller-compensated amplifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Loop decomposition, closed-loop poles and zeros, exact comparison.
    Analyze(RunArgs),
    /// Root-locus sweep of the loop gain, written as CSV.
    Locus(RunArgs),
    /// Pole-splitting results for the selected topology.
    Split(RunArgs),
    /// Phase margin and stability scenario.
    Pm(RunArgs),
    /// Cancellation-optimal buffer transconductance (current buffer only).
    Optimize(RunArgs),
    /// Table of approximate against exact closed-loop poles.
    Compare(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// two-stage, current-buffer or nmc; may be omitted when the config has one section.
    #[arg(long)]
    pub topology: Option<String>,
    /// TOML or JSON parameter deck; built-in defaults are used when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (written atomically); standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Pole-zero or locus plot.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Locus sweep `key=lo:hi:n`, key being the loop transconductance.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Include the feedforward current through the compensation capacitor.
    #[arg(long, value_enum)]
    pub feedforward: Option<OnOff>,
    /// Validity ratio standing in for `>>` in approximation checks.
    #[arg(long, default_value_t = polesplit::DEFAULT_VALIDITY_RATIO)]
    pub tolerance: f64,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code; messages go to stderr.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("millerpole: {e}");
            e.exit_code()
        }
    }
}

struct Ctx {
    command: &'static str,
    circuit: Circuit,
    feedforward: bool,
    tolerance: f64,
}

impl Ctx {
    fn header(&self) -> Header {
        Header {
            tool: "millerpole",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            topology: self.circuit.topology(),
            config: self.circuit.clone(),
            options: Options { feedforward: self.feedforward, tolerance: self.tolerance },
        }
    }
}

fn context(command: &'static str, a: &RunArgs) -> Result<Ctx, CliError> {
    let topology = match &a.topology {
        Some(t) => Some(t.parse::<Topology>().map_err(|e| CliError::Config(format!("--topology: {e}")))?),
        None => None,
    };
    let circuit = match (&a.config, topology) {
        (Some(path), t) => load_circuit(path, t)?,
        (None, Some(t)) => default_circuit(t),
        (None, None) => return Err(CliError::Config("--topology: required when --config is absent".into())),
    };
    if !(a.tolerance > 1.0 && a.tolerance.is_finite()) {
        return Err(CliError::Config(format!("--tolerance: must be a finite ratio > 1, got {}", a.tolerance)));
    }
    Ok(Ctx { command, circuit, feedforward: a.feedforward == Some(OnOff::On), tolerance: a.tolerance })
}

fn emit(a: &RunArgs, text: &str) -> Result<(), CliError> {
    match &a.out {
        Some(path) => write_atomic(path, text, "--out"),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(format!("json: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn emit_json<T: Serialize>(a: &RunArgs, value: &T) -> Result<(), CliError> {
    emit(a, &to_json(value)?)
}

pub fn execute(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Analyze(a) => analyze(a),
        Command::Locus(a) => locus(a),
        Command::Split(a) => split(a),
        Command::Pm(a) => pm(a),
        Command::Optimize(a) => optimize(a),
        Command::Compare(a) => compare(a),
    }
}

fn gain_key(t: Topology) -> &'static str {
    match t {
        Topology::TwoStage | Topology::CurrentBuffer => "gm",
        Topology::Nmc => "gm1",
    }
}

fn pole_zero(model: &str, tf: &crate::polyalg::RationalFunction) -> Result<PoleZero, CliError> {
    Ok(PoleZero {
        model: model.to_string(),
        poles: set_out(&roots(tf.den())?),
        zeros: set_out(&real_roots_or_empty(tf.num())?),
        dc: tf.dc_value(),
    })
}

#[derive(Serialize)]
struct SplitSection {
    split: Option<SplitOut>,
    nondominant_pair: Option<PairOut>,
    /// Two-stage only: nondominant pole with and without the `Cc²` term.
    p_cnd_full: Option<report::Root>,
    p_cnd_textbook: Option<report::Root>,
    warnings: Vec<Warning>,
}

fn split_section(c: &Circuit, ratio: f64, strict: bool) -> Result<SplitSection, CliError> {
    let mut warnings = Vec::new();
    let soft = |r: Result<SplitOut, SplitError>, w: &mut Vec<Warning>| -> Result<Option<SplitOut>, CliError> {
        match r {
            Ok(s) => Ok(Some(s)),
            Err(e) if !strict => {
                w.push(Warning::new("split", e.to_string()));
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    };
    let mut out = SplitSection { split: None, nondominant_pair: None, p_cnd_full: None, p_cnd_textbook: None, warnings: Vec::new() };
    match c {
        Circuit::TwoStage(p) => {
            out.split = soft(polesplit::two_stage_split(p).map(|s| (&s).into()), &mut warnings)?;
            out.p_cnd_full = Some(polesplit::two_stage_pcnd(p, false).into());
            out.p_cnd_textbook = Some(polesplit::two_stage_pcnd(p, true).into());
        }
        Circuit::CurrentBuffer(p) => {
            out.split = soft(polesplit::cb_ideal_split(p).map(|s| (&s).into()), &mut warnings)?;
            match polesplit::cb_nondominant_pair(p, ratio) {
                Ok(pair) => out.nondominant_pair = Some((&pair).into()),
                Err(e) if !strict => warnings.push(Warning::new("pair", e.to_string())),
                Err(e) => return Err(e.into()),
            }
        }
        Circuit::Nmc(p) => {
            out.split = soft(polesplit::nmc_split(p).map(|s| (&s).into()), &mut warnings)?;
            match polesplit::nmc_nondominant_pair(p, ratio) {
                Ok(pair) => out.nondominant_pair = Some((&pair).into()),
                Err(e) if !strict => warnings.push(Warning::new("pair", e.to_string())),
                Err(e) => return Err(e.into()),
            }
        }
    }
    out.warnings = warnings;
    Ok(out)
}

#[derive(Serialize)]
struct AnalyzeReport {
    #[serde(flatten)]
    header: Header,
    loop_transmission: LoopOut,
    closed_loop: PoleZero,
    oracle: PoleZero,
    pole_deviation: Vec<f64>,
    split: SplitSection,
    stability: Option<StabilityOut>,
    input_impedance: PoleZero,
    warnings: Vec<Warning>,
}

fn analyze(a: &RunArgs) -> Result<(), CliError> {
    let ctx = context("analyze", a)?;
    if let Some(svg) = &a.svg {
        let c = &ctx.circuit;
        let closed = feedback::close_loop(&feedback::decompose(c)?, ctx.feedforward)?.to_f64();
        let text = svg_plot(
            &format!("{} closed loop", c.topology()),
            roots(closed.den())?.as_slice(),
            real_roots_or_empty(closed.num())?.as_slice(),
            &[],
        );
        write_atomic(svg, &text, "--svg")?;
    }
    emit(a, &report_json(&ctx)?)
}

/// The `analyze` report as pretty JSON with a trailing newline, exactly as
/// the command prints it.
pub fn analyze_json(circuit: &Circuit, feedforward: bool, tolerance: f64) -> Result<String, CliError> {
    if !(tolerance > 1.0 && tolerance.is_finite()) {
        return Err(CliError::Config(format!("tolerance: must be a finite ratio > 1, got {tolerance}")));
    }
    report_json(&Ctx { command: "analyze", circuit: circuit.clone(), feedforward, tolerance })
}

fn report_json(ctx: &Ctx) -> Result<String, CliError> {
    let c = &ctx.circuit;
    let d = feedback::decompose(c)?;
    let mut warnings = Vec::new();
    let midband = match polesplit::midband(&d.loop_tx.to_f64()) {
        Ok(m) => Some(m),
        Err(e) => {
            warnings.push(Warning::new("midband", e.to_string()));
            None
        }
    };
    let closed = feedback::close_loop(&d, ctx.feedforward)?.to_f64();
    let model = if ctx.feedforward { "a'/(1+a'b)" } else { "a/(1+ab)" };
    let closed_loop = pole_zero(model, &closed)?;
    let exact = feedback::oracle_transfer(c)?.to_f64();
    let oracle = pole_zero("exact nodal analysis", &exact)?;
    let pole_deviation = stability::pole_deviation(&roots(closed.den())?, &roots(exact.den())?);

    let stability = match stability::scenario_report(c, ctx.tolerance) {
        Ok(r) => Some(StabilityOut::from(&r)),
        Err(e) => {
            warnings.push(Warning::new("stability", CliError::from(e).to_string()));
            None
        }
    };
    let zin = feedback::input_impedance_pz(c)?;
    let input_impedance = PoleZero {
        model: "input impedance".into(),
        poles: set_out(&zin.poles),
        zeros: set_out(&zin.zeros),
        dc: Some(zin.dc),
    };
    let report = AnalyzeReport {
        header: ctx.header(),
        loop_transmission: LoopOut {
            swept_gain: gain_key(c.topology()),
            swept_gain_value: d.loop_gain,
            open_poles: set_out(&d.open_poles),
            loop_zeros: set_out(&d.loop_zeros),
            midband,
        },
        closed_loop,
        oracle,
        pole_deviation,
        split: split_section(c, ctx.tolerance, false)?,
        stability,
        input_impedance,
        warnings,
    };
    to_json(&report)
}

fn locus(a: &RunArgs) -> Result<(), CliError> {
    let ctx = context("locus", a)?;
    let c = &ctx.circuit;
    let key = gain_key(c.topology());
    let d = feedback::decompose(c)?;
    let spec = match &a.sweep {
        Some(s) => {
            let spec = parse_sweep(s)?;
            if spec.key != key {
                return Err(CliError::Config(format!(
                    "--sweep: key '{}' is not the loop transconductance of {} (use '{key}')",
                    spec.key,
                    c.topology()
                )));
            }
            spec
        }
        None => {
            let g = d.loop_gain;
            let f = 10f64.powf(DEFAULT_LOCUS_DECADES);
            SweepSpec { key: key.into(), lo: g / f, hi: g * f, n: DEFAULT_LOCUS_POINTS }
        }
    };
    let (hat, rule) = rootlocus::gain_normalized_loop(&d, ctx.feedforward)?;
    let traj = rootlocus::sweep(&hat, spec.lo, spec.hi, spec.n, rule)?;
    if let Some(svg) = &a.svg {
        let open = roots(hat.den())?;
        let zeros = real_roots_or_empty(hat.num())?;
        let title = format!("{} locus, {} = {:.3e} .. {:.3e}", c.topology(), key, spec.lo, spec.hi);
        write_atomic(svg, &svg_plot(&title, open.as_slice(), zeros.as_slice(), &traj.branches), "--svg")?;
    }
    emit(a, &locus_csv(&traj))
}

#[derive(Serialize)]
struct SplitReport {
    #[serde(flatten)]
    header: Header,
    #[serde(flatten)]
    split: SplitSection,
}

fn split(a: &RunArgs) -> Result<(), CliError> {
    let ctx = context("split", a)?;
    let split = split_section(&ctx.circuit, ctx.tolerance, true)?;
    emit_json(a, &SplitReport { header: ctx.header(), split })
}

#[derive(Serialize)]
struct PmReport {
    #[serde(flatten)]
    header: Header,
    stability: StabilityOut,
}

fn pm(a: &RunArgs) -> Result<(), CliError> {
    let ctx = context("pm", a)?;
    let r = stability::scenario_report(&ctx.circuit, ctx.tolerance)?;
    if let Some(svg) = &a.svg {
        let title = format!("{} ({})", r.scenario.description(), ctx.circuit.topology());
        write_atomic(svg, &svg_plot(&title, r.poles.as_slice(), r.zeros.as_slice(), &[]), "--svg")?;
    }
    emit_json(a, &PmReport { header: ctx.header(), stability: (&r).into() })
}

#[derive(Serialize)]
struct OptimizeReport {
    #[serde(flatten)]
    header: Header,
    gmc: f64,
    objective: f64,
    stability: StabilityOut,
}

fn optimize(a: &RunArgs) -> Result<(), CliError> {
    let ctx = context("optimize", a)?;
    let Circuit::CurrentBuffer(p) = &ctx.circuit else {
        return Err(CliError::Config(format!(
            "--topology: optimize applies to current-buffer, not {}",
            ctx.circuit.topology()
        )));
    };
    let opt = stability::optimize_gmc(p, ctx.tolerance)?;
    emit_json(a, &OptimizeReport { header: ctx.header(), gmc: opt.gmc, objective: opt.objective, stability: (&opt.report).into() })
}

fn compare(a: &RunArgs) -> Result<(), CliError> {
    let ctx = context("compare", a)?;
    let c = &ctx.circuit;
    let exact = feedback::oracle_transfer(c)?.to_f64();
    let oracle = roots(exact.den())?;
    let s = split_section(c, ctx.tolerance, false)?;
    let mut rows: Vec<(String, Vec<Complex64>)> = Vec::new();
    if let Some(sp) = &s.split {
        let mut v = vec![];
        v.extend(sp.p_cd.map(|r| Complex64::new(r.re, r.im)));
        v.push(Complex64::new(sp.p_cnd1.re, sp.p_cnd1.im));
        v.extend(sp.p_cnd2.map(|r| Complex64::new(r.re, r.im)));
        rows.push((format!("split ({:?})", sp.method).to_lowercase(), v));
    }
    if let Some(pair) = &s.nondominant_pair {
        let mut v: Vec<Complex64> = s.split.iter().filter_map(|sp| sp.p_cd).map(|r| Complex64::new(r.re, r.im)).collect();
        v.push(Complex64::new(pair.split.p_cnd1.re, pair.split.p_cnd1.im));
        v.extend(pair.split.p_cnd2.map(|r| Complex64::new(r.re, r.im)));
        rows.push(("nondominant pair".into(), v));
    }
    if let (Some(full), Some(text)) = (&s.p_cnd_full, &s.p_cnd_textbook) {
        rows.push(("p_cnd with Cc^2 term".into(), vec![Complex64::new(full.re, full.im)]));
        rows.push(("p_cnd textbook".into(), vec![Complex64::new(text.re, text.im)]));
    }
    let closed = feedback::close_loop(&feedback::decompose(c)?, ctx.feedforward)?.to_f64();
    let label = if ctx.feedforward { "closed loop a'/(1+a'b)" } else { "closed loop a/(1+ab)" };
    rows.push((label.into(), roots(closed.den())?.into_vec()));

    let mut out = String::new();
    let _ = writeln!(out, "# millerpole {} compare, topology {}", env!("CARGO_PKG_VERSION"), c.topology());
    let _ = writeln!(out, "# exact poles (rad/s): {}", fmt_roots(oracle.as_slice()));
    let _ = writeln!(out, "{:<28} {:>26} {:>26} {:>12}", "model", "pole (rad/s)", "nearest exact (rad/s)", "rel. dev");
    for (label, poles) in &rows {
        let set = ComplexRootSet::new(poles.clone());
        for (p, j) in set.iter().zip(partial_assignment(set.as_slice(), oracle.as_slice())) {
            match j {
                Some(j) => {
                    let y = oracle.as_slice()[j];
                    let dev = (p - y).norm() / p.norm().max(y.norm()).max(f64::MIN_POSITIVE);
                    let _ = writeln!(out, "{:<28} {:>26} {:>26} {:>12.4e}", label, fmt_c(*p), fmt_c(y), dev);
                }
                None => {
                    let _ = writeln!(out, "{:<28} {:>26} {:>26} {:>12}", label, fmt_c(*p), "unmatched", "-");
                }
            }
        }
    }
    for w in &s.warnings {
        let _ = writeln!(out, "# warning [{}]: {}", w.code, w.message);
    }
    emit(a, &out)
}

fn fmt_c(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.6e}", z.re)
    } else {
        format!("{:.6e}{:+.6e}j", z.re, z.im)
    }
}

fn fmt_roots(r: &[Complex64]) -> String {
    r.iter().map(|z| fmt_c(*z)).collect::<Vec<_>>().join(", ")
}
