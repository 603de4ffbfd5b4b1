//! `ifm` command-line front end.
//!
//! Exit codes: 0 success, 1 statistical check failed, 2 invalid input,
//! 3 I/O error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::dicke::{self, Branch, DickeConfig};
use crate::interferometer::{
    self, conditional_object_state, correlation_c, detector_probabilities, entropy_closed_alpha,
    entropy_closed_gamma, run_ev, DetectorDistribution, EVConfig, InteractionSpec, Outcome,
};
use crate::montecarlo::{self, TallyReport};
use crate::qstate::{basis_label, overlap_squared, JointState, ObjectState, ObjectVector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_STAT_FAIL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Slack allowed on `α² + β² = 1` for command-line input; accepted pairs are
/// renormalized before they reach the library.
pub const INPUT_NORM_TOL: f64 = 1e-6;

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

impl From<interferometer::InterferometerError> for CliError {
    fn from(e: interferometer::InterferometerError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<dicke::DickeError> for CliError {
    fn from(e: dicke::DickeError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<montecarlo::MonteCarloError> for CliError {
    fn from(e: montecarlo::MonteCarloError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "ifm",
    version,
    about = "Interaction-free measurement interferometer simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the staged interferometer once and report every stage.
    Run {
        #[command(flatten)]
        ev: EvArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Entanglement and correlation versus |alpha| for the perfect absorber.
    SweepAlpha {
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Entanglement and dark-port probability versus gamma.
    SweepGamma {
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Sample single-photon outcomes and check the frequencies.
    Sample {
        #[command(flatten)]
        ev: EvArgs,
        /// Number of trials.
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Probe/target collision model report.
    Dicke {
        #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2, allow_negative_numbers = true)]
        beta: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct EvArgs {
    /// Amplitude of the object in region X.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Amplitude of the object in region Y.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta: f64,
    /// Transmission amplitude of the object, in [0, 1].
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output path, `-` for standard output.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Grid size, including both endpoints.
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses arguments, runs the command, and returns the process exit code.
/// `stdout` receives output directed to `-`; diagnostics go to `stderr`.
pub fn run_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(rendered.as_bytes());
            } else {
                let _ = stderr.write_all(rendered.as_bytes());
            }
            return if code == 0 { EXIT_OK } else { EXIT_INVALID };
        }
    };
    match execute(&cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: &Command, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Run { ev, output } => {
            let report = run_report(ev)?;
            let text = match output.format {
                Format::Csv => report.to_csv(),
                Format::Json => to_json(&report),
            };
            emit(&output.out, &text, stdout)?;
            Ok(EXIT_OK)
        }
        Command::SweepAlpha { sweep } => {
            let rows = sweep_alpha(sweep.points)?;
            let text = match sweep.output.format {
                Format::Csv => rows_to_csv(&rows),
                Format::Json => sweep_json("sweep-alpha", &rows),
            };
            emit(&sweep.output.out, &text, stdout)?;
            Ok(EXIT_OK)
        }
        Command::SweepGamma { sweep } => {
            let rows = sweep_gamma(sweep.points)?;
            let text = match sweep.output.format {
                Format::Csv => rows_to_csv(&rows),
                Format::Json => sweep_json("sweep-gamma", &rows),
            };
            emit(&sweep.output.out, &text, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Sample {
            ev,
            n,
            seed,
            output,
        } => {
            let report = sample_report(ev, *n, *seed)?;
            let text = match output.format {
                Format::Csv => tally_csv(&report.tally),
                Format::Json => to_json(&report),
            };
            emit(&output.out, &text, stdout)?;
            Ok(if report.tally.pass {
                EXIT_OK
            } else {
                EXIT_STAT_FAIL
            })
        }
        Command::Dicke {
            alpha,
            beta,
            output,
        } => {
            let report = dicke_report(*alpha, *beta)?;
            let text = match output.format {
                Format::Csv => report.to_csv(),
                Format::Json => to_json(&report),
            };
            emit(&output.out, &text, stdout)?;
            Ok(EXIT_OK)
        }
    }
}

fn emit(path: &std::path::Path, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    if path.as_os_str() == "-" {
        stdout.write_all(text.as_bytes()).map_err(io_err)?;
        stdout.flush().map_err(io_err)
    } else {
        std::fs::write(path, text).map_err(io_err)
    }
}

/// Locale-independent scientific notation with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    // Adding 0.0 folds -0.0 into 0.0.
    format!("{:.16e}", x + 0.0)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Checks a pair of real amplitudes from the command line and rescales it
/// to unit norm.
fn normalized_pair(alpha: f64, beta: f64) -> Result<(f64, f64), CliError> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !v.is_finite() || v < 0.0 {
            return Err(CliError::Invalid(format!(
                "{name} = {v} must be a finite nonnegative real"
            )));
        }
    }
    let total = alpha * alpha + beta * beta;
    if (total - 1.0).abs() > INPUT_NORM_TOL {
        return Err(CliError::Invalid(format!(
            "|alpha|^2 + |beta|^2 = {total} violates the normalization |alpha|^2 + |beta|^2 = 1"
        )));
    }
    let norm = total.sqrt();
    Ok((alpha / norm, beta / norm))
}

fn validated_gamma(gamma: f64) -> Result<f64, CliError> {
    if !gamma.is_finite() || !(0.0..=1.0).contains(&gamma) {
        return Err(CliError::Invalid(format!(
            "gamma = {gamma} must lie in [0, 1]"
        )));
    }
    Ok(gamma)
}

fn ev_inputs(ev: &EvArgs) -> Result<(EVConfig, InteractionSpec, f64), CliError> {
    let (alpha, beta) = normalized_pair(ev.alpha, ev.beta)?;
    let gamma = validated_gamma(ev.gamma)?;
    let cfg = EVConfig::new(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))?;
    let spec = InteractionSpec::from_real_gamma(gamma)?;
    Ok((cfg, spec, gamma))
}

#[derive(Debug, Clone, Serialize)]
pub struct AmplitudeEntry {
    pub photon: &'static str,
    pub object: &'static str,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageEntry {
    pub name: &'static str,
    pub amplitudes: Vec<AmplitudeEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObjectEntry {
    pub object: &'static str,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionalEntry {
    pub outcome: Outcome,
    /// `None` when the outcome cannot occur.
    pub state: Option<Vec<ObjectEntry>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub meta: serde_json::Value,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub stages: Vec<StageEntry>,
    pub detector: DetectorDistribution,
    pub conditional_states: Vec<ConditionalEntry>,
    /// Overlap of the DD-conditioned object state with the initial one.
    pub correlation: Option<f64>,
    /// `(|α|² − |β|²)²`, defined for the perfect absorber (`γ = 0`).
    pub correlation_closed: Option<f64>,
    /// Closed form, available when `γ = 0` or `α = 0`.
    pub entropy_closed: Option<f64>,
    pub entropy_numeric: f64,
}

fn amplitudes(state: &JointState) -> Vec<AmplitudeEntry> {
    state
        .amps()
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let (p, o) = basis_label(k);
            AmplitudeEntry {
                photon: p.label(),
                object: o.label(),
                re: a.re,
                im: a.im,
            }
        })
        .collect()
}

fn object_entries(v: &ObjectVector) -> Vec<ObjectEntry> {
    ObjectState::ALL
        .iter()
        .map(|&o| {
            let a = v.amp(o);
            ObjectEntry {
                object: o.label(),
                re: a.re,
                im: a.im,
            }
        })
        .collect()
}

pub fn run_report(ev: &EvArgs) -> Result<RunReport, CliError> {
    let (cfg, spec, gamma) = ev_inputs(ev)?;
    let trace = run_ev(&cfg, &spec)?;
    let detector = detector_probabilities(&trace.psi_final);
    let stages = trace
        .stages()
        .iter()
        .map(|(name, s)| StageEntry {
            name,
            amplitudes: amplitudes(s),
        })
        .collect();

    let mut conditional_states = Vec::new();
    let mut dd_state = None;
    for outcome in Outcome::ALL {
        let state = conditional_object_state(&trace.psi_final, outcome).ok();
        if outcome == Outcome::Dd {
            dd_state = state;
        }
        conditional_states.push(ConditionalEntry {
            outcome,
            state: state.as_ref().map(object_entries),
        });
    }
    let correlation = match dd_state {
        Some(v) => Some(
            overlap_squared(&v, &cfg.object_vector())
                .map_err(interferometer::InterferometerError::from)?,
        ),
        None => None,
    };

    let alpha = cfg.alpha().re;
    let entropy_closed = if gamma == 0.0 {
        Some(entropy_closed_alpha(alpha))
    } else if alpha == 0.0 {
        Some(entropy_closed_gamma(gamma))
    } else {
        None
    };

    Ok(RunReport {
        meta: json!({ "command": "run", "tool_version": TOOL_VERSION }),
        alpha,
        beta: cfg.beta().re,
        gamma,
        delta: spec.delta().re,
        stages,
        detector,
        conditional_states,
        correlation,
        correlation_closed: (gamma == 0.0).then(|| correlation_c(&cfg)),
        entropy_closed,
        entropy_numeric: interferometer::final_entanglement(&trace)?,
    })
}

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

impl RunReport {
    /// Two-column `key,value` listing.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        let mut row = |k: &str, v: String| {
            let _ = writeln!(out, "{k},{v}");
        };
        row("alpha", fmt_num(self.alpha));
        row("beta", fmt_num(self.beta));
        row("gamma", fmt_num(self.gamma));
        row("delta", fmt_num(self.delta));
        for stage in &self.stages {
            for a in &stage.amplitudes {
                row(
                    &format!("{}.{}.{}.re", stage.name, a.photon, a.object),
                    fmt_num(a.re),
                );
                row(
                    &format!("{}.{}.{}.im", stage.name, a.photon, a.object),
                    fmt_num(a.im),
                );
            }
        }
        row("p_ld", fmt_num(self.detector.p_ld));
        row("p_dd", fmt_num(self.detector.p_dd));
        row("p_abs", fmt_num(self.detector.p_abs));
        for c in &self.conditional_states {
            for o in ObjectState::ALL {
                let entry = c.state.as_ref().map(|s| &s[o.index()]);
                row(
                    &format!("conditional.{}.{}.re", c.outcome, o),
                    opt_num(entry.map(|e| e.re)),
                );
                row(
                    &format!("conditional.{}.{}.im", c.outcome, o),
                    opt_num(entry.map(|e| e.im)),
                );
            }
        }
        row("correlation", opt_num(self.correlation));
        row("correlation_closed", opt_num(self.correlation_closed));
        row("entropy_closed", opt_num(self.entropy_closed));
        row("entropy_numeric", fmt_num(self.entropy_numeric));
        out
    }
}

/// A row that can be written as one CSV line.
pub trait CsvRow: Serialize {
    const HEADER: &'static str;
    fn fields(&self) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaRow {
    pub alpha: f64,
    pub entropy_closed: f64,
    pub entropy_numeric: f64,
    pub correlation: f64,
}

impl CsvRow for AlphaRow {
    const HEADER: &'static str = "alpha,entropy_closed,entropy_numeric,correlation";
    fn fields(&self) -> Vec<f64> {
        vec![
            self.alpha,
            self.entropy_closed,
            self.entropy_numeric,
            self.correlation,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaRow {
    pub gamma: f64,
    pub entropy_closed: f64,
    pub entropy_numeric: f64,
    pub p_dd: f64,
}

impl CsvRow for GammaRow {
    const HEADER: &'static str = "gamma,entropy_closed,entropy_numeric,p_dd";
    fn fields(&self) -> Vec<f64> {
        vec![
            self.gamma,
            self.entropy_closed,
            self.entropy_numeric,
            self.p_dd,
        ]
    }
}

fn grid(points: usize) -> Result<impl Iterator<Item = f64>, CliError> {
    if points < 2 {
        return Err(CliError::Invalid(format!(
            "--points {points}: need at least 2 grid points"
        )));
    }
    let last = (points - 1) as f64;
    Ok((0..points).map(move |i| i as f64 / last))
}

/// Uniform |α| grid on [0, 1] with the perfect absorber. The correlation
/// column is measured by post-selecting DD in the simulated run.
pub fn sweep_alpha(points: usize) -> Result<Vec<AlphaRow>, CliError> {
    grid(points)?
        .map(|alpha| {
            let cfg = EVConfig::from_alpha_modulus(alpha)?;
            let e = interferometer::entanglement_alpha(&cfg)?;
            Ok(AlphaRow {
                alpha,
                entropy_closed: e.closed,
                entropy_numeric: e.numeric,
                correlation: interferometer::post_selected_correlation(&cfg)?,
            })
        })
        .collect()
}

/// Uniform γ grid on [0, 1] from the bomb-tester preparation.
pub fn sweep_gamma(points: usize) -> Result<Vec<GammaRow>, CliError> {
    grid(points)?
        .map(|gamma| {
            let e = interferometer::entanglement_gamma(gamma)?;
            let spec = InteractionSpec::from_real_gamma(gamma)?;
            let trace = run_ev(&EVConfig::elitzur_vaidman(), &spec)?;
            Ok(GammaRow {
                gamma,
                entropy_closed: e.closed,
                entropy_numeric: e.numeric,
                p_dd: detector_probabilities(&trace.psi_final).p_dd,
            })
        })
        .collect()
}

pub fn rows_to_csv<R: CsvRow>(rows: &[R]) -> String {
    let mut out = String::with_capacity(rows.len() * 96);
    out.push_str(R::HEADER);
    out.push('\n');
    for r in rows {
        let line: Vec<String> = r.fields().into_iter().map(fmt_num).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn sweep_json<R: Serialize>(command: &str, rows: &[R]) -> String {
    to_json(&json!({
        "meta": { "command": command, "grid_points": rows.len(), "tool_version": TOOL_VERSION },
        "rows": rows,
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleReport {
    pub meta: serde_json::Value,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(flatten)]
    pub tally: TallyReport,
}

pub fn sample_report(ev: &EvArgs, n: u64, seed: u64) -> Result<SampleReport, CliError> {
    let (cfg, spec, gamma) = ev_inputs(ev)?;
    let trace = run_ev(&cfg, &spec)?;
    let dist = detector_probabilities(&trace.psi_final);
    let records = montecarlo::sample_outcomes(&dist, n, seed)?;
    Ok(SampleReport {
        meta: json!({ "command": "sample", "seed": seed, "n": n, "tool_version": TOOL_VERSION }),
        alpha: cfg.alpha().re,
        beta: cfg.beta().re,
        gamma,
        tally: montecarlo::frequency_check(&records, &dist),
    })
}

pub fn tally_csv(t: &TallyReport) -> String {
    let mut out = String::from("outcome,count,empirical,expected,z_score\n");
    for o in Outcome::ALL {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            o,
            t.counts[&o],
            fmt_num(t.empirical[&o]),
            fmt_num(t.expected[&o]),
            fmt_num(t.z_scores[&o])
        );
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct DickeReport {
    pub meta: serde_json::Value,
    pub alpha: f64,
    pub beta: f64,
    /// `(free,free), (free,scatt), (scatt,free), (scatt,scatt)`.
    pub amplitudes: Vec<[f64; 2]>,
    pub null_probability: f64,
    /// `(free_T, scatt_T)` after a null result; `None` if impossible.
    pub target_state: Option<Vec<[f64; 2]>>,
    pub overlap_free: Option<f64>,
    pub entanglement_closed: f64,
    pub entanglement_numeric: f64,
}

pub fn dicke_report(alpha: f64, beta: f64) -> Result<DickeReport, CliError> {
    let (alpha, beta) = normalized_pair(alpha, beta)?;
    let cfg = DickeConfig::new(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))?;
    let state = dicke::dicke_state(&cfg)?;
    let null = dicke::condition_on_null(&state).ok();
    Ok(DickeReport {
        meta: json!({ "command": "dicke", "tool_version": TOOL_VERSION }),
        alpha,
        beta,
        amplitudes: state.amps().iter().map(|a| [a.re, a.im]).collect(),
        null_probability: state.amp(Branch::Free, Branch::Free).norm_sqr()
            + state.amp(Branch::Free, Branch::Scattered).norm_sqr(),
        target_state: null.map(|r| r.target.iter().map(|a| [a.re, a.im]).collect()),
        overlap_free: null.map(|r| r.overlap_with_free()),
        entanglement_closed: dicke::dicke_entanglement(&cfg),
        entanglement_numeric: dicke::dicke_entanglement_numeric(&state),
    })
}

impl DickeReport {
    pub fn to_csv(&self) -> String {
        const LABELS: [&str; 4] = ["free_free", "free_scatt", "scatt_free", "scatt_scatt"];
        let mut out = String::from("key,value\n");
        let mut row = |k: &str, v: String| {
            let _ = writeln!(out, "{k},{v}");
        };
        row("alpha", fmt_num(self.alpha));
        row("beta", fmt_num(self.beta));
        for (label, a) in LABELS.iter().zip(&self.amplitudes) {
            row(&format!("amp.{label}.re"), fmt_num(a[0]));
            row(&format!("amp.{label}.im"), fmt_num(a[1]));
        }
        row("null_probability", fmt_num(self.null_probability));
        for (k, label) in ["free", "scatt"].iter().enumerate() {
            let entry = self.target_state.as_ref().map(|t| t[k]);
            row(&format!("target.{label}.re"), opt_num(entry.map(|e| e[0])));
            row(&format!("target.{label}.im"), opt_num(entry.map(|e| e[1])));
        }
        row("overlap_free", opt_num(self.overlap_free));
        row("entanglement_closed", fmt_num(self.entanglement_closed));
        row("entanglement_numeric", fmt_num(self.entanglement_numeric));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["ifm"];
        full.extend_from_slice(args);
        let code = run_with_args(full, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    fn csv_value(csv: &str, key: &str) -> String {
        csv.lines()
            .find_map(|l| l.strip_prefix(&format!("{key},")))
            .unwrap_or_else(|| panic!("missing key {key}"))
            .to_string()
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.25), "2.5000000000000000e-1");
        assert_eq!(fmt_num(-0.0), "0.0000000000000000e0");
        assert_eq!(fmt_num(0.25).parse::<f64>().unwrap(), 0.25);
        let x = std::f64::consts::LN_2;
        assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn run_ev_csv() {
        let (code, out, _) = run(&["run", "--alpha", "0", "--beta", "1", "--gamma", "0"]);
        assert_eq!(code, 0);
        let p_dd: f64 = csv_value(&out, "p_dd").parse().unwrap();
        assert!((p_dd - 0.25).abs() < 1e-12);
        let e: f64 = csv_value(&out, "entropy_numeric").parse().unwrap();
        assert!((e - std::f64::consts::LN_2).abs() < 1e-9);
        // 5 stages × 12 amplitudes × (re, im).
        assert_eq!(out.lines().filter(|l| l.starts_with("psi")).count(), 120);
        assert_eq!(csv_value(&out, "conditional.DD.GY.re"), fmt_num(1.0));
    }

    #[test]
    fn run_equal_superposition_from_rounded_input() {
        let (code, out, _) = run(&[
            "run",
            "--alpha",
            "0.70710678",
            "--beta",
            "0.70710678",
            "--gamma",
            "0",
        ]);
        assert_eq!(code, 0);
        let c: f64 = csv_value(&out, "correlation").parse().unwrap();
        assert!(c < 1e-15);
        let e: f64 = csv_value(&out, "entropy_closed").parse().unwrap();
        assert!((e - 1.039_720_8).abs() < 1e-7);
    }

    #[test]
    fn calibration_run_has_no_dd_conditional_state() {
        let (code, out, _) = run(&["run", "--gamma", "1", "--format", "json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["detector"]["p_dd"].as_f64().unwrap(), 0.0);
        assert!(v["correlation"].is_null());
        assert!(v["conditional_states"][1]["state"].is_null());
        assert_eq!(v["entropy_closed"].as_f64().unwrap(), 0.0);
    }

    #[test]
    fn invalid_inputs_exit_two() {
        for args in [
            vec!["run", "--alpha", "0.5", "--beta", "0.5"],
            vec!["run", "--gamma", "1.5"],
            vec!["run", "--alpha", "-0.6", "--beta", "0.8"],
            vec!["run", "--alpha", "nan"],
            vec!["sweep-alpha", "--points", "1"],
            vec!["sample", "--n", "0"],
            vec!["dicke", "--alpha", "1", "--beta", "1"],
            vec!["frobnicate"],
        ] {
            let (code, _, err) = run(&args);
            assert_eq!(code, EXIT_INVALID, "{args:?}");
            assert!(!err.is_empty());
        }
        let (_, _, err) = run(&["run", "--alpha", "0.5", "--beta", "0.5"]);
        assert!(err.contains("|alpha|^2 + |beta|^2"));
    }

    #[test]
    fn unwritable_path_exits_three() {
        let (code, _, err) = run(&[
            "sweep-gamma",
            "--out",
            "/nonexistent-dir/definitely/not/here.csv",
        ]);
        assert_eq!(code, EXIT_IO);
        assert!(err.contains("cannot write"));
    }

    #[test]
    fn sweep_alpha_rows() {
        let rows = sweep_alpha(101).unwrap();
        assert_eq!(rows.len(), 101);
        assert_eq!(rows[0].alpha, 0.0);
        assert!((rows[0].entropy_closed - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((rows[0].correlation - 1.0).abs() < 1e-12);
        assert_eq!(rows[100].alpha, 1.0);
        let csv = rows_to_csv(&rows);
        assert_eq!(csv.lines().count(), 102);
        assert_eq!(
            csv.lines().next().unwrap(),
            "alpha,entropy_closed,entropy_numeric,correlation"
        );
    }

    #[test]
    fn sweep_gamma_rows() {
        let rows = sweep_gamma(11).unwrap();
        assert!((rows[0].p_dd - 0.25).abs() < 1e-15);
        assert!((rows[0].entropy_closed - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(rows[10].entropy_closed, 0.0);
        assert!(rows[10].p_dd < 1e-30);
        assert!(rows
            .windows(2)
            .all(|w| w[1].entropy_closed < w[0].entropy_closed));
    }

    #[test]
    fn sample_single_trial() {
        let (code, out, _) = run(&["sample", "--n", "1"]);
        assert!(code == EXIT_OK || code == EXIT_STAT_FAIL);
        assert_eq!(out.lines().count(), 4);
        assert!(out.lines().skip(1).all(|l| !l.contains("NaN")));
    }

    #[test]
    fn sample_calibration_is_all_ld() {
        let (code, out, _) = run(&["sample", "--gamma", "1", "--n", "1000", "--format", "json"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["counts"]["LD"], 1000);
        assert_eq!(v["meta"]["seed"], 42);
        assert_eq!(v["pass"], true);
    }

    #[test]
    fn dicke_reports() {
        let r = dicke_report(1.0, 0.0).unwrap();
        assert_eq!(r.entanglement_closed, 0.0);
        assert_eq!(r.null_probability, 1.0);
        let r = dicke_report(
            std::f64::consts::FRAC_1_SQRT_2,
            std::f64::consts::FRAC_1_SQRT_2,
        )
        .unwrap();
        assert!((r.entanglement_closed - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((r.null_probability - 0.5).abs() < 1e-15);
        assert!((r.overlap_free.unwrap() - 1.0).abs() < 1e-15);
        let r = dicke_report(0.0, 1.0).unwrap();
        assert_eq!(r.null_probability, 0.0);
        assert!(r.target_state.is_none());
        let csv = r.to_csv();
        assert!(csv.contains("overlap_free,\n"));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("sweep-alpha"));
    }
}
