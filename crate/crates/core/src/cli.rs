//! The `microloc` command line: argument parsing, up-front validation,
//! dispatch to the studies and the PASS/FAIL summary.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::Error;
use crate::exec::{self, ExecMode};
use crate::experiments::{self as exp, tail_trend, ConvergenceReport, Trend};
use crate::limits::{self, Regime};
use crate::quantize::SymbolVariant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CRITERION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "microloc", version, about = "Truncated-energy studies for dispersive equations")]
struct Args {
    #[command(subcommand)]
    command: Study,
    /// Flat JSON object of dotted keys applied over the defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set cutoff.delta=0.1`. Values are parsed
    /// as JSON and fall back to strings.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    variant: Option<String>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Sequential execution; omits wall time so reruns are byte-identical.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Worker threads (`MICROLOC_THREADS` takes precedence).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for reports and plot scripts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Study {
    Converge,
    KgMicro,
    KgClassical,
    Profile,
    Opnorm,
    Gchi,
    Statphase,
    DispersionDecay,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::Converge => "converge",
            Study::KgMicro => "kg-micro",
            Study::KgClassical => "kg-classical",
            Study::Profile => "profile",
            Study::Opnorm => "opnorm",
            Study::Gchi => "gchi",
            Study::Statphase => "statphase",
            Study::DispersionDecay => "dispersion-decay",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub study: Study,
    pub experiment: ExperimentConfig,
    pub deterministic: bool,
    pub threads: Option<usize>,
    pub out: PathBuf,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Hypothesis(_) | Error::Regime(_) => EXIT_HYPOTHESIS,
            Error::Config(_) | Error::Unsupported(_) | Error::Domain(_) => EXIT_USAGE,
            Error::Io { .. } => EXIT_IO,
            _ => EXIT_CRITERION,
        };
        Self { code, message: e.to_string() }
    }
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn read_config_file(path: &Path) -> Result<Vec<(String, Value)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError { code: EXIT_IO, message: format!("{}: {e}", path.display()) })?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => Ok(map.into_iter().collect()),
        Ok(_) => Err(CliError::usage(format!("{}: expected a JSON object of dotted keys", path.display()))),
        Err(e) => Err(CliError::usage(format!("{}: {e}", path.display()))),
    }
}

/// Parse `argv` and reject parameter sets that break the hypotheses of the
/// selected study before anything is computed.
pub fn parse_and_validate<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| CliError { code: if e.use_stderr() { EXIT_USAGE } else { EXIT_OK }, message: e.to_string() })?;
    let mut entries: Vec<(String, Value)> = Vec::new();
    // study-specific defaults, still overridable
    if matches!(args.command, Study::KgMicro | Study::KgClassical) {
        entries.push(("model".into(), Value::String("half-kg".into())));
    }
    if args.command == Study::KgMicro {
        entries.push(("variant".into(), Value::String("kg".into())));
        entries.push(("cutoff.chi.kind".into(), Value::String("plateau".into())));
        entries.push(("cutoff.chi.inner".into(), serde_json::json!(1.0)));
        entries.push(("cutoff.chi.outer".into(), serde_json::json!(2.0)));
    }
    if let Some(path) = &args.config {
        entries.extend(read_config_file(path)?);
    }
    for o in &args.overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| CliError::usage(format!("--set expects KEY=VALUE, got '{o}'")))?;
        entries.push((k.trim().to_string(), parse_value(v.trim())));
    }
    if let Some(m) = &args.model {
        entries.push(("model".into(), Value::String(m.clone())));
    }
    if let Some(d) = args.delta {
        entries.push(("cutoff.delta".into(), serde_json::json!(d)));
    }
    if let Some(v) = &args.variant {
        entries.push(("variant".into(), Value::String(v.clone())));
    }
    if let Some(d) = args.dim {
        entries.push(("dim".into(), serde_json::json!(d)));
    }
    entries.push(("experiment".into(), Value::String(args.command.name().into())));
    let experiment = ExperimentConfig::from_dotted(entries.iter().map(|(k, v)| (k.as_str(), v.clone())))?;
    validate_for(args.command, &experiment)?;
    Ok(RunConfig {
        study: args.command,
        experiment,
        deterministic: args.deterministic,
        threads: args.threads,
        out: args.out,
    })
}

fn validate_for(study: Study, c: &ExperimentConfig) -> Result<(), CliError> {
    c.validate()?;
    c.dispersion()?;
    match study {
        Study::Converge => {
            let spec = c.symbol()?;
            spec.validate()?;
            limits::regime_of(&spec)?;
        }
        Study::Opnorm => c.symbol()?.validate()?,
        Study::KgMicro => {
            if c.variant != SymbolVariant::Kg {
                return Err(Error::Hypothesis(format!(
                    "the Klein-Gordon energy needs the kg symbol, got {}",
                    c.variant.name()
                ))
                .into());
            }
            c.symbol()?.validate()?;
        }
        Study::Gchi | Study::Statphase => {
            c.cutoff.chi.validate()?;
            c.cutoff.weight.validate()?;
        }
        _ => {}
    }
    Ok(())
}

/// One line of the summary.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub label: String,
    pub detail: String,
    pub pass: bool,
}

impl Verdict {
    fn new(label: impl Into<String>, detail: impl Into<String>, pass: bool) -> Self {
        Self { label: label.into(), detail: detail.into(), pass }
    }

    pub fn line(&self) -> String {
        format!("{}: {} {}", self.label, self.detail, if self.pass { "PASS" } else { "FAIL" })
    }
}

fn last(rows: &[exp::ReportRow]) -> Option<exp::ReportRow> {
    rows.last().copied()
}

/// Judge a finished report against the tolerances of its study.
pub fn verdicts(study: Study, c: &ExperimentConfig, report: &ConvergenceReport) -> Vec<Verdict> {
    let d = c.dim;
    let tag = format!("{} d={d}", c.model);
    let missing = |label: String| vec![Verdict::new(label, "no accepted rows", false)];
    match study {
        Study::Converge => {
            let regime = report.prediction.map(|p| p.regime).unwrap_or(Regime::Supercritical);
            let label = format!("{} {tag}", regime_name(regime));
            let mut out = Vec::new();
            for positive in [true, false] {
                let side = report.side(positive);
                let Some(r) = last(&side) else {
                    if positive {
                        return missing(label);
                    }
                    continue;
                };
                let sign = if positive { "+t" } else { "-t" };
                let (detail, pass) = match regime {
                    Regime::Supercritical => (format!("{sign} rel_err {:.3}", r.rel_error), r.rel_error <= 0.10),
                    Regime::Subcritical => {
                        let ratio = r.measured / report.reference;
                        (format!("{sign} E/|u0|^2 {ratio:.4}"), ratio <= 0.05)
                    }
                    Regime::Critical => {
                        // the concave-case quadrature is harder, so it gets more room
                        let tol = if c.dispersion().is_ok_and(|m| m.convexity() < 0) { 0.15 } else { 0.10 };
                        let dev = (r.measured - r.predicted).abs() / report.reference;
                        (format!("{sign} |E-limit|/|u0|^2 {dev:.4} (tol {tol})"), dev <= tol)
                    }
                };
                out.push(Verdict::new(label.clone(), detail, pass));
                if regime == Regime::Supercritical {
                    let errs: Vec<f64> = side.iter().map(|r| r.rel_error).collect();
                    let trend = tail_trend(&errs);
                    let pass = trend != Trend::Increasing;
                    let advisory = if trend == Trend::Oscillating { " (advisory)" } else { "" };
                    out.push(Verdict::new(format!("{label} tail"), format!("{sign} trend {trend:?}{advisory}"), pass));
                }
            }
            out
        }
        Study::KgMicro => match last(&report.side(true)) {
            Some(r) => vec![Verdict::new(format!("kg microlocal d={d}"), format!("rel_err {:.3}", r.rel_error), r.rel_error <= 0.10)],
            None => missing(format!("kg microlocal d={d}")),
        },
        Study::KgClassical => {
            let label = format!("kg window ({}, {}) d={d}", c.kg.r0, c.kg.r1.map_or("inf".to_string(), |v| v.to_string()));
            match last(&report.side(true)) {
                Some(r) if c.kg.r1.is_none() => {
                    let share = r.measured / report.reference;
                    vec![Verdict::new(label, format!("residual share {share:.4}"), share <= 0.02)]
                }
                Some(r) => vec![Verdict::new(label, format!("rel_err {:.3}", r.rel_error), r.rel_error <= 0.10)],
                None => missing(label),
            }
        }
        Study::Profile => {
            let label = format!("asymptotic profile {tag}");
            let Some(r) = last(&report.side(true)) else { return missing(label) };
            let ratio = r.measured / report.reference.sqrt();
            let mut out = vec![Verdict::new(label.clone(), format!("discrepancy/|u0| {ratio:.4}"), ratio <= 0.05)];
            match report.extra("top_octave_slope") {
                Some(s) => out.push(Verdict::new(format!("{label} slope"), format!("{s:.3}"), s <= -0.8)),
                None => out.push(Verdict::new(format!("{label} slope"), "no fit", false)),
            }
            let measured: Vec<f64> = report.side(true).iter().map(|r| r.measured).collect();
            let trend = tail_trend(&measured);
            let advisory = if trend == Trend::Oscillating { " (advisory)" } else { "" };
            out.push(Verdict::new(format!("{label} tail"), format!("trend {trend:?}{advisory}"), trend != Trend::Increasing));
            out
        }
        Study::Opnorm => {
            let label = format!("opnorm {} {tag}", c.variant.name());
            let (Some(slope), Some(tail)) = (report.extra("log_slope"), report.extra("tail_slope")) else {
                return missing(label);
            };
            match c.variant {
                SymbolVariant::Plain => {
                    let bound = c.cutoff.delta * d as f64 + 0.05;
                    vec![Verdict::new(label, format!("slope {tail:.3} (bound {bound:.3})"), tail <= bound)]
                }
                _ => {
                    let spread = report.extra("max_over_min").unwrap_or(f64::INFINITY);
                    vec![Verdict::new(
                        label,
                        format!("max/min {spread:.3}, slope {slope:.4}"),
                        spread <= 3.0 && slope.abs() <= 0.05,
                    )]
                }
            }
        }
        Study::Gchi => {
            let worst = report.extra("max_route_disagreement").unwrap_or(f64::INFINITY);
            vec![Verdict::new(format!("G_chi routes {tag}"), format!("max rel diff {worst:.2e}"), worst <= 1e-6)]
        }
        Study::Statphase => {
            let label = format!("stationary phase {tag}");
            let p = report.extra("principal_slope");
            let r = report.extra("remainder_slope");
            let passed = report.extra("passed").unwrap_or(f64::NAN);
            let detail = format!(
                "principal slope {}, remainder slope {}",
                p.map_or("n/a".into(), |v| format!("{v:.3}")),
                r.map_or("n/a".into(), |v| format!("{v:.3}"))
            );
            if passed.is_nan() {
                vec![Verdict::new(label, format!("{detail} (inconclusive)"), false)]
            } else {
                vec![Verdict::new(label, detail, passed == 1.0)]
            }
        }
        Study::DispersionDecay => {
            let label = format!("dispersion decay {tag}");
            match report.extra("top_octave_slope") {
                Some(s) => {
                    let target = -(d as f64) / 2.0;
                    vec![Verdict::new(label, format!("slope {s:.3} (target {target})"), (s - target).abs() <= 0.15)]
                }
                None => missing(label),
            }
        }
    }
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Subcritical => "subcritical",
        Regime::Critical => "critical",
        Regime::Supercritical => "supercritical",
    }
}

pub fn run_study(study: Study, c: &ExperimentConfig) -> crate::Result<ConvergenceReport> {
    match study {
        Study::Converge => exp::run_convergence_study(c),
        Study::KgMicro => exp::run_kg_microlocal(c),
        Study::KgClassical => exp::run_kg_classical(c),
        Study::Profile => exp::run_asymptotic_profile(c),
        Study::Opnorm => exp::run_opnorm_sweep(c),
        Study::Gchi => exp::run_gchi(c),
        Study::Statphase => exp::run_statphase(c),
        Study::DispersionDecay => exp::run_dispersion_decay(c),
    }
}

/// Write a gnuplot script that plots the CSV next to it. It is never run.
pub fn emit_plot_script(report_path: &Path, study: Study) -> Result<PathBuf, CliError> {
    let csv = report_path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let (title, xlabel, ylabel, columns) = match study {
        Study::Gchi => ("G_chi by two routes", "rho", "G", "1:2 title 'direct', '' using 1:3 title 'fourier'"),
        Study::Opnorm => ("operator norm", "t", "norm", "1:2 title 'measured', '' using 1:3 title 'scaling'"),
        Study::Statphase => ("stationary phase", "lambda mu^2", "magnitude", "1:2 title 'remainder', '' using 1:3 title 'principal'"),
        Study::Profile => ("asymptotic profile discrepancy", "t", "discrepancy", "1:2 title 'measured'"),
        Study::DispersionDecay => ("sup-norm decay", "t", "sup |u|", "1:2 title 'measured', '' using 1:3 title 't^{-d/2}'"),
        _ => ("relative error", "t", "rel error", "1:4 title 'rel error'"),
    };
    let script = format!(
        "set datafile separator ','\nset key autotitle columnhead\nset logscale xy\nset title '{title}'\nset xlabel '{xlabel}'\nset ylabel '{ylabel}'\nset terminal pngcairo\nset output '{stem}.png'\nplot '{csv}' every ::1 using {columns}\n",
        stem = report_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
    );
    let path = report_path.with_extension("gp");
    fs::write(&path, script).map_err(|e| CliError { code: EXIT_IO, message: format!("{}: {e}", path.display()) })?;
    Ok(path)
}

/// Run the study, write the report and plot script under `out`, print the
/// summary and return the exit code.
pub fn dispatch(run: &RunConfig) -> i32 {
    match try_dispatch(run) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn try_dispatch(run: &RunConfig) -> Result<i32, CliError> {
    let env_threads = std::env::var("MICROLOC_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok());
    if let Some(n) = env_threads.or(run.threads) {
        exec::configure_threads(n);
    }
    exec::set_mode(if run.deterministic { ExecMode::Sequential } else { ExecMode::Parallel });
    fs::create_dir_all(&run.out).map_err(|e| CliError { code: EXIT_IO, message: format!("{}: {e}", run.out.display()) })?;
    let report = run_study(run.study, &run.experiment)?;
    let path = run.out.join(format!("{}.csv", run.study.name()));
    exp::write_report(&report, &path)?;
    emit_plot_script(&path, run.study)?;
    for s in &report.skipped {
        eprintln!("skipped t = {}: {}", s.t, s.reason);
    }

    let verdicts = verdicts(run.study, &run.experiment, &report);
    for v in &verdicts {
        println!("{}", v.line());
    }
    Ok(if verdicts.iter().all(|v| v.pass) { EXIT_OK } else { EXIT_CRITERION })
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_and_validate(argv) {
        Ok(run) => dispatch(&run),
        Err(e) => {
            if e.code == EXIT_OK {
                print!("{}", e.message);
            } else {
                eprintln!("{}", e.message.trim_end());
            }
            e.code
        }
    }
}
