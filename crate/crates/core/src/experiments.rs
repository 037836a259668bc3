//! Convergence studies along a time schedule and their report files.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{ExperimentConfig, VelocityFunction};
use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::field::{data_radius, norm2, synthesize_data, FieldState, GridSpec, Point, SpectralProfile};
use crate::fit::loglog_slope;
use crate::limits::{self, predicted_limit, LimitPrediction, Regime, SpectralWindow};
use crate::propagator::{evolve, kg_initial, kg_split, max_speed, KgState};
use crate::quantize::{apply_quantization, op_norm_estimate, SymbolSpec, SymbolVariant};
use crate::statphase::{remainder_decay_study, StatPhaseSweep};
use crate::tolerances;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub t: f64,
    pub measured: f64,
    pub predicted: f64,
    pub rel_error: f64,
    pub n: usize,
    pub half_len: f64,
    pub wrap_mass: f64,
}

impl ReportRow {
    pub fn new(t: f64, measured: f64, predicted: f64, grid: Option<&GridSpec>, wrap_mass: f64) -> Self {
        Self {
            t,
            measured,
            predicted,
            rel_error: rel_error(measured, predicted),
            n: grid.map_or(0, |g| g.n()),
            half_len: grid.map_or(0.0, |g| g.half_len()),
            wrap_mass,
        }
    }
}

/// `|m − p| / max(p, 10⁻³⁰)`.
pub fn rel_error(measured: f64, predicted: f64) -> f64 {
    (measured - predicted).abs() / predicted.max(tolerances::REL_ERROR_FLOOR)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedRow {
    pub t: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    /// Effective configuration as dotted keys.
    pub config: Value,
    pub version: String,
    pub mode: String,
    /// Omitted in sequential mode so that reruns are byte-identical.
    pub wall_time_s: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub study: String,
    /// Rows sorted by `t`.
    pub rows: Vec<ReportRow>,
    pub skipped: Vec<SkippedRow>,
    /// Reference size of the data (`‖u₀‖²` or the Klein-Gordon energy).
    pub reference: f64,
    pub prediction: Option<LimitPrediction>,
    /// Study-specific scalars (fitted slopes and the like).
    pub extras: Vec<(String, f64)>,
    pub metadata: Metadata,
}

impl ConvergenceReport {
    fn new(study: &str, config: &ExperimentConfig) -> Self {
        Self {
            study: study.into(),
            rows: Vec::new(),
            skipped: Vec::new(),
            reference: 0.0,
            prediction: None,
            extras: Vec::new(),
            metadata: Metadata {
                config: serde_json::to_value(config.to_dotted()).expect("config serializes"),
                version: env!("CARGO_PKG_VERSION").into(),
                mode: match exec::mode() {
                    ExecMode::Parallel => "parallel".into(),
                    ExecMode::Sequential => "sequential".into(),
                },
                wall_time_s: None,
            },
        }
    }

    fn finish(mut self, started: Instant) -> Self {
        self.rows.sort_by(|a, b| a.t.total_cmp(&b.t));
        if exec::mode() == ExecMode::Parallel {
            self.metadata.wall_time_s = Some(started.elapsed().as_secs_f64());
        }
        self
    }

    pub fn extra(&self, name: &str) -> Option<f64> {
        self.extras.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    /// Rows with `t > 0` (or `t < 0`), ordered by `|t|`.
    pub fn side(&self, positive: bool) -> Vec<ReportRow> {
        let mut rows: Vec<ReportRow> = self.rows.iter().copied().filter(|r| (r.t > 0.0) == positive).collect();
        rows.sort_by(|a, b| a.t.abs().total_cmp(&b.t.abs()));
        rows
    }
}

/// Shape of the last three values of a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Decreasing,
    Increasing,
    /// Neither; the decreasing-tail criterion is then advisory.
    Oscillating,
    TooShort,
}

pub fn tail_trend(values: &[f64]) -> Trend {
    if values.len() < 3 {
        return Trend::TooShort;
    }
    let w = &values[values.len() - 3..];
    if w[2] <= w[1] && w[1] <= w[0] {
        Trend::Decreasing
    } else if w[2] > w[1] && w[1] > w[0] {
        Trend::Increasing
    } else {
        Trend::Oscillating
    }
}

fn positive_side(t: f64, both: bool) -> Vec<f64> {
    if both {
        vec![t, -t]
    } else {
        vec![t]
    }
}

struct Prepared {
    model: DispersionModel,
    r0: f64,
    v_max: f64,
}

fn prepare(config: &ExperimentConfig, model: DispersionModel, profile: &SpectralProfile) -> Result<Prepared> {
    config.validate()?;
    let r0 = data_radius(profile, config.dim)?;
    let v_max = max_speed(&model, profile.inner_radius(), profile.support_radius());
    Ok(Prepared { model, r0, v_max })
}

fn grid_at(config: &ExperimentConfig, p: &Prepared, profile: &SpectralProfile, t: f64) -> Result<GridSpec> {
    config.grid.policy(config.dim).grid_for(config.dim, t, p.v_max, profile.support_radius(), p.r0)
}

/// Grid of the latest scheduled time the box rule admits.
fn finest_grid(config: &ExperimentConfig, p: &Prepared, profile: &SpectralProfile) -> Result<GridSpec> {
    let mut last = None;
    for t in config.schedule.times().into_iter().rev() {
        match grid_at(config, p, profile, t) {
            Ok(g) => return Ok(g),
            Err(e @ Error::Box(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Box("empty schedule".into())))
}

type RowOutcome = std::result::Result<ReportRow, SkippedRow>;

/// Run `job` over the signed times; box failures become skipped rows.
fn collect_rows(
    report: &mut ConvergenceReport,
    times: &[f64],
    job: impl Fn(f64) -> Result<ReportRow> + Sync + Send,
) -> Result<()> {
    let outcomes: Vec<Result<RowOutcome>> = exec::map_indexed(times.len(), |i| {
        let t = times[i];
        match job(t) {
            Ok(row) => Ok(Ok(row)),
            Err(Error::Box(reason)) => Ok(Err(SkippedRow { t, reason })),
            Err(e) => Err(e),
        }
    });
    for o in outcomes {
        match o? {
            Ok(row) => report.rows.push(row),
            Err(skip) => report.skipped.push(skip),
        }
    }
    Ok(())
}

fn checked_wrap(state: &FieldState, t: f64) -> Result<f64> {
    let wrap = state.wrap_mass();
    if wrap >= tolerances::WRAP_MASS_MAX {
        return Err(Error::Box(format!("t = {t}: wrap-around mass {wrap:e}")));
    }
    Ok(wrap)
}

/// `E(u₀, ±t)` along the schedule against the predicted limit of the
/// symbol's regime.
pub fn run_convergence_study(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let started = Instant::now();
    let spec = config.symbol()?;
    spec.validate()?;
    let regime = limits::regime_of(&spec)?;
    let p = prepare(config, spec.model, &config.data)?;
    let mut report = ConvergenceReport::new("converge", config);
    // the critical integral is computed once, on the finest admissible grid
    let finest = finest_grid(config, &p, &config.data)?;
    let (u_ref, _) = synthesize_data(&config.data, &finest)?;
    let prediction = predicted_limit(&spec, &u_ref)?;
    report.reference = u_ref.norm_sq();
    report.prediction = Some(prediction);
    let times: Vec<f64> = config.schedule.times().into_iter().flat_map(|t| positive_side(t, config.both_signs)).collect();
    collect_rows(&mut report, &times, |t| {
        let grid = grid_at(config, &p, &config.data, t)?;
        let (u0, _) = synthesize_data(&config.data, &grid)?;
        let u = evolve(&p.model, &u0, t)?;
        let wrap = checked_wrap(&u, t)?;
        let measured = apply_quantization(&spec, t, &u)?.norm_sq_physical();
        let predicted = match regime {
            Regime::Supercritical => 0.25 * u0.norm_sq(),
            _ => prediction.value,
        };
        Ok(ReportRow::new(t, measured, predicted, Some(&grid), wrap))
    })?;
    Ok(report.finish(started))
}

fn require_half_kg(config: &ExperimentConfig) -> Result<()> {
    let id = DispersionModel::half_klein_gordon().id();
    if config.model != id {
        return Err(Error::Config(format!("Klein-Gordon studies run on model {id}, got {}", config.model)));
    }
    Ok(())
}

/// Real `w₀` from the data profile and `w₁` from the Klein-Gordon section.
fn kg_data(config: &ExperimentConfig, grid: &GridSpec) -> Result<(FieldState, FieldState)> {
    let (w0, _) = synthesize_data(&config.data, grid)?;
    let w1 = match &config.kg.w1 {
        Some(profile) => synthesize_data(profile, grid)?.0,
        None => FieldState::zeros(*grid),
    };
    Ok((w0.real_part(), w1.real_part()))
}

/// Envelope of the Klein-Gordon data: `w₀` and `w₁` profiles together.
fn kg_envelope(config: &ExperimentConfig) -> SpectralProfile {
    let mut inner = config.data.inner_radius();
    let mut outer = config.data.support_radius();
    if let Some(w1) = &config.kg.w1 {
        inner = inner.min(w1.inner_radius());
        outer = outer.max(w1.support_radius());
    }
    SpectralProfile::annulus(inner, outer, 1.0)
}

fn kg_prepare(config: &ExperimentConfig) -> Result<(Prepared, SpectralProfile)> {
    let env = kg_envelope(config);
    let mut p = prepare(config, DispersionModel::half_klein_gordon(), &env)?;
    let mut r0 = data_radius(&config.data, config.dim)?;
    if let Some(w1) = &config.kg.w1 {
        r0 = r0.max(data_radius(w1, config.dim)?);
    }
    p.r0 = r0;
    Ok((p, env))
}

/// `∇w` components (one per axis).
fn gradient(w: &FieldState) -> Result<Vec<FieldState>> {
    (0..w.grid().dim())
        .map(|axis| w.apply_multiplier(|xi: Point| C64::new(0.0, xi[axis])))
        .collect()
}

/// `E^{KG}(t) = ‖Op(a)∂ₜw‖² + ‖Op(a)∇w‖² + ‖Op(a)w‖²` against
/// `¼(‖w₀‖²_{H¹} + ‖w₁‖²)`.
pub fn run_kg_microlocal(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let started = Instant::now();
    require_half_kg(config)?;
    if config.variant != SymbolVariant::Kg {
        return Err(Error::Hypothesis(format!("kg-micro needs the kg symbol, got {}", config.variant.name())));
    }
    let spec = SymbolSpec::new(SymbolVariant::Kg, DispersionModel::half_klein_gordon(), config.cutoff);
    spec.validate()?;
    let (p, env) = kg_prepare(config)?;
    let mut report = ConvergenceReport::new("kg-micro", config);
    let finest = finest_grid(config, &p, &env)?;
    let (w0, w1) = kg_data(config, &finest)?;
    report.reference = w0.h1_norm_sq() + w1.norm_sq();
    let times: Vec<f64> = config.schedule.times().into_iter().flat_map(|t| positive_side(t, config.both_signs)).collect();
    collect_rows(&mut report, &times, |t| {
        let grid = grid_at(config, &p, &env, t)?;
        let (w0, w1) = kg_data(config, &grid)?;
        let predicted = 0.25 * (w0.h1_norm_sq() + w1.norm_sq());
        let u0 = kg_initial(&w0, &w1)?;
        let u = evolve(&p.model, &u0, t)?;
        let wrap = checked_wrap(&u, t)?;
        let state = kg_split(u)?;
        let mut measured = 0.0;
        let mut parts = vec![state.wt.clone(), state.w.clone()];
        parts.extend(gradient(&state.w)?);
        for part in &parts {
            measured += apply_quantization(&spec, t, part).map(|s| s.norm_sq_physical())?;
        }
        Ok(ReportRow::new(t, measured, predicted, Some(&grid), wrap))
    })?;
    Ok(report.finish(started))
}

/// Energy density `|∂ₜw|² + |∇w|² + |w|²` integrated over `r₀ < |x/t| < r₁`.
pub fn physical_window_energy(state: &KgState, t: f64, r0: f64, r1: f64) -> Result<f64> {
    let grads = gradient(&state.w)?;
    let grid = *state.w.grid();
    let mut total = 0.0;
    for j in 0..grid.len() {
        let speed = norm2(grid.node(j)) / t.abs();
        if r0 < speed && speed < r1 {
            let mut e = state.wt.values()[j].norm_sqr() + state.w.values()[j].norm_sqr();
            for g in &grads {
                e += g.values()[j].norm_sqr();
            }
            total += e;
        }
    }
    Ok(total * grid.cell())
}

/// Physical energy in the speed window `]r₀, r₁[` against the spectral
/// window energy of the data.
pub fn run_kg_classical(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let started = Instant::now();
    require_half_kg(config)?;
    let r1 = config.kg.r1.unwrap_or(f64::INFINITY);
    let model = DispersionModel::half_klein_gordon();
    let window = SpectralWindow::new(&model, config.kg.r0, r1)?;
    let (p, env) = kg_prepare(config)?;
    let mut report = ConvergenceReport::new("kg-classical", config);
    let finest = finest_grid(config, &p, &env)?;
    let (w0, w1) = kg_data(config, &finest)?;
    report.reference = w0.h1_norm_sq() + w1.norm_sq();
    report.extras.push(("rho0".into(), window.rho0));
    report.extras.push(("rho1".into(), window.rho1));
    let times: Vec<f64> = config.schedule.times().into_iter().flat_map(|t| positive_side(t, config.both_signs)).collect();
    collect_rows(&mut report, &times, |t| {
        let grid = grid_at(config, &p, &env, t)?;
        let (w0, w1) = kg_data(config, &grid)?;
        let predicted = limits::kg_window_energy(&w0, &w1, &window)?;
        let u = evolve(&p.model, &kg_initial(&w0, &w1)?, t)?;
        let wrap = checked_wrap(&u, t)?;
        let measured = physical_window_energy(&kg_split(u)?, t, window.r0, window.r1)?;
        Ok(ReportRow::new(t, measured, predicted, Some(&grid), wrap))
    })?;
    Ok(report.finish(started))
}

/// `‖g(x/t)u(t) − g(−P′(D))u(t)‖`, predicted 0.
pub fn run_asymptotic_profile(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let started = Instant::now();
    let model = config.dispersion()?;
    let p = prepare(config, model, &config.data)?;
    let g: VelocityFunction = config.profile.g;
    let mut report = ConvergenceReport::new("profile", config);
    let finest = finest_grid(config, &p, &config.data)?;
    report.reference = synthesize_data(&config.data, &finest)?.0.norm_sq();
    let times: Vec<f64> = config.schedule.times().into_iter().flat_map(|t| positive_side(t, config.both_signs)).collect();
    collect_rows(&mut report, &times, |t| {
        let grid = grid_at(config, &p, &config.data, t)?;
        let (u0, _) = synthesize_data(&config.data, &grid)?;
        let u = evolve(&p.model, &u0, t)?;
        let wrap = checked_wrap(&u, t)?;
        let physical = u.map_values(|x, z| z * g.value([x[0] / t, x[1] / t]));
        let spectral = u.apply_multiplier(|xi| {
            let r = norm2(xi);
            if r == 0.0 {
                return C64::new(g.value([0.0, 0.0]), 0.0);
            }
            let s = -p.model.velocity(r) / r;
            C64::new(g.value([s * xi[0], s * xi[1]]), 0.0)
        })?;
        let measured = physical.sub(&spectral)?.norm_sq_physical().sqrt();
        Ok(ReportRow::new(t, measured, 0.0, Some(&grid), wrap))
    })?;
    let top = report.side(true);
    if let Some(slope) = top_octave_slope(&top) {
        report.extras.push(("top_octave_slope".into(), slope));
    }
    Ok(report.finish(started))
}

fn top_octave_slope(rows: &[ReportRow]) -> Option<f64> {
    let t_max = rows.iter().map(|r| r.t.abs()).fold(0.0, f64::max);
    let top: Vec<&ReportRow> = rows.iter().filter(|r| r.t.abs() >= 0.5 * t_max).collect();
    loglog_slope(
        &top.iter().map(|r| r.t.abs()).collect::<Vec<_>>(),
        &top.iter().map(|r| r.measured).collect::<Vec<_>>(),
    )
}

/// Box for a norm sweep at fixed `n`. The symbols vary on a scale `s` in
/// `x + tP′(ξ)`, i.e. on `s` in `x` and `s/(tP″)` in `ξ`; since
/// `Δx·Δξ = 2π/n`, the half length `√(πn|t|P″/2)` resolves both directions
/// equally whatever `s` is. `P″` is taken at `|ξ| = 1`.
pub fn opnorm_half_len(model: &DispersionModel, n: usize, t: f64) -> f64 {
    let curvature = model.curvature(1.0).abs().max(1e-3);
    (std::f64::consts::PI * n as f64 * t.abs() * curvature / 2.0).sqrt()
}

/// Power-iteration norms of `Op(a(t))` along the schedule. The predicted
/// column carries the expected scaling `t^{s}` anchored at the first
/// accepted row, with `s = 0` for the indicator symbols and `s = δd` for
/// the plain symbol.
pub fn run_opnorm_sweep(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let started = Instant::now();
    let spec = config.symbol()?;
    spec.validate()?;
    config.validate()?;
    let exponent = match spec.variant {
        SymbolVariant::IndicatorOnly | SymbolVariant::KgIndicator => 0.0,
        SymbolVariant::Plain => spec.cutoff.delta * config.dim as f64,
        other => {
            return Err(Error::Config(format!(
                "opnorm sweeps take the indicator or plain symbols, got {}",
                other.name()
            )))
        }
    };
    let mut report = ConvergenceReport::new("opnorm", config);
    report.extras.push(("expected_slope".into(), exponent));
    let times = config.schedule.times();
    for &t in &times {
        let grid = GridSpec::new(config.dim, config.opnorm.n, opnorm_half_len(&spec.model, config.opnorm.n, t))?;
        let est = op_norm_estimate(&spec, t, grid, config.opnorm.iters, config.seed)?;
        if est.flagged {
            report.skipped.push(SkippedRow {
                t,
                reason: format!(
                    "power iteration flagged: residual {:e}, restart gap {:e}",
                    est.residual, est.restart_gap
                ),
            });
            continue;
        }
        report.rows.push(ReportRow::new(t, est.value, f64::NAN, Some(&grid), 0.0));
    }
    if let Some(first) = report.rows.first().copied() {
        for row in report.rows.iter_mut() {
            row.predicted = first.measured * (row.t / first.t).powf(exponent);
            row.rel_error = rel_error(row.measured, row.predicted);
        }
    }
    let verdict_rows: Vec<ReportRow> =
        report.rows.iter().copied().filter(|r| r.t >= config.opnorm.t_from).collect();
    if let Some(s) = loglog_slope(
        &verdict_rows.iter().map(|r| r.t).collect::<Vec<_>>(),
        &verdict_rows.iter().map(|r| r.measured).collect::<Vec<_>>(),
    ) {
        report.extras.push(("log_slope".into(), s));
    }
    let tail = &verdict_rows[verdict_rows.len().saturating_sub(4)..];
    if let Some(s) = loglog_slope(
        &tail.iter().map(|r| r.t).collect::<Vec<_>>(),
        &tail.iter().map(|r| r.measured).collect::<Vec<_>>(),
    ) {
        report.extras.push(("tail_slope".into(), s));
    }
    let max = verdict_rows.iter().map(|r| r.measured).fold(0.0, f64::max);
    let min = verdict_rows.iter().map(|r| r.measured).fold(f64::INFINITY, f64::min);
    if min > 0.0 && min.is_finite() {
        report.extras.push(("max_over_min".into(), max / min));
    }
    Ok(report.finish(started))
}

/// Sup-norm decay of `e^{itP(D)}u₀`; the predicted column is `t^{−d/2}`
/// anchored at the last row.
pub fn run_dispersion_decay(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let started = Instant::now();
    config.validate()?;
    let model = config.dispersion()?;
    let decay = crate::propagator::dispersion_decay(
        &model,
        &config.data,
        config.dim,
        &config.schedule.times(),
        &config.grid.policy(config.dim),
    )?;
    let mut report = ConvergenceReport::new("dispersion-decay", config);
    let exponent = -(config.dim as f64) / 2.0;
    if let Some(anchor) = decay.rows.last() {
        for r in &decay.rows {
            let predicted = anchor.sup_norm * (r.t / anchor.t).powf(exponent);
            let grid = GridSpec::new(config.dim, r.n, r.half_len)?;
            report.rows.push(ReportRow::new(r.t, r.sup_norm, predicted, Some(&grid), r.wrap_mass));
        }
    }
    report.extras.push(("expected_slope".into(), exponent));
    if let Some(s) = decay.slope {
        report.extras.push(("top_octave_slope".into(), s));
    }
    Ok(report.finish(started))
}

/// `G_χ(ρ)` by both routes on a geometric `ρ` grid. Here the `t` column
/// holds `ρ`, `measured` the direct route and `predicted` the Fourier route.
pub fn run_gchi(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let started = Instant::now();
    config.validate()?;
    let model = config.dispersion()?;
    let g = config.gchi;
    if !(g.rho_min > 0.0 && g.rho_max >= g.rho_min && g.count >= 1) {
        return Err(Error::Config(format!("gchi needs 0 < rho_min ≤ rho_max and count ≥ 1, got {g:?}")));
    }
    let rhos: Vec<f64> = (0..g.count)
        .map(|k| {
            if g.count == 1 {
                g.rho_min
            } else {
                g.rho_min * (g.rho_max / g.rho_min).powf(k as f64 / (g.count - 1) as f64)
            }
        })
        .collect();
    let mut report = ConvergenceReport::new("gchi", config);
    let rows = exec::map_indexed(rhos.len(), |i| -> Result<ReportRow> {
        let direct = limits::g_chi_direct(&model, &config.cutoff, rhos[i], config.dim)?;
        let radial = limits::g_chi_radial(&model, &config.cutoff, rhos[i], config.dim)?;
        Ok(ReportRow::new(rhos[i], direct.value, radial.value, None, 0.0))
    });
    for r in rows {
        report.rows.push(r?);
    }
    let worst = report.rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    report.extras.push(("max_route_disagreement".into(), worst));
    Ok(report.finish(started))
}

/// Sphere-integral sweep; the `t` column holds `λμ²`, `measured` the
/// remainder magnitude and `predicted` the principal-term magnitude.
pub fn run_statphase(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let started = Instant::now();
    config.validate()?;
    let s = config.statphase;
    let sweep = StatPhaseSweep {
        model: config.dispersion()?,
        cutoff: config.cutoff,
        amplitude: config.data.clone(),
        dim: config.dim,
        rho: s.rho,
        mu: s.mu,
        lambda_mu2: s.points(),
        eps: 1,
        eps_prime: 1,
    };
    let study = remainder_decay_study(&sweep)?;
    let mut report = ConvergenceReport::new("statphase", config);
    for r in &study.rows {
        report.rows.push(ReportRow::new(r.lambda_mu2, r.remainder, r.principal, None, 0.0));
    }
    if let Some(v) = study.principal_slope {
        report.extras.push(("principal_slope".into(), v));
    }
    if let Some(v) = study.remainder_slope {
        report.extras.push(("remainder_slope".into(), v));
    }
    report.extras.push(("passed".into(), study.passed.map_or(f64::NAN, |b| if b { 1.0 } else { 0.0 })));
    Ok(report.finish(started))
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Sibling metadata path: `report.csv` → `report.json`.
pub fn metadata_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// CSV rows plus a JSON metadata file next to it.
pub fn write_report(report: &ConvergenceReport, path: &Path) -> Result<()> {
    let mut csv = String::from("t,measured,predicted,rel_error,n,L,wrap_mass\n");
    for r in &report.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt(r.t),
            fmt(r.measured),
            fmt(r.predicted),
            fmt(r.rel_error),
            r.n,
            fmt(r.half_len),
            fmt(r.wrap_mass)
        ));
    }
    let write = |p: &Path, body: &[u8]| -> Result<()> {
        let mut f = fs::File::create(p).map_err(|e| Error::io(p, e))?;
        f.write_all(body).map_err(|e| Error::io(p, e))
    };
    write(path, csv.as_bytes())?;
    let meta = serde_json::json!({
        "study": report.study,
        "reference": report.reference,
        "prediction": report.prediction,
        "extras": report.extras.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))).collect::<serde_json::Map<_, _>>(),
        "skipped": report.skipped,
        "metadata": report.metadata,
    });
    let mut body = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    body.push('\n');
    write(&metadata_path(path), body.as_bytes())
}
