//! Exact spectral evolution `e^{itP(D)}` and the Klein-Gordon reduction
//! `u = ∂ₜw/i + ⟨D⟩w`.

use num_complex::Complex64 as C64;

use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::field::{norm2, FieldState, GridPolicy, NormKind, SpectralProfile};
use crate::fit::loglog_slope;
use crate::tolerances;

/// `e^{itP(D)} u₀`. The `ξ = 0` node is multiplied by `e^{itP(0)}` when `P`
/// is smooth at the origin and by 1 otherwise; in the latter case the data
/// must carry no mass there.
pub fn evolve(model: &DispersionModel, u0: &FieldState, t: f64) -> Result<FieldState> {
    let origin = match model.value_at_origin() {
        Some(p0) => C64::from_polar(1.0, t * p0),
        None => {
            let m = u0.origin_mass();
            if m >= tolerances::ORIGIN_MASS_MAX {
                return Err(Error::Precondition(format!(
                    "{} is singular at ξ = 0 but the data carry mass fraction {m:e} there",
                    model.id()
                )));
            }
            C64::new(1.0, 0.0)
        }
    };
    u0.apply_multiplier(|xi| {
        let r = norm2(xi);
        if r == 0.0 {
            origin
        } else {
            C64::from_polar(1.0, t * model.phase(r))
        }
    })
}

/// Largest group speed `P′` over `[inner, outer]`.
pub fn max_speed(model: &DispersionModel, inner: f64, outer: f64) -> f64 {
    let lo = inner.max(1e-12);
    (0..=256)
        .map(|i| model.velocity(lo + (outer - lo) * i as f64 / 256.0))
        .fold(0.0, f64::max)
}

/// `⟨ξ⟩ = (1 + |ξ|²)^{1/2}`.
pub fn japanese(xi: [f64; 2]) -> f64 {
    let r = norm2(xi);
    (1.0 + r * r).sqrt()
}

/// A real Klein-Gordon solution `w`, its velocity `∂ₜw` and the complex
/// half-Klein-Gordon field `u = ∂ₜw/i + ⟨D⟩w`.
#[derive(Clone, Debug)]
pub struct KgState {
    pub w: FieldState,
    pub wt: FieldState,
    pub u: FieldState,
}

impl KgState {
    /// `‖∂ₜw‖² + ‖w‖²_{H¹}`.
    pub fn energy(&self) -> f64 {
        self.wt.norm_sq() + self.w.h1_norm_sq()
    }
}

fn check_real(state: &FieldState, name: &str) -> Result<()> {
    let worst = state.values().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if worst >= 1e-12 {
        return Err(Error::Precondition(format!("{name} must be real, max |Im| = {worst:e}")));
    }
    Ok(())
}

/// `u₀ = w₁/i + ⟨D⟩w₀`.
pub fn kg_initial(w0: &FieldState, w1: &FieldState) -> Result<FieldState> {
    check_real(w0, "w0")?;
    check_real(w1, "w1")?;
    let a = w0.apply_multiplier(|xi| C64::new(japanese(xi), 0.0))?;
    a.add(&w1.scaled(C64::new(0.0, -1.0)))
}

/// Recover `(w, ∂ₜw)` from the half-Klein-Gordon field: `w = ⟨D⟩⁻¹ Re u`,
/// `∂ₜw = −Im u`.
pub fn kg_split(u: FieldState) -> Result<KgState> {
    let w = u.real_part().apply_multiplier(|xi| C64::new(1.0 / japanese(xi), 0.0))?;
    let wt = u.imag_part().scaled(C64::new(-1.0, 0.0));
    Ok(KgState { w, wt, u })
}

pub fn kg_evolve(w0: &FieldState, w1: &FieldState, t: f64) -> Result<KgState> {
    let u0 = kg_initial(w0, w1)?;
    let u = evolve(&DispersionModel::half_klein_gordon(), &u0, t)?;
    kg_split(u)
}

#[derive(Clone, Debug)]
pub struct DecayRow {
    pub t: f64,
    pub sup_norm: f64,
    pub n: usize,
    pub half_len: f64,
    pub wrap_mass: f64,
}

#[derive(Clone, Debug)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    /// Log-log slope of the sup norm over the top octave of `t`.
    pub slope: Option<f64>,
}

/// Sup norms of `e^{itP(D)}u₀` along `t_list`, each on its own box. Rows
/// with `|t| ≤ 1` are dropped, the estimate is only claimed beyond.
pub fn dispersion_decay(
    model: &DispersionModel,
    profile: &SpectralProfile,
    dim: usize,
    t_list: &[f64],
    policy: &GridPolicy,
) -> Result<DecayReport> {
    if !profile.supported_away_from_origin() {
        return Err(Error::Precondition("decay study needs data supported away from ξ = 0".into()));
    }
    let r0 = crate::field::data_radius(profile, dim)?;
    let v_max = max_speed(model, profile.inner_radius(), profile.support_radius());
    let mut rows = Vec::new();
    for &t in t_list.iter().filter(|t| t.abs() > 1.0) {
        let grid = policy.grid_for(dim, t, v_max, profile.support_radius(), r0)?;
        let (u0, _) = crate::field::synthesize_data(profile, &grid)?;
        let u = evolve(model, &u0, t)?;
        let wrap_mass = u.wrap_mass();
        if wrap_mass >= tolerances::WRAP_MASS_MAX {
            return Err(Error::Box(format!("t = {t}: wrap-around mass {wrap_mass:e}")));
        }
        rows.push(DecayRow {
            t,
            sup_norm: u.norm(NormKind::Sup),
            n: grid.n(),
            half_len: grid.half_len(),
            wrap_mass,
        });
    }
    let t_max = rows.iter().map(|r| r.t.abs()).fold(0.0, f64::max);
    let top: Vec<&DecayRow> = rows.iter().filter(|r| r.t.abs() >= 0.5 * t_max).collect();
    let slope = loglog_slope(
        &top.iter().map(|r| r.t.abs()).collect::<Vec<_>>(),
        &top.iter().map(|r| r.sup_norm).collect::<Vec<_>>(),
    );
    Ok(DecayReport { rows, slope })
}
