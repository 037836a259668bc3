//! Predicted limits of the truncated energies: regime classification, the
//! critical-case density `G_χ` by two quadrature routes, the constant
//! `c₀(χ)`, the critical integral and the Klein-Gordon window energies.

mod fresnel;

pub use fresnel::{chi_hat_l1, GEstimate};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::field::{norm2, FieldState, Point};
use crate::quadrature::Chebyshev;
use crate::quantize::{CutoffProfile, CutoffSpec, SymbolSpec, SymbolVariant};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    ClosedForm,
    DirectQuadrature,
    RadialFourierRoute,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitPrediction {
    pub regime: Regime,
    pub value: f64,
    pub route: Route,
    pub error: f64,
}

/// Exponents closer to 0 than this count as critical.
const CRITICAL_BAND: f64 = 1e-12;

/// Classify by `δ` (or `δ + σ₁/2` for the alternative symbol). The kg and
/// indicator symbols have no `χ` scale and always lead to the quarter limit.
pub fn regime_of(spec: &SymbolSpec) -> Result<Regime> {
    if matches!(spec.variant, SymbolVariant::Kg | SymbolVariant::IndicatorOnly | SymbolVariant::KgIndicator) {
        return Ok(Regime::Supercritical);
    }
    let e = spec.effective_delta();
    let label = if spec.variant == SymbolVariant::Alternative { "δ + σ₁/2" } else { "δ" };
    if !e.is_finite() || e >= 0.5 {
        return Err(Error::Regime(format!("{label} = {e} is outside the admissible range {label} < 1/2")));
    }
    Ok(if e.abs() <= CRITICAL_BAND {
        Regime::Critical
    } else if e < 0.0 {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    })
}

/// Quadratic-phase coefficients `A = P″/(λρ^σ)²`, `B = (P′/ρ)/(λρ^σ)²`.
fn phase_coefficients(model: &DispersionModel, cutoff: &CutoffSpec, rho: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("ρ must be positive, got {rho}")));
    }
    let (lambda, sigma) = cutoff.weight.asymptotic();
    let w = lambda * rho.powf(sigma);
    let curvature = model.curvature(rho);
    if curvature == 0.0 {
        return Err(Error::Domain(format!("P″ vanishes at ρ = {rho} for {}", model.id())));
    }
    Ok((curvature / (w * w), model.velocity(rho) / rho / (w * w)))
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("dimension {dim} (only 1 and 2)")))
    }
}

/// `G_χ(ρ)` from the half-line × hyperplane Fresnel integral.
pub fn g_chi_direct(model: &DispersionModel, cutoff: &CutoffSpec, rho: f64, dim: usize) -> Result<GEstimate> {
    check_dim(dim)?;
    let (a, b) = phase_coefficients(model, cutoff, rho)?;
    let (j, err) = fresnel::direct_amplitude(&cutoff.chi, a, b, dim)?;
    // undo the substitutions s = √|A| r, u = √B y
    let jac = 1.0 / if dim == 1 { a.abs().sqrt() } else { (a.abs() * b).sqrt() };
    Ok(GEstimate::from_amplitude((2.0 * PI).powi(-(dim as i32)), j * jac, err * jac))
}

/// `G_χ(ρ)` from `¼(2π)^{−2d}|∫ e^{i(Aξ₁² + B|ξ′|²)/2} χ̂(ξ) dξ|²`.
pub fn g_chi_radial(model: &DispersionModel, cutoff: &CutoffSpec, rho: f64, dim: usize) -> Result<GEstimate> {
    check_dim(dim)?;
    let (a, b) = phase_coefficients(model, cutoff, rho)?;
    fourier_value(&cutoff.chi, a, b, dim)
}

fn fourier_value(chi: &CutoffProfile, a: f64, b: f64, dim: usize) -> Result<GEstimate> {
    let (k, err) = fresnel::fourier_amplitude(chi, a, b, dim)?;
    Ok(GEstimate::from_amplitude(0.25 * (2.0 * PI).powi(-2 * dim as i32), k, err))
}

/// `c₀(χ) = |(2(2π)^d)⁻¹ ∫ e^{i(pξ₁² + |ξ′|²)/2} χ̂(ξ) dξ|²`.
pub fn c0(cutoff: &CutoffSpec, p: f64, dim: usize) -> Result<GEstimate> {
    check_dim(dim)?;
    fourier_value(&cutoff.chi, p, 1.0, dim)
}

/// `(2π)^{−d}|∫_{x·ω>0} e^{i|x|²/2} χ(x) dx|²`; only `χ ∈ L¹` is needed.
pub fn g_chi_schrodinger(cutoff: &CutoffSpec, omega: Point, dim: usize) -> Result<GEstimate> {
    check_dim(dim)?;
    if (norm2(omega) - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("ω must be a unit vector, got {omega:?}")));
    }
    // radial χ: the half-space integral does not depend on ω
    let (j, err) = fresnel::half_space_amplitude(&cutoff.chi, dim)?;
    Ok(GEstimate::from_amplitude((2.0 * PI).powi(-(dim as i32)), j, err))
}

/// Chebyshev nodes used to interpolate `G_χ` across the data support.
const CRITICAL_NODES: usize = 48;

/// `(2π)^{−d} ∫ G_χ(|ξ|) |û₀(ξ)|² dξ` on the grid of `u0`, with `G_χ`
/// from the Fourier route.
pub fn critical_limit_integral(
    model: &DispersionModel,
    cutoff: &CutoffSpec,
    u0: &FieldState,
    dim: usize,
) -> Result<LimitPrediction> {
    check_dim(dim)?;
    if u0.grid().dim() != dim {
        return Err(Error::Precondition(format!("data are {}-dimensional, asked for d = {dim}", u0.grid().dim())));
    }
    let grid = *u0.grid();
    let coeffs = u0.coeffs();
    let peak = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let critical = |value, error| LimitPrediction { regime: Regime::Critical, value, route: Route::RadialFourierRoute, error };
    if peak == 0.0 {
        return Ok(critical(0.0, 0.0));
    }
    let populated: Vec<usize> = (0..coeffs.len()).filter(|&k| coeffs[k].norm() > 1e-13 * peak).collect();
    let radii: Vec<f64> = populated.iter().map(|&k| norm2(grid.freq_point(k))).collect();
    let lo = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = radii.iter().copied().fold(0.0, f64::max);
    if !(lo > 0.0) {
        return Err(Error::Precondition("the critical integral needs data vanishing at ξ = 0".into()));
    }
    let mut worst = 0.0_f64;
    let mut g_at = |rho: f64| -> Result<f64> {
        let g = g_chi_radial(model, cutoff, rho, dim)?;
        worst = worst.max(g.error);
        Ok(g.value)
    };
    let interp = if hi - lo < 1e-9 * hi {
        let v = g_at(lo)?;
        Chebyshev::from_values(lo, lo * (1.0 + 1e-9), vec![v; 2])
    } else {
        let pts = Chebyshev::points(lo, hi, CRITICAL_NODES);
        let vals = pts.iter().map(|&r| g_at(r)).collect::<Result<Vec<_>>>()?;
        Chebyshev::from_values(lo, hi, vals)
    };
    let measure = (grid.dxi() / (2.0 * PI)).powi(dim as i32);
    let mut value = 0.0;
    let mut mass = 0.0;
    for (&k, &r) in populated.iter().zip(&radii) {
        let w = coeffs[k].norm_sqr() * measure;
        value += interp.eval(r) * w;
        mass += w;
    }
    Ok(critical(value, worst * mass))
}

/// Closed-form or quadrature limit of `E(u₀, t)` for the given symbol.
pub fn predicted_limit(spec: &SymbolSpec, u0: &FieldState) -> Result<LimitPrediction> {
    let regime = regime_of(spec)?;
    let energy = u0.norm_sq();
    Ok(match regime {
        Regime::Subcritical => LimitPrediction { regime, value: 0.0, route: Route::ClosedForm, error: 0.0 },
        Regime::Supercritical => LimitPrediction { regime, value: 0.25 * energy, route: Route::ClosedForm, error: 0.0 },
        Regime::Critical => critical_limit_integral(&spec.model, &spec.cutoff, u0, u0.grid().dim())?,
    })
}

/// Speed window `]r₀, r₁[` and its preimage `]ρ₀, ρ₁[` under `P′`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub r0: f64,
    pub r1: f64,
    pub rho0: f64,
    pub rho1: f64,
}

impl SpectralWindow {
    pub fn new(model: &DispersionModel, r0: f64, r1: f64) -> Result<Self> {
        if !(r0 >= 0.0 && r1 > r0) {
            return Err(Error::Domain(format!("speed window needs 0 ≤ r₀ < r₁, got ({r0}, {r1})")));
        }
        let rho0 = model.invert_velocity(r0);
        let rho1 = if r1.is_finite() { model.invert_velocity(r1) } else { f64::INFINITY };
        Ok(Self { r0, r1, rho0, rho1 })
    }

    pub fn contains(&self, rho: f64) -> bool {
        self.rho0 < rho && rho < self.rho1
    }
}

/// `‖1_{]ρ₀,ρ₁[}(|D|)w₀‖²_{H¹} + ‖1_{]ρ₀,ρ₁[}(|D|)w₁‖²_{L²}`.
pub fn kg_window_energy(w0: &FieldState, w1: &FieldState, window: &SpectralWindow) -> Result<f64> {
    let mask = |xi: Point| C64::new(if window.contains(norm2(xi)) { 1.0 } else { 0.0 }, 0.0);
    let a = w0.apply_multiplier(mask)?;
    let b = w1.apply_multiplier(mask)?;
    Ok(a.h1_norm_sq() + b.norm_sq())
}
