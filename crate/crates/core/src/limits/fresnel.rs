//! Quadratures for the Fresnel functionals of a radial cutoff.
//!
//! Every quantity here reduces to the quadratic-phase pairings
//! `J(A, B) = ∫_{s>0} ∫_{u} e^{i(s²/A + |u|²/B)/2} χ(|(s, u)|) du ds` (direct route) and
//! `K(A, B) = ∫ e^{i(Aξ₁² + B|ξ′|²)/2} χ̂(ξ) dξ` (Fourier route), which are
//! computed by unrelated discretizations so that they can cross-check each
//! other.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{adaptive, GaussLegendre};
use crate::quantize::CutoffProfile;
use crate::tolerances;
use crate::C64;

/// Result of a Fresnel-type quadrature with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GEstimate {
    pub value: f64,
    /// Absolute error estimate of `value`.
    pub error: f64,
    pub flagged: bool,
}

impl GEstimate {
    pub(crate) fn from_amplitude(prefactor: f64, amp: C64, amp_err: f64) -> Self {
        let value = prefactor * amp.norm_sqr();
        let error = prefactor * (2.0 * amp.norm() * amp_err + amp_err * amp_err);
        let flagged = error > tolerances::QUADRATURE_FLAG * value.max(1e-300);
        Self { value, error, flagged }
    }
}

fn rotated(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// `∫₀^∞ e^{is²/(2A)} χ(s) ds` for a gaussian `χ` of width `w`, on the ray
/// `s = e^{i sign(A) π/4} τ` where the quadratic phase becomes real decay.
fn gaussian_half_line(a: f64, w: f64) -> (C64, f64) {
    let e = rotated(a.signum() * PI / 4.0);
    let f = |tau: f64| {
        let s = e * tau;
        let z = s * s;
        e * (C64::new(0.0, 1.0) * z / (2.0 * a) - z / (2.0 * w * w)).exp()
    };
    let end = (80.0 * a.abs()).sqrt();
    let est = adaptive(&f, 0.0, end, 1e-13, 0.0, 1 << 14);
    (est.value, est.error)
}

/// Direct-route amplitude `J(A, B)`; `B` is ignored when `dim = 1`.
pub(crate) fn direct_amplitude(chi: &CutoffProfile, a: f64, b: f64, dim: usize) -> Result<(C64, f64)> {
    if a == 0.0 || !a.is_finite() || (dim == 2 && !(b > 0.0 && b.is_finite())) {
        return Err(Error::Domain(format!("degenerate Fresnel coefficients A = {a}, B = {b}")));
    }
    let i = C64::new(0.0, 1.0);
    if let CutoffProfile::Gaussian { width } = *chi {
        let (ja, ea) = gaussian_half_line(a, width);
        if dim == 1 {
            return Ok((ja, ea));
        }
        let (jb, eb) = gaussian_half_line(b, width);
        // u ranges over the whole line: twice the half-line value.
        return Ok((ja * jb * 2.0, 2.0 * (ea * jb.norm() + eb * ja.norm())));
    }
    let radius = chi
        .support_radius()
        .ok_or_else(|| Error::Unsupported(format!("Fresnel quadrature needs an integrable cutoff, got {chi:?}")))?;
    let rel = 1e-12;
    if dim == 1 {
        let f = |s: f64| (i * s * s / (2.0 * a)).exp() * chi.value(s);
        let e = adaptive(&f, 0.0, radius, rel, 1e-300, 1 << 14);
        return Ok((e.value, e.error));
    }
    let inner_err = std::cell::Cell::new(0.0_f64);
    let outer = |s: f64| {
        let top = (radius * radius - s * s).max(0.0).sqrt();
        if top == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let g = |u: f64| (i * u * u / (2.0 * b)).exp() * chi.value(s.hypot(u));
        let e = adaptive(&g, 0.0, top, rel, 1e-300, 1 << 12);
        inner_err.set(inner_err.get().max(e.error));
        (i * s * s / (2.0 * a)).exp() * e.value * 2.0
    };
    let e = adaptive(&outer, 0.0, radius, rel, 1e-300, 1 << 12);
    Ok((e.value, e.error + 2.0 * radius * inner_err.get()))
}

/// Nodes `z_i = e^{iφ}τ_i` and weights `e^{iφ} w_i e^{iAz_i²/2}` of the
/// rotated contour for one frequency axis.
struct AxisRule {
    nodes: Vec<C64>,
    weights: Vec<C64>,
}

/// Contour parameters for the axis with phase coefficient `A`: rotation
/// angle and truncation length. Growth of `χ̂` on the rotated ray is held
/// below `e^{GROWTH}` by limiting the angle.
const GROWTH: f64 = 4.0;

fn axis_contour(a: f64, chi: &CutoffProfile) -> (f64, f64) {
    match *chi {
        CutoffProfile::Gaussian { .. } => (a.signum() * PI / 4.0, (80.0 / a.abs()).sqrt()),
        _ => {
            let r = chi.support_radius().unwrap_or(1.0);
            let phi = (4.0 * a.abs() * GROWTH / (r * r)).min(1.0).atan();
            // log-envelope of the integrand along the ray
            let env = |tau: f64| r * tau * phi.sin() - a.abs() * (2.0 * phi).sin() * tau * tau / 2.0;
            let peak = r / (2.0 * a.abs() * phi.cos());
            let mut end = peak.max(1.0);
            while env(end) > -45.0 {
                end *= 1.25;
            }
            (a.signum() * phi, end)
        }
    }
}

fn axis_rule(a: f64, phi: f64, end: f64, panels: usize) -> AxisRule {
    let gl = GaussLegendre::new(20);
    let e = rotated(phi);
    let i = C64::new(0.0, 1.0);
    let h = 2.0 * end / panels as f64;
    let mut nodes = Vec::with_capacity(panels * 20);
    let mut weights = Vec::with_capacity(panels * 20);
    for p in 0..panels {
        let lo = -end + h * p as f64;
        for (tau, w) in gl.mapped(lo, lo + h) {
            let z = e * tau;
            nodes.push(z);
            weights.push(e * w * (i * a * z * z / 2.0).exp());
        }
    }
    AxisRule { nodes, weights }
}

/// Samples of `χ` on the half grid `x_a = a·h`, `a = 0..=m`, `h = R/m`,
/// with the trapezoid end weight folded in at `a = 0`.
struct HalfGrid {
    h: f64,
    xs: Vec<f64>,
    trap: Vec<f64>,
}

impl HalfGrid {
    fn new(radius: f64, m: usize) -> Self {
        let h = radius / m as f64;
        let xs: Vec<f64> = (0..=m).map(|a| a as f64 * h).collect();
        let trap = (0..=m).map(|a| if a == 0 { 0.5 } else { 1.0 }).collect();
        Self { h, xs, trap }
    }

    /// `β_a = Σ_i W_i cos(x_a z_i)`.
    fn project(&self, rule: &AxisRule) -> Vec<C64> {
        self.xs
            .iter()
            .zip(&self.trap)
            .map(|(&x, &c)| {
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(z, w)| w * (z * x).cos())
                    .sum::<C64>()
                    * c
            })
            .collect()
    }
}

/// Trapezoid value of the one-dimensional marginal transform at the
/// Nyquist frequency `π/h`, relative to its value at 0.
fn nyquist_level(chi: &CutoffProfile, grid: &HalfGrid, dim: usize) -> f64 {
    let marginal: Vec<f64> = grid
        .xs
        .iter()
        .map(|&x| {
            if dim == 1 {
                chi.value(x)
            } else {
                2.0 * grid.h * grid.xs.iter().zip(&grid.trap).map(|(&y, &c)| c * chi.value(x.hypot(y))).sum::<f64>()
            }
        })
        .collect();
    let at = |xi: f64| -> f64 {
        grid.xs
            .iter()
            .zip(&grid.trap)
            .zip(&marginal)
            .map(|((&x, &c), &m)| c * m * (x * xi).cos())
            .sum::<f64>()
    };
    let nyq = PI / grid.h;
    (at(nyq) / at(0.0)).abs()
}

/// `K(A, B)` for a compactly supported smooth `χ`: trapezoid in `x`
/// paired with rotated-contour Gauss-Legendre in `ξ`.
fn fourier_amplitude_compact(chi: &CutoffProfile, a: f64, b: f64, dim: usize) -> Result<(C64, f64)> {
    let radius = chi.support_radius().expect("compact cutoff");
    let (phi_a, end_a) = axis_contour(a, chi);
    let (phi_b, end_b) = if dim == 2 { axis_contour(b, chi) } else { (0.0, 0.0) };
    let panels_for = |end: f64, coef: f64| {
        let freq = radius + coef.abs() * end;
        ((2.0 * end * freq / (6.0 * PI)).ceil() as usize + 4).next_power_of_two()
    };
    let m_cap = if dim == 1 { 1 << 13 } else { 1 << 11 };
    let eval = |m: usize, pa: usize, pb: usize| -> C64 {
        let grid = HalfGrid::new(radius, m);
        let beta_a = grid.project(&axis_rule(a, phi_a, end_a, pa));
        if dim == 1 {
            let s: C64 = grid.xs.iter().zip(&beta_a).map(|(&x, be)| be * chi.value(x)).sum();
            return s * 2.0 * grid.h;
        }
        let beta_b = grid.project(&axis_rule(b, phi_b, end_b, pb));
        let mut s = C64::new(0.0, 0.0);
        for (ia, &xa) in grid.xs.iter().enumerate() {
            let row: C64 = grid.xs.iter().zip(&beta_b).map(|(&xb, bb)| bb * chi.value(xa.hypot(xb))).sum();
            s += beta_a[ia] * row;
        }
        s * 4.0 * grid.h * grid.h
    };
    let mut m = if dim == 1 { 512 } else { 256 };
    loop {
        let level = nyquist_level(chi, &HalfGrid::new(radius, m), dim);
        if level < 1e-12 {
            break;
        }
        if 2 * m > m_cap {
            if level > tolerances::TRANSFORM_TAIL_MAX {
                return Err(Error::Resolution(format!(
                    "cutoff transform grid under-resolved: aliasing level {level:e} above {:e}",
                    tolerances::TRANSFORM_TAIL_MAX
                )));
            }
            break;
        }
        m *= 2;
    }
    let (mut pa, mut pb) = (panels_for(end_a, a), panels_for(end_b, b));
    let mut prev = eval(m, pa, pb);
    // refine the contour rule, then the x grid, until both are stable
    let mut contour_err;
    loop {
        pa *= 2;
        pb *= 2;
        let next = eval(m, pa, pb);
        contour_err = (next - prev).norm();
        prev = next;
        if contour_err <= 1e-13 * next.norm() || pa > 1 << 14 {
            break;
        }
    }
    let mut grid_err;
    loop {
        let finer = eval(2 * m, pa, pb);
        grid_err = (finer - prev).norm();
        prev = finer;
        m *= 2;
        if grid_err <= 1e-12 * finer.norm() || m >= m_cap {
            break;
        }
    }
    Ok((prev, contour_err + grid_err))
}

/// `K(A, B)` for a gaussian `χ̂(ξ) = (2πw²)^{d/2} e^{−w²|ξ|²/2}`.
fn fourier_amplitude_gaussian(w: f64, a: f64, b: f64, dim: usize) -> (C64, f64) {
    let axis = |coef: f64| -> (C64, f64) {
        let e = rotated(coef.signum() * PI / 4.0);
        let i = C64::new(0.0, 1.0);
        let f = |tau: f64| {
            let z = e * tau;
            e * (2.0 * PI * w * w).sqrt() * (i * coef * z * z / 2.0 - w * w * z * z / 2.0).exp()
        };
        let end = (80.0 / coef.abs()).sqrt();
        let est = adaptive(&f, -end, end, 1e-13, 0.0, 1 << 14);
        (est.value, est.error)
    };
    let (ka, ea) = axis(a);
    if dim == 1 {
        return (ka, ea);
    }
    let (kb, eb) = axis(b);
    (ka * kb, ea * kb.norm() + eb * ka.norm())
}

/// Fourier-route amplitude `K(A, B)`.
pub(crate) fn fourier_amplitude(chi: &CutoffProfile, a: f64, b: f64, dim: usize) -> Result<(C64, f64)> {
    if a == 0.0 || !a.is_finite() || (dim == 2 && !(b != 0.0 && b.is_finite())) {
        return Err(Error::Domain(format!("degenerate Fresnel coefficients A = {a}, B = {b}")));
    }
    match *chi {
        CutoffProfile::Gaussian { width } => Ok(fourier_amplitude_gaussian(width, a, b, dim)),
        CutoffProfile::Bump { .. } | CutoffProfile::Plateau { .. } => fourier_amplitude_compact(chi, a, b, dim),
        CutoffProfile::Ball { .. } | CutoffProfile::One => Err(Error::Unsupported(format!(
            "the Fourier route needs a smooth integrable cutoff, got {chi:?}"
        ))),
    }
}

/// `(2π)^{−d}|∫_{x·ω>0} e^{i|x|²/2} χ(x) dx|²` amplitude in polar form.
pub(crate) fn half_space_amplitude(chi: &CutoffProfile, dim: usize) -> Result<(C64, f64)> {
    let i = C64::new(0.0, 1.0);
    match (dim, *chi) {
        (1, CutoffProfile::Gaussian { width }) => Ok(gaussian_half_line(1.0, width)),
        (2, CutoffProfile::Gaussian { width }) => {
            // π ∫₀^∞ e^{iv} e^{−v/w²} dv
            Ok((C64::new(PI, 0.0) / (C64::new(1.0 / (width * width), 0.0) - i), 0.0))
        }
        _ => {
            let radius = chi.support_radius().ok_or_else(|| {
                Error::Unsupported(format!("the half-space integral needs an integrable cutoff, got {chi:?}"))
            })?;
            if dim == 1 {
                let f = |x: f64| (i * x * x / 2.0).exp() * chi.value(x);
                let e = adaptive(&f, 0.0, radius, 1e-12, 1e-300, 1 << 14);
                Ok((e.value, e.error))
            } else {
                // half disc in polar coordinates with v = r²/2
                let f = |v: f64| (i * v).exp() * chi.value((2.0 * v).sqrt());
                let e = adaptive(&f, 0.0, radius * radius / 2.0, 1e-12, 1e-300, 1 << 14);
                Ok((e.value * PI, e.error * PI))
            }
        }
    }
}

/// `‖χ̂‖_{L¹(ℝ^d)}` for smooth compact or gaussian cutoffs, `+∞` otherwise.
pub fn chi_hat_l1(chi: &CutoffProfile, dim: usize) -> f64 {
    match *chi {
        CutoffProfile::Gaussian { .. } => (2.0 * PI).powi(dim as i32),
        CutoffProfile::Bump { .. } | CutoffProfile::Plateau { .. } => {
            let radius = chi.support_radius().expect("compact cutoff");
            let grid = HalfGrid::new(radius, 1024);
            let marginal: Vec<f64> = grid
                .xs
                .iter()
                .map(|&x| {
                    if dim == 1 {
                        chi.value(x)
                    } else {
                        2.0 * grid.h
                            * grid.xs.iter().zip(&grid.trap).map(|(&y, &c)| c * chi.value(x.hypot(y))).sum::<f64>()
                    }
                })
                .collect();
            // radial profile of χ̂ along one axis
            let hat = |r: f64| -> f64 {
                2.0 * grid.h
                    * grid
                        .xs
                        .iter()
                        .zip(&grid.trap)
                        .zip(&marginal)
                        .map(|((&x, &c), &m)| c * m * (x * r).cos())
                        .sum::<f64>()
            };
            let top = 4000.0 / radius;
            let panels = 8000;
            let gl = GaussLegendre::new(8);
            let h = top / panels as f64;
            let mut s = 0.0;
            for p in 0..panels {
                let lo = h * p as f64;
                for (r, w) in gl.mapped(lo, lo + h) {
                    let jac = if dim == 1 { 2.0 } else { 2.0 * PI * r };
                    s += w * jac * hat(r).abs();
                }
            }
            s
        }
        CutoffProfile::Ball { .. } | CutoffProfile::One => f64::INFINITY,
    }
}
