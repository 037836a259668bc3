//! Angular integrals `∫_{S^{d−1}} e^{iε′rρω·θ} χ(…) f(ρθ) dθ` and their
//! stationary-phase principal terms, used to check the decay rates of the
//! remainder numerically.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::field::SpectralProfile;
use crate::fit::loglog_slope;
use crate::quantize::CutoffSpec;
use crate::tolerances;
use crate::C64;

#[derive(Clone, Debug)]
pub struct SphereIntegralCase {
    pub model: DispersionModel,
    /// `χ`, `δ` and the weight `Λ` enter through the cutoff set.
    pub cutoff: CutoffSpec,
    pub dim: usize,
    pub r: f64,
    pub rho: f64,
    pub t: f64,
    /// Angle of `ω` (d = 2) or its sign (d = 1, `ω = ±1`).
    pub omega: f64,
    pub eps: i8,
    pub eps_prime: i8,
    pub amplitude: SpectralProfile,
}

impl SphereIntegralCase {
    fn check(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::Unsupported(format!("dimension {} (only 1 and 2)", self.dim)));
        }
        if self.eps.abs() != 1 || self.eps_prime.abs() != 1 {
            return Err(Error::Domain("ε and ε′ must be ±1".into()));
        }
        if !(self.r > 0.0 && self.rho > 0.0 && self.t > 0.0) {
            return Err(Error::Domain("r, ρ and t must be positive".into()));
        }
        Ok(())
    }

    fn omega_vec(&self) -> [f64; 2] {
        if self.dim == 1 {
            [self.omega.signum(), 0.0]
        } else {
            [self.omega.cos(), self.omega.sin()]
        }
    }

    /// `t^{1/2+δ} Λ(t^{1/2}ρ)`.
    fn scale(&self) -> f64 {
        self.t.powf(0.5 + self.cutoff.delta) * self.cutoff.weight.value(self.t.sqrt() * self.rho)
    }

    /// `μ = t^{δ + σ/2 − 1/2}`.
    pub fn mu(&self) -> f64 {
        let sigma = self.cutoff.weight.asymptotic().1;
        self.t.powf(self.cutoff.delta + 0.5 * sigma - 0.5)
    }

    fn integrand(&self, theta: [f64; 2]) -> C64 {
        let w = self.omega_vec();
        let (eps, epsp) = (self.eps as f64, self.eps_prime as f64);
        let speed = self.model.velocity(self.rho);
        let arg = [
            self.r * w[0] + eps * self.t * speed * theta[0],
            self.r * w[1] + eps * self.t * speed * theta[1],
        ];
        let chi = self.cutoff.chi.value(arg[0].hypot(arg[1]) / self.scale());
        if chi == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let f = self.amplitude.shape_value([self.rho * theta[0], self.rho * theta[1]]);
        let phase = epsp * self.r * self.rho * (w[0] * theta[0] + w[1] * theta[1]);
        C64::from_polar(chi * f, phase)
    }
}

/// The angular integral; d = 1 is the two-point sum over `θ = ±1`.
pub fn sphere_integral(case: &SphereIntegralCase) -> Result<C64> {
    case.check()?;
    if case.dim == 1 {
        return Ok(case.integrand([1.0, 0.0]) + case.integrand([-1.0, 0.0]));
    }
    let sample = |m: usize, offset: usize, stride: usize| -> C64 {
        let h = 2.0 * PI / m as f64;
        (offset..m)
            .step_by(stride)
            .map(|k| {
                let a = h * k as f64;
                case.integrand([a.cos(), a.sin()])
            })
            .sum::<C64>()
    };
    // Periodic trapezoid; each doubling adds only the new midpoints.
    let mut m = 64;
    let mut sum = sample(m, 0, 1);
    let mut value = sum * (2.0 * PI / m as f64);
    loop {
        let mid = sample(2 * m, 1, 2);
        sum += mid;
        m *= 2;
        let next = sum * (2.0 * PI / m as f64);
        let change = (next - value).norm();
        value = next;
        if m >= 1024 && change <= tolerances::SPHERE_REL * next.norm() {
            return Ok(next);
        }
        if next.norm() == 0.0 && m >= 1024 {
            return Ok(next);
        }
        if m >= tolerances::SPHERE_MAX_PANELS {
            return Err(Error::Quadrature(format!(
                "sphere integral not converged at {m} panels (last change {change:e})"
            )));
        }
    }
}

/// `(2π)^{(d−1)/2} e^{iεε′π(d−1)/4} e^{−iεε′rρ} (rρ)^{−(d−1)/2} χ((r − tP′(ρ))/(t^{1/2+δ}Λ)) f(−ερω)`.
pub fn principal_term(case: &SphereIntegralCase) -> Result<C64> {
    case.check()?;
    let d1 = (case.dim - 1) as f64;
    let ee = (case.eps * case.eps_prime) as f64;
    let rr = case.r * case.rho;
    let chi = case.cutoff.chi.value((case.r - case.t * case.model.velocity(case.rho)).abs() / case.scale());
    let w = case.omega_vec();
    let eps = case.eps as f64;
    let f = case.amplitude.shape_value([-eps * case.rho * w[0], -eps * case.rho * w[1]]);
    let magnitude = (2.0 * PI).powf(d1 / 2.0) * rr.powf(-d1 / 2.0) * chi * f;
    Ok(C64::from_polar(magnitude, ee * PI * d1 / 4.0 - ee * rr))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatPhaseRow {
    pub lambda_mu2: f64,
    pub integral: f64,
    pub principal: f64,
    pub remainder: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatPhaseReport {
    pub dim: usize,
    pub mu: f64,
    pub rows: Vec<StatPhaseRow>,
    pub principal_slope: Option<f64>,
    pub remainder_slope: Option<f64>,
    /// `None` when the fit is inconclusive.
    pub passed: Option<bool>,
    pub note: String,
}

/// Sweep parameters for [`remainder_decay_study`].
#[derive(Clone, Debug)]
pub struct StatPhaseSweep {
    pub model: DispersionModel,
    pub cutoff: CutoffSpec,
    pub amplitude: SpectralProfile,
    pub dim: usize,
    pub rho: f64,
    /// Fixed `μ`; `t` and `δ` are solved for each `λμ²`.
    pub mu: f64,
    pub lambda_mu2: Vec<f64>,
    pub eps: i8,
    pub eps_prime: i8,
}

impl StatPhaseSweep {
    /// Case on the cone `r = tP′(ρ)` with `λ = rρ = λμ²/μ²` and
    /// `μ = t^{δ+σ/2−1/2}`.
    pub fn case(&self, lambda_mu2: f64) -> Result<SphereIntegralCase> {
        let lambda = lambda_mu2 / (self.mu * self.mu);
        let speed = self.model.velocity(self.rho);
        let t = lambda / (speed * self.rho);
        if !(t > 1.0) {
            return Err(Error::Domain(format!("λμ² = {lambda_mu2} gives t = {t} ≤ 1")));
        }
        let sigma = self.cutoff.weight.asymptotic().1;
        let delta = 0.5 - 0.5 * sigma + self.mu.ln() / t.ln();
        let mut cutoff = self.cutoff;
        cutoff.delta = delta;
        Ok(SphereIntegralCase {
            model: self.model,
            cutoff,
            dim: self.dim,
            r: t * speed,
            rho: self.rho,
            t,
            omega: 0.3,
            eps: self.eps,
            eps_prime: self.eps_prime,
            amplitude: self.amplitude.clone(),
        })
    }
}

/// Fit `log|I − principal|` and `log|principal|` against `log(λμ²)`.
pub fn remainder_decay_study(sweep: &StatPhaseSweep) -> Result<StatPhaseReport> {
    let lo = sweep.lambda_mu2.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sweep.lambda_mu2.iter().copied().fold(0.0, f64::max);
    if sweep.lambda_mu2.len() < 3 || hi < 100.0 * lo {
        return Err(Error::Domain("the sweep must span at least two decades of λμ² with ≥ 3 points".into()));
    }
    let cases = sweep.lambda_mu2.iter().map(|&l| sweep.case(l)).collect::<Result<Vec<_>>>()?;
    let rows = crate::exec::map_indexed(cases.len(), |i| -> Result<StatPhaseRow> {
        let c = &cases[i];
        let integral = sphere_integral(c)?;
        let principal = principal_term(c)?;
        Ok(StatPhaseRow {
            lambda_mu2: sweep.lambda_mu2[i],
            integral: integral.norm(),
            principal: principal.norm(),
            remainder: (integral - principal).norm(),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.lambda_mu2).collect();
    let principal_slope = loglog_slope(&xs, &rows.iter().map(|r| r.principal).collect::<Vec<_>>());
    let rems: Vec<f64> = rows.iter().map(|r| r.remainder).collect();
    let rem_hi = rems.iter().copied().fold(0.0, f64::max);
    let rem_lo = rems.iter().copied().fold(f64::INFINITY, f64::min);
    let d = sweep.dim as f64;
    let (remainder_slope, passed, note) = if !(rem_lo > 0.0) || rem_hi < 1e3 * rem_lo {
        (
            None,
            None,
            format!("inconclusive: remainder magnitudes span {rem_lo:e}..{rem_hi:e}, less than three decades"),
        )
    } else {
        let s = loglog_slope(&xs, &rems);
        let ok = match (s, principal_slope) {
            (Some(s), Some(p)) => s <= -(d + 1.0) / 2.0 + 0.15 && (p + (d - 1.0) / 2.0).abs() <= 0.1,
            _ => false,
        };
        (s, Some(ok), String::new())
    };
    Ok(StatPhaseReport { dim: sweep.dim, mu: sweep.mu, rows, principal_slope, remainder_slope, passed, note })
}
