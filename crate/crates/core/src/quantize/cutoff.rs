//! Radial cutoffs `χ`, the weight `Λ` and the full cutoff parameter set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::mollifier;
use crate::quadrature::GaussLegendre;

/// A radial real function of `|x|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CutoffProfile {
    /// `ψ(|x|/R)` with the mollifier `ψ` of [`crate::field::mollifier`].
    Bump { radius: f64 },
    /// `exp(−|x|²/(2 s²))`.
    Gaussian { width: f64 },
    /// Equal to 1 on `|x| ≤ inner`, 0 on `|x| ≥ outer`, smooth in between.
    Plateau { inner: f64, outer: f64 },
    /// Sharp indicator of the ball `|x| < R` (integrable, not smooth).
    Ball { radius: f64 },
    /// Identically 1.
    One,
}

/// Smooth step equal to 0 for `u ≤ 0` and 1 for `u ≥ 1`.
pub fn smooth_step(u: f64) -> f64 {
    let f = |z: f64| if z > 0.0 { (-1.0 / z).exp() } else { 0.0 };
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let (a, b) = (f(u), f(1.0 - u));
        a / (a + b)
    }
}

impl CutoffProfile {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            CutoffProfile::Bump { radius } => mollifier(r / radius),
            CutoffProfile::Gaussian { width } => (-r * r / (2.0 * width * width)).exp(),
            CutoffProfile::Plateau { inner, outer } => smooth_step((outer - r) / (outer - inner)),
            CutoffProfile::Ball { radius } => {
                if r < radius {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffProfile::One => 1.0,
        }
    }

    /// Radius of the support ball, `None` when unbounded.
    pub fn support_radius(&self) -> Option<f64> {
        match *self {
            CutoffProfile::Bump { radius } | CutoffProfile::Ball { radius } => Some(radius),
            CutoffProfile::Plateau { outer, .. } => Some(outer),
            CutoffProfile::Gaussian { .. } | CutoffProfile::One => None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self, CutoffProfile::Ball { .. })
    }

    pub fn is_integrable(&self) -> bool {
        !matches!(self, CutoffProfile::One)
    }

    /// Whether the profile extends to an entire function of `|x|²` that
    /// stays bounded on the rotated rays used by the Fresnel quadratures.
    pub fn is_gaussian(&self) -> bool {
        matches!(self, CutoffProfile::Gaussian { .. })
    }

    /// Equal to 1 on a neighbourhood of the origin.
    pub fn is_flat_near_zero(&self) -> bool {
        matches!(self, CutoffProfile::Plateau { .. } | CutoffProfile::One | CutoffProfile::Ball { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            CutoffProfile::Bump { radius } | CutoffProfile::Ball { radius } => radius > 0.0 && radius.is_finite(),
            CutoffProfile::Gaussian { width } => width > 0.0 && width.is_finite(),
            CutoffProfile::Plateau { inner, outer } => inner > 0.0 && outer > inner && outer.is_finite(),
            CutoffProfile::One => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid cutoff parameters {self:?}")))
        }
    }

    /// `‖χ‖_{L¹(ℝ^d)}`.
    pub fn l1_norm(&self, dim: usize) -> f64 {
        use std::f64::consts::PI;
        let radial = |radius: f64| -> f64 {
            // ∫ χ(|x|) dx = |S^{d−1}| ∫₀^R χ(r) r^{d−1} dr
            let rule = GaussLegendre::new(40);
            let panels = 64;
            let h = radius / panels as f64;
            let mut s = 0.0;
            for p in 0..panels {
                let lo = h * p as f64;
                for (r, w) in rule.mapped(lo, lo + h) {
                    s += w * self.value(r) * r.powi(dim as i32 - 1);
                }
            }
            let sphere = if dim == 1 { 2.0 } else { 2.0 * PI };
            sphere * s
        };
        match *self {
            CutoffProfile::Gaussian { width } => (2.0 * PI * width * width).powf(dim as f64 / 2.0),
            CutoffProfile::Ball { radius } => {
                if dim == 1 {
                    2.0 * radius
                } else {
                    PI * radius * radius
                }
            }
            CutoffProfile::One => f64::INFINITY,
            CutoffProfile::Bump { radius } => radial(radius),
            CutoffProfile::Plateau { outer, .. } => radial(outer),
        }
    }
}

/// The weight `Λ` of the alternative symbol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Weight {
    One,
    /// `Λ(ρ) = scale · ρ^{high} · (ρ²/(1+ρ²))^{(low − high)/2}`, so that
    /// `Λ ∼ ρ^{low}` at 0 and `Λ/ρ^{high} → scale` at infinity.
    PowerLaw { low: f64, high: f64, scale: f64 },
}

impl Weight {
    pub fn value(&self, rho: f64) -> f64 {
        match *self {
            Weight::One => 1.0,
            Weight::PowerLaw { low, high, scale } => {
                let r2 = rho * rho;
                scale * rho.powf(high) * (r2 / (1.0 + r2)).powf(0.5 * (low - high))
            }
        }
    }

    /// `(λ₁, σ₁)` with `Λ(ρ) ≈ λ₁ ρ^{σ₁}` for large `ρ`.
    pub fn asymptotic(&self) -> (f64, f64) {
        match *self {
            Weight::One => (1.0, 0.0),
            Weight::PowerLaw { high, scale, .. } => (scale, high),
        }
    }

    /// Positivity and the large-`ρ` limit, checked at `ρ = 10³, 10⁴`.
    pub fn validate(&self) -> Result<()> {
        let (scale, high) = self.asymptotic();
        if !(scale > 0.0) || !scale.is_finite() || !high.is_finite() {
            return Err(Error::Domain(format!("weight needs a positive finite scale, got {self:?}")));
        }
        for rho in [1e-3, 1.0, 1e3] {
            if !(self.value(rho) > 0.0) {
                return Err(Error::Domain(format!("weight not positive at ρ = {rho}")));
            }
        }
        for rho in [1e3, 1e4] {
            let ratio = self.value(rho) / rho.powf(high);
            if (ratio / scale - 1.0).abs() > 0.02 {
                return Err(Error::Domain(format!(
                    "Λ(ρ)/ρ^σ₁ = {ratio} at ρ = {rho} is not within 2% of λ₁ = {scale}"
                )));
            }
        }
        Ok(())
    }
}

/// Every parameter of the truncation symbols apart from the model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutoffSpec {
    pub chi: CutoffProfile,
    pub delta: f64,
    pub weight: Weight,
    pub eps0: f64,
    pub eps1: f64,
    pub eps: f64,
    pub chi_low: CutoffProfile,
    pub chi_high: CutoffProfile,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self {
            chi: CutoffProfile::Bump { radius: 1.0 },
            delta: 0.0,
            weight: Weight::One,
            eps0: 0.4,
            eps1: 0.9,
            eps: 0.5,
            chi_low: CutoffProfile::Plateau { inner: 1.0, outer: 2.0 },
            chi_high: CutoffProfile::Plateau { inner: 1.0, outer: 2.0 },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_is_one_inside_and_zero_outside() {
        let p = CutoffProfile::Plateau { inner: 1.0, outer: 2.0 };
        assert_eq!(p.value(0.5), 1.0);
        assert_eq!(p.value(2.5), 0.0);
        assert!((p.value(1.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn l1_norms_match_closed_forms() {
        let g = CutoffProfile::Gaussian { width: 0.7 };
        assert!((g.l1_norm(1) - (2.0 * std::f64::consts::PI).sqrt() * 0.7).abs() < 1e-12);
        // ∫ψ over [-1,1] and 2π∫₀¹ψ(r)r dr, from an external adaptive quadrature
        let b = CutoffProfile::Bump { radius: 2.0 };
        assert!((b.l1_norm(1) / 2.0 - 1.206_900_322_4).abs() < 1e-9);
        assert!((b.l1_norm(2) / 4.0 - 1.268_112_161_1).abs() < 1e-9);
    }

    #[test]
    fn power_law_weight_limits() {
        let w = Weight::PowerLaw { low: 1.0, high: -2.0, scale: 1.5 };
        w.validate().unwrap();
        assert!((w.value(1e-4) / 1e-4 / 1.5 - 1.0).abs() < 1e-6);
    }
}
