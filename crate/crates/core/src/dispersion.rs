//! Radial dispersion relations `P(|ξ|)`, the fractional-type hypothesis
//! checker and the inverse group velocity.

use crate::error::{Error, Result};

/// User supplied relation for [`ModelKind::Custom`]: value, first and
/// second derivative as functions of `ρ > 0`.
#[derive(Clone, Copy, Debug)]
pub struct CustomRelation {
    pub value: fn(f64) -> f64,
    pub slope: fn(f64) -> f64,
    pub curvature: fn(f64) -> f64,
}

#[derive(Clone, Copy, Debug)]
pub enum ModelKind {
    /// `P′(ρ) = ρ^p`.
    Fractional(f64),
    Schrodinger,
    /// Deep-water gravity waves, normalised so that `P′(ρ) = ρ^{-1/2}`.
    GravityWw,
    /// Deep-water capillary waves, `P′(ρ) = ρ^{1/2}`.
    CapillaryWw,
    /// `P(ρ) = ρ^{1/2} tanh(hρ)`.
    GravityWwDepth(f64),
    /// `P(ρ) = ρ^{3/2} tanh(hρ)`.
    CapillaryWwDepth(f64),
    /// `P(ρ) = ⟨ρ⟩ = (1 + ρ²)^{1/2}`.
    HalfKleinGordon,
    Custom(CustomRelation),
}

/// A radial dispersion relation together with its asymptotic parameters:
/// `P′ − P₀ ∼ ρ^{p₀}` as `ρ → 0` and `P′ − P₁ ∼ ρ^{p₁}` as `ρ → ∞`.
#[derive(Clone, Copy, Debug)]
pub struct DispersionModel {
    kind: ModelKind,
    low_exponent: f64,
    high_exponent: f64,
    low_limit: f64,
    high_limit: f64,
    convexity: i8,
}

impl DispersionModel {
    pub fn schrodinger() -> Self {
        Self::power(ModelKind::Schrodinger, 1.0)
    }

    pub fn fractional(p: f64) -> Result<Self> {
        if !p.is_finite() || p == 0.0 {
            return Err(Error::Domain(format!(
                "fractional exponent must be finite and nonzero (P″ ≡ 0 is excluded), got {p}"
            )));
        }
        Ok(Self::power(ModelKind::Fractional(p), p))
    }

    pub fn gravity_ww() -> Self {
        Self::power(ModelKind::GravityWw, -0.5)
    }

    pub fn capillary_ww() -> Self {
        Self::power(ModelKind::CapillaryWw, 0.5)
    }

    pub fn gravity_ww_depth(depth: f64) -> Result<Self> {
        check_depth(depth)?;
        Ok(Self {
            kind: ModelKind::GravityWwDepth(depth),
            low_exponent: 0.5,
            high_exponent: -0.5,
            low_limit: 0.0,
            high_limit: 0.0,
            convexity: -1,
        })
    }

    pub fn capillary_ww_depth(depth: f64) -> Result<Self> {
        check_depth(depth)?;
        Ok(Self {
            kind: ModelKind::CapillaryWwDepth(depth),
            low_exponent: 1.5,
            high_exponent: 0.5,
            low_limit: 0.0,
            high_limit: 0.0,
            convexity: 1,
        })
    }

    pub fn half_klein_gordon() -> Self {
        Self {
            kind: ModelKind::HalfKleinGordon,
            low_exponent: 1.0,
            high_exponent: -2.0,
            low_limit: 0.0,
            high_limit: 1.0,
            convexity: 1,
        }
    }

    pub fn custom(
        relation: CustomRelation,
        low_exponent: f64,
        high_exponent: f64,
        low_limit: f64,
        high_limit: f64,
        convexity: i8,
    ) -> Result<Self> {
        if convexity != 1 && convexity != -1 {
            return Err(Error::Domain(format!("convexity must be ±1, got {convexity}")));
        }
        if low_limit < 0.0 || high_limit < 0.0 {
            return Err(Error::Domain("velocity limits must be nonnegative".into()));
        }
        Ok(Self {
            kind: ModelKind::Custom(relation),
            low_exponent,
            high_exponent,
            low_limit,
            high_limit,
            convexity,
        })
    }

    fn power(kind: ModelKind, p: f64) -> Self {
        Self {
            kind,
            low_exponent: p,
            high_exponent: p,
            low_limit: 0.0,
            high_limit: 0.0,
            convexity: if p > 0.0 { 1 } else { -1 },
        }
    }

    /// Parse a model id: `schrodinger`, `gravity-ww`, `capillary-ww`,
    /// `gravity-ww-h`, `capillary-ww-h`, `half-kg` or `fractional:<p>`.
    /// `depth` is used by the finite-depth ids only.
    pub fn from_id(id: &str, depth: f64) -> Result<Self> {
        match id {
            "schrodinger" => Ok(Self::schrodinger()),
            "gravity-ww" => Ok(Self::gravity_ww()),
            "capillary-ww" => Ok(Self::capillary_ww()),
            "gravity-ww-h" => Self::gravity_ww_depth(depth),
            "capillary-ww-h" => Self::capillary_ww_depth(depth),
            "half-kg" => Ok(Self::half_klein_gordon()),
            other => match other.strip_prefix("fractional:") {
                Some(p) => {
                    let p: f64 = p
                        .trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad fractional exponent in '{id}'")))?;
                    Self::fractional(p)
                }
                None => Err(Error::Config(format!("unknown model id '{id}'"))),
            },
        }
    }

    pub fn id(&self) -> String {
        match self.kind {
            ModelKind::Fractional(p) => format!("fractional:{p}"),
            ModelKind::Schrodinger => "schrodinger".into(),
            ModelKind::GravityWw => "gravity-ww".into(),
            ModelKind::CapillaryWw => "capillary-ww".into(),
            ModelKind::GravityWwDepth(_) => "gravity-ww-h".into(),
            ModelKind::CapillaryWwDepth(_) => "capillary-ww-h".into(),
            ModelKind::HalfKleinGordon => "half-kg".into(),
            ModelKind::Custom(_) => "custom".into(),
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }
    pub fn low_exponent(&self) -> f64 {
        self.low_exponent
    }
    pub fn high_exponent(&self) -> f64 {
        self.high_exponent
    }
    pub fn low_limit(&self) -> f64 {
        self.low_limit
    }
    pub fn high_limit(&self) -> f64 {
        self.high_limit
    }
    /// Declared sign of `P″` on `]0, ∞[`.
    pub fn convexity(&self) -> i8 {
        self.convexity
    }

    pub fn is_half_klein_gordon(&self) -> bool {
        matches!(self.kind, ModelKind::HalfKleinGordon)
    }

    /// Exponent `p` when `P′(ρ) = ρ^p` exactly.
    pub fn power_exponent(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Fractional(p) => Some(p),
            ModelKind::Schrodinger => Some(1.0),
            ModelKind::GravityWw => Some(-0.5),
            ModelKind::CapillaryWw => Some(0.5),
            _ => None,
        }
    }

    /// Whether `P` fails to be smooth at the origin, so that data must carry
    /// no mass at `ξ = 0`.
    pub fn is_singular_at_origin(&self) -> bool {
        match self.kind {
            ModelKind::Schrodinger | ModelKind::HalfKleinGordon => false,
            ModelKind::Fractional(p) => p < 1.0,
            ModelKind::GravityWw
            | ModelKind::CapillaryWw
            | ModelKind::GravityWwDepth(_)
            | ModelKind::CapillaryWwDepth(_) => true,
            ModelKind::Custom(_) => self.low_exponent < 1.0,
        }
    }

    /// `P(0)` for relations smooth at the origin.
    pub fn value_at_origin(&self) -> Option<f64> {
        if self.is_singular_at_origin() {
            return None;
        }
        match self.kind {
            ModelKind::HalfKleinGordon => Some(1.0),
            ModelKind::Custom(c) => Some((c.value)(0.0)).filter(|v| v.is_finite()),
            _ => Some(0.0),
        }
    }

    /// `P`, `P′` or `P″` at `ρ > 0`.
    pub fn eval_derivatives(&self, rho: f64, order: u8) -> Result<f64> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Domain(format!("ρ must be positive and finite, got {rho}")));
        }
        match order {
            0 => Ok(self.phase(rho)),
            1 => Ok(self.velocity(rho)),
            2 => Ok(self.curvature(rho)),
            _ => Err(Error::Unsupported(format!("derivative order {order} (only 0, 1, 2)"))),
        }
    }

    /// `P(ρ)` without argument checks.
    pub fn phase(&self, rho: f64) -> f64 {
        match self.kind {
            ModelKind::Fractional(p) => {
                if p == -1.0 {
                    rho.ln()
                } else {
                    rho.powf(p + 1.0) / (p + 1.0)
                }
            }
            ModelKind::Schrodinger => 0.5 * rho * rho,
            ModelKind::GravityWw => 2.0 * rho.sqrt(),
            ModelKind::CapillaryWw => rho.powf(1.5) / 1.5,
            ModelKind::GravityWwDepth(h) => rho.sqrt() * (h * rho).tanh(),
            ModelKind::CapillaryWwDepth(h) => rho.powf(1.5) * (h * rho).tanh(),
            ModelKind::HalfKleinGordon => (1.0 + rho * rho).sqrt(),
            ModelKind::Custom(c) => (c.value)(rho),
        }
    }

    /// Group speed `P′(ρ)` without argument checks.
    pub fn velocity(&self, rho: f64) -> f64 {
        match self.kind {
            ModelKind::Fractional(p) => rho.powf(p),
            ModelKind::Schrodinger => rho,
            ModelKind::GravityWw => 1.0 / rho.sqrt(),
            ModelKind::CapillaryWw => rho.sqrt(),
            ModelKind::GravityWwDepth(h) => depth_derivatives(0.5, h, rho).0,
            ModelKind::CapillaryWwDepth(h) => depth_derivatives(1.5, h, rho).0,
            ModelKind::HalfKleinGordon => rho / (1.0 + rho * rho).sqrt(),
            ModelKind::Custom(c) => (c.slope)(rho),
        }
    }

    /// `P″(ρ)` without argument checks.
    pub fn curvature(&self, rho: f64) -> f64 {
        match self.kind {
            ModelKind::Fractional(p) => p * rho.powf(p - 1.0),
            ModelKind::Schrodinger => 1.0,
            ModelKind::GravityWw => -0.5 * rho.powf(-1.5),
            ModelKind::CapillaryWw => 0.5 / rho.sqrt(),
            ModelKind::GravityWwDepth(h) => depth_derivatives(0.5, h, rho).1,
            ModelKind::CapillaryWwDepth(h) => depth_derivatives(1.5, h, rho).1,
            ModelKind::HalfKleinGordon => (1.0 + rho * rho).powf(-1.5),
            ModelKind::Custom(c) => (c.curvature)(rho),
        }
    }

    /// `lim_{ρ→0} P′(ρ)` (may be `+∞`).
    pub fn velocity_at_zero(&self) -> f64 {
        if self.low_exponent > 0.0 {
            self.low_limit
        } else {
            f64::INFINITY
        }
    }

    /// `lim_{ρ→∞} P′(ρ)` (may be `+∞`).
    pub fn velocity_at_infinity(&self) -> f64 {
        if self.high_exponent < 0.0 {
            self.high_limit
        } else {
            f64::INFINITY
        }
    }

    /// The `ρ ≥ 0` with `P′(ρ) = r`. Returns `+∞` when `r` lies beyond the
    /// range of `P′` on the large-frequency side, and `0` when it lies beyond
    /// it on the small-frequency side.
    pub fn invert_velocity(&self, r: f64) -> f64 {
        let r = r.max(0.0);
        match self.kind {
            ModelKind::HalfKleinGordon => {
                if r >= 1.0 {
                    f64::INFINITY
                } else {
                    r / (1.0 - r * r).sqrt()
                }
            }
            _ => match self.power_exponent() {
                Some(p) => r.powf(1.0 / p),
                None => self.invert_velocity_bisect(r),
            },
        }
    }

    /// Bisection inverse of `P′`, used where no closed form exists.
    pub fn invert_velocity_bisect(&self, r: f64) -> f64 {
        let increasing = self.convexity > 0;
        let (v0, vinf) = (self.velocity_at_zero(), self.velocity_at_infinity());
        if increasing {
            if r <= v0 {
                return 0.0;
            }
            if r >= vinf {
                return f64::INFINITY;
            }
        } else {
            if r >= v0 {
                return 0.0;
            }
            if r <= vinf {
                return f64::INFINITY;
            }
        }
        // `below(ρ)` is true while ρ is smaller than the root.
        let below = |rho: f64| {
            let v = self.velocity(rho);
            if increasing {
                v < r
            } else {
                v > r
            }
        };
        let (mut lo, mut hi) = (1.0_f64, 1.0_f64);
        let mut guard = 0;
        while below(hi) && guard < 2100 {
            hi *= 2.0;
            guard += 1;
        }
        while !below(lo) && guard < 4200 {
            lo *= 0.5;
            guard += 1;
        }
        if below(hi) {
            return f64::INFINITY;
        }
        if !below(lo) {
            return 0.0;
        }
        for _ in 0..crate::tolerances::BISECTION_MAX_ITERS {
            let mid = 0.5 * (lo + hi);
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= crate::tolerances::BISECTION_REL * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Largest admissible frequency-window exponents `(ε₀, ε₁)` for the
    /// modified symbol. Only defined when `p₁ < 0 < p₀`.
    pub fn epsilon_bounds(&self) -> Result<(f64, f64)> {
        let (p0, p1) = (self.low_exponent, self.high_exponent);
        if !(p1 < 0.0 && 0.0 < p0) {
            return Err(Error::Regime(format!(
                "frequency windows need p₁ < 0 < p₀, model {} has p₀ = {p0}, p₁ = {p1}",
                self.id()
            )));
        }
        let e0 = 1.0 / (p0 + 1.0);
        let e1 = if p1 >= -1.0 { f64::INFINITY } else { 1.0 / (-(p1 + 1.0)) };
        Ok((e0, e1))
    }

    /// Sweep the hypothesis checker over `grid` (must span `[1e-3, 1e3]`).
    pub fn verify_hypothesis(&self, grid: &[f64]) -> Result<HypothesisReport> {
        verify_hypothesis(self, grid)
    }
}

fn check_depth(depth: f64) -> Result<()> {
    if depth > 0.0 && depth.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("depth must be positive and finite, got {depth}")))
    }
}

/// `(P′, P″)` for `P(ρ) = ρ^a tanh(hρ)`.
fn depth_derivatives(a: f64, h: f64, rho: f64) -> (f64, f64) {
    let th = (h * rho).tanh();
    let sech2 = {
        let c = (h * rho).cosh();
        1.0 / (c * c)
    };
    let pw = rho.powf(a);
    let d1 = a * rho.powf(a - 1.0) * th + pw * h * sech2;
    let d2 = a * (a - 1.0) * rho.powf(a - 2.0) * th + 2.0 * a * rho.powf(a - 1.0) * h * sech2
        - 2.0 * pw * h * h * th * sech2;
    (d1, d2)
}

/// Logarithmically spaced grid of `count` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i == count - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Default grid for [`verify_hypothesis`]: 121 points on `[1e-3, 1e3]`.
pub fn hypothesis_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, 121)
}

#[derive(Clone, Debug)]
pub struct AsymptoticCheck {
    pub exponent: f64,
    pub limit: f64,
    /// Range of `|P′(ρ) − limit| / ρ^exponent` over the asymptotic third.
    pub velocity_ratio: (f64, f64),
    /// Range of `|P″(ρ)| / ρ^{exponent − 1}` over the asymptotic third.
    pub curvature_ratio: (f64, f64),
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct HypothesisFailure {
    pub rho: f64,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct HypothesisReport {
    pub passed: bool,
    pub low: AsymptoticCheck,
    pub high: AsymptoticCheck,
    pub monotone: bool,
    pub convexity_consistent: bool,
    pub failures: Vec<HypothesisFailure>,
}

pub fn verify_hypothesis(model: &DispersionModel, grid: &[f64]) -> Result<HypothesisReport> {
    use crate::tolerances::{HYPOTHESIS_BAND_HI, HYPOTHESIS_BAND_LO};
    let mut rho: Vec<f64> = grid.to_vec();
    if rho.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::Domain("hypothesis grid must be positive and finite".into()));
    }
    rho.sort_by(f64::total_cmp);
    rho.dedup();
    let (lo, hi) = (rho[0], rho[rho.len() - 1]);
    if lo > 1e-3 * (1.0 + 1e-9) || hi < 1e3 * (1.0 - 1e-9) || rho.len() < 9 {
        return Err(Error::Precondition(format!(
            "hypothesis grid must span [1e-3, 1e3] with at least 9 points, got [{lo}, {hi}] ({} points)",
            rho.len()
        )));
    }
    let mut failures = Vec::new();
    let sign = model.convexity() as f64;
    let mut convexity_consistent = true;
    for &r in &rho {
        let c = model.curvature(r);
        if !(sign * c > 0.0) {
            convexity_consistent = false;
            failures.push(HypothesisFailure {
                rho: r,
                reason: format!("P″ = {c:e} does not have the declared sign {sign}"),
            });
        }
    }
    let mut monotone = true;
    for w in rho.windows(2) {
        let (v1, v2) = (model.velocity(w[0]), model.velocity(w[1]));
        if !(sign * (v2 - v1) > 0.0) {
            monotone = false;
            failures.push(HypothesisFailure {
                rho: w[1],
                reason: format!("P′ not strictly monotone between ρ = {} and ρ = {}", w[0], w[1]),
            });
        }
    }
    let third = rho.len() / 3;
    let check = |pts: &[f64], exponent: f64, limit: f64, failures: &mut Vec<HypothesisFailure>| {
        let mut vr = (f64::INFINITY, 0.0_f64);
        let mut cr = (f64::INFINITY, 0.0_f64);
        let mut ok = true;
        for &r in pts {
            let a = (model.velocity(r) - limit).abs() / r.powf(exponent);
            let b = model.curvature(r).abs() / r.powf(exponent - 1.0);
            vr = (vr.0.min(a), vr.1.max(a));
            cr = (cr.0.min(b), cr.1.max(b));
            for (name, v) in [("|P′ − limit|/ρ^p", a), ("|P″|/ρ^(p−1)", b)] {
                if !(HYPOTHESIS_BAND_LO..=HYPOTHESIS_BAND_HI).contains(&v) {
                    ok = false;
                    failures.push(HypothesisFailure {
                        rho: r,
                        reason: format!("{name} = {v:e} outside [1/20, 20] (p = {exponent})"),
                    });
                }
            }
        }
        AsymptoticCheck { exponent, limit, velocity_ratio: vr, curvature_ratio: cr, passed: ok }
    };
    let low = check(&rho[..third], model.low_exponent(), model.low_limit(), &mut failures);
    let high = check(
        &rho[rho.len() - third..],
        model.high_exponent(),
        model.high_limit(),
        &mut failures,
    );
    let passed = low.passed && high.passed && monotone && convexity_consistent;
    Ok(HypothesisReport { passed, low, high, monotone, convexity_consistent, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_relations_approach_deep_water() {
        let g = DispersionModel::gravity_ww_depth(1.0).unwrap();
        let rho = 40.0;
        assert!((g.velocity(rho) - 0.5 / rho.sqrt()).abs() < 1e-12);
        let c = DispersionModel::capillary_ww_depth(2.0).unwrap();
        assert!((c.velocity(rho) - 1.5 * rho.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn bisection_agrees_with_closed_form() {
        let m = DispersionModel::half_klein_gordon();
        for r in [0.05, 0.3, 0.6, 0.95] {
            let a = m.invert_velocity(r);
            let b = m.invert_velocity_bisect(r);
            assert!((a - b).abs() <= 1e-11 * a, "{r}: {a} vs {b}");
        }
        assert_eq!(m.invert_velocity_bisect(1.0), f64::INFINITY);
    }

    #[test]
    fn ids_round_trip() {
        for id in ["schrodinger", "gravity-ww", "capillary-ww", "gravity-ww-h", "capillary-ww-h", "half-kg", "fractional:1.5"] {
            assert_eq!(DispersionModel::from_id(id, 1.0).unwrap().id(), id);
        }
        assert!(DispersionModel::from_id("wave", 1.0).is_err());
        assert!(DispersionModel::from_id("fractional:0", 1.0).is_err());
    }
}
