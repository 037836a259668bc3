//! Truncation symbols `a(t, x, ξ)`, their dense standard quantization
//! `Op(a)u(x_j) = (2π)^{−d}Δξ^d Σ_k e^{ix_j·ξ_k} a(t, x_j, ξ_k) û(ξ_k)`, the
//! adjoint, operator-norm estimates and the Wigner transform.

mod cutoff;
mod opnorm;
mod wigner;

pub use cutoff::{smooth_step, CutoffProfile, CutoffSpec, Weight};
pub use opnorm::{op_norm_estimate, op_norm_of, NormEstimate};
pub use wigner::{wigner_mass, wigner_transform, WignerMap};

use serde::{Deserialize, Serialize};

use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::exec;
use crate::field::{norm2, FieldState, GridSpec, Point};
use crate::propagator::evolve;
use crate::tolerances;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolVariant {
    Plain,
    Modified,
    Alternative,
    Kg,
    IndicatorOnly,
    KgIndicator,
}

impl SymbolVariant {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "plain" => Self::Plain,
            "modified" => Self::Modified,
            "alternative" => Self::Alternative,
            "kg" => Self::Kg,
            "indicator-only" => Self::IndicatorOnly,
            "kg-indicator" => Self::KgIndicator,
            other => return Err(Error::Config(format!("unknown symbol variant '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Plain => "plain",
            Self::Modified => "modified",
            Self::Alternative => "alternative",
            Self::Kg => "kg",
            Self::IndicatorOnly => "indicator-only",
            Self::KgIndicator => "kg-indicator",
        }
    }

    /// Whether the `χ((x + tP′(ξ))/scale)` factor is present.
    pub fn uses_chi(&self) -> bool {
        matches!(self, Self::Plain | Self::Modified | Self::Alternative)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SymbolSpec {
    pub variant: SymbolVariant,
    pub model: DispersionModel,
    pub cutoff: CutoffSpec,
}

fn hypothesis(msg: String) -> Error {
    Error::Hypothesis(msg)
}

impl SymbolSpec {
    pub fn new(variant: SymbolVariant, model: DispersionModel, cutoff: CutoffSpec) -> Self {
        Self { variant, model, cutoff }
    }

    /// Parameter and model checks for the chosen variant.
    pub fn validate(&self) -> Result<()> {
        let c = &self.cutoff;
        let m = &self.model;
        c.chi.validate()?;
        if !c.delta.is_finite() {
            return Err(Error::Domain("δ must be finite".into()));
        }
        if self.variant.uses_chi() && c.chi.value(0.0) != 1.0 {
            return Err(hypothesis("the cutoff must satisfy χ(0) = 1".into()));
        }
        let vanishing_limits = m.low_limit() == 0.0 && m.high_limit() == 0.0;
        match self.variant {
            SymbolVariant::Plain | SymbolVariant::IndicatorOnly => {
                if !vanishing_limits {
                    return Err(hypothesis(format!(
                        "the {} symbol requires P₀ = P₁ = 0, model {} has P₀ = {}, P₁ = {}; \
                         use the modified or alternative symbol",
                        self.variant.name(),
                        m.id(),
                        m.low_limit(),
                        m.high_limit()
                    )));
                }
            }
            SymbolVariant::Modified | SymbolVariant::KgIndicator => {
                let (e0, e1) = m.epsilon_bounds().map_err(|e| hypothesis(e.to_string()))?;
                if !(c.eps0 > 0.0 && c.eps0 <= e0) {
                    return Err(hypothesis(format!("the frequency windows require 0 < ε₀ ≤ {e0}, got {}", c.eps0)));
                }
                if !(c.eps1 > 0.0 && c.eps1 <= e1) {
                    return Err(hypothesis(format!("the frequency windows require 0 < ε₁ ≤ {e1}, got {}", c.eps1)));
                }
                for (name, w) in [("χ_l", c.chi_low), ("χ_h", c.chi_high)] {
                    w.validate()?;
                    if !w.is_flat_near_zero() {
                        return Err(hypothesis(format!("{name} must equal 1 near the origin")));
                    }
                }
            }
            SymbolVariant::Alternative => {
                c.weight.validate()?;
                let (p0, p1) = (m.low_exponent(), m.high_exponent());
                match c.weight {
                    Weight::PowerLaw { low, high, .. } if low >= p0 && high <= p1 => {}
                    Weight::PowerLaw { low, high, .. } => {
                        return Err(hypothesis(format!(
                            "the alternative symbol requires σ₀ ≥ p₀ and σ₁ ≤ p₁, got σ₀ = {low}, σ₁ = {high} \
                             with p₀ = {p0}, p₁ = {p1}"
                        )))
                    }
                    Weight::One => {
                        return Err(hypothesis("the alternative symbol needs a power-law weight Λ".into()));
                    }
                }
            }
            SymbolVariant::Kg => {
                if !m.is_half_klein_gordon() {
                    return Err(hypothesis(format!("the kg symbol is defined for half-kg only, got {}", m.id())));
                }
                if !(c.eps > 0.0 && c.eps < 1.0) {
                    return Err(hypothesis(format!("the kg symbol requires 0 < ε < 1, got {}", c.eps)));
                }
                if !c.chi.is_flat_near_zero() {
                    return Err(hypothesis("the kg frequency cutoff must equal 1 near the origin".into()));
                }
            }
        }
        Ok(())
    }

    /// Scale exponent of the `χ` window: `δ` or `δ + σ₁/2`.
    pub fn effective_delta(&self) -> f64 {
        match (self.variant, self.cutoff.weight) {
            (SymbolVariant::Alternative, w) => self.cutoff.delta + 0.5 * w.asymptotic().1,
            _ => self.cutoff.delta,
        }
    }

    /// Per-frequency part of the symbol at time `t`.
    pub(crate) fn freq_factor(&self, t: f64, xi: Point) -> FreqFactor {
        let c = &self.cutoff;
        let at = t.abs();
        let rho = norm2(xi);
        let zero = FreqFactor { vel: [0.0; 2], cone: 0.0, inv_scale: 0.0, window: 0.0 };
        if rho == 0.0 && (self.model.is_singular_at_origin() || self.variant == SymbolVariant::Alternative) {
            return zero;
        }
        let speed = if rho == 0.0 { self.model.velocity_at_zero() } else { self.model.velocity(rho) };
        let dir = if rho == 0.0 { [0.0, 0.0] } else { [xi[0] / rho, xi[1] / rho] };
        let vel = [t * speed * dir[0], t * speed * dir[1]];
        let cone = at * speed.abs();
        let base = at.powf(0.5 + c.delta);
        let (scale, window) = match self.variant {
            SymbolVariant::Plain | SymbolVariant::IndicatorOnly => (base, 1.0),
            SymbolVariant::Modified | SymbolVariant::KgIndicator => {
                let low = 1.0 - c.chi_low.value(rho * at.powf(c.eps0));
                let high = c.chi_high.value(rho / at.powf(c.eps1));
                (base, low * high)
            }
            SymbolVariant::Alternative => (base * c.weight.value(at.sqrt() * rho), 1.0),
            SymbolVariant::Kg => (base, c.chi.value(rho / at.powf(c.eps))),
        };
        FreqFactor { vel, cone, inv_scale: 1.0 / scale, window }
    }

    pub(crate) fn chi_factor(&self) -> Option<CutoffProfile> {
        self.variant.uses_chi().then_some(self.cutoff.chi)
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct FreqFactor {
    vel: Point,
    cone: f64,
    inv_scale: f64,
    window: f64,
}

#[inline]
fn symbol_value(chi: Option<CutoffProfile>, f: &FreqFactor, x: Point, x_norm: f64) -> f64 {
    if f.window == 0.0 || !(x_norm > f.cone) {
        return 0.0;
    }
    match chi {
        Some(chi) => f.window * chi.value(norm2([x[0] + f.vel[0], x[1] + f.vel[1]]) * f.inv_scale),
        None => f.window,
    }
}

fn check_time(t: f64) -> Result<()> {
    if t == 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!("symbols need a finite t ≠ 0, got {t}")));
    }
    Ok(())
}

/// `a(t, x, ξ)`. The value at `ξ = 0` is 0 for relations singular there.
pub fn eval_symbol(spec: &SymbolSpec, t: f64, x: Point, xi: Point) -> Result<f64> {
    check_time(t)?;
    let f = spec.freq_factor(t, xi);
    Ok(symbol_value(spec.chi_factor(), &f, x, norm2(x)))
}

enum Kernel {
    Factored { chi: Option<CutoffProfile>, factors: Vec<FreqFactor> },
    /// Row-major table `a[j · len + k]`.
    Table(Vec<f64>),
}

/// A symbol sampled on the nodes of one grid, ready for the dense sums.
pub struct Quantizer {
    grid: GridSpec,
    kernel: Kernel,
    nodes: Vec<Point>,
    node_norms: Vec<f64>,
    roots: Vec<C64>,
}

impl Quantizer {
    fn with_kernel(grid: GridSpec, kernel: Kernel) -> Self {
        let n = grid.n();
        let nodes: Vec<Point> = (0..grid.len()).map(|j| grid.node(j)).collect();
        let node_norms = nodes.iter().map(|p| norm2(*p)).collect();
        let roots = (0..n)
            .map(|m| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / n as f64))
            .collect();
        Self { grid, kernel, nodes, node_norms, roots }
    }

    pub fn new(spec: &SymbolSpec, t: f64, grid: GridSpec) -> Result<Self> {
        check_time(t)?;
        let factors = (0..grid.len()).map(|k| spec.freq_factor(t, grid.freq_point(k))).collect();
        Ok(Self::with_kernel(grid, Kernel::Factored { chi: spec.chi_factor(), factors }))
    }

    /// Arbitrary symbol `a(x, ξ)` tabulated on all node pairs.
    pub fn from_fn(grid: GridSpec, a: impl Fn(Point, Point) -> f64) -> Self {
        let len = grid.len();
        let mut table = Vec::with_capacity(len * len);
        for j in 0..len {
            let x = grid.node(j);
            table.extend((0..len).map(|k| a(x, grid.freq_point(k))));
        }
        Self::with_kernel(grid, Kernel::Table(table))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn symbol(&self, j: usize, k: usize) -> f64 {
        match &self.kernel {
            Kernel::Factored { chi, factors } => symbol_value(*chi, &factors[k], self.nodes[j], self.node_norms[j]),
            Kernel::Table(t) => t[j * self.grid.len() + k],
        }
    }

    /// Index `m` with `e^{ix_j·ξ_k} = (−1)^{Σk} e^{2πi m/n}`.
    #[inline]
    fn phase_index(&self, j: usize, k: usize) -> usize {
        let n = self.grid.n();
        let mask = n - 1;
        let [j0, j1] = self.grid.split(j);
        let [k0, k1] = self.grid.split(k);
        (j0 * k0 + j1 * k1) & mask
    }

    #[inline]
    fn parity(&self, k: usize) -> f64 {
        let [a, b] = self.grid.split(k);
        if (a + b) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Frequency nodes whose coefficient exceeds `1e-13` of the peak.
    fn populated(&self, coeffs: &[C64]) -> Vec<usize> {
        let peak = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Vec::new();
        }
        let floor = 1e-13 * peak;
        (0..coeffs.len()).filter(|&k| coeffs[k].norm() > floor).collect()
    }

    /// Grid values of `Op(a)u` from the coefficients `û`.
    pub fn apply_coeffs(&self, coeffs: &[C64]) -> Vec<C64> {
        let ks = self.populated(coeffs);
        let scale = (self.grid.dxi() / (2.0 * std::f64::consts::PI)).powi(self.grid.dim() as i32);
        let weighted: Vec<C64> = ks.iter().map(|&k| coeffs[k] * (scale * self.parity(k))).collect();
        exec::map_indexed(self.grid.len(), |j| {
            let mut acc = C64::new(0.0, 0.0);
            for (&k, c) in ks.iter().zip(&weighted) {
                let a = self.symbol(j, k);
                if a != 0.0 {
                    acc += self.roots[self.phase_index(j, k)] * c * a;
                }
            }
            acc
        })
    }

    /// Coefficients `ĉ` of `Op(a)* v`:
    /// `ĉ_k = Δx^d Σ_j e^{−ix_j·ξ_k} a(x_j, ξ_k) v_j`.
    pub fn adjoint_coeffs(&self, values: &[C64]) -> Vec<C64> {
        let cell = self.grid.cell();
        exec::map_indexed(self.grid.len(), |k| {
            let mut acc = C64::new(0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let a = self.symbol(j, k);
                if a != 0.0 {
                    acc += self.roots[self.phase_index(j, k)].conj() * v * a;
                }
            }
            acc * (cell * self.parity(k))
        })
    }

    /// Dense matrix `B[j, k] = (2π)^{−d}Δξ^d e^{ix_j·ξ_k} a(x_j, ξ_k)` mapping
    /// coefficients to values, row-major.
    pub fn dense_matrix(&self) -> Vec<C64> {
        let len = self.grid.len();
        let scale = (self.grid.dxi() / (2.0 * std::f64::consts::PI)).powi(self.grid.dim() as i32);
        let rows = exec::map_indexed(len, |j| {
            (0..len)
                .map(|k| self.roots[self.phase_index(j, k)] * (scale * self.parity(k) * self.symbol(j, k)))
                .collect::<Vec<_>>()
        });
        rows.concat()
    }

    /// Largest cone radius `|t||P′(ξ_k)|` over the given nodes.
    fn max_cone(&self, ks: &[usize]) -> f64 {
        match &self.kernel {
            Kernel::Factored { factors, .. } => {
                ks.iter().filter(|&&k| factors[k].window != 0.0).map(|&k| factors[k].cone).fold(0.0, f64::max)
            }
            Kernel::Table(_) => 0.0,
        }
    }

    pub fn apply(&self, state: &FieldState) -> Result<FieldState> {
        if state.grid() != &self.grid {
            return Err(Error::Precondition("state and quantizer live on different grids".into()));
        }
        FieldState::from_values(self.grid, self.apply_coeffs(state.coeffs()))
    }

    pub fn adjoint(&self, state: &FieldState) -> Result<FieldState> {
        if state.grid() != &self.grid {
            return Err(Error::Precondition("state and quantizer live on different grids".into()));
        }
        FieldState::from_coeffs(self.grid, self.adjoint_coeffs(state.values()))
    }

    /// The cone of every populated frequency must fit in the wrap window.
    fn check_box(&self, state: &FieldState) -> Result<()> {
        let ks = self.populated(state.coeffs());
        let cone = self.max_cone(&ks);
        let limit = tolerances::WRAP_WINDOW * self.grid.half_len();
        if cone > limit {
            return Err(Error::Box(format!(
                "cone radius {cone:.3} of the populated frequencies exceeds {limit:.3} (L = {})",
                self.grid.half_len()
            )));
        }
        Ok(())
    }
}

/// `Op(a(t))u` on the grid of `state`.
pub fn apply_quantization(spec: &SymbolSpec, t: f64, state: &FieldState) -> Result<FieldState> {
    let q = Quantizer::new(spec, t, *state.grid())?;
    q.check_box(state)?;
    q.apply(state)
}

/// `Op(a(t))* v`, the conjugate transpose of the same discrete matrix.
pub fn adjoint_apply(spec: &SymbolSpec, t: f64, state: &FieldState) -> Result<FieldState> {
    let q = Quantizer::new(spec, t, *state.grid())?;
    q.check_box(state)?;
    q.adjoint(state)
}

/// `E(u₀, t) = ‖Op(a(t)) e^{itP(D)} u₀‖²`.
pub fn truncated_energy(spec: &SymbolSpec, model: &DispersionModel, u0: &FieldState, t: f64) -> Result<f64> {
    if spec.model.id() != model.id() {
        return Err(Error::Precondition(format!(
            "symbol built for {} applied to a {} evolution",
            spec.model.id(),
            model.id()
        )));
    }
    let u = evolve(model, u0, t)?;
    Ok(apply_quantization(spec, t, &u)?.norm_sq_physical())
}
