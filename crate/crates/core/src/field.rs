//! Periodic grids on `[−L, L)^d`, transforms with the continuum convention
//! `û(ξ_k) = Δx^d Σ_x e^{−i x·ξ_k} u(x)`, initial data and norms.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances;

/// A point of `ℝ^d` for `d ≤ 2`; unused coordinates are zero.
pub type Point = [f64; 2];

pub fn norm2(p: Point) -> f64 {
    p[0].hypot(p[1])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    dim: usize,
    n: usize,
    half_len: f64,
}

impl GridSpec {
    pub fn new(dim: usize, n: usize, half_len: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Unsupported(format!("dimension {dim} (only 1 and 2)")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Domain(format!("samples per axis must be a power of two ≥ 2, got {n}")));
        }
        if !(half_len > 0.0) || !half_len.is_finite() {
            return Err(Error::Domain(format!("half box length must be positive, got {half_len}")));
        }
        Ok(Self { dim, n, half_len })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn half_len(&self) -> f64 {
        self.half_len
    }
    /// Total number of nodes `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn dx(&self) -> f64 {
        2.0 * self.half_len / self.n as f64
    }
    pub fn dxi(&self) -> f64 {
        std::f64::consts::PI / self.half_len
    }
    /// `max |ξ_k| = πn/(2L)`.
    pub fn max_freq(&self) -> f64 {
        std::f64::consts::PI * self.n as f64 / (2.0 * self.half_len)
    }
    /// Volume element `Δx^d`.
    pub fn cell(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }
    /// Frequency volume element `(Δξ/2π)^d`.
    pub fn freq_cell(&self) -> f64 {
        (self.dxi() / (2.0 * std::f64::consts::PI)).powi(self.dim as i32)
    }

    pub fn coord(&self, j: usize) -> f64 {
        -self.half_len + j as f64 * self.dx()
    }

    /// Signed frequency index `k ∈ [−n/2, n/2)` of storage index `i`.
    pub fn signed_index(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn freq(&self, i: usize) -> f64 {
        self.signed_index(i) as f64 * self.dxi()
    }

    /// Per-axis indices of a flat (row-major) index.
    pub fn split(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.n, flat % self.n]
        }
    }

    pub fn node(&self, flat: usize) -> Point {
        let [a, b] = self.split(flat);
        if self.dim == 1 {
            [self.coord(a), 0.0]
        } else {
            [self.coord(a), self.coord(b)]
        }
    }

    pub fn freq_point(&self, flat: usize) -> Point {
        let [a, b] = self.split(flat);
        if self.dim == 1 {
            [self.freq(a), 0.0]
        } else {
            [self.freq(a), self.freq(b)]
        }
    }

    /// Flat index of the reflected node `x → −x`.
    pub fn reflect(&self, flat: usize) -> usize {
        let r = |j: usize| (self.n - j) % self.n;
        let [a, b] = self.split(flat);
        if self.dim == 1 {
            r(a)
        } else {
            r(a) * self.n + r(b)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L2,
    H1,
    Sup,
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

/// Unnormalised in-place DFT over every axis; `inverse` selects `e^{+i}`.
fn dft_axes(data: &mut [C64], n: usize, dim: usize, inverse: bool) {
    let fft = {
        let mut p = planner().lock().expect("fft planner poisoned");
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    };
    fft.process(data);
    if dim == 2 {
        let mut t = vec![C64::new(0.0, 0.0); data.len()];
        transpose(data, &mut t, n);
        fft.process(&mut t);
        transpose(&t, data, n);
    }
}

fn transpose(src: &[C64], dst: &mut [C64], n: usize) {
    for r in 0..n {
        for c in 0..n {
            dst[c * n + r] = src[r * n + c];
        }
    }
}

/// `(−1)^{Σ k}` for the storage index `flat` (n even).
fn parity(grid: &GridSpec, flat: usize) -> f64 {
    let [a, b] = grid.split(flat);
    if (a + b) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn forward_coeffs(grid: &GridSpec, values: &[C64]) -> Vec<C64> {
    let mut c = values.to_vec();
    dft_axes(&mut c, grid.n, grid.dim, false);
    let cell = grid.cell();
    for (i, z) in c.iter_mut().enumerate() {
        *z *= cell * parity(grid, i);
    }
    c
}

fn inverse_values(grid: &GridSpec, coeffs: &[C64]) -> Vec<C64> {
    let fc = grid.freq_cell();
    let mut v: Vec<C64> = coeffs
        .iter()
        .enumerate()
        .map(|(i, z)| z * (fc * parity(grid, i)))
        .collect();
    dft_axes(&mut v, grid.n, grid.dim, true);
    v
}

/// Samples of a field on a grid together with its spectral coefficients.
/// Immutable: every operation returns a fresh state.
#[derive(Clone, Debug)]
pub struct FieldState {
    grid: GridSpec,
    values: Vec<C64>,
    coeffs: Vec<C64>,
}

impl FieldState {
    pub fn from_values(grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        let coeffs = forward_coeffs(&grid, &values);
        Ok(Self { grid, values, coeffs })
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<C64>) -> Result<Self> {
        check_len(&grid, coeffs.len())?;
        let values = inverse_values(&grid, &coeffs);
        Ok(Self { grid, values, coeffs })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(Point) -> C64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Self::from_values(grid, values).expect("length matches grid")
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let z = vec![C64::new(0.0, 0.0); grid.len()];
        Self { grid, values: z.clone(), coeffs: z }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn values(&self) -> &[C64] {
        &self.values
    }
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Recompute coefficients from values (`Forward`) or values from
    /// coefficients (`Inverse`).
    pub fn transform(&self, direction: Direction) -> FieldState {
        match direction {
            Direction::Forward => Self {
                grid: self.grid,
                values: self.values.clone(),
                coeffs: forward_coeffs(&self.grid, &self.values),
            },
            Direction::Inverse => Self {
                grid: self.grid,
                values: inverse_values(&self.grid, &self.coeffs),
                coeffs: self.coeffs.clone(),
            },
        }
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L2 => self.norm_sq().sqrt(),
            NormKind::H1 => self.h1_norm_sq().sqrt(),
            NormKind::Sup => self.values.iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }

    /// `‖u‖²_{L²}` through Plancherel on the coefficients.
    pub fn norm_sq(&self) -> f64 {
        self.grid.freq_cell() * self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn h1_norm_sq(&self) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let r = norm2(self.grid.freq_point(i));
                (1.0 + r * r) * z.norm_sqr()
            })
            .sum();
        self.grid.freq_cell() * s
    }

    /// `‖u‖²` computed from the samples, `Δx^d Σ |u|²`.
    pub fn norm_sq_physical(&self) -> f64 {
        self.grid.cell() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Grid inner product `Δx^d Σ u v̄`.
    pub fn inner(&self, other: &FieldState) -> C64 {
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        s * self.grid.cell()
    }

    /// Multiply the coefficients by `m(ξ_k)`. Non-finite multiplier values
    /// at populated nodes are an error; at empty nodes they are ignored.
    pub fn apply_multiplier(&self, m: impl Fn(Point) -> C64) -> Result<FieldState> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for (i, z) in self.coeffs.iter().enumerate() {
            if *z == C64::new(0.0, 0.0) {
                out.push(*z);
                continue;
            }
            let xi = self.grid.freq_point(i);
            let f = m(xi);
            if !(f.re.is_finite() && f.im.is_finite()) {
                return Err(Error::Numeric(format!("multiplier not finite at ξ = {xi:?}")));
            }
            out.push(z * f);
        }
        FieldState::from_coeffs(self.grid, out)
    }

    pub fn map_values(&self, f: impl Fn(Point, C64) -> C64) -> FieldState {
        let v = self
            .values
            .iter()
            .enumerate()
            .map(|(i, z)| f(self.grid.node(i), *z))
            .collect();
        FieldState::from_values(self.grid, v).expect("length matches grid")
    }

    pub fn scaled(&self, c: C64) -> FieldState {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|z| z * c).collect(),
            coeffs: self.coeffs.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &FieldState) -> Result<FieldState> {
        same_grid(self, other)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &FieldState) -> Result<FieldState> {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    pub fn real_part(&self) -> FieldState {
        let v = self.values.iter().map(|z| C64::new(z.re, 0.0)).collect();
        FieldState::from_values(self.grid, v).expect("length matches grid")
    }

    pub fn imag_part(&self) -> FieldState {
        let v = self.values.iter().map(|z| C64::new(z.im, 0.0)).collect();
        FieldState::from_values(self.grid, v).expect("length matches grid")
    }

    /// Largest `|Im u|` relative to `max |u|`.
    pub fn imag_ratio(&self) -> f64 {
        let m = self.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / m
    }

    /// Fraction of the mass outside `|x| ≤ 0.9 L`.
    pub fn wrap_mass(&self) -> f64 {
        let total: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let r = tolerances::WRAP_WINDOW * self.grid.half_len;
        let out: f64 = self
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| norm2(self.grid.node(*i)) > r)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        out / total
    }

    /// Fraction of `Σ|û|²` sitting at the `ξ = 0` node.
    pub fn origin_mass(&self) -> f64 {
        let total: f64 = self.coeffs.iter().map(|z| z.norm_sqr()).sum();
        if total == 0.0 {
            0.0
        } else {
            self.coeffs[0].norm_sqr() / total
        }
    }

    /// Flat binary layout: `d`, `n` as little-endian u64, `L` as
    /// little-endian f64, then interleaved re/im f64 samples in row-major
    /// node order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 16 * self.values.len());
        out.extend_from_slice(&(self.grid.dim as u64).to_le_bytes());
        out.extend_from_slice(&(self.grid.n as u64).to_le_bytes());
        out.extend_from_slice(&self.grid.half_len.to_le_bytes());
        for z in &self.values {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let word = |i: usize| -> Result<[u8; 8]> {
            bytes
                .get(8 * i..8 * i + 8)
                .map(|s| s.try_into().expect("8-byte slice"))
                .ok_or_else(|| Error::Config("truncated field file".into()))
        };
        let dim = u64::from_le_bytes(word(0)?) as usize;
        let n = u64::from_le_bytes(word(1)?) as usize;
        let half_len = f64::from_le_bytes(word(2)?);
        let grid = GridSpec::new(dim, n, half_len)?;
        if bytes.len() != 24 + 16 * grid.len() {
            return Err(Error::Config(format!(
                "field file has {} bytes, expected {}",
                bytes.len(),
                24 + 16 * grid.len()
            )));
        }
        let values = (0..grid.len())
            .map(|i| {
                Ok(C64::new(
                    f64::from_le_bytes(word(3 + 2 * i)?),
                    f64::from_le_bytes(word(4 + 2 * i)?),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        FieldState::from_values(grid, values)
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&buf)
    }
}

fn check_len(grid: &GridSpec, len: usize) -> Result<()> {
    if len == grid.len() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{len} samples for a grid of {} nodes", grid.len())))
    }
}

pub(crate) fn same_grid(a: &FieldState, b: &FieldState) -> Result<()> {
    if a.grid == b.grid {
        Ok(())
    } else {
        Err(Error::Precondition(format!("grid mismatch: {:?} vs {:?}", a.grid, b.grid)))
    }
}

/// Free-function form of [`FieldState::transform`].
pub fn transform(state: &FieldState, direction: Direction) -> FieldState {
    state.transform(direction)
}

/// Free-function form of [`FieldState::norm`].
pub fn norm(state: &FieldState, kind: NormKind) -> f64 {
    state.norm(kind)
}

/// Free-function form of [`FieldState::apply_multiplier`].
pub fn apply_multiplier(m: impl Fn(Point) -> C64, state: &FieldState) -> Result<FieldState> {
    state.apply_multiplier(m)
}

/// `ψ(s) = exp(1 − 1/(1 − s²))` on `|s| < 1`, zero elsewhere; `ψ(0) = 1`.
pub fn mollifier(s: f64) -> f64 {
    let s2 = s * s;
    if s2 < 1.0 {
        (1.0 - 1.0 / (1.0 - s2)).exp()
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileShape {
    /// `ψ((2|ξ| − inner − outer)/(outer − inner))`.
    AnnulusBump { inner: f64, outer: f64 },
    /// `exp(−|ξ − center|²/(2 width²))`.
    Gaussian { center: Point, width: f64 },
    /// Radial table `(|ξ|, value)` with linear interpolation, zero outside.
    Table { points: Vec<(f64, f64)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralProfile {
    pub shape: ProfileShape,
    /// Target `L²` norm of the synthesised state.
    pub norm: f64,
}

impl SpectralProfile {
    pub fn annulus(inner: f64, outer: f64, norm: f64) -> Self {
        Self { shape: ProfileShape::AnnulusBump { inner, outer }, norm }
    }

    pub fn gaussian(center: Point, width: f64, norm: f64) -> Self {
        Self { shape: ProfileShape::Gaussian { center, width }, norm }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.shape {
            ProfileShape::AnnulusBump { inner, outer } => {
                if !(*inner > 0.0 && outer > inner && outer.is_finite()) {
                    return Err(Error::Domain(format!(
                        "annulus needs 0 < inner < outer, got ({inner}, {outer})"
                    )));
                }
            }
            ProfileShape::Gaussian { width, .. } => {
                if !(*width > 0.0) {
                    return Err(Error::Domain(format!("gaussian width must be positive, got {width}")));
                }
            }
            ProfileShape::Table { points } => {
                if points.len() < 2
                    || points.windows(2).any(|w| !(w[1].0 > w[0].0))
                    || points[0].0 < 0.0
                {
                    return Err(Error::Domain("table needs ≥ 2 points with increasing |ξ| ≥ 0".into()));
                }
            }
        }
        if !(self.norm >= 0.0) || !self.norm.is_finite() {
            return Err(Error::Domain(format!("target norm must be ≥ 0, got {}", self.norm)));
        }
        Ok(())
    }

    /// Unnormalised profile value at `ξ`.
    pub fn shape_value(&self, xi: Point) -> f64 {
        match &self.shape {
            ProfileShape::AnnulusBump { inner, outer } => {
                mollifier((2.0 * norm2(xi) - inner - outer) / (outer - inner))
            }
            ProfileShape::Gaussian { center, width } => {
                let d = [xi[0] - center[0], xi[1] - center[1]];
                (-(d[0] * d[0] + d[1] * d[1]) / (2.0 * width * width)).exp()
            }
            ProfileShape::Table { points } => {
                let r = norm2(xi);
                let i = points.partition_point(|p| p.0 <= r);
                if i == 0 || i == points.len() {
                    if i == points.len() && r == points[i - 1].0 {
                        return points[i - 1].1;
                    }
                    return 0.0;
                }
                let (a, b) = (points[i - 1], points[i]);
                a.1 + (b.1 - a.1) * (r - a.0) / (b.0 - a.0)
            }
        }
    }

    /// Radius of the ball carrying the profile (effective for gaussians).
    pub fn support_radius(&self) -> f64 {
        match &self.shape {
            ProfileShape::AnnulusBump { outer, .. } => *outer,
            ProfileShape::Gaussian { center, width } => norm2(*center) + 8.0 * width,
            ProfileShape::Table { points } => points[points.len() - 1].0,
        }
    }

    /// Smallest `|ξ|` carrying mass.
    pub fn inner_radius(&self) -> f64 {
        match &self.shape {
            ProfileShape::AnnulusBump { inner, .. } => *inner,
            ProfileShape::Gaussian { center, width } => (norm2(*center) - 8.0 * width).max(0.0),
            ProfileShape::Table { points } => table_start(points),
        }
    }

    /// Frequency scale that must be resolved by at least 16 nodes.
    fn feature_width(&self) -> f64 {
        match &self.shape {
            ProfileShape::AnnulusBump { inner, outer } => outer - inner,
            ProfileShape::Gaussian { width, .. } => 2.0 * width,
            ProfileShape::Table { points } => points[points.len() - 1].0 - points[0].0,
        }
    }

    /// Whether the profile vanishes near `ξ = 0` as required by the
    /// analysis (annulus-type support).
    pub fn supported_away_from_origin(&self) -> bool {
        match &self.shape {
            ProfileShape::AnnulusBump { .. } => true,
            ProfileShape::Gaussian { .. } => false,
            ProfileShape::Table { points } => table_start(points) > 0.0,
        }
    }
}

/// Smallest `|ξ|` where a radial table can be nonzero.
fn table_start(points: &[(f64, f64)]) -> f64 {
    match points.iter().position(|p| p.1 != 0.0) {
        Some(0) | None => points[0].0,
        Some(i) => points[i - 1].0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataWarning {
    /// The coefficients are not compactly supported away from `ξ = 0`.
    NotSupportedAwayFromOrigin,
}

/// Sample the profile on the grid's frequency nodes and rescale to the
/// target norm. Returns the state and any warnings.
pub fn synthesize_data(
    profile: &SpectralProfile,
    grid: &GridSpec,
) -> Result<(FieldState, Vec<DataWarning>)> {
    profile.validate()?;
    let nodes_across = profile.feature_width() / grid.dxi();
    if nodes_across < tolerances::MIN_NODES_ACROSS {
        return Err(Error::Resolution(format!(
            "profile width resolved by {nodes_across:.1} frequency nodes, need {}",
            tolerances::MIN_NODES_ACROSS
        )));
    }
    if grid.max_freq() < 2.0 * profile.support_radius() {
        return Err(Error::Resolution(format!(
            "max |ξ| = {} is below twice the spectral support radius {}",
            grid.max_freq(),
            profile.support_radius()
        )));
    }
    let mut warnings = Vec::new();
    if !profile.supported_away_from_origin() {
        warnings.push(DataWarning::NotSupportedAwayFromOrigin);
    }
    let raw: Vec<C64> = (0..grid.len())
        .map(|i| C64::new(profile.shape_value(grid.freq_point(i)), 0.0))
        .collect();
    if profile.norm == 0.0 {
        return Ok((FieldState::zeros(*grid), warnings));
    }
    let raw_norm = (grid.freq_cell() * raw.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
    if raw_norm == 0.0 {
        return Err(Error::Resolution("profile misses every frequency node".into()));
    }
    let s = profile.norm / raw_norm;
    let coeffs = raw.into_iter().map(|z| z * s).collect();
    Ok((FieldState::from_coeffs(*grid, coeffs)?, warnings))
}

/// Radius `R₀` outside which the synthesised data carry less than
/// [`tolerances::DATA_TAIL_MASS`] of their mass, measured on a large 1D
/// reference grid. For `d = 2` the 1D value is widened by 25%.
pub fn data_radius(profile: &SpectralProfile, dim: usize) -> Result<f64> {
    profile.validate()?;
    let one_d = match &profile.shape {
        ProfileShape::Gaussian { center, width } => SpectralProfile::gaussian([norm2(*center), 0.0], *width, 1.0),
        other => SpectralProfile { shape: other.clone(), norm: 1.0 },
    };
    let width = one_d.feature_width();
    let half_len = (512.0 * std::f64::consts::PI / width).max(64.0);
    let need = 4.0 * half_len * one_d.support_radius() / std::f64::consts::PI;
    let n = (need.ceil() as usize).next_power_of_two().clamp(1024, 1 << 22);
    let grid = GridSpec::new(1, n, half_len)?;
    let (state, _) = synthesize_data(&one_d, &grid)?;
    let mut mass: Vec<(f64, f64)> = state
        .values()
        .iter()
        .enumerate()
        .map(|(i, z)| (grid.coord(i).abs(), z.norm_sqr()))
        .collect();
    mass.sort_by(|a, b| b.0.total_cmp(&a.0));
    let total: f64 = mass.iter().map(|m| m.1).sum();
    let mut tail = 0.0;
    let mut radius = 0.0;
    for (r, m) in mass {
        tail += m;
        if tail > tolerances::DATA_TAIL_MASS * total {
            radius = r;
            break;
        }
    }
    let radius = radius.max(1.0);
    Ok(if dim == 2 { 1.25 * radius } else { radius })
}

/// Box rule for a run at time `t`: `L = margin·(R₀ + |t| v_max)` and the
/// smallest power-of-two `n` with `max |ξ| ≥ 2·spectral radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPolicy {
    pub margin: f64,
    pub n_cap: usize,
    pub n_min: usize,
}

impl GridPolicy {
    pub fn for_dim(dim: usize) -> Self {
        Self {
            margin: tolerances::BOX_MARGIN,
            n_cap: if dim == 1 { tolerances::N_CAP_1D } else { tolerances::N_CAP_2D },
            n_min: 16,
        }
    }

    pub fn half_len(&self, t: f64, v_max: f64, data_radius: f64) -> f64 {
        self.margin * (data_radius + t.abs() * v_max)
    }

    pub fn grid_for(
        &self,
        dim: usize,
        t: f64,
        v_max: f64,
        spectral_radius: f64,
        data_radius: f64,
    ) -> Result<GridSpec> {
        let half_len = self.half_len(t, v_max, data_radius);
        let need = 4.0 * half_len * spectral_radius / std::f64::consts::PI;
        let n = (need.ceil().max(1.0) as usize).next_power_of_two().max(self.n_min);
        if n > self.n_cap {
            return Err(Error::Box(format!(
                "t = {t}: box rule needs n = {n} > cap {} (L = {half_len:.1})",
                self.n_cap
            )));
        }
        GridSpec::new(dim, n, half_len)
    }
}
