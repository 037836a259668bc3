//! Wigner distribution on a one-dimensional grid.

use crate::error::{Error, Result};
use crate::field::{FieldState, GridSpec};
use crate::C64;

/// `W(u, v)(x_j, ξ_k)` stored as `data[j · n + i]` with `i` the frequency
/// storage index.
#[derive(Clone, Debug)]
pub struct WignerMap {
    pub grid: GridSpec,
    pub data: Vec<C64>,
}

impl WignerMap {
    pub fn at(&self, j: usize, i: usize) -> C64 {
        self.data[j * self.grid.n() + i]
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn min_real(&self) -> f64 {
        self.data.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }
}

/// Band-limited interpolation onto the grid with spacing `Δx/2`.
fn refine(u: &FieldState) -> Result<Vec<C64>> {
    let g = u.grid();
    let n = g.n();
    let fine = GridSpec::new(1, 2 * n, g.half_len())?;
    let mut c = vec![C64::new(0.0, 0.0); 2 * n];
    for (i, z) in u.coeffs().iter().enumerate() {
        let k = g.signed_index(i);
        if k == -(n as i64) / 2 {
            // split the Nyquist node symmetrically
            c[n + n / 2] += z * 0.5;
            c[n / 2] += z * 0.5;
        } else {
            c[k.rem_euclid(2 * n as i64) as usize] += z;
        }
    }
    Ok(FieldState::from_coeffs(fine, c)?.values().to_vec())
}

/// `W(u,v)(x, ξ) = (2π)^{−1/2} Δx Σ_m e^{i y_m ξ} u(x + y_m/2) v̄(x − y_m/2)`.
pub fn wigner_transform(u: &FieldState, v: &FieldState) -> Result<WignerMap> {
    let grid = *u.grid();
    if grid.dim() != 1 {
        return Err(Error::Unsupported("the Wigner transform is implemented for d = 1".into()));
    }
    if v.grid() != &grid {
        return Err(Error::Precondition("Wigner transform of states on different grids".into()));
    }
    let n = grid.n();
    let (u2, v2) = (refine(u)?, refine(v)?);
    let m2 = 2 * n;
    let at = |buf: &[C64], idx: i64| buf[idx.rem_euclid(m2 as i64) as usize];
    let prefactor = grid.dx() / (2.0 * std::f64::consts::PI).sqrt();
    let mut planner = rustfft::FftPlanner::new();
    let fft = planner.plan_fft_inverse(n);
    let rows = crate::exec::map_indexed(n, |j| {
        let centre = 2 * j as i64;
        let mut f = vec![C64::new(0.0, 0.0); n];
        let half = n as i64 / 2;
        for m in -half..half {
            let mut val = at(&u2, centre + m) * at(&v2, centre - m).conj();
            if m == -half {
                val = 0.5 * (val + at(&u2, centre + half) * at(&v2, centre - half).conj());
            }
            f[m.rem_euclid(n as i64) as usize] = val;
        }
        // Σ_m f_m e^{2πi m i/n} for every frequency storage index i.
        fft.process(&mut f);
        for z in f.iter_mut() {
            *z *= prefactor;
        }
        f
    });
    Ok(WignerMap { grid, data: rows.concat() })
}

/// `(2π)^{−1/2} Δx Δξ Σ_{(x_j, ξ_k) ∈ E} W(u,u)(x_j, ξ_k)`.
pub fn wigner_mass(u: &FieldState, region: impl Fn(f64, f64) -> bool) -> Result<f64> {
    let w = wigner_transform(u, u)?;
    let g = w.grid;
    let n = g.n();
    let mut s = 0.0;
    for j in 0..n {
        let x = g.coord(j);
        for i in 0..n {
            if region(x, g.freq(i)) {
                s += w.at(j, i).re;
            }
        }
    }
    Ok(s * g.dx() * g.dxi() / (2.0 * std::f64::consts::PI).sqrt())
}
