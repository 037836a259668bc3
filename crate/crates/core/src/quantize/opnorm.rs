//! Top singular value of `Op(a)` by power iteration on `Op(a)*Op(a)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Quantizer, SymbolSpec};
use crate::error::{Error, Result};
use crate::exec;
use crate::field::{FieldState, GridSpec};
use crate::tolerances;
use crate::C64;

/// Grids up to this many nodes get the quantization matrix materialized.
const DENSE_LIMIT: usize = 2048;
/// Iteration stops early once the residual drops below this.
const EARLY_STOP: f64 = 1e-8;
/// Offset of the second restart's seed.
const RESTART_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    /// Larger of the two restart estimates.
    pub value: f64,
    /// Final `‖A*Av − λv‖/‖A*Av‖` of the reported run.
    pub residual: f64,
    pub iterations: usize,
    /// Relative disagreement of the two restarts.
    pub restart_gap: f64,
    pub flagged: bool,
}

enum Action<'a> {
    Dense { q: &'a Quantizer, matrix: Vec<C64> },
    Direct(&'a Quantizer),
}

impl Action<'_> {
    fn grid(&self) -> GridSpec {
        match self {
            Action::Dense { q, .. } | Action::Direct(q) => *q.grid(),
        }
    }

    /// `(‖Av‖², A*Av)`.
    fn gram(&self, v: &FieldState) -> Result<(f64, FieldState)> {
        let grid = self.grid();
        let len = grid.len();
        let coeffs = v.coeffs();
        let (av, back) = match self {
            Action::Direct(q) => {
                let av = q.apply_coeffs(coeffs);
                let back = q.adjoint_coeffs(&av);
                (av, back)
            }
            Action::Dense { matrix, .. } => {
                let av = exec::map_indexed(len, |j| {
                    let row = &matrix[j * len..(j + 1) * len];
                    row.iter().zip(coeffs).map(|(b, c)| b * c).sum::<C64>()
                });
                // B carries (Δξ/2π)^d, the adjoint carries Δx^d instead.
                let factor = grid.cell() / grid.freq_cell();
                let mut back = vec![C64::new(0.0, 0.0); len];
                let chunk = 64.min(len);
                exec::fill_chunks(&mut back, chunk, |ci, out| {
                    let k0 = ci * chunk;
                    for (j, a) in av.iter().enumerate() {
                        let row = &matrix[j * len + k0..j * len + k0 + out.len()];
                        for (o, b) in out.iter_mut().zip(row) {
                            *o += b.conj() * a;
                        }
                    }
                    for o in out.iter_mut() {
                        *o *= factor;
                    }
                });
                (av, back)
            }
        };
        let energy = grid.cell() * av.iter().map(|z| z.norm_sqr()).sum::<f64>();
        Ok((energy, FieldState::from_coeffs(grid, back)?))
    }
}

struct Run {
    sigma: f64,
    residual: f64,
    iterations: usize,
}

fn power_run(action: &Action, iters: usize, seed: u64) -> Result<Run> {
    let grid = action.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<C64> = (0..grid.len())
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut v = FieldState::from_values(grid, noise)?;
    v = v.scaled(C64::new(1.0 / v.norm_sq_physical().sqrt(), 0.0));
    let mut run = Run { sigma: 0.0, residual: f64::INFINITY, iterations: 0 };
    for it in 1..=iters {
        let (lambda, w) = action.gram(&v)?;
        let w_norm = w.norm_sq_physical().sqrt();
        run.iterations = it;
        run.sigma = lambda.max(0.0).sqrt();
        if w_norm == 0.0 {
            run.residual = 0.0;
            break;
        }
        let r = w.sub(&v.scaled(C64::new(lambda, 0.0)))?;
        run.residual = r.norm_sq_physical().sqrt() / w_norm;
        if run.residual < EARLY_STOP {
            break;
        }
        v = w.scaled(C64::new(1.0 / w_norm, 0.0));
    }
    Ok(run)
}

/// Norm estimate for an already sampled symbol.
pub fn op_norm_of(q: &Quantizer, iters: usize, seed: u64) -> Result<NormEstimate> {
    if iters < 50 {
        return Err(Error::Domain(format!("power iteration needs at least 50 iterations, got {iters}")));
    }
    let action = if q.grid().len() <= DENSE_LIMIT {
        Action::Dense { q, matrix: q.dense_matrix() }
    } else {
        Action::Direct(q)
    };
    let a = power_run(&action, iters, seed)?;
    let b = power_run(&action, iters, seed.wrapping_add(RESTART_SEED_OFFSET))?;
    let top = a.sigma.max(b.sigma);
    let restart_gap = if top > 0.0 { (a.sigma - b.sigma).abs() / top } else { 0.0 };
    let best = if a.sigma >= b.sigma { a } else { b };
    let flagged = best.residual > tolerances::POWER_RESIDUAL_MAX || restart_gap > tolerances::POWER_RESTART_AGREEMENT;
    Ok(NormEstimate { value: top, residual: best.residual, iterations: best.iterations, restart_gap, flagged })
}

/// `‖Op(a(t))‖` on `grid`, deterministic in `(seed, iters)`.
pub fn op_norm_estimate(spec: &SymbolSpec, t: f64, grid: GridSpec, iters: usize, seed: u64) -> Result<NormEstimate> {
    let q = Quantizer::new(spec, t, grid)?;
    op_norm_of(&q, iters, seed)
}
