//! Spectral simulation of microlocal energy truncation for fractional-type
//! dispersive equations `(∂ₜ/i − P(D))u = 0` and for Klein-Gordon.
//!
//! Layout:
//! - [`dispersion`]: radial relations `P`, hypothesis checks, `(P′)⁻¹`.
//! - [`field`]: periodic grids, continuum-normalised transforms, data, norms.
//! - [`propagator`]: exact evolution `e^{itP(D)}` and the Klein-Gordon reduction.
//! - [`quantize`]: truncation symbols, their quantizations, norms, Wigner masses.
//! - [`limits`]: predicted limits and the Fresnel functional `G_χ`.
//! - [`statphase`]: sphere integrals against their stationary-phase term.
//! - [`config`]: run configuration with dotted-key overrides.
//! - [`experiments`]: convergence studies and report files.
//! - [`cli`]: the `microloc` command line.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod dispersion;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod field;
pub mod fit;
pub mod limits;
pub mod propagator;
pub mod quadrature;
pub mod quantize;
pub mod statphase;
pub mod tolerances;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
