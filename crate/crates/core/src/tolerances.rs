//! Named numerical thresholds shared by the library, the CLI and the test
//! suites.

/// Lower edge of the band accepted for the `∼` relations of the hypothesis
/// checker.
pub const HYPOTHESIS_BAND_LO: f64 = 1.0 / 20.0;
/// Upper edge of the same band.
pub const HYPOTHESIS_BAND_HI: f64 = 20.0;

/// Relative stopping width for the velocity-inversion bisection.
pub const BISECTION_REL: f64 = 1e-12;
pub const BISECTION_MAX_ITERS: usize = 200;

/// Default box margin: `L ≥ margin · (R₀ + |t| v_max)`.
pub const BOX_MARGIN: f64 = 1.5;
/// Fraction of the box inside which the wrap-around monitor counts mass.
pub const WRAP_WINDOW: f64 = 0.9;
/// Largest admissible relative mass outside the monitor window.
pub const WRAP_MASS_MAX: f64 = 1e-6;
/// Relative data mass allowed outside the data radius `R₀`.
pub const DATA_TAIL_MASS: f64 = 1e-10;

/// Minimum number of frequency nodes across an annulus profile.
pub const MIN_NODES_ACROSS: f64 = 16.0;
/// Largest mass fraction tolerated at `ξ = 0` for relations singular there.
pub const ORIGIN_MASS_MAX: f64 = 1e-14;

pub const N_CAP_1D: usize = 4096;
pub const N_CAP_2D: usize = 128;

/// Power iteration: residual above which an estimate is flagged.
pub const POWER_RESIDUAL_MAX: f64 = 1e-6;
/// Power iteration: allowed disagreement between the two seeded restarts.
pub const POWER_RESTART_AGREEMENT: f64 = 1e-4;

/// Target relative accuracy of the Fresnel-type quadratures.
pub const QUADRATURE_REL: f64 = 1e-10;
/// Relative error estimate above which a quadrature result is flagged.
pub const QUADRATURE_FLAG: f64 = 1e-4;
/// Largest tolerated aliasing level of the cutoff transform samples.
pub const TRANSFORM_TAIL_MAX: f64 = 1e-8;

/// Sphere-integral panel doubling stops at this relative change.
pub const SPHERE_REL: f64 = 1e-9;
pub const SPHERE_MAX_PANELS: usize = 1 << 20;

/// Threshold below which `max(predicted, ·)` guards relative errors.
pub const REL_ERROR_FLOOR: f64 = 1e-30;
