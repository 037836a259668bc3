use std::f64::consts::PI;

use microloc::dispersion::DispersionModel;
use microloc::field::{synthesize_data, GridSpec, SpectralProfile};
use microloc::limits::{
    c0, g_chi_direct, g_chi_radial, g_chi_schrodinger, predicted_limit, regime_of, Regime, SpectralWindow,
};
use microloc::quantize::{CutoffProfile, CutoffSpec, SymbolSpec, SymbolVariant};
use microloc::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn with_chi(chi: CutoffProfile) -> CutoffSpec {
    CutoffSpec { chi, ..CutoffSpec::default() }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

#[test]
fn gaussian_c0_closed_form() {
    for &w in &[0.5f64, 1.0, 2.0] {
        for &p in &[-0.5, 0.5, 1.0, 3.0] {
            for dim in [1, 2] {
                let want = w.powi(2 * dim as i32)
                    / (4.0 * C64::new(w * w, -p).norm() * C64::new(w * w, -1.0).norm().powi(dim as i32 - 1));
                let got = c0(&with_chi(CutoffProfile::Gaussian { width: w }), p, dim).unwrap();
                assert!(close(got.value, want, 1e-9), "w = {w}, p = {p}, d = {dim}: {} vs {want}", got.value);
            }
        }
    }
}

#[test]
fn ball_half_disc_closed_form() {
    // ∫_{half disc} e^{i|x|²/2} dx = π(e^{iR²/2} − 1)/i
    for &r in &[0.5f64, 1.0, 2.5] {
        let amp = PI * (C64::from_polar(1.0, r * r / 2.0) - 1.0) / C64::new(0.0, 1.0);
        let want = amp.norm_sqr() / (2.0 * PI).powi(2);
        let got = g_chi_schrodinger(&with_chi(CutoffProfile::Ball { radius: r }), [0.0, 1.0], 2).unwrap();
        assert!(close(got.value, want, 1e-9), "R = {r}");
    }
}

#[test]
fn gaussian_schrodinger_density_closed_forms() {
    for &w in &[0.3f64, 1.0, 4.0] {
        let spec = with_chi(CutoffProfile::Gaussian { width: w });
        let z = C64::new(1.0 / (w * w), -1.0).norm();
        let one = g_chi_schrodinger(&spec, [1.0, 0.0], 1).unwrap().value;
        let two = g_chi_schrodinger(&spec, [0.6, 0.8], 2).unwrap().value;
        assert!(close(one, 1.0 / (4.0 * z), 1e-9));
        assert!(close(two, 1.0 / (4.0 * z * z), 1e-9));
    }
    assert!(g_chi_schrodinger(&with_chi(CutoffProfile::One), [1.0, 0.0], 1).is_err());
    assert!(g_chi_schrodinger(&with_chi(CutoffProfile::Bump { radius: 1.0 }), [1.0, 1.0], 2).is_err());
}

#[test]
fn quadratic_relation_reduces_to_schrodinger_density() {
    let p1 = DispersionModel::fractional(1.0).unwrap();
    for chi in [CutoffProfile::Gaussian { width: 0.8 }, CutoffProfile::Bump { radius: 1.5 }] {
        let spec = with_chi(chi);
        for dim in [1, 2] {
            let want = g_chi_schrodinger(&spec, [1.0, 0.0], dim).unwrap().value;
            for &rho in &[0.3, 1.0, 7.0] {
                let got = g_chi_direct(&p1, &spec, rho, dim).unwrap().value;
                assert!(close(got, want, 1e-8), "{chi:?} d = {dim} ρ = {rho}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn two_routes_agree() {
    let spec = with_chi(CutoffProfile::Bump { radius: 1.0 });
    for model in [DispersionModel::schrodinger(), DispersionModel::gravity_ww(), DispersionModel::half_klein_gordon()] {
        for &rho in &[0.5, 1.0, 2.0] {
            let a = g_chi_direct(&model, &spec, rho, 1).unwrap().value;
            let b = g_chi_radial(&model, &spec, rho, 1).unwrap().value;
            assert!(close(a, b, 1e-6), "{} at {rho}: {a} vs {b}", model.id());
        }
    }
}

#[test]
fn regimes_follow_delta() {
    let spec = |delta| SymbolSpec::new(SymbolVariant::Plain, DispersionModel::schrodinger(), CutoffSpec { delta, ..CutoffSpec::default() });
    assert_eq!(regime_of(&spec(-0.25)).unwrap(), Regime::Subcritical);
    assert_eq!(regime_of(&spec(0.0)).unwrap(), Regime::Critical);
    assert_eq!(regime_of(&spec(0.25)).unwrap(), Regime::Supercritical);
    assert!(matches!(regime_of(&spec(0.5)), Err(microloc::Error::Regime(_))));

    let g = GridSpec::new(1, 1024, 200.0).unwrap();
    let (u0, _) = synthesize_data(&SpectralProfile::annulus(1.0, 2.0, 2.0), &g).unwrap();
    let p = predicted_limit(&spec(0.25), &u0).unwrap();
    assert!(close(p.value, 1.0, 1e-12));
    assert_eq!(predicted_limit(&spec(-0.1), &u0).unwrap().value, 0.0);
}

#[test]
fn speed_windows_invert_the_velocity() {
    let kg = DispersionModel::half_klein_gordon();
    let w = SpectralWindow::new(&kg, 0.3, 0.7).unwrap();
    assert!(close(w.rho0, 0.3 / (1.0f64 - 0.09).sqrt(), 1e-10));
    assert!(close(w.rho1, 0.7 / (1.0f64 - 0.49).sqrt(), 1e-10));
    assert!(SpectralWindow::new(&kg, 1.0, f64::INFINITY).unwrap().rho1.is_infinite());
    assert!(SpectralWindow::new(&kg, 0.5, 0.5).is_err());
}

/// `log G̃(ρ)` at fixed random radii, for the fractional relation of exponent `p`.
fn log_densities(p: f64, rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    let model = DispersionModel::fractional(p).unwrap();
    let spec = with_chi(CutoffProfile::Gaussian { width: 1.0 });
    (0..count)
        .map(|_| {
            let rho = 10f64.powf(rng.random_range(-1.0..1.0));
            g_chi_radial(&model, &spec, rho, 1).unwrap().value.ln()
        })
        .collect()
}

fn variance(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64
}

#[test]
fn density_is_positive_for_gaussian_cutoffs() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for p in [-0.5, 0.5] {
        let model = DispersionModel::fractional(p).unwrap();
        let spec = with_chi(CutoffProfile::Gaussian { width: 1.0 });
        for _ in 0..50 {
            let rho = 10f64.powf(rng.random_range(-2.0..2.0));
            let g = g_chi_radial(&model, &spec, rho, 1).unwrap();
            assert!(g.value > 1e-10, "p = {p}, ρ = {rho}: {}", g.value);
        }
    }
}

#[test]
fn density_is_constant_only_in_the_degenerate_case() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let flat = variance(&log_densities(1.0, &mut rng, 20));
    let varying = variance(&log_densities(1.5, &mut rng, 20));
    assert!(flat < 1e-16, "{flat:e}");
    assert!(varying > 1e-3, "{varying:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn routes_agree_for_gaussian_cutoffs(w in 0.3f64..3.0, rho in 0.1f64..10.0, p in prop::sample::select(vec![-0.5, 0.5, 1.5])) {
        let model = DispersionModel::fractional(p).unwrap();
        let spec = with_chi(CutoffProfile::Gaussian { width: w });
        let a = g_chi_direct(&model, &spec, rho, 1).unwrap().value;
        let b = g_chi_radial(&model, &spec, rho, 1).unwrap().value;
        prop_assert!(close(a, b, 1e-6), "{a} vs {b}");
        prop_assert!(b > 0.0);
    }
}
