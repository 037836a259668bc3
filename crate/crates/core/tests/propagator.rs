use microloc::dispersion::DispersionModel;
use microloc::field::{synthesize_data, FieldState, GridPolicy, GridSpec, SpectralProfile};
use microloc::propagator::{dispersion_decay, evolve, kg_evolve, kg_initial, kg_split};
use microloc::C64;
use proptest::prelude::*;

fn gaussian(grid: GridSpec) -> FieldState {
    FieldState::from_fn(grid, |x| C64::new((-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp(), 0.0))
}

#[test]
fn schrodinger_gaussian_matches_closed_form() {
    // e^{itD²/2} e^{-x²/2} = (1 − it)^{-1/2} exp(−x²/(2(1 − it)))
    let g = GridSpec::new(1, 1024, 60.0).unwrap();
    let t = 3.0;
    let u = evolve(&DispersionModel::schrodinger(), &gaussian(g), t).unwrap();
    let s = C64::new(1.0, -t);
    let mut worst = 0.0_f64;
    for j in 0..g.n() {
        let x = g.coord(j);
        let want = s.sqrt().inv() * (-(x * x) / (2.0 * s)).exp();
        worst = worst.max((u.values()[j] - want).norm());
    }
    assert!(worst < 1e-12, "max deviation {worst:e}");
}

#[test]
fn group_law_and_unitarity() {
    let g = GridSpec::new(1, 512, 40.0).unwrap();
    let (u0, _) = synthesize_data(&SpectralProfile::annulus(0.5, 3.0, 1.0), &g).unwrap();
    for model in [DispersionModel::schrodinger(), DispersionModel::half_klein_gordon(), DispersionModel::capillary_ww()] {
        let a = evolve(&model, &evolve(&model, &u0, 1.3).unwrap(), -0.4).unwrap();
        let b = evolve(&model, &u0, 0.9).unwrap();
        let diff = a.sub(&b).unwrap().norm_sq().sqrt();
        assert!(diff < 1e-12, "{}: {diff:e}", model.id());
        assert!((b.norm_sq().sqrt() - u0.norm_sq().sqrt()).abs() < 1e-12);
    }
}

#[test]
fn singular_models_refuse_mass_at_origin() {
    let g = GridSpec::new(1, 256, 20.0).unwrap();
    assert!(evolve(&DispersionModel::gravity_ww(), &gaussian(g), 1.0).is_err());
}

#[test]
fn klein_gordon_single_mode() {
    // w₀ = cos(kx), w₁ = 0 gives w = cos(kx)cos(⟨k⟩t), ∂ₜw = −⟨k⟩cos(kx)sin(⟨k⟩t)
    let g = GridSpec::new(1, 128, 10.0).unwrap();
    let k = g.freq(5);
    let jk = (1.0 + k * k).sqrt();
    let w0 = FieldState::from_fn(g, |x| C64::new((k * x[0]).cos(), 0.0));
    let w1 = FieldState::zeros(g);
    let t = 7.25;
    let s = kg_evolve(&w0, &w1, t).unwrap();
    for j in 0..g.n() {
        let x = g.coord(j);
        assert!((s.w.values()[j] - (k * x).cos() * (jk * t).cos()).norm() < 1e-12);
        assert!((s.wt.values()[j] + jk * (k * x).cos() * (jk * t).sin()).norm() < 1e-12);
    }
}

#[test]
fn klein_gordon_energy_is_conserved_and_fields_stay_real() {
    let g = GridSpec::new(1, 512, 50.0).unwrap();
    let w0 = gaussian(g);
    let w1 = FieldState::from_fn(g, |x| C64::new(x[0] * (-x[0] * x[0] / 4.0).exp(), 0.0));
    let start = kg_split(kg_initial(&w0, &w1).unwrap()).unwrap();
    let later = kg_evolve(&w0, &w1, 12.0).unwrap();
    assert!((later.energy() - start.energy()).abs() < 1e-10 * start.energy());
    assert!(later.w.imag_ratio() < 1e-10);
    assert!(later.wt.imag_ratio() < 1e-10);
    assert!(kg_initial(&FieldState::from_fn(g, |_| C64::new(0.0, 1.0)), &w1).is_err());
}

#[test]
fn decay_study_drops_early_times() {
    let report = dispersion_decay(
        &DispersionModel::schrodinger(),
        &SpectralProfile::annulus(1.0, 2.0, 1.0),
        1,
        &[0.5, 1.0, 64.0, 128.0, 256.0],
        &GridPolicy::for_dim(1),
    )
    .unwrap();
    assert_eq!(report.rows.len(), 3);
    let slope = report.slope.unwrap();
    assert!((slope + 0.5).abs() < 0.15, "{slope}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evolution_commutes_with_multipliers(t in -20.0f64..20.0, c in 0.1f64..3.0) {
        let g = GridSpec::new(1, 256, 20.0).unwrap();
        let u0 = gaussian(g);
        let model = DispersionModel::half_klein_gordon();
        let m = |xi: [f64; 2]| C64::new(1.0 / (1.0 + c * xi[0] * xi[0]), xi[0]);
        let a = evolve(&model, &u0.apply_multiplier(m).unwrap(), t).unwrap();
        let b = evolve(&model, &u0, t).unwrap().apply_multiplier(m).unwrap();
        prop_assert!(a.sub(&b).unwrap().norm_sq().sqrt() < 1e-12);
    }

    #[test]
    fn evolution_is_unitary(t in -100.0f64..100.0, p in 0.2f64..3.0) {
        let g = GridSpec::new(1, 1024, 80.0).unwrap();
        let (u0, _) = synthesize_data(&SpectralProfile::annulus(1.0, 2.5, 1.0), &g).unwrap();
        let model = DispersionModel::fractional(p).unwrap();
        let u = evolve(&model, &u0, t).unwrap();
        prop_assert!((u.norm_sq() - 1.0).abs() < 1e-12);
    }
}
