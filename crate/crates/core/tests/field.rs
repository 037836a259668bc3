use microloc::field::{
    data_radius, synthesize_data, Direction, FieldState, GridPolicy, GridSpec, NormKind, SpectralProfile,
};
use microloc::C64;
use proptest::prelude::*;

fn random_state(grid: GridSpec, seed: &[f64]) -> FieldState {
    let values = (0..grid.len())
        .map(|j| {
            let a = seed[j % seed.len()];
            C64::new(a.sin() * (j as f64 * 0.37).cos(), (a * 1.7 + j as f64).cos())
        })
        .collect();
    FieldState::from_values(grid, values).unwrap()
}

#[test]
fn grid_geometry_is_consistent() {
    let g = GridSpec::new(1, 256, 40.0).unwrap();
    assert!((g.n() as f64 * g.dx() - 2.0 * g.half_len()).abs() < 1e-12);
    assert!((g.max_freq() - std::f64::consts::PI * 256.0 / 80.0).abs() < 1e-12);
    assert_eq!(g.coord(0), -40.0);
    assert_eq!(g.signed_index(255), -1);
    assert!(GridSpec::new(1, 100, 1.0).is_err());
    assert!(GridSpec::new(3, 16, 1.0).is_err());
}

#[test]
fn gaussian_transform_matches_closed_form() {
    // continuum transform of e^{-x²/2} is √(2π) e^{-ξ²/2}
    let g = GridSpec::new(1, 512, 30.0).unwrap();
    let u = FieldState::from_fn(g, |x| C64::new((-x[0] * x[0] / 2.0).exp(), 0.0));
    let two_pi = 2.0 * std::f64::consts::PI;
    for i in 0..g.n() {
        let xi = g.freq(i);
        let want = two_pi.sqrt() * (-xi * xi / 2.0).exp();
        assert!((u.coeffs()[i] - want).norm() < 1e-12, "ξ = {xi}");
    }
}

#[test]
fn two_dimensional_plancherel() {
    let g = GridSpec::new(2, 32, 6.0).unwrap();
    let u = random_state(g, &[0.3, 1.1, 2.9]);
    assert!((u.norm_sq() - u.norm_sq_physical()).abs() < 1e-12 * u.norm_sq());
}

#[test]
fn binary_round_trip() {
    let g = GridSpec::new(1, 64, 5.0).unwrap();
    let u = random_state(g, &[0.5, 0.25]);
    let back = FieldState::from_bytes(&u.to_bytes()).unwrap();
    assert_eq!(back.values(), u.values());
    assert_eq!(back.grid(), u.grid());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.bin");
    u.write_binary(&path).unwrap();
    assert_eq!(FieldState::read_binary(&path).unwrap().values(), u.values());
    assert!(FieldState::from_bytes(&[1, 2, 3]).is_err());
}

#[test]
fn synthesized_data_hits_target_norm() {
    let g = GridSpec::new(1, 1024, 200.0).unwrap();
    let (u, warnings) = synthesize_data(&SpectralProfile::annulus(1.0, 2.0, 3.0), &g).unwrap();
    assert!(warnings.is_empty());
    assert!((u.norm_sq().sqrt() - 3.0).abs() < 1e-12);
    assert!(u.origin_mass() == 0.0);
    assert!(u.norm(NormKind::Sup) > 0.0);
}

#[test]
fn under_resolved_profile_is_rejected() {
    let g = GridSpec::new(1, 64, 2.0).unwrap();
    assert!(synthesize_data(&SpectralProfile::annulus(1.0, 1.2, 1.0), &g).is_err());
}

#[test]
fn box_rule_caps_samples() {
    let p = SpectralProfile::annulus(1.0, 2.0, 1.0);
    let r0 = data_radius(&p, 1).unwrap();
    let policy = GridPolicy::for_dim(1);
    let g = policy.grid_for(1, 64.0, 4.0, 2.0, r0).unwrap();
    assert!(g.max_freq() >= 4.0);
    assert!(g.half_len() >= 1.5 * (r0 + 256.0) - 1e-9);
    assert!(policy.grid_for(1, 1e5, 4.0, 2.0, r0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn plancherel_holds(seed in prop::collection::vec(-3.0f64..3.0, 1..8), log_n in 3usize..9, half_len in 0.5f64..50.0) {
        let g = GridSpec::new(1, 1 << log_n, half_len).unwrap();
        let u = random_state(g, &seed);
        prop_assert!((u.norm_sq() - u.norm_sq_physical()).abs() <= 1e-12 * u.norm_sq().max(1e-300));
    }

    #[test]
    fn transforms_invert(seed in prop::collection::vec(-3.0f64..3.0, 1..8), log_n in 3usize..9) {
        let g = GridSpec::new(1, 1 << log_n, 7.0).unwrap();
        let u = random_state(g, &seed);
        let back = FieldState::from_coeffs(g, u.coeffs().to_vec()).unwrap();
        let worst = back.values().iter().zip(u.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-12);
        let again = u.transform(Direction::Inverse);
        prop_assert!(again.values().iter().zip(u.values()).all(|(a, b)| (a - b).norm() < 1e-12));
    }
}
