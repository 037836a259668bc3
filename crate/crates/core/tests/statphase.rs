use std::f64::consts::PI;

use microloc::dispersion::DispersionModel;
use microloc::field::SpectralProfile;
use microloc::quantize::{CutoffProfile, CutoffSpec};
use microloc::statphase::{principal_term, sphere_integral, SphereIntegralCase};
use microloc::C64;
use proptest::prelude::*;

fn case(dim: usize, r: f64, t: f64) -> SphereIntegralCase {
    SphereIntegralCase {
        model: DispersionModel::schrodinger(),
        cutoff: CutoffSpec { chi: CutoffProfile::Bump { radius: 1.0 }, delta: 0.1, ..CutoffSpec::default() },
        dim,
        r,
        rho: 1.5,
        t,
        omega: 0.3,
        eps: 1,
        eps_prime: 1,
        amplitude: SpectralProfile::annulus(1.0, 2.0, 1.0),
    }
}

#[test]
fn integral_vanishes_away_from_the_cone() {
    // χ is supported in a ball of radius t^{0.6} around r + tP′θ, far from 0
    for dim in [1, 2] {
        let c = case(dim, 500.0, 40.0);
        assert_eq!(sphere_integral(&c).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(principal_term(&c).unwrap().norm(), 0.0);
    }
}

#[test]
fn flipping_the_phase_sign_conjugates() {
    for dim in [1, 2] {
        let mut c = case(dim, 0.0, 50.0);
        c.r = c.t * 1.5 + 0.7;
        c.eps = -1;
        let a = sphere_integral(&c).unwrap();
        c.eps_prime = -1;
        let b = sphere_integral(&c).unwrap();
        assert!((a.conj() - b).norm() <= 1e-12 * a.norm().max(1e-300), "d = {dim}");
        assert!(a.norm() > 0.0);
    }
}

#[test]
fn one_dimensional_integral_is_a_two_point_sum() {
    let mut c = case(1, 0.0, 30.0);
    c.eps = -1;
    c.r = 30.0 * 1.5 - 0.4;
    // θ = +1 puts the χ argument at |r − tP′| and θ = −1 at r + tP′
    let scale = c.t.powf(0.6);
    let f = c.amplitude.shape_value([1.5, 0.0]);
    let plus = c.cutoff.chi.value(0.4 / scale) * f * C64::from_polar(1.0, c.r * 1.5);
    let minus = c.cutoff.chi.value((c.r + 45.0) / scale) * f * C64::from_polar(1.0, -c.r * 1.5);
    let got = sphere_integral(&c).unwrap();
    assert!((got - (plus + minus)).norm() < 1e-12);
}

#[test]
fn principal_term_decays_like_the_sphere() {
    // on the cone χ = 1, so doubling rρ divides |principal| by √2 in d = 2
    let at = |t: f64| {
        let mut c = case(2, 1.5 * t, t);
        c.eps = -1;
        principal_term(&c).unwrap().norm()
    };
    let ratio = at(200.0) / at(100.0);
    assert!((ratio - 0.5f64.sqrt()).abs() < 1e-12);
    let mut c = case(2, 150.0, 100.0);
    c.eps = -1;
    let want = (2.0 * PI / (150.0 * 1.5)).sqrt() * c.amplitude.shape_value([1.5, 0.0]);
    assert!((principal_term(&c).unwrap().norm() - want).abs() < 1e-12);
}

#[test]
fn malformed_cases_are_rejected() {
    let mut c = case(3, 1.0, 1.0);
    assert!(sphere_integral(&c).is_err());
    c.dim = 2;
    c.eps = 0;
    assert!(sphere_integral(&c).is_err());
    c.eps = 1;
    c.t = -1.0;
    assert!(principal_term(&c).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn integral_is_bounded_by_the_sphere_measure(t in 5.0f64..200.0, off in -3.0f64..3.0, angle in 0.0f64..2.0 * PI) {
        let mut c = case(2, 0.0, t);
        c.r = 1.5 * t + off;
        c.omega = angle;
        c.eps = -1;
        let sup = c.amplitude.shape_value([1.5, 0.0]);
        prop_assert!(sphere_integral(&c).unwrap().norm() <= 2.0 * PI * sup * (1.0 + 1e-9));
    }
}
