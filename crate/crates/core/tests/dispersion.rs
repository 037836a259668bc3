use microloc::dispersion::{hypothesis_grid, log_grid, CustomRelation, DispersionModel};
use proptest::prelude::*;

/// Plain bisection on `[lo, hi]` for an increasing `f`, run to exhaustion.
fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn all_models() -> Vec<DispersionModel> {
    vec![
        DispersionModel::schrodinger(),
        DispersionModel::gravity_ww(),
        DispersionModel::capillary_ww(),
        DispersionModel::capillary_ww_depth(1.0).unwrap(),
        DispersionModel::half_klein_gordon(),
        DispersionModel::fractional(-0.5).unwrap(),
        DispersionModel::fractional(1.5).unwrap(),
    ]
}

#[test]
fn half_klein_gordon_inverse_velocity() {
    let m = DispersionModel::half_klein_gordon();
    let oracle = bisect(|r| r / (1.0 + r * r).sqrt(), 0.6, 0.0, 10.0);
    assert!((oracle - 0.75).abs() < 1e-14);
    assert!((m.invert_velocity(0.6) - 0.75).abs() < 1e-12);
}

#[test]
fn inverse_velocity_against_independent_bisection() {
    for m in all_models() {
        for &rho in &[0.01, 0.3, 1.0, 4.0, 50.0] {
            let v = m.velocity(rho);
            let back = m.invert_velocity(v);
            assert!((back - rho).abs() <= 1e-10 * rho, "{} at {rho}: {back}", m.id());
        }
    }
    let m = DispersionModel::capillary_ww_depth(1.0).unwrap();
    let oracle = bisect(|r| m.velocity(r), 2.0, 1e-9, 1e3);
    assert!((m.invert_velocity(2.0) - oracle).abs() <= 1e-10 * oracle);
}

#[test]
fn built_in_models_satisfy_hypothesis() {
    let grid = hypothesis_grid();
    for id in ["schrodinger", "gravity-ww", "capillary-ww", "half-kg", "fractional:0.5", "fractional:-0.5"] {
        let m = DispersionModel::from_id(id, 1.0).unwrap();
        let report = m.verify_hypothesis(&grid).unwrap();
        assert!(report.passed, "{id}: {:?}", report.failures.first());
    }
    let kg = DispersionModel::half_klein_gordon();
    assert_eq!((kg.low_exponent(), kg.low_limit(), kg.high_exponent(), kg.high_limit()), (1.0, 0.0, -2.0, 1.0));
    assert_eq!(DispersionModel::gravity_ww().convexity(), -1);
    assert_eq!(DispersionModel::capillary_ww().convexity(), 1);
}

#[test]
fn finite_depth_gravity_waves_fail_the_sign_check() {
    // P″ changes sign for ρ^{1/2} tanh(ρ), so the checker has to name a failing ρ
    let m = DispersionModel::gravity_ww_depth(1.0).unwrap();
    let report = m.verify_hypothesis(&hypothesis_grid()).unwrap();
    assert!(!report.passed);
    assert!(!report.failures.is_empty());
}

#[test]
fn hypothesis_grid_must_span_six_decades() {
    let m = DispersionModel::schrodinger();
    assert!(m.verify_hypothesis(&log_grid(1e-2, 1e2, 50)).is_err());
}

#[test]
fn frequency_window_exponents() {
    assert_eq!(DispersionModel::half_klein_gordon().epsilon_bounds().unwrap(), (0.5, 1.0));
    let relation = CustomRelation { value: |r| r, slope: |_| 1.0, curvature: |_| 1.0 };
    let a = DispersionModel::custom(relation, 3.0, -0.5, 0.0, 1.0, 1).unwrap();
    assert_eq!(a.epsilon_bounds().unwrap(), (0.25, f64::INFINITY));
    let b = DispersionModel::custom(relation, 1.0, -3.0, 0.0, 1.0, 1).unwrap();
    assert_eq!(b.epsilon_bounds().unwrap(), (0.5, 0.5));
    assert!(matches!(
        DispersionModel::schrodinger().epsilon_bounds(),
        Err(microloc::Error::Regime(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn velocity_is_monotone(a in -6.0f64..6.0, b in -6.0f64..6.0) {
        let (lo, hi) = (a.min(b).exp(), a.max(b).exp());
        prop_assume!(hi > lo * (1.0 + 1e-9));
        for m in all_models() {
            let s = m.convexity() as f64;
            prop_assert!(s * (m.velocity(hi) - m.velocity(lo)) > 0.0, "{}", m.id());
        }
    }

    #[test]
    fn derivatives_agree_with_finite_differences(l in -3.0f64..3.0) {
        let rho = l.exp();
        let h = 1e-4 * rho;
        for m in all_models() {
            let fd = (m.phase(rho + h) - m.phase(rho - h)) / (2.0 * h);
            let v = m.velocity(rho);
            prop_assert!((fd - v).abs() <= 1e-6 * v.abs().max(1.0), "{}: {fd} vs {v}", m.id());
            let fd2 = (m.velocity(rho + h) - m.velocity(rho - h)) / (2.0 * h);
            let c = m.curvature(rho);
            prop_assert!((fd2 - c).abs() <= 1e-6 * c.abs().max(1.0), "{}: {fd2} vs {c}", m.id());
        }
    }
}
