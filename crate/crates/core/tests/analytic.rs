use proptest::prelude::*;
use wavecross_core::analytic::*;
use wavecross_core::model::{PhysicalParams, ScaledUnits, ATOMIC_MASS_UNIT, HBAR};
use wavecross_core::quad::PanelRule;

#[test]
fn reference_drift_ratio() {
    let params = PhysicalParams::new(ATOMIC_MASS_UNIT, 1e-14, 2e-4, 1e-6, 2.0).unwrap();
    let report = drift_report(&params).unwrap();
    // 6.6743e-11·1e-14/(2e-4)² · 2²/2 / 2e-4, by hand.
    assert!(
        (report.ratio / 1.668_575e-13 - 1.0).abs() < 1e-12,
        "{}",
        report.ratio
    );
    let far = DriftReport::compute(1e-14, 2e-3, 2.0).unwrap();
    assert!((report.ratio / far.ratio - 1e3).abs() < 1e-9);
}

#[test]
fn spreading_examples() {
    assert_eq!(sigma_t(1.0, 1.0, 0.0, 1.0).unwrap(), 1.0);
    assert!((sigma_t(1.0, 1.0, 2.0, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    let big = 1e9;
    assert!((sigma_t(1.0, 1.0, big, 1.0).unwrap() / big - 0.5).abs() < 1e-12);
    assert_eq!(spreading_speed(1.0, 1.0, 1.0).unwrap(), 0.5);
    let v = spreading_speed(1.66e-27, 1e-6, HBAR).unwrap();
    assert!((v / 3.1764211355e-2 - 1.0).abs() < 1e-9, "{v}");
    assert!(sigma_t(0.0, 1.0, 1.0, 1.0).is_err());
    assert!(sigma_t(1.0, -1.0, 1.0, 1.0).is_err());
}

#[test]
fn gaussian_density_normalized() {
    let params = PhysicalParams::new(ATOMIC_MASS_UNIT, 0.0, 2e-4, 1e-6, 1e-4).unwrap();
    let s = sigma_t(1e-6, ATOMIC_MASS_UNIT, 1e-4, HBAR).unwrap();
    let total = PanelRule::new(20).integrate(0.0, 12.0 * s, 64, |r| {
        4.0 * std::f64::consts::PI * r * r * gaussian_density(r, 1e-4, &params).unwrap()
    });
    assert!((total - 1.0).abs() < 1e-8, "{total}");
    let peak = gaussian_density(0.0, 0.0, &params).unwrap();
    let expected = (2.0 * std::f64::consts::PI * 1e-12f64).powf(-1.5);
    assert!((peak / expected - 1.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn sigma_monotone_and_bounded(r in 1e-3f64..1e3, m in 1e-3f64..1e3, t1 in 0.0f64..1e4, dt in 0.0f64..1e4) {
        let a = sigma_t(r, m, t1, 1.0).unwrap();
        let b = sigma_t(r, m, t1 + dt, 1.0).unwrap();
        prop_assert!(b >= a);
        prop_assert!(a >= r);
    }

    #[test]
    fn sigma_consistent_with_speed(r in 1e-2f64..1e2, m in 1e-2f64..1e2, t in 0.0f64..1e3) {
        let s = sigma_t(r, m, t, 1.0).unwrap();
        let v = spreading_speed(m, r, 1.0).unwrap();
        let lhs = s * s - r * r;
        let rhs = (v * t).powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * s * s);
    }

    #[test]
    fn drift_scales_quadratically(g in 0.0f64..1e3, t in 0.0f64..1e3, a in 0.0f64..1e2) {
        let base = classical_drift(g, t).unwrap();
        let scaled = classical_drift(g, a * t).unwrap();
        prop_assert!((scaled - a * a * base).abs() <= 1e-12 * scaled.abs().max(1e-300));
    }

    #[test]
    fn drift_ratio_survives_unit_round_trip(mass_exp in -14.0f64..-8.0, d_exp in -5.0f64..-2.0, t in 0.1f64..10.0) {
        let (source, d) = (10f64.powf(mass_exp), 10f64.powf(d_exp));
        let params = PhysicalParams::new(ATOMIC_MASS_UNIT, source, d, d / 200.0, t).unwrap();
        let report = drift_report(&params).unwrap();
        let units: ScaledUnits = params.scaled().unwrap();
        let g_s = units.acceleration_to_scaled(report.g);
        let t_s = units.time_to_scaled(t);
        let d_s = units.length_to_scaled(d);
        let ratio_s = 0.5 * g_s * t_s * t_s / d_s;
        prop_assert!((ratio_s / report.ratio - 1.0).abs() < 1e-12);
        let back = units.length_to_si(units.length_to_scaled(report.delta_x));
        prop_assert!((back / report.delta_x - 1.0).abs() < 1e-12);
    }
}
