use proptest::prelude::*;
use volwave::dynamics::units::Dim;
use volwave::dynamics::{check_energy_hypothesis, check_eigenvalue_identity, compute_profile, compute_profile_with, write_profile_csv};
use volwave::fitting::{fit, FitFamily, FitOptions};
use volwave::VolumeAtPrice;

fn uniform(n: usize, v: u64, span: f64) -> VolumeAtPrice {
    VolumeAtPrice::from_levels(0.01, 990, vec![v; n], span).unwrap()
}

#[test]
fn energy_residual_vanishes_on_constructed_session() {
    // n equal levels of volume v over span t: v_tt = v/t², (v/V)·v_tt = v_tt/n.
    // With ω² = v_tt/n the mean implied A is (1 − 1/n)·v_tt, which is exactly
    // the restoring magnitude at every level.
    let (n, v, t) = (10usize, 1000u64, 100.0);
    let d = uniform(n, v, t);
    let vtt = v as f64 / (t * t);
    let omega = (vtt / n as f64).sqrt();
    let profile = compute_profile_with(&d, omega, 10.0).unwrap();
    assert!((profile.a - (1.0 - 1.0 / n as f64) * vtt).abs() < 1e-16);
    let r = check_energy_hypothesis(&profile, &d).unwrap();
    for (i, x) in r.iter().enumerate() {
        assert!(x.abs() <= 1e-17, "level {i}: {x:e}");
    }
    let id = check_eigenvalue_identity(&d, omega);
    assert_eq!(id.dispersion, 0.0);
    assert!(id.max_deviation <= 1e-18);
}

#[test]
fn energy_residual_detects_wrong_eigenvalue() {
    let d = uniform(10, 1000, 100.0);
    let profile = compute_profile_with(&d, 0.2, 10.0).unwrap();
    let r = check_energy_hypothesis(&profile, &d).unwrap();
    assert!(r.iter().any(|x| x.abs() > 1e-4));
}

#[test]
fn time_rescaling_is_exact_for_powers_of_two() {
    let volumes = vec![3, 17, 40, 22, 9, 1];
    let a = VolumeAtPrice::from_levels(0.01, 1000, volumes.clone(), 300.0).unwrap();
    let b = VolumeAtPrice::from_levels(0.01, 1000, volumes, 1200.0).unwrap();
    let pa = compute_profile_with(&a, 0.01, 10.02).unwrap();
    let pb = compute_profile_with(&b, 0.01, 10.02).unwrap();
    for i in 0..a.len() {
        assert_eq!(pb.volume_liquidity[i], pa.volume_liquidity[i] / 4.0);
        assert_eq!(pb.volume_acceleration[i], pa.volume_acceleration[i] / 16.0);
        assert_eq!(pb.transaction_energy[i], pa.transaction_energy[i] / 16.0);
        assert_eq!(pb.restoring_force[i], pa.restoring_force[i] / 16.0);
        assert_eq!(pb.amount_liquidity[i], pa.amount_liquidity[i] / 4.0);
    }
}

#[test]
fn profile_from_fit_carries_significance() {
    let mut volumes = Vec::new();
    for i in 0..31 {
        let x: f64 = (i as f64 - 15.0) * 0.12;
        volumes.push((1e6 * (-x * x).exp()) as u64 + 1);
    }
    let d = VolumeAtPrice::from_levels(0.01, 985, volumes, 14_400.0).unwrap();
    let r = fit(&d, FitFamily::Bessel, None, &FitOptions::default()).unwrap();
    let p = compute_profile(&d, &r).unwrap();
    assert_eq!(p.significant, r.significant);
    assert_eq!(p.prices.len(), 31);
}

#[test]
fn csv_units_row_matches_dimensions() {
    let d = uniform(4, 10, 60.0);
    let p = compute_profile_with(&d, 0.1, 9.915).unwrap();
    let mut buf = Vec::new();
    write_profile_csv(&mut buf, &p).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let units: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(units[0], Dim::PRICE.to_string());
    assert_eq!(units[4], "currency/s^2");
    assert_eq!(units[7], "share/s^2");
}

proptest! {
    #[test]
    fn forces_sum_to_share_weighted_acceleration(
        volumes in proptest::collection::vec(0u64..1_000_000, 1..40),
        span in 1.0f64..30_000.0,
    ) {
        prop_assume!(volumes.iter().sum::<u64>() > 0);
        let d = VolumeAtPrice::from_levels(0.01, 700, volumes, span).unwrap();
        let p = compute_profile_with(&d, 0.5, 7.1).unwrap();
        for i in 0..d.len() {
            let lhs = p.transaction_force[i] + p.restoring_force[i];
            let rhs = p.omega_sq_check[i];
            prop_assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * p.transaction_force[i].abs());
        }
    }

    #[test]
    fn volume_scale_leaves_shares_unchanged(
        volumes in proptest::collection::vec(1u64..10_000, 2..30),
        factor in 2u64..1000,
    ) {
        let d = VolumeAtPrice::from_levels(0.01, 700, volumes, 100.0).unwrap();
        let s = d.scale_volumes(factor).unwrap();
        let a = check_eigenvalue_identity(&d, 1.0);
        let b = check_eigenvalue_identity(&s, 1.0);
        for (x, y) in a.levels.iter().zip(&b.levels) {
            prop_assert!((y - x * factor as f64).abs() <= 1e-12 * y.abs());
        }
    }
}
