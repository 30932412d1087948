mod common;

use common::{j0_fixed_point, laguerre_exact, laguerre_f64, rational, relative_error};
use volwave::specfun::{bessel_j0, bessel_j0_extended, kummer, J0_FIRST_ZERO};

#[test]
fn j0_matches_fixed_point_series() {
    let mut worst = 0.0_f64;
    for j in 0..=500 {
        let exact = j0_fixed_point(j, 10);
        let got = bessel_j0(j as f64 / 10.0).unwrap();
        worst = worst.max((got - exact).abs());
    }
    assert!(worst <= 1e-10, "worst abs error {worst:e}");
}

#[test]
fn j0_reference_points() {
    assert!((j0_fixed_point(5, 1) - (-0.177_596_771_314_338_3)).abs() < 1e-15);
    assert!((bessel_j0(5.0).unwrap() - j0_fixed_point(5, 1)).abs() < 1e-14);
}

#[test]
fn j0_first_zero_by_bisection_on_oracle() {
    // bisect on the fixed-point series over rationals k / 2^40
    let den: i64 = 1 << 40;
    let (mut lo, mut hi) = ((2.4 * den as f64) as i64, (2.41 * den as f64) as i64);
    assert!(j0_fixed_point(lo, den) > 0.0 && j0_fixed_point(hi, den) < 0.0);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if j0_fixed_point(mid, den) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let zero = lo as f64 / den as f64;
    assert!((zero - J0_FIRST_ZERO).abs() < 1e-11);
    assert!(bessel_j0(J0_FIRST_ZERO).unwrap().abs() < 1e-10);
}

#[test]
fn j0_satisfies_bessel_equation() {
    // Differences are formed from the extended-precision values; plain f64
    // values carry ~1e-16 noise that a 1e-5 stencil would magnify by 1e10.
    let h = 1e-5;
    let mut worst = 0.0_f64;
    for i in 1..=5000 {
        let x = i as f64 * 0.01;
        let (xp, xm) = (x + h, x - h);
        let (hp, hm) = (xp - x, x - xm);
        let f = |t: f64| bessel_j0_extended(t).unwrap();
        let (fp, f0, fm) = (f(xp), f(x), f(xm));
        // (a.hi - b.hi) is exact for nearby values; add the low parts after
        let dp = (fp.0 - f0.0) + (fp.1 - f0.1);
        let dm = (f0.0 - fm.0) + (f0.1 - fm.1);
        let d1 = (dp * hm / hp + dm * hp / hm) / (hp + hm);
        let d2 = 2.0 * (dp / hp - dm / hm) / (hp + hm);
        let residual = x * d2 + d1 + x * (f0.0 + f0.1);
        worst = worst.max(residual.abs());
    }
    assert!(worst <= 1e-8, "worst residual {worst:e}");
}

#[test]
fn kummer_matches_exact_laguerre_recurrence() {
    let mut worst = 0.0_f64;
    for m in 0..=20u32 {
        for j in 0..=240i64 {
            let x = rational(j, 8);
            let exact = laguerre_exact(m, &x);
            let got = kummer(m, j as f64 / 8.0).unwrap();
            worst = worst.max(relative_error(got, &exact));
        }
    }
    assert!(worst <= 1e-9, "worst relative error {worst:e}");
}

#[test]
fn kummer_matches_float_laguerre_recurrence_away_from_roots() {
    for m in 0..=20u32 {
        for j in 0..=300 {
            let x = j as f64 * 0.1;
            let a = kummer(m, x).unwrap();
            let b = laguerre_f64(m, x);
            let scale = b.abs().max(1.0);
            assert!((a - b).abs() <= 1e-9 * scale, "m={m} x={x}: {a} vs {b}");
        }
    }
}
