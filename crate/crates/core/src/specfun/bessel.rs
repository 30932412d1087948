use std::f64::consts::PI;
use std::sync::OnceLock;

use super::ddouble::{DoubleDouble, FRAC_2_PI_DD, FRAC_PI_2_DD, FRAC_PI_4_DD};
use super::SpecFunError;

/// Below this magnitude J0 is summed from its power series; above it the
/// Hankel asymptotic expansion is used.
pub const SERIES_LIMIT: f64 = 25.0;

/// Bessel function of the first kind, order zero.
///
/// Both branches run in double-double arithmetic and are rounded once at the
/// end. For `|x| <= 25` the alternating power series is summed directly (its
/// largest term is about 1e9 there, well inside double-double range). Beyond
/// that the Hankel expansion is truncated at its smallest term, whose size is
/// below `e^{-2|x|}`.
pub fn bessel_j0(x: f64) -> Result<f64, SpecFunError> {
    if !x.is_finite() {
        return Err(SpecFunError::NonFinite(x));
    }
    Ok(j0_unchecked(x))
}

/// J0 as an unevaluated sum `(hi, lo)` carrying roughly 30 significant
/// digits, for callers that difference nearby values.
pub fn bessel_j0_extended(x: f64) -> Result<(f64, f64), SpecFunError> {
    if !x.is_finite() {
        return Err(SpecFunError::NonFinite(x));
    }
    let v = j0_dd(DoubleDouble::from_f64(x));
    Ok((v.hi, v.lo))
}

fn j0_unchecked(x: f64) -> f64 {
    j0_dd(DoubleDouble::from_f64(x)).to_f64()
}

pub(crate) fn j0_dd(x: DoubleDouble) -> DoubleDouble {
    let ax = x.abs();
    if ax.hi <= SERIES_LIMIT {
        j0_series(ax)
    } else {
        j0_asymptotic(ax)
    }
}

/// `sum_k (−1)^k (x²/4)^k / (k!)²`.
pub(crate) fn j0_series(x: DoubleDouble) -> DoubleDouble {
    let half = x.mul_f64(0.5);
    let q = half * half;
    let mut term = DoubleDouble::ONE;
    let mut sum = DoubleDouble::ONE;
    let mut k = 1.0_f64;
    loop {
        term = -(term * q).div_f64(k * k);
        sum = sum + term;
        if term.hi.abs() < 1e-34 {
            break;
        }
        k += 1.0;
    }
    sum
}

/// `sqrt(2/(πx))·(P cos χ − Q sin χ)` with `χ = x − π/4`.
pub(crate) fn j0_asymptotic(x: DoubleDouble) -> DoubleDouble {
    // P ~ sum (-1)^k a_{2k} / x^{2k},  Q ~ sum (-1)^k a_{2k+1} / x^{2k+1}
    // with a_j = prod_{i<=j} (-(2i-1)^2) / (j! 8^j).
    let inv = x.recip();
    let mut a = DoubleDouble::ONE; // a_j / x^j
    let mut p = DoubleDouble::ONE;
    let mut q = DoubleDouble::ZERO;
    let mut prev = f64::INFINITY;
    for j in 1..200 {
        let odd = (2 * j - 1) as f64;
        let next = -(a * inv).mul_f64(odd * odd).div_f64(8.0 * j as f64);
        if next.hi.abs() >= prev {
            break;
        }
        a = next;
        prev = a.hi.abs();
        let signed = if (j / 2) % 2 == 0 { a } else { -a };
        if j % 2 == 0 {
            p = p + signed;
        } else {
            q = q + signed;
        }
        if prev < 1e-34 {
            break;
        }
    }
    let chi = x - FRAC_PI_4_DD;
    let (sin_chi, cos_chi) = chi.sin_cos();
    (FRAC_2_PI_DD * inv).sqrt() * (p * cos_chi - q * sin_chi)
}

const CHEB_DEGREE: usize = 18;

/// Chebyshev coefficients of J0 on each unit interval `[k, k + 1]` below the
/// series limit, built once from the double-double evaluation.
fn chebyshev_table() -> &'static [[f64; CHEB_DEGREE + 1]] {
    static TABLE: OnceLock<Vec<[f64; CHEB_DEGREE + 1]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = CHEB_DEGREE + 1;
        let pi = FRAC_PI_2_DD.mul_f64(2.0);
        let angle = |i: usize, j: usize| pi.mul_f64(((2 * i + 1) * j) as f64).div_f64(2.0 * n as f64);
        (0..SERIES_LIMIT as usize)
            .map(|k| {
                let values: Vec<DoubleDouble> = (0..n)
                    .map(|i| {
                        let (_, cos) = angle(i, 1).sin_cos();
                        j0_dd(DoubleDouble::from_f64(k as f64 + 0.5) + cos.mul_f64(0.5))
                    })
                    .collect();
                let mut c = [0.0; CHEB_DEGREE + 1];
                for (j, cj) in c.iter_mut().enumerate() {
                    let mut sum = DoubleDouble::ZERO;
                    for (i, v) in values.iter().enumerate() {
                        sum = sum + *v * angle(i, j).sin_cos().1;
                    }
                    *cj = sum.mul_f64(2.0).div_f64(n as f64).to_f64();
                }
                c[0] *= 0.5;
                c
            })
            .collect()
    })
}

/// Plain double-precision J0 (absolute error around 1e-16) for hot loops
/// such as least-squares fitting.
pub(crate) fn j0_fast(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-9 {
        return 1.0 - 0.25 * ax * ax;
    }
    if ax < SERIES_LIMIT {
        let k = ax as usize;
        let t = 2.0 * (ax - k as f64) - 1.0;
        let c = &chebyshev_table()[k];
        // Clenshaw recurrence
        let (mut b1, mut b2) = (0.0, 0.0);
        for &cj in c[1..].iter().rev() {
            let b0 = 2.0 * t * b1 - b2 + cj;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + c[0]
    } else if ax.is_finite() {
        j0_asymptotic_f64(ax)
    } else {
        f64::NAN
    }
}

fn j0_asymptotic_f64(x: f64) -> f64 {
    let inv = 1.0 / x;
    let (mut a, mut p, mut q) = (1.0_f64, 1.0_f64, 0.0_f64);
    let mut prev = f64::INFINITY;
    for j in 1..60 {
        let odd = (2 * j - 1) as f64;
        let next = -a * inv * odd * odd / (8.0 * j as f64);
        if next.abs() >= prev || next.abs() < 1e-18 {
            break;
        }
        a = next;
        prev = a.abs();
        let signed = if (j / 2) % 2 == 0 { a } else { -a };
        if j % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
    }
    // cos(x − π/4) and sin(x − π/4) through the reduction of x alone
    let (s, c) = x.sin_cos();
    (1.0 / (PI * x)).sqrt() * (p * (c + s) - q * (s - c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_2_PI;

    #[test]
    fn value_at_origin() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn reference_values() {
        // J0(5) from a 1e-14-converged power series
        assert!((bessel_j0(5.0).unwrap() - (-0.177_596_771_314_338_3)).abs() < 1e-10);
        let first_zero = 2.404_825_557_695_773;
        assert!(bessel_j0(first_zero).unwrap().abs() < 1e-10);
    }

    #[test]
    fn even_function() {
        for &x in &[0.3, 2.0, 7.5, 24.9, 25.1, 80.0, 1e4] {
            assert_eq!(bessel_j0(-x).unwrap(), bessel_j0(x).unwrap());
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(bessel_j0(f64::NAN), Err(SpecFunError::NonFinite(_))));
        assert!(bessel_j0(f64::INFINITY).is_err());
    }

    #[test]
    fn branches_agree_at_seam() {
        for &x in &[SERIES_LIMIT - 0.5, SERIES_LIMIT, SERIES_LIMIT + 0.5, 12.0] {
            let x = DoubleDouble::from_f64(x);
            let diff = (j0_series(x) - j0_asymptotic(x)).to_f64();
            assert!(diff.abs() <= 1e-11, "x={}: {diff:e}", x.hi);
        }
        // far from the seam the two branches agree to double-double level
        let diff = (j0_series(DoubleDouble::from_f64(24.0)) - j0_asymptotic(DoubleDouble::from_f64(24.0))).to_f64();
        assert!(diff.abs() < 1e-19);
    }

    #[test]
    fn large_argument_envelope() {
        // |J0(x)| <= sqrt(2/(pi x)) asymptotically
        for &x in &[100.0, 1000.0, 1e4] {
            let v = bessel_j0(x).unwrap();
            assert!(v.abs() <= (FRAC_2_PI / x).sqrt() * 1.001);
        }
    }

    #[test]
    fn fast_path_tracks_extended() {
        let mut worst = 0.0_f64;
        for i in 0..=60_000 {
            let x = i as f64 * 1e-3 + 1e-4;
            worst = worst.max((j0_fast(x) - bessel_j0(x).unwrap()).abs());
        }
        assert!(worst < 1e-15, "{worst:e}");
        for &x in &[60.0, 300.0, 4000.0, 1e5] {
            assert!((j0_fast(x) - bessel_j0(x).unwrap()).abs() < 1e-15);
        }
        assert_eq!(j0_fast(-3.0), j0_fast(3.0));
    }

    #[test]
    fn extended_rounds_to_plain() {
        for &x in &[0.1, 3.3, 19.0, 33.0] {
            let (hi, lo) = bessel_j0_extended(x).unwrap();
            assert_eq!(hi + lo, bessel_j0(x).unwrap());
        }
    }
}
