//! Test-only reference implementations, kept independent of the library's
//! evaluation paths.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

const FIXED_BITS: u64 = 320;

/// J0(num/den) from its power series in 320-bit fixed point.
pub fn j0_fixed_point(num: i64, den: i64) -> f64 {
    let scale = BigInt::one() << FIXED_BITS;
    let a2 = BigInt::from(num) * BigInt::from(num);
    let b2 = BigInt::from(den) * BigInt::from(den) * 4;
    let mut term = scale.clone();
    let mut sum = scale.clone();
    let mut k: i64 = 1;
    loop {
        term = -(term * &a2) / (&b2 * BigInt::from(k * k));
        if term.is_zero() {
            break;
        }
        sum += &term;
        k += 1;
    }
    // sum / 2^320 rounded to f64
    BigRational::new(sum, scale).to_f64().unwrap()
}

/// L_m(x) = F(−m, 1, x) via the three-term Laguerre recurrence, in exact
/// rational arithmetic.
pub fn laguerre_exact(m: u32, x: &BigRational) -> BigRational {
    let mut prev = BigRational::one();
    if m == 0 {
        return prev;
    }
    let mut cur = BigRational::one() - x;
    for k in 1..m {
        let k = BigRational::from_integer(BigInt::from(k));
        let two_k_plus_one = &k + &k + BigRational::one();
        let next = ((two_k_plus_one - x) * &cur - &k * &prev) / (&k + BigRational::one());
        prev = cur;
        cur = next;
    }
    cur
}

/// Same recurrence in plain f64.
pub fn laguerre_f64(m: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - x);
    if m == 0 {
        return 1.0;
    }
    for k in 1..m {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn relative_error(value: f64, exact: &BigRational) -> f64 {
    let e = exact.to_f64().unwrap();
    let diff = (BigRational::from_float(value).unwrap() - exact).abs().to_f64().unwrap();
    if e == 0.0 {
        diff
    } else {
        diff / e.abs()
    }
}

/// Upper `q` quantile of Beta(a, b), by Simpson integration of the density
/// and bisection on the cumulative integral. Needs `a >= 1`, `b >= 1`.
pub fn beta_quantile(a: f64, b: f64, q: f64) -> f64 {
    let density = |x: f64| x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0);
    let simpson = |lo: f64, hi: f64, n: usize| {
        let h = (hi - lo) / n as f64;
        let mut s = density(lo) + density(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * density(lo + i as f64 * h);
        }
        s * h / 3.0
    };
    let n = 200_000;
    let total = simpson(0.0, 1.0, n);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let steps = ((mid * n as f64) as usize).max(2) & !1;
        if simpson(0.0, mid, steps) / total < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
