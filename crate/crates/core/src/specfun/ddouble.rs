//! Minimal double-double arithmetic (an unevaluated sum `hi + lo`).
//!
//! Only what the extended-precision special-function paths need.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, FRAC_PI_4, LN_2};
use std::ops::{Add, Mul, Neg, Sub};

pub(crate) const LN_2_DD: DoubleDouble = DoubleDouble {
    hi: LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

pub(crate) const FRAC_PI_2_DD: DoubleDouble = DoubleDouble {
    hi: FRAC_PI_2,
    lo: 6.123_233_995_736_766e-17,
};

pub(crate) const FRAC_PI_4_DD: DoubleDouble = DoubleDouble {
    hi: FRAC_PI_4,
    lo: 3.061_616_997_868_383e-17,
};

pub(crate) const FRAC_2_PI_DD: DoubleDouble = DoubleDouble {
    hi: FRAC_2_PI,
    lo: -3.935_735_335_036_497e-17,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = self.lo.mul_add(b, e);
        Self::new(p, e)
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - Self::from_f64(b).mul_f64(q1);
        let q2 = r.hi / b;
        let r = r - Self::from_f64(b).mul_f64(q2);
        let q3 = r.hi / b;
        let (s, e) = quick_two_sum(q1, q2);
        Self::new(s, e + q3)
    }

    pub fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Self::new(s, e + q3)
    }

    pub fn recip(self) -> Self {
        Self::ONE.div(self)
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        let s = self.hi.sqrt();
        let (sq, err) = two_prod(s, s);
        let r = (self - Self::new(sq, err)).hi;
        Self::new(s, r / (2.0 * s))
    }

    /// `e^x` by range reduction `x = k·ln2 + r` and a Taylor series on
    /// `r / 1024`, squared back up.
    pub fn exp(self) -> Self {
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        let k = (self.hi / LN_2).round();
        let r = (self - LN_2_DD.mul_f64(k)).div_f64(1024.0);
        let mut term = Self::ONE;
        let mut sum = Self::ONE;
        for i in 1..20 {
            term = (term * r).div_f64(i as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..10 {
            sum = sum * sum;
        }
        let scale = 2f64.powi(k as i32);
        Self {
            hi: sum.hi * scale,
            lo: sum.lo * scale,
        }
    }

    /// `(sin x, cos x)` for moderate `|x|` (reduction by a double-double π/2).
    pub fn sin_cos(self) -> (Self, Self) {
        let k = (self.hi / FRAC_PI_2).round();
        let r = self - FRAC_PI_2_DD.mul_f64(k);
        let r2 = r * r;
        // Taylor series on |r| <= π/4
        let mut s_term = r;
        let mut s = r;
        let mut c_term = Self::ONE;
        let mut c = Self::ONE;
        for i in 1..30 {
            let n = 2.0 * i as f64;
            s_term = -(s_term * r2).div_f64(n * (n + 1.0));
            c_term = -(c_term * r2).div_f64((n - 1.0) * n);
            s = s + s_term;
            c = c + c_term;
            if s_term.hi.abs() < 1e-36 && c_term.hi.abs() < 1e-36 {
                break;
            }
        }
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Self::new(s, e + f)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        Self::new(p, e)
    }
}
