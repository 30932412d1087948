use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::ddouble::DoubleDouble;
use super::SpecFunError;

/// Largest supported polynomial order.
pub const MAX_ORDER: u32 = 64;

/// `F(−m, 1, x)`: the first Kummer function at a non-positive integer first
/// argument, which terminates after `m + 1` terms.
///
/// Coefficient `k` is `(−m)_k / (k!·(1)_k) = (−1)^k·C(m, k)/k!`, held as an
/// exact rational.
#[derive(Clone, Debug)]
pub struct KummerPolynomial {
    order: u32,
    coefficients: Vec<BigRational>,
    split: Vec<DoubleDouble>,
}

impl KummerPolynomial {
    pub fn new(order: u32) -> Result<Self, SpecFunError> {
        if order > MAX_ORDER {
            return Err(SpecFunError::OrderTooLarge(order));
        }
        let m = BigInt::from(order);
        let mut coefficients = Vec::with_capacity(order as usize + 1);
        let mut c = BigRational::one();
        coefficients.push(c.clone());
        for k in 0..order {
            // c_{k+1} = c_k · (k − m) / (k + 1)²
            let k1 = BigInt::from(k + 1);
            c *= BigRational::new(BigInt::from(k) - &m, &k1 * &k1);
            coefficients.push(c.clone());
        }
        let split = coefficients.iter().map(split_rational).collect();
        Ok(Self {
            order,
            coefficients,
            split,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    /// Horner evaluation with double-double accumulation.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_dd(DoubleDouble::from_f64(x)).to_f64()
    }

    pub(crate) fn eval_dd(&self, x: DoubleDouble) -> DoubleDouble {
        let mut acc = *self.split.last().expect("at least one coefficient");
        for c in self.split.iter().rev().skip(1) {
            acc = acc * x + *c;
        }
        acc
    }
}

/// Nearest double-double to an exact rational.
fn split_rational(r: &BigRational) -> DoubleDouble {
    let hi = r.to_f64().unwrap_or(0.0);
    if hi == 0.0 || !hi.is_finite() {
        return DoubleDouble::from_f64(hi);
    }
    let rest = r - BigRational::from_float(hi).unwrap_or_else(BigRational::zero);
    DoubleDouble::new(hi, rest.to_f64().unwrap_or(0.0))
}

fn table() -> &'static [KummerPolynomial] {
    static TABLE: OnceLock<Vec<KummerPolynomial>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..=MAX_ORDER)
            .map(|m| KummerPolynomial::new(m).expect("order within cap"))
            .collect()
    })
}

/// Cached polynomial of order `m`.
pub fn kummer_polynomial(order: u32) -> Result<&'static KummerPolynomial, SpecFunError> {
    table()
        .get(order as usize)
        .ok_or(SpecFunError::OrderTooLarge(order))
}

/// `F(−m, 1, x)` for `m <= 64`.
pub fn kummer(order: u32, x: f64) -> Result<f64, SpecFunError> {
    if !x.is_finite() {
        return Err(SpecFunError::NonFinite(x));
    }
    Ok(kummer_polynomial(order)?.eval(x))
}

/// Rising factorial `a(a+1)…(a+k−1)`.
pub fn pochhammer(a: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (a + i as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_zero_is_constant() {
        for &x in &[0.0, 0.5, 3.0, 100.0] {
            assert_eq!(kummer(0, x).unwrap(), 1.0);
        }
    }

    #[test]
    fn low_orders() {
        for &x in &[0.0, 0.25, 1.0, 7.5] {
            assert_eq!(kummer(1, x).unwrap(), 1.0 - x);
        }
        assert_eq!(kummer(2, 2.0).unwrap(), -1.0);
    }

    #[test]
    fn constant_term_is_one() {
        for m in 0..=MAX_ORDER {
            assert_eq!(kummer(m, 0.0).unwrap(), 1.0);
            let p = kummer_polynomial(m).unwrap();
            assert_eq!(p.coefficients().len(), m as usize + 1);
            assert!(p.coefficients()[0].is_one());
        }
    }

    #[test]
    fn coefficients_match_pochhammer_form() {
        let m = 6u32;
        let p = KummerPolynomial::new(m).unwrap();
        let mut fact = 1.0;
        for (k, c) in p.coefficients().iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            let expected = pochhammer(-(m as f64), k as u32) / (fact * pochhammer(1.0, k as u32));
            assert!((c.to_f64().unwrap() - expected).abs() <= 1e-15 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn order_cap() {
        assert!(kummer(64, 1.0).is_ok());
        assert!(matches!(kummer(65, 1.0), Err(SpecFunError::OrderTooLarge(65))));
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(-2.0, 2), 2.0);
        assert_eq!(pochhammer(3.7, 0), 1.0);
        assert_eq!(pochhammer(1.0, 5), 120.0);
    }
}
