//! Eigenfunction model families and their normalization on a price grid.
//!
//! All families are probabilities through `|ψ|`, never `|ψ|²`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::marketdata::VolumeAtPrice;
use crate::specfun::{j0_fast, kummer_polynomial, MAX_ORDER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("model evaluates to zero (or non-finite) on every grid level")]
    DegenerateCurve,
}

/// `C·|J0(ω(p − p0))|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesselParams {
    pub c: f64,
    pub omega: f64,
    pub p0: f64,
}

/// `C·(|J0(ω1(p − p01))| + |J0(ω2(p − p02))|)`, with `p01 <= p02`.
///
/// Setting `omega2 == omega1` gives the shared-eigenvalue variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionParams {
    pub c: f64,
    pub omega1: f64,
    pub p01: f64,
    pub omega2: f64,
    pub p02: f64,
}

/// `C·e^{−√A|p−p0|}·|F(−m, 1, 2√A|p−p0|)|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KummerParams {
    pub c: f64,
    pub m: u32,
    /// Eigenvalue magnitude `A` (restoring-force magnitude); the decay rate
    /// is `√A`.
    pub a: f64,
    pub p0: f64,
}

impl KummerParams {
    pub fn sqrt_a(&self) -> f64 {
        self.a.sqrt()
    }
}

/// Model family plus parameters. Serializes as `{"family": ..., "params": {...}}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params")]
pub enum ModelSpec {
    BesselSingle(BesselParams),
    BesselSuperposition(SuperpositionParams),
    Kummer(KummerParams),
}

impl ModelSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            ModelSpec::BesselSingle(_) => "BesselSingle",
            ModelSpec::BesselSuperposition(_) => "BesselSuperposition",
            ModelSpec::Kummer(_) => "Kummer",
        }
    }

    pub fn eval(&self, p: f64) -> f64 {
        match self {
            ModelSpec::BesselSingle(b) => eval_bessel_single(b, p),
            ModelSpec::BesselSuperposition(s) => eval_superposition(s, p),
            ModelSpec::Kummer(k) => eval_kummer(k, p),
        }
    }

    /// Largest value the family can take (its value at a center).
    pub fn amplitude(&self) -> f64 {
        match self {
            ModelSpec::BesselSingle(b) => b.c,
            ModelSpec::BesselSuperposition(s) => 2.0 * s.c,
            ModelSpec::Kummer(k) => k.c,
        }
    }

    /// Equilibrium price(s) of the model.
    pub fn centers(&self) -> Vec<f64> {
        match self {
            ModelSpec::BesselSingle(b) => vec![b.p0],
            ModelSpec::BesselSuperposition(s) => vec![s.p01, s.p02],
            ModelSpec::Kummer(k) => vec![k.p0],
        }
    }

    /// Same shape with every center moved by `delta`.
    pub fn translated(&self, delta: f64) -> Self {
        let mut out = *self;
        match &mut out {
            ModelSpec::BesselSingle(b) => b.p0 += delta,
            ModelSpec::BesselSuperposition(s) => {
                s.p01 += delta;
                s.p02 += delta;
            }
            ModelSpec::Kummer(k) => k.p0 += delta,
        }
        out
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter(format!("{name} must be finite, got {v}")))
            }
        };
        match self {
            ModelSpec::BesselSingle(b) => {
                positive("C", b.c)?;
                positive("omega", b.omega)?;
                finite("p0", b.p0)
            }
            ModelSpec::BesselSuperposition(s) => {
                positive("C", s.c)?;
                positive("omega1", s.omega1)?;
                positive("omega2", s.omega2)?;
                finite("p01", s.p01)?;
                finite("p02", s.p02)?;
                if s.p01 > s.p02 {
                    return Err(ModelError::InvalidParameter("p01 must not exceed p02".into()));
                }
                Ok(())
            }
            ModelSpec::Kummer(k) => {
                positive("C", k.c)?;
                positive("A", k.a)?;
                finite("p0", k.p0)?;
                if k.m > MAX_ORDER {
                    return Err(ModelError::InvalidParameter(format!(
                        "Kummer order {} exceeds {MAX_ORDER}",
                        k.m
                    )));
                }
                Ok(())
            }
        }
    }
}

pub fn eval_bessel_single(params: &BesselParams, p: f64) -> f64 {
    params.c * j0_fast(params.omega * (p - params.p0)).abs()
}

pub fn eval_superposition(params: &SuperpositionParams, p: f64) -> f64 {
    params.c
        * (j0_fast(params.omega1 * (p - params.p01)).abs()
            + j0_fast(params.omega2 * (p - params.p02)).abs())
}

pub fn eval_kummer(params: &KummerParams, p: f64) -> f64 {
    params.c * kummer_wave(params.m, params.sqrt_a(), p - params.p0).abs()
}

/// Signed Kummer eigenfunction `e^{−s|x|}·F(−m, 1, 2s|x|)` with `s = √A`.
///
/// NaN when `m` exceeds the supported polynomial order.
pub fn kummer_wave(m: u32, sqrt_a: f64, x: f64) -> f64 {
    let r = sqrt_a * x.abs();
    match kummer_polynomial(m) {
        Ok(poly) => (-r).exp() * poly.eval(2.0 * r),
        Err(_) => f64::NAN,
    }
}

/// Decay rate `√A_m = E/(1 + 2m)` that makes the order-`m` Kummer function
/// terminate.
pub fn kummer_sqrt_eigenvalue(m: u32, energy: f64) -> f64 {
    energy / (1.0 + 2.0 * m as f64)
}

/// Model probability per grid level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelCurve {
    pub prices: Vec<f64>,
    pub values: Vec<f64>,
}

/// Evaluates `spec` on the distribution grid and scales the values to sum 1.
pub fn normalize_on_grid(spec: &ModelSpec, dist: &VolumeAtPrice) -> Result<ModelCurve, ModelError> {
    normalize_on_prices(spec, &dist.prices)
}

pub fn normalize_on_prices(spec: &ModelSpec, prices: &[f64]) -> Result<ModelCurve, ModelError> {
    spec.validate()?;
    let raw: Vec<f64> = prices.iter().map(|&p| spec.eval(p)).collect();
    let total: f64 = raw.iter().sum();
    // values indistinguishable from zero relative to the peak amplitude
    if !(total.is_finite() && total > 1e-12 * spec.amplitude()) {
        return Err(ModelError::DegenerateCurve);
    }
    Ok(ModelCurve {
        prices: prices.to_vec(),
        values: raw.into_iter().map(|v| v / total).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::J0_FIRST_ZERO;
    use proptest::prelude::*;

    fn bessel(c: f64, omega: f64, p0: f64) -> BesselParams {
        BesselParams { c, omega, p0 }
    }

    fn grid(lo_idx: i64, n: usize, tick: f64) -> Vec<f64> {
        (0..n as i64).map(|i| (lo_idx + i) as f64 * tick).collect()
    }

    #[test]
    fn bessel_peak_and_node() {
        let b = bessel(2.5, 4.0, 10.0);
        assert_eq!(eval_bessel_single(&b, 10.0), 2.5);
        assert!(eval_bessel_single(&b, 10.0 + J0_FIRST_ZERO / 4.0) <= 1e-9 * 2.5);
        let unit = bessel(1.0, 1.0, 0.0);
        assert!((eval_bessel_single(&unit, 5.0) - 0.177_596_771_3).abs() < 1e-10);
    }

    #[test]
    fn coincident_superposition_doubles() {
        let s = SuperpositionParams {
            c: 1.3,
            omega1: 3.0,
            p01: 5.0,
            omega2: 3.0,
            p02: 5.0,
        };
        let b = bessel(1.3, 3.0, 5.0);
        for &p in &[4.0, 4.7, 5.0, 5.55] {
            assert_eq!(eval_superposition(&s, p), 2.0 * eval_bessel_single(&b, p));
        }
    }

    #[test]
    fn superposition_node_placement() {
        // second lobe places its first node exactly on the first center
        let omega2 = 8.0;
        let s = SuperpositionParams {
            c: 1.0,
            omega1: 5.0,
            p01: 10.0,
            omega2,
            p02: 10.0 + J0_FIRST_ZERO / omega2,
        };
        assert!((eval_superposition(&s, 10.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separated_superposition_has_two_maxima() {
        let s = SuperpositionParams {
            c: 1.0,
            omega1: 40.0,
            p01: 9.80,
            omega2: 40.0,
            p02: 10.20,
        };
        let prices = grid(960, 81, 0.01);
        let values: Vec<f64> = prices.iter().map(|&p| eval_superposition(&s, p)).collect();
        let maxima: Vec<f64> = (1..values.len() - 1)
            .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])
            .map(|i| prices[i])
            .collect();
        let global: Vec<f64> = maxima
            .iter()
            .copied()
            .filter(|&p| {
                let v = eval_superposition(&s, p);
                v > 0.9 * values.iter().cloned().fold(0.0, f64::max)
            })
            .collect();
        assert_eq!(global.len(), 2);
        assert!((global[0] - 9.80).abs() < 1e-9 && (global[1] - 10.20).abs() < 1e-9);
    }

    #[test]
    fn kummer_reductions() {
        let k0 = KummerParams {
            c: 2.0,
            m: 0,
            a: 0.49,
            p0: 3.0,
        };
        for &p in &[1.0, 2.9, 3.0, 3.4, 9.0] {
            let expected = 2.0 * (-(0.7_f64) * (p - 3.0_f64).abs()).exp();
            assert!((eval_kummer(&k0, p) - expected).abs() <= 1e-14 * expected.max(1e-300));
        }
        for m in 0..8 {
            let k = KummerParams { c: 1.7, m, a: 2.0, p0: -1.0 };
            assert_eq!(eval_kummer(&k, -1.0), 1.7);
        }
        let k1 = KummerParams { c: 1.0, m: 1, a: 1.0, p0: 0.0 };
        assert_eq!(eval_kummer(&k1, 0.5), 0.0);
    }

    #[test]
    fn eigenvalue_ladder_ratio() {
        for &e in &[0.5, 1.0, 3.0] {
            let s0 = kummer_sqrt_eigenvalue(0, e);
            for m in 0..=10u32 {
                assert_eq!(s0 / kummer_sqrt_eigenvalue(m, e), 1.0 + 2.0 * m as f64);
            }
        }
    }

    #[test]
    fn single_level_curve() {
        let spec = ModelSpec::Kummer(KummerParams { c: 1.0, m: 3, a: 1.0, p0: 10.0 });
        let curve = normalize_on_prices(&spec, &[10.03]).unwrap();
        assert_eq!(curve.values, vec![1.0]);
    }

    #[test]
    fn symmetric_grid_gives_symmetric_curve() {
        let spec = ModelSpec::BesselSingle(bessel(1.0, 12.0, 10.0));
        let prices = grid(980, 41, 0.01);
        let curve = normalize_on_prices(&spec, &prices).unwrap();
        let n = curve.values.len();
        for i in 0..n {
            assert!((curve.values[i] - curve.values[n - 1 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn vanishing_omega_gives_uniform_curve() {
        let spec = ModelSpec::BesselSingle(bessel(1.0, 1e-9, 10.0));
        let prices = grid(970, 60, 0.01);
        let curve = normalize_on_prices(&spec, &prices).unwrap();
        for v in &curve.values {
            assert!((v - 1.0 / 60.0).abs() < 1e-6);
        }
    }

    #[test]
    fn degenerate_curve_detected() {
        let omega = J0_FIRST_ZERO / 0.01;
        let spec = ModelSpec::BesselSingle(bessel(1.0, omega, 10.0));
        assert_eq!(
            normalize_on_prices(&spec, &[10.01]).map(|_| ()),
            Err(ModelError::DegenerateCurve).map(|_: ()| ())
        );
    }

    #[test]
    fn rejects_invalid_params() {
        let spec = ModelSpec::BesselSingle(bessel(1.0, -1.0, 10.0));
        assert!(matches!(spec.validate(), Err(ModelError::InvalidParameter(_))));
        let spec = ModelSpec::Kummer(KummerParams { c: 1.0, m: 1, a: 0.0, p0: 1.0 });
        assert!(spec.validate().is_err());
        let spec = ModelSpec::BesselSuperposition(SuperpositionParams {
            c: 1.0,
            omega1: 1.0,
            p01: 2.0,
            omega2: 1.0,
            p02: 1.0,
        });
        assert!(spec.validate().is_err());
    }

    #[test]
    fn json_layout() {
        let spec = ModelSpec::BesselSingle(bessel(0.1, 5.0, 10.0));
        let v: serde_json::Value = serde_json::to_value(spec).unwrap();
        assert_eq!(v["family"], "BesselSingle");
        assert_eq!(v["params"]["omega"], 5.0);
        let back: ModelSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back, spec);
    }

    fn any_spec() -> impl Strategy<Value = ModelSpec> {
        prop_oneof![
            (0.01f64..10.0, 0.1f64..200.0, 9.5f64..10.5)
                .prop_map(|(c, omega, p0)| ModelSpec::BesselSingle(bessel(c, omega, p0))),
            (0.01f64..10.0, 0.1f64..200.0, 9.5f64..10.0, 0.1f64..200.0, 10.0f64..10.5).prop_map(
                |(c, omega1, p01, omega2, p02)| ModelSpec::BesselSuperposition(SuperpositionParams {
                    c,
                    omega1,
                    p01,
                    omega2,
                    p02
                })
            ),
            (0.01f64..10.0, 0u32..12, 0.01f64..1e4, 9.5f64..10.5)
                .prop_map(|(c, m, a, p0)| ModelSpec::Kummer(KummerParams { c, m, a, p0 })),
        ]
    }

    proptest! {
        #[test]
        fn normalized_curves_are_distributions(spec in any_spec(), n in 1usize..120) {
            let prices = grid(950, n, 0.01);
            match normalize_on_prices(&spec, &prices) {
                Ok(curve) => {
                    prop_assert!(curve.values.iter().all(|&v| v >= 0.0));
                    let s: f64 = curve.values.iter().sum();
                    prop_assert!((s - 1.0).abs() <= 1e-12);
                }
                Err(e) => prop_assert_eq!(e, ModelError::DegenerateCurve),
            }
        }

        #[test]
        fn single_families_are_even(c in 0.1f64..5.0, omega in 0.1f64..100.0, m in 0u32..10,
                                    a in 0.01f64..100.0, p0 in 5.0f64..15.0, d in 0.0f64..2.0) {
            let b = bessel(c, omega, p0);
            let (l, r) = (eval_bessel_single(&b, p0 - d), eval_bessel_single(&b, p0 + d));
            // p0 ± d round differently; allow for the induced argument error
            prop_assert!((l - r).abs() <= 1e-12 * c * omega.max(1.0));
            let k = KummerParams { c, m, a, p0 };
            let (l, r) = (eval_kummer(&k, p0 - d), eval_kummer(&k, p0 + d));
            prop_assert!((l - r).abs() <= 1e-12 * l.abs().max(1e-300) * a.sqrt().max(1.0));
        }

        #[test]
        fn kummer_order_zero_is_exponential(c in 0.1f64..5.0, a in 1e-4f64..1e3, p0 in 0.0f64..20.0, p in 0.0f64..20.0) {
            let k = KummerParams { c, m: 0, a, p0 };
            let expected = c * (-a.sqrt() * (p - p0).abs()).exp();
            prop_assert!((eval_kummer(&k, p) - expected).abs() <= 1e-14 * expected.max(1e-300));
        }
    }
}
