//! wasm-bindgen surface for the browser demo in `www/`.
//!
//! Each exported function returns a JSON string; the plain-Rust versions
//! underneath are what the tests call.

use serde::Serialize;
use volwave::fitting::{run_ladder, FitOptions};
use volwave::marketdata::build_distribution;
use volwave::models::{kummer_sqrt_eigenvalue, kummer_wave, BesselParams, ModelSpec};
use volwave::oracle::{bessel_ode_residual, geometric_grid, kummer_ode_residual};
use volwave::specfun::bessel_j0;
use volwave::synth::{generate, generate_two_equilibrium, generate_uniform, SynthConfig};
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct Curve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// `|ψ(p')|` on `n` points of `[-half_width, half_width]`: `J0(ω p')` for
/// `family = "bessel"`, otherwise the order-`m` Kummer function with
/// `√A = E/(1 + 2m)`.
pub fn eigenfunction(family: &str, param: f64, m: u32, half_width: f64, n: usize) -> Result<Curve, String> {
    if !(param > 0.0 && half_width > 0.0 && n >= 2) {
        return Err("parameters must be positive and n >= 2".into());
    }
    let x: Vec<f64> = (0..n).map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64).collect();
    let y = match family {
        "bessel" => x.iter().map(|&p| bessel_j0(param * p).map(f64::abs)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?,
        "kummer" => {
            let s = kummer_sqrt_eigenvalue(m, param);
            x.iter().map(|&p| kummer_wave(m, s, p).abs()).collect()
        }
        other => return Err(format!("unknown family {other}")),
    };
    Ok(Curve { x, y })
}

#[derive(Debug, Serialize)]
pub struct Step {
    pub family: String,
    pub r_squared: Option<f64>,
    pub r_squared_crit: Option<f64>,
    pub significant: bool,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct FitDemo {
    pub prices: Vec<f64>,
    pub empirical: Vec<f64>,
    /// Curve of the chosen (or last fitted) model on the same levels.
    pub model: Vec<f64>,
    pub chosen: Option<String>,
    pub summary: String,
    pub steps: Vec<Step>,
}

/// Generates a session and runs the model ladder on it.
///
/// `shape` is `"single"`, `"two"` (second center at `p0 + 0.12`) or
/// `"uniform"`.
pub fn synth_and_fit(shape: &str, omega: f64, noise: f64, seed: u64) -> Result<FitDemo, String> {
    let p0 = 10.0;
    let config = SynthConfig {
        spec: ModelSpec::BesselSingle(BesselParams { c: 1.0, omega, p0 }),
        tick: 0.01,
        price_range: [9.92, 10.20],
        total_volume: 100_000,
        trades: 2000,
        noise,
        seed,
        session_seconds: 14_400.0,
        start_ms: 0,
    };
    let trades = match shape {
        "single" => generate(&config),
        "two" => generate_two_equilibrium(&config, p0 + 0.12, 0.5),
        "uniform" => generate_uniform(&config),
        other => return Err(format!("unknown shape {other}")),
    }
    .map_err(|e| e.to_string())?;
    let dist = build_distribution(&trades, config.tick).map_err(|e| e.to_string())?;
    let report = run_ladder(&dist, &FitOptions::default());
    let best = report.chosen_result().or_else(|| report.last_result());
    let model = best.map(|r| dist.prices.iter().map(|&p| r.spec.eval(p)).collect()).unwrap_or_default();
    let summary = match best {
        Some(r) => format!(
            "{}: R2 {:.3} vs critical {:.3}, {}",
            r.family.label(),
            r.r_squared,
            r.r_squared_crit,
            if r.significant { "significant" } else { "no step significant" }
        ),
        None => "no family could be fitted".into(),
    };
    let steps = report
        .attempts
        .iter()
        .map(|a| Step {
            family: a.family.label(),
            r_squared: a.result.as_ref().map(|r| r.r_squared),
            r_squared_crit: a.result.as_ref().map(|r| r.r_squared_crit),
            significant: a.significant(),
            error: a.error.clone(),
        })
        .collect();
    Ok(FitDemo {
        prices: dist.prices.clone(),
        empirical: dist.probabilities.clone(),
        model,
        chosen: report.chosen_result().map(|r| r.family.label()),
        summary,
        steps,
    })
}

#[derive(Debug, Serialize)]
pub struct Residuals {
    pub equation: String,
    pub grid: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_abs_residual: f64,
}

/// ODE residual of the closed-form eigenfunction on 400 geometric points of
/// `[1e-2, 20]`. `param` is `ω` for `"bessel"` and `E` for `"kummer"`.
pub fn ode_residual(family: &str, param: f64, m: u32, h: f64) -> Result<Residuals, String> {
    let grid = geometric_grid(1e-2, 20.0, 400);
    let r = match family {
        "bessel" => bessel_ode_residual(param, &grid, h),
        "kummer" => kummer_ode_residual(m, param, &grid, h),
        other => return Err(format!("unknown family {other}")),
    }
    .map_err(|e| e.to_string())?;
    Ok(Residuals {
        equation: r.equation,
        grid: r.grid,
        residuals: r.residuals,
        max_abs_residual: r.max_abs_residual,
    })
}

fn to_js<T: Serialize>(v: Result<T, String>) -> Result<String, JsValue> {
    v.and_then(|x| serde_json::to_string(&x).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = eigenfunctionCurve)]
pub fn eigenfunction_curve(family: &str, param: f64, m: u32, half_width: f64, n: usize) -> Result<String, JsValue> {
    to_js(eigenfunction(family, param, m, half_width, n))
}

#[wasm_bindgen(js_name = synthAndFit)]
pub fn synth_and_fit_js(shape: &str, omega: f64, noise: f64, seed: u32) -> Result<String, JsValue> {
    to_js(synth_and_fit(shape, omega, noise, seed as u64))
}

#[wasm_bindgen(js_name = odeResidual)]
pub fn ode_residual_js(family: &str, param: f64, m: u32, h: f64) -> Result<String, JsValue> {
    to_js(ode_residual(family, param, m, h))
}
