//! Independent checks of the closed-form eigenfunctions against their ODEs.
//!
//! Residuals substitute the closed form into the equation and difference it
//! numerically on a local stencil of width `h`. The stencil values, their
//! differences and the division by `h²` are all carried in double-double so
//! rounding stays far below the `O(h²)` truncation term. The eigenvalue
//! search integrates the Kummer-type equation from a series start and never
//! consults the closed-form eigenvalue or the fitting code.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::SCHEMA_VERSION;
use crate::specfun::ddouble::DoubleDouble;
use crate::specfun::{j0_dd, kummer_polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("grid point {0} leaves no room for the stencil before the singular point p' = 0")]
    GridTouchesSingularity(f64),
    #[error("no sign change of the far-field solution for m = {m}, E = {energy}")]
    BracketMiss { m: u32, energy: f64 },
    #[error("invalid oracle input: {0}")]
    InvalidInput(String),
}

/// Points of the standard residual grid.
pub const STANDARD_GRID_POINTS: usize = 2000;
pub const STANDARD_GRID_RANGE: (f64, f64) = (1e-2, 20.0);

/// Geometric grid of 2000 points on `[1e-2, 20]`.
pub fn standard_grid() -> Vec<f64> {
    geometric_grid(STANDARD_GRID_RANGE.0, STANDARD_GRID_RANGE.1, STANDARD_GRID_POINTS)
}

pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| lo * (ratio * i as f64).exp()).collect();
    g[n - 1] = hi;
    g
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub schema_version: u32,
    /// Equation checked, e.g. `bessel omega=1` or `kummer m=1 E=3`.
    pub equation: String,
    pub h: f64,
    /// Shifted prices `p'` at which the residual is evaluated.
    pub grid: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_abs_residual: f64,
    /// `ψ` at the first and last grid points.
    pub boundary_decay: [f64; 2],
}

/// Derivative estimates at `x` from the stencil `x − h, x, x + h`.
struct Stencil {
    psi: DoubleDouble,
    d1: DoubleDouble,
    d2: DoubleDouble,
    x: DoubleDouble,
}

fn stencil(psi: &impl Fn(DoubleDouble) -> DoubleDouble, x: f64, h: f64) -> Stencil {
    let xd = DoubleDouble::from_f64(x);
    let hd = DoubleDouble::from_f64(h);
    let fp = psi(xd + hd);
    let f0 = psi(xd);
    let fm = psi(xd - hd);
    Stencil {
        psi: f0,
        d1: (fp - fm).div_f64(2.0 * h),
        d2: (fp - f0.mul_f64(2.0) + fm).div_f64(h).div_f64(h),
        x: xd,
    }
}

fn check_grid(grid: &[f64], h: f64) -> Result<(), OracleError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(OracleError::InvalidInput(format!("step h must be > 0, got {h}")));
    }
    if grid.is_empty() {
        return Err(OracleError::InvalidInput("empty grid".into()));
    }
    if grid.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(OracleError::InvalidInput("grid must be strictly increasing".into()));
    }
    if let Some(&x) = grid.iter().find(|&&x| (x - h).is_nan() || x - h <= 0.0) {
        return Err(OracleError::GridTouchesSingularity(x));
    }
    Ok(())
}

fn report(
    equation: String,
    grid: &[f64],
    h: f64,
    psi: impl Fn(DoubleDouble) -> DoubleDouble,
    residual: impl Fn(&Stencil) -> DoubleDouble,
) -> ResidualReport {
    let residuals: Vec<f64> = grid.iter().map(|&x| residual(&stencil(&psi, x, h)).to_f64()).collect();
    let max_abs_residual = residuals.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    let ends = [grid[0], grid[grid.len() - 1]];
    ResidualReport {
        schema_version: SCHEMA_VERSION,
        equation,
        h,
        grid: grid.to_vec(),
        residuals,
        max_abs_residual,
        boundary_decay: ends.map(|x| psi(DoubleDouble::from_f64(x)).to_f64()),
    }
}

/// Residual of `p'ψ'' + ψ' + ω²p'ψ = 0` for `ψ = J0(ωp')`.
pub fn bessel_ode_residual(omega: f64, grid: &[f64], h: f64) -> Result<ResidualReport, OracleError> {
    bessel_ode_residual_mismatched(omega, omega, grid, h)
}

/// As [`bessel_ode_residual`] with the equation's eigenvalue `omega_ode`
/// decoupled from the eigenvalue `omega_psi` used to build `ψ`.
pub fn bessel_ode_residual_mismatched(
    omega_ode: f64,
    omega_psi: f64,
    grid: &[f64],
    h: f64,
) -> Result<ResidualReport, OracleError> {
    check_grid(grid, h)?;
    if !(omega_ode > 0.0 && omega_psi > 0.0) {
        return Err(OracleError::InvalidInput("omega must be > 0".into()));
    }
    let w2 = DoubleDouble::from_f64(omega_ode) * DoubleDouble::from_f64(omega_ode);
    let equation = if omega_ode == omega_psi {
        format!("bessel omega={omega_ode}")
    } else {
        format!("bessel omega={omega_ode} psi_omega={omega_psi}")
    };
    Ok(report(
        equation,
        grid,
        h,
        |x| j0_dd(x.mul_f64(omega_psi)),
        |s| s.x * s.d2 + s.d1 + w2 * s.x * s.psi,
    ))
}

/// Residual of `ψ'' + ψ'/p' + (E/p' − A)ψ = 0` for
/// `ψ = e^{−√A p'}·F(−m, 1, 2√A p')`, using the closed-form eigenvalue
/// `√A = E/(1 + 2m)`.
///
/// Like the Bessel check, the equation is multiplied through by `p'`
/// (`p'ψ'' + ψ' + (E − A·p')ψ`), which removes the `1/p'` amplification of
/// the stencil error next to the singular point.
pub fn kummer_ode_residual(m: u32, energy: f64, grid: &[f64], h: f64) -> Result<ResidualReport, OracleError> {
    if m > 20 {
        return Err(OracleError::InvalidInput(format!("order {m} exceeds 20")));
    }
    let sqrt_a = DoubleDouble::from_f64(energy).div_f64(1.0 + 2.0 * m as f64);
    kummer_ode_residual_with_rate(m, energy, sqrt_a.to_f64(), grid, h)
}

/// As [`kummer_ode_residual`] with an arbitrary decay rate `√A`.
pub fn kummer_ode_residual_with_rate(
    m: u32,
    energy: f64,
    sqrt_a: f64,
    grid: &[f64],
    h: f64,
) -> Result<ResidualReport, OracleError> {
    check_grid(grid, h)?;
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(OracleError::InvalidInput(format!("E must be > 0, got {energy}")));
    }
    if !(sqrt_a > 0.0 && sqrt_a.is_finite()) {
        return Err(OracleError::InvalidInput(format!("sqrt(A) must be > 0, got {sqrt_a}")));
    }
    let poly = kummer_polynomial(m).map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let s = DoubleDouble::from_f64(sqrt_a);
    let a = s * s;
    let e = DoubleDouble::from_f64(energy);
    Ok(report(
        format!("kummer m={m} E={energy} sqrtA={sqrt_a}"),
        grid,
        h,
        |x| {
            let r = s * x;
            (-r).exp() * poly.eval_dd(r.mul_f64(2.0))
        },
        |st| st.x * st.d2 + st.d1 + (e - a * st.x) * st.psi,
    ))
}

/// Power-series solution regular at `x = 0` of `ψ'' + ψ'/x + (E/x − A)ψ = 0`:
/// `a_k = (A·a_{k−2} − E·a_{k−1})/k²`, `a_0 = 1`. Returns `(ψ, ψ')`.
fn frobenius_start(energy: f64, a: f64, x: f64) -> (f64, f64) {
    let (mut prev2, mut prev1) = (0.0_f64, 1.0_f64);
    let (mut psi, mut dpsi) = (1.0, 0.0);
    let mut xk1 = 1.0; // x^{k−1}
    for k in 1..400 {
        let kf = k as f64;
        let ak = (a * prev2 - energy * prev1) / (kf * kf);
        dpsi += kf * ak * xk1;
        xk1 *= x;
        let term = ak * xk1;
        psi += term;
        prev2 = prev1;
        prev1 = ak;
        if k > 4 && term.abs() < 1e-18 * psi.abs().max(1e-300) && ak.abs() * xk1 < 1e-18 {
            break;
        }
    }
    (psi, dpsi)
}

/// Regular solution at the far point `X = (30 + 2m)/√A`, by RK4 from a
/// series start.
fn far_field(m: u32, energy: f64, a: f64) -> f64 {
    let sa = a.sqrt();
    let x0 = 1.0 / (energy + sa);
    let xend = (30.0 + 2.0 * m as f64) / sa;
    let steps = 8000;
    let h = (xend - x0) / steps as f64;
    let (mut y, mut dy) = frobenius_start(energy, a, x0);
    let rhs = |x: f64, y: f64, dy: f64| -dy / x - (energy / x - a) * y;
    let mut x = x0;
    for _ in 0..steps {
        let k1y = dy;
        let k1d = rhs(x, y, dy);
        let k2y = dy + 0.5 * h * k1d;
        let k2d = rhs(x + 0.5 * h, y + 0.5 * h * k1y, k2y);
        let k3y = dy + 0.5 * h * k2d;
        let k3d = rhs(x + 0.5 * h, y + 0.5 * h * k2y, k3y);
        let k4y = dy + h * k3d;
        let k4d = rhs(x + h, y + h * k3y, k4y);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        dy += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        // keep magnitudes bounded; only the sign matters
        let scale = y.abs().max(dy.abs());
        if scale > 1e100 {
            y /= scale;
            dy /= scale;
        }
        x += h;
    }
    y
}

/// Shooting search for the eigenvalue `A` whose regular solution has `m`
/// nodes and decays at large `p'`.
///
/// Scans `A` downward from `4E²` on a logarithmic grid and counts sign
/// changes of the far-field value; the `(m + 1)`-th change brackets the
/// order-`m` eigenvalue, which is then bisected.
pub fn eigenvalue_search(m: u32, energy: f64) -> Result<f64, OracleError> {
    if m > 10 {
        return Err(OracleError::InvalidInput(format!("order {m} exceeds 10")));
    }
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(OracleError::InvalidInput(format!("E must be > 0, got {energy}")));
    }
    let e2 = energy * energy;
    let hi = 4.0 * e2;
    let lo = e2 / (4.0 * (2.0 * m as f64 + 3.0).powi(2));
    let n = 60 * (m as usize + 2);
    let ratio = (lo / hi).ln() / n as f64;
    let mut prev_a = hi;
    let mut prev_sign = far_field(m, energy, hi).signum();
    let mut changes = 0;
    for i in 1..=n {
        let a = hi * (ratio * i as f64).exp();
        let sign = far_field(m, energy, a).signum();
        if sign != prev_sign {
            changes += 1;
            if changes == m + 1 {
                return Ok(bisect(m, energy, a, prev_a, sign));
            }
        }
        prev_a = a;
        prev_sign = sign;
    }
    Err(OracleError::BracketMiss { m, energy })
}

fn bisect(m: u32, energy: f64, mut lo: f64, mut hi: f64, lo_sign: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= 1e-15 * mid {
            break;
        }
        if far_field(m, energy, mid).signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
