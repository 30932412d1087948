//! Liquidity, energy and force quantities of a volume-at-price distribution.
//!
//! For a level with volume `v` over a session of `t` seconds:
//! `v_t = v/t`, `v_tt = v/t²`, `m_t = p·v_t`, `E = p·v_tt`. The potential is
//! linear, `W = A·(p − p0)`, the restoring force is `F_R = −(1 − v/V)·v_tt`
//! and the transaction force is `F_T = v_tt`.
//!
//! Identity checks use natural units (`V/B² = 1`), in which a fitted Bessel
//! eigenvalue `ω²` is compared directly with `(v/V)·v_tt`.

pub mod units;

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fitting::FitResult;
use crate::marketdata::VolumeAtPrice;
use crate::models::ModelSpec;
use crate::report::SCHEMA_VERSION;
use units::{Dim, DimensionError, Quantity};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("dynamics need a single-Bessel fit, got {0}")]
    NotBesselFit(String),
    #[error("distribution and profile have different levels")]
    Misaligned,
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsProfile {
    pub prices: Vec<f64>,
    pub volumes: Vec<u64>,
    pub total_volume: u64,
    /// Session span `t` in seconds.
    pub session_span: f64,
    /// `v_t`, share/s.
    pub volume_liquidity: Vec<f64>,
    /// `v_tt`, share/s².
    pub volume_acceleration: Vec<f64>,
    /// `E = p·v_tt`, currency/s².
    pub transaction_energy: Vec<f64>,
    /// `m_t = p·v_t`, currency/s.
    pub amount_liquidity: Vec<f64>,
    /// `W = A·(p − p0)`, currency/s².
    pub potential: Vec<f64>,
    /// `F_R = −(1 − v/V)·v_tt`, share/s².
    pub restoring_force: Vec<f64>,
    /// `F_T = v_tt`, share/s².
    pub transaction_force: Vec<f64>,
    /// `(v/V)·v_tt` per level, the quantity that should equal `ω²`.
    pub omega_sq_check: Vec<f64>,
    /// Restoring-force magnitude `A`, the mean of `v_tt,i − ω²`.
    pub a: f64,
    pub omega: f64,
    pub p0: f64,
    /// Whether the fit behind `omega` and `p0` was significant.
    pub significant: bool,
}

/// Column names and units of the CSV export.
pub const PROFILE_COLUMNS: [(&str, Dim); 11] = [
    ("price", Dim::PRICE),
    ("volume", Dim::SHARE),
    ("volume_liquidity", Dim::SHARE_PER_SECOND),
    ("volume_acceleration", Dim::SHARE_PER_SECOND2),
    ("transaction_energy", Dim::CURRENCY_PER_SECOND2),
    ("amount_liquidity", Dim::CURRENCY_PER_SECOND),
    ("potential", Dim::CURRENCY_PER_SECOND2),
    ("restoring_force", Dim::SHARE_PER_SECOND2),
    ("transaction_force", Dim::SHARE_PER_SECOND2),
    ("omega_sq_check", Dim::SHARE_PER_SECOND2),
    ("implied_a", Dim::SHARE_PER_SECOND2),
];

/// Profile from a single-Bessel fit; `ω` and `p0` come from the fit.
pub fn compute_profile(dist: &VolumeAtPrice, fitted: &FitResult) -> Result<DynamicsProfile, DynamicsError> {
    match fitted.spec {
        ModelSpec::BesselSingle(b) => {
            let mut profile = compute_profile_with(dist, b.omega, b.p0)?;
            profile.significant = fitted.significant;
            Ok(profile)
        }
        other => Err(DynamicsError::NotBesselFit(other.family_name().into())),
    }
}

/// Profile for a given eigenvalue `ω` and equilibrium price `p0`.
pub fn compute_profile_with(dist: &VolumeAtPrice, omega: f64, p0: f64) -> Result<DynamicsProfile, DynamicsError> {
    let t = Quantity::new(dist.session_span, Dim::SECOND);
    let total = Quantity::new(dist.total_volume as f64, Dim::SHARE);
    let omega_sq = Quantity::new(omega * omega, Dim::SHARE_PER_SECOND2);
    let n = dist.len();
    let mut out = DynamicsProfile {
        prices: dist.prices.clone(),
        volumes: dist.volumes.clone(),
        total_volume: dist.total_volume,
        session_span: dist.session_span,
        volume_liquidity: Vec::with_capacity(n),
        volume_acceleration: Vec::with_capacity(n),
        transaction_energy: Vec::with_capacity(n),
        amount_liquidity: Vec::with_capacity(n),
        potential: Vec::with_capacity(n),
        restoring_force: Vec::with_capacity(n),
        transaction_force: Vec::with_capacity(n),
        omega_sq_check: Vec::with_capacity(n),
        a: 0.0,
        omega,
        p0,
        significant: false,
    };
    let mut a_sum = Quantity::new(0.0, Dim::SHARE_PER_SECOND2);
    for (&price, &volume) in dist.prices.iter().zip(&dist.volumes) {
        let p = Quantity::new(price, Dim::PRICE);
        let v = Quantity::new(volume as f64, Dim::SHARE);
        let vt = v / t;
        let vtt = v / (t * t);
        let share = v / total;
        let q = share * vtt;
        out.volume_liquidity.push(vt.expect(Dim::SHARE_PER_SECOND)?);
        out.volume_acceleration.push(vtt.expect(Dim::SHARE_PER_SECOND2)?);
        out.transaction_energy.push((p * vtt).expect(Dim::CURRENCY_PER_SECOND2)?);
        out.amount_liquidity.push((p * vt).expect(Dim::CURRENCY_PER_SECOND)?);
        out.transaction_force.push(vtt.expect(Dim::SHARE_PER_SECOND2)?);
        out.restoring_force.push((-(Quantity::new(1.0, Dim::NONE).minus(share)? * vtt)).expect(Dim::SHARE_PER_SECOND2)?);
        out.omega_sq_check.push(q.expect(Dim::SHARE_PER_SECOND2)?);
        a_sum = a_sum.plus(vtt.minus(omega_sq)?)?;
    }
    let a = Quantity::new(a_sum.value / n as f64, a_sum.dim);
    out.a = a.value;
    for &price in &dist.prices {
        let offset = Quantity::new(price - p0, Dim::PRICE);
        out.potential.push((a * offset).expect(Dim::CURRENCY_PER_SECOND2)?);
    }
    Ok(out)
}

/// `r_i = −E_i + (v_t,i²/V)·p'_i + W(p_i)` per level, in the equilibrium
/// frame `p' = p − p0` used by the potential.
///
/// Zero exactly when `A = (1 − v_i/V)·v_tt,i` at every level with `p' ≠ 0`.
pub fn check_energy_hypothesis(profile: &DynamicsProfile, dist: &VolumeAtPrice) -> Result<Vec<f64>, DynamicsError> {
    if profile.prices.len() != dist.len() || profile.volumes != dist.volumes {
        return Err(DynamicsError::Misaligned);
    }
    let total = Quantity::new(dist.total_volume as f64, Dim::SHARE);
    let mut out = Vec::with_capacity(dist.len());
    for i in 0..dist.len() {
        let offset = Quantity::new(dist.prices[i] - profile.p0, Dim::PRICE);
        let vt = Quantity::new(profile.volume_liquidity[i], Dim::SHARE_PER_SECOND);
        let vtt = Quantity::new(profile.volume_acceleration[i], Dim::SHARE_PER_SECOND2);
        let w = Quantity::new(profile.potential[i], Dim::CURRENCY_PER_SECOND2);
        let energy = offset * vtt;
        let kinetic = vt * vt / total * offset;
        out.push((-energy).plus(kinetic)?.plus(w)?.expect(Dim::CURRENCY_PER_SECOND2)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenIdentity {
    pub omega_sq: f64,
    /// `(v_i/V)·v_tt,i` per level.
    pub levels: Vec<f64>,
    /// `A_i = v_tt,i − ω²` per level.
    pub implied_a: Vec<f64>,
    /// Mean of `implied_a`.
    pub a_estimate: f64,
    /// `max_i |(v_i/V)·v_tt,i − ω²|`.
    pub max_deviation: f64,
    /// `(max − min)/mean` of `levels`; zero when constant.
    pub dispersion: f64,
}

/// Compares `(v_i/V)·v_tt,i` with `ω²` level by level.
pub fn check_eigenvalue_identity(dist: &VolumeAtPrice, omega: f64) -> EigenIdentity {
    let t = dist.session_span;
    let total = dist.total_volume as f64;
    let omega_sq = omega * omega;
    let vtt: Vec<f64> = dist.volumes.iter().map(|&v| v as f64 / (t * t)).collect();
    let levels: Vec<f64> = dist.volumes.iter().zip(&vtt).map(|(&v, a)| v as f64 / total * a).collect();
    let implied_a: Vec<f64> = vtt.iter().map(|a| a - omega_sq).collect();
    let n = levels.len() as f64;
    let mean = levels.iter().sum::<f64>() / n;
    let max = levels.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = levels.iter().cloned().fold(f64::INFINITY, f64::min);
    EigenIdentity {
        omega_sq,
        a_estimate: implied_a.iter().sum::<f64>() / n,
        max_deviation: levels.iter().map(|q| (q - omega_sq).abs()).fold(0.0, f64::max),
        dispersion: if mean > 0.0 { (max - min) / mean } else { 0.0 },
        levels,
        implied_a,
    }
}

/// CSV with a `# schema_version=N` line, a header row, a units row, then
/// one row per price level.
pub fn write_profile_csv<W: Write>(mut sink: W, profile: &DynamicsProfile) -> Result<(), DynamicsError> {
    writeln!(sink, "# schema_version={SCHEMA_VERSION}")?;
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(PROFILE_COLUMNS.iter().map(|(name, _)| name.to_string()))?;
    w.write_record(PROFILE_COLUMNS.iter().map(|(_, dim)| dim.to_string()))?;
    let omega_sq = profile.omega * profile.omega;
    for i in 0..profile.prices.len() {
        let row = [
            profile.prices[i],
            profile.volumes[i] as f64,
            profile.volume_liquidity[i],
            profile.volume_acceleration[i],
            profile.transaction_energy[i],
            profile.amount_liquidity[i],
            profile.potential[i],
            profile.restoring_force[i],
            profile.transaction_force[i],
            profile.omega_sq_check[i],
            profile.volume_acceleration[i] - omega_sq,
        ];
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// JSON envelope for a profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileExport {
    pub schema_version: u32,
    pub units: String,
    pub profile: DynamicsProfile,
}

impl ProfileExport {
    pub fn new(profile: DynamicsProfile) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            units: "natural units V/B^2 = 1; omega^2 compared directly with (v/V)*v_tt".into(),
            profile,
        }
    }
}
