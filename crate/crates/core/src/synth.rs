//! Seeded synthetic trade streams whose volume-at-price follows a model.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::marketdata::{grid_index, TradeRecord};
use crate::models::{normalize_on_prices, ModelError, ModelSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid synthesis config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn default_session() -> f64 {
    14_400.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub spec: ModelSpec,
    pub tick: f64,
    /// Inclusive price range; both ends must lie on the tick grid.
    pub price_range: [f64; 2],
    pub total_volume: u64,
    /// Requested trade count. Every level with volume gets at least one
    /// trade, so the output may contain more.
    pub trades: u64,
    /// Multiplicative per-level noise level σ.
    pub noise: f64,
    pub seed: u64,
    /// Session length in seconds; timestamps span exactly this interval.
    #[serde(default = "default_session")]
    pub session_seconds: f64,
    /// Timestamp of the first trade, in milliseconds.
    #[serde(default)]
    pub start_ms: i64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        self.spec.validate()?;
        let [lo, hi] = self.price_range;
        if !(self.tick.is_finite() && self.tick > 0.0) {
            return bad(format!("tick must be > 0, got {}", self.tick));
        }
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            return bad(format!("price range [{lo}, {hi}] must be positive and increasing"));
        }
        if grid_index(lo, self.tick).is_none() || grid_index(hi, self.tick).is_none() {
            return bad("price range ends must lie on the tick grid".into());
        }
        for c in self.spec.centers() {
            if !(lo < c && c < hi) {
                return bad(format!("center {c} lies outside ({lo}, {hi})"));
            }
        }
        if self.trades < 1 || self.total_volume < self.trades {
            return bad(format!(
                "need total_volume >= trades >= 1, got {} and {}",
                self.total_volume, self.trades
            ));
        }
        if !(self.noise >= 0.0 && self.noise < 1.0) {
            return bad(format!("noise must be in [0, 1), got {}", self.noise));
        }
        if !(self.session_seconds.is_finite() && self.session_seconds >= 0.0) {
            return bad(format!("session_seconds must be >= 0, got {}", self.session_seconds));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        let lo = grid_index(self.price_range[0], self.tick).unwrap_or(0);
        let hi = grid_index(self.price_range[1], self.tick).unwrap_or(0);
        (lo..=hi).map(|i| i as f64 * self.tick).collect()
    }
}

/// Splits `total` into integer parts proportional to `weights`, assigning the
/// leftover units to the largest fractional remainders (ties to the lower
/// index). The parts always sum to `total`.
pub fn largest_remainder(total: u64, weights: &[f64]) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum.is_nan() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut parts: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let assigned: u64 = parts.iter().sum();
    // float quotas can overshoot by a unit when total is large
    let mut order: Vec<usize> = (0..weights.len()).collect();
    if assigned <= total {
        order.sort_by(|&a, &b| {
            let fa = quotas[a] - quotas[a].floor();
            let fb = quotas[b] - quotas[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        let mut left = total - assigned;
        let mut i = 0;
        while left > 0 {
            let j = order[i % order.len()];
            if weights[j] > 0.0 {
                parts[j] += 1;
                left -= 1;
            }
            i += 1;
        }
    } else {
        order.sort_by(|&a, &b| parts[b].cmp(&parts[a]).then(a.cmp(&b)));
        let mut extra = assigned - total;
        let mut i = 0;
        while extra > 0 {
            let j = order[i % order.len()];
            if parts[j] > 0 {
                parts[j] -= 1;
                extra -= 1;
            }
            i += 1;
        }
    }
    parts
}

/// Expected-volume weight per level with multiplicative noise applied.
fn noisy_weights(curve: &[f64], noise: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    curve
        .iter()
        .map(|&c| {
            let z: f64 = rng.sample(StandardNormal);
            c * (1.0 + noise * z.clamp(-3.0, 3.0)).max(0.0)
        })
        .collect()
}

/// Turns per-level volumes into timestamped trades.
fn emit_trades(
    prices: &[f64],
    volumes: &[u64],
    requested: u64,
    session_seconds: f64,
    start_ms: i64,
    rng: &mut ChaCha8Rng,
) -> Vec<TradeRecord> {
    let weights: Vec<f64> = volumes.iter().map(|&v| v as f64).collect();
    let nonzero = volumes.iter().filter(|&&v| v > 0).count() as u64;
    let requested = requested.max(nonzero);
    // one trade per active level, the rest in proportion to volume
    let extra = largest_remainder(requested - nonzero, &weights);
    let mut trades = Vec::with_capacity(requested as usize);
    for ((&price, &v), &e) in prices.iter().zip(volumes).zip(&extra) {
        if v == 0 {
            continue;
        }
        let count = (1 + e).min(v);
        let sizes: Vec<f64> = (0..count).map(|_| rng.random_range(0.5..1.5)).collect();
        let mut parts = largest_remainder(v - count, &sizes);
        for p in &mut parts {
            *p += 1;
        }
        for size in parts {
            trades.push(TradeRecord { timestamp: 0, price, volume: size });
        }
    }
    trades.shuffle(rng);
    let n = trades.len();
    let session_ms = session_seconds * 1000.0;
    for (j, t) in trades.iter_mut().enumerate() {
        let frac = if n > 1 { j as f64 / (n - 1) as f64 } else { 0.0 };
        t.timestamp = start_ms + (frac * session_ms).round() as i64;
    }
    trades
}

fn generate_from_curve(
    prices: &[f64],
    curve: &[f64],
    config: &SynthConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<TradeRecord>, SynthError> {
    let weights = if config.noise > 0.0 {
        noisy_weights(curve, config.noise, rng)
    } else {
        curve.to_vec()
    };
    let total = weights.iter().sum::<f64>();
    if total.is_nan() || total <= 0.0 {
        return Err(ModelError::DegenerateCurve.into());
    }
    let volumes = largest_remainder(config.total_volume, &weights);
    Ok(emit_trades(
        prices,
        &volumes,
        config.trades,
        config.session_seconds,
        config.start_ms,
        rng,
    ))
}

/// Trades whose per-level volume follows `config.spec` normalized on the
/// tick grid of the price range, with multiplicative noise `1 + σ·z`
/// (`z` standard normal clamped to ±3, negative weights floored at 0).
/// The total volume is conserved exactly.
pub fn generate(config: &SynthConfig) -> Result<Vec<TradeRecord>, SynthError> {
    config.validate()?;
    let prices = config.grid();
    let curve = normalize_on_prices(&config.spec, &prices)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    generate_from_curve(&prices, &curve.values, config, &mut rng)
}

/// Same as [`generate`] with the spec ignored: equal expected volume on every
/// level of the price range.
pub fn generate_uniform(config: &SynthConfig) -> Result<Vec<TradeRecord>, SynthError> {
    config.validate()?;
    let prices = config.grid();
    let curve = vec![1.0 / prices.len() as f64; prices.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    generate_from_curve(&prices, &curve, config, &mut rng)
}

/// A session whose equilibrium jumps: the first `mix` fraction of volume and
/// time follows `config.spec`, the rest the same shape moved to
/// `second_center`. `mix = 1` reproduces [`generate`].
pub fn generate_two_equilibrium(
    config: &SynthConfig,
    second_center: f64,
    mix: f64,
) -> Result<Vec<TradeRecord>, SynthError> {
    config.validate()?;
    let [lo, hi] = config.price_range;
    if !(lo < second_center && second_center < hi) {
        return Err(SynthError::InvalidConfig(format!(
            "second center {second_center} lies outside ({lo}, {hi})"
        )));
    }
    if !(mix > 0.0 && mix <= 1.0) {
        return Err(SynthError::InvalidConfig(format!("mix must be in (0, 1], got {mix}")));
    }
    if mix == 1.0 {
        return generate(config);
    }
    let first_volume = ((config.total_volume as f64 * mix).round() as u64).clamp(1, config.total_volume - 1);
    let first_trades = ((config.trades as f64 * mix).round() as u64).clamp(1, first_volume);
    let first = SynthConfig {
        total_volume: first_volume,
        trades: first_trades,
        session_seconds: config.session_seconds * mix,
        ..config.clone()
    };
    let delta = second_center - config.spec.centers()[0];
    let second_volume = config.total_volume - first_volume;
    let first_span_ms = (first.session_seconds * 1000.0).round() as i64;
    let second = SynthConfig {
        spec: config.spec.translated(delta),
        total_volume: second_volume,
        trades: config.trades.saturating_sub(first_trades).clamp(1, second_volume),
        session_seconds: config.session_seconds - first.session_seconds,
        seed: config.seed.wrapping_add(0x9E37_79B9_7F4A_7C15),
        start_ms: config.start_ms + first_span_ms,
        ..config.clone()
    };
    let prices = config.grid();
    let mut trades = Vec::new();
    for part in [&first, &second] {
        let curve = normalize_on_prices(&part.spec, &prices)?;
        let mut rng = ChaCha8Rng::seed_from_u64(part.seed);
        trades.extend(generate_from_curve(&prices, &curve.values, part, &mut rng)?);
    }
    Ok(trades)
}
