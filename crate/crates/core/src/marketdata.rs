//! Trade ingestion and volume-at-price binning.

use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::SCHEMA_VERSION;

/// Default price-grid step, in currency units per share.
pub const DEFAULT_TICK: f64 = 0.01;

/// One executed trade.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    /// Milliseconds since the epoch.
    pub timestamp: i64,
    /// Currency units per share, strictly positive.
    pub price: f64,
    /// Shares.
    pub volume: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum MarketDataError {
    #[error("no trade rows in input")]
    EmptyInput,
    #[error("row {row}: cannot parse field `{field}`")]
    ParseError { row: usize, field: String },
    #[error("row {row}: price must be strictly positive")]
    NonPositivePrice { row: usize },
    #[error("row {row}: price is not within half a tick of a grid level")]
    OffGridPrice { row: usize },
    #[error("no trades to bin")]
    EmptyTrades,
    #[error("tick must be finite and strictly positive, got {0}")]
    InvalidTick(f64),
    #[error("total volume is zero")]
    ZeroVolume,
    #[error("distribution arrays are inconsistent: {0}")]
    Inconsistent(String),
}

/// Accumulated volume per price level over one session.
///
/// The grid is contiguous: every level between the lowest and highest traded
/// price is present, with zero volume where nothing traded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeAtPrice {
    pub tick: f64,
    /// Integer tick index of the first level (`prices[0] = first_level · tick`).
    pub first_level: i64,
    pub prices: Vec<f64>,
    pub volumes: Vec<u64>,
    pub total_volume: u64,
    pub probabilities: Vec<f64>,
    /// Trading interval in seconds, at least 1.
    pub session_span: f64,
}

impl VolumeAtPrice {
    /// Builds a distribution from per-level volumes on a contiguous grid
    /// starting at tick index `first_level`.
    pub fn from_levels(
        tick: f64,
        first_level: i64,
        volumes: Vec<u64>,
        session_span: f64,
    ) -> Result<Self, MarketDataError> {
        check_tick(tick)?;
        if volumes.is_empty() {
            return Err(MarketDataError::EmptyTrades);
        }
        let total_volume: u64 = volumes.iter().sum();
        if total_volume == 0 {
            return Err(MarketDataError::ZeroVolume);
        }
        let total = total_volume as f64;
        let probabilities = volumes.iter().map(|&v| v as f64 / total).collect();
        let prices = (0..volumes.len() as i64)
            .map(|i| (first_level + i) as f64 * tick)
            .collect();
        Ok(Self {
            tick,
            first_level,
            prices,
            volumes,
            total_volume,
            probabilities,
            session_span: session_span.max(1.0),
        })
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn min_price(&self) -> f64 {
        self.prices[0]
    }

    pub fn max_price(&self) -> f64 {
        self.prices[self.prices.len() - 1]
    }

    /// Returns the same distribution with every volume multiplied by `factor`.
    pub fn scale_volumes(&self, factor: u64) -> Result<Self, MarketDataError> {
        let volumes = self.volumes.iter().map(|v| v * factor).collect();
        Self::from_levels(self.tick, self.first_level, volumes, self.session_span)
    }

    /// Returns the same distribution moved by `ticks` grid steps.
    pub fn shift_levels(&self, ticks: i64) -> Result<Self, MarketDataError> {
        Self::from_levels(
            self.tick,
            self.first_level + ticks,
            self.volumes.clone(),
            self.session_span,
        )
    }

    /// Checks the structural invariants after deserialization.
    pub fn validate(&self) -> Result<(), MarketDataError> {
        check_tick(self.tick)?;
        let n = self.prices.len();
        if n == 0 {
            return Err(MarketDataError::EmptyTrades);
        }
        if self.volumes.len() != n || self.probabilities.len() != n {
            return Err(MarketDataError::Inconsistent("array lengths differ".into()));
        }
        if self.volumes.iter().sum::<u64>() != self.total_volume {
            return Err(MarketDataError::Inconsistent("total_volume mismatch".into()));
        }
        if self.total_volume == 0 {
            return Err(MarketDataError::ZeroVolume);
        }
        Ok(())
    }

    pub fn to_export(&self) -> DistributionExport {
        DistributionExport {
            schema_version: SCHEMA_VERSION,
            tick: self.tick,
            prices: self.prices.clone(),
            volumes: self.volumes.clone(),
            total_volume: self.total_volume,
            session_span_s: self.session_span,
        }
    }
}

/// JSON export layout of a distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionExport {
    pub schema_version: u32,
    pub tick: f64,
    pub prices: Vec<f64>,
    pub volumes: Vec<u64>,
    pub total_volume: u64,
    pub session_span_s: f64,
}

fn check_tick(tick: f64) -> Result<(), MarketDataError> {
    if tick.is_finite() && tick > 0.0 {
        Ok(())
    } else {
        Err(MarketDataError::InvalidTick(tick))
    }
}

/// Reads `timestamp,price,volume` CSV and returns timestamp-sorted trades.
/// Lines starting with `#` are skipped.
///
/// Row indices in errors count data rows from 1 (the header is row 0).
pub fn ingest_trades<R: Read>(source: R) -> Result<Vec<TradeRecord>, MarketDataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source);
    let mut trades = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|_| MarketDataError::ParseError {
            row,
            field: "record".into(),
        })?;
        let field = |idx: usize, name: &str| {
            record.get(idx).ok_or_else(|| MarketDataError::ParseError {
                row,
                field: name.into(),
            })
        };
        let parse_err = |name: &str| MarketDataError::ParseError {
            row,
            field: name.into(),
        };
        let timestamp: i64 = field(0, "timestamp")?
            .parse()
            .map_err(|_| parse_err("timestamp"))?;
        let price: f64 = field(1, "price")?.parse().map_err(|_| parse_err("price"))?;
        if !price.is_finite() {
            return Err(parse_err("price"));
        }
        if price <= 0.0 {
            return Err(MarketDataError::NonPositivePrice { row });
        }
        let volume: u64 = field(2, "volume")?
            .parse()
            .map_err(|_| parse_err("volume"))?;
        trades.push(TradeRecord {
            timestamp,
            price,
            volume,
        });
    }
    if trades.is_empty() {
        return Err(MarketDataError::EmptyInput);
    }
    trades.sort_by_key(|t| t.timestamp);
    Ok(trades)
}

/// Writes trades in the same CSV layout [`ingest_trades`] reads, after a
/// `# schema_version=N` comment line.
pub fn write_trades<W: std::io::Write>(mut sink: W, trades: &[TradeRecord]) -> std::io::Result<()> {
    writeln!(sink, "# schema_version={}", crate::report::SCHEMA_VERSION)?;
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(["timestamp", "price", "volume"])?;
    for t in trades {
        writer.write_record([
            t.timestamp.to_string(),
            format_price(t.price),
            t.volume.to_string(),
        ])?;
    }
    writer.flush()
}

fn format_price(price: f64) -> String {
    // shortest representation that round-trips; grid prices print cleanly
    // once the representation error of idx·tick is rounded away
    let rounded = format!("{price:.8}");
    let trimmed = rounded.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}

/// Nearest grid index for `price`, or `None` when the price sits on a
/// half-tick boundary and cannot be assigned unambiguously.
pub fn grid_index(price: f64, tick: f64) -> Option<i64> {
    let x = price / tick;
    let idx = x.round_ties_even();
    if (x - idx).abs() >= 0.5 - 1e-9 {
        None
    } else {
        Some(idx as i64)
    }
}

/// Accumulates trade volume per tick level.
pub fn build_distribution(trades: &[TradeRecord], tick: f64) -> Result<VolumeAtPrice, MarketDataError> {
    check_tick(tick)?;
    if trades.is_empty() {
        return Err(MarketDataError::EmptyTrades);
    }
    let mut indices = Vec::with_capacity(trades.len());
    for (i, t) in trades.iter().enumerate() {
        if t.price.is_nan() || t.price <= 0.0 {
            return Err(MarketDataError::NonPositivePrice { row: i + 1 });
        }
        let idx = grid_index(t.price, tick).ok_or(MarketDataError::OffGridPrice { row: i + 1 })?;
        indices.push(idx);
    }
    let lo = *indices.iter().min().unwrap();
    let hi = *indices.iter().max().unwrap();
    let mut volumes = vec![0u64; (hi - lo + 1) as usize];
    for (t, idx) in trades.iter().zip(&indices) {
        volumes[(idx - lo) as usize] += t.volume;
    }
    let first = trades.iter().map(|t| t.timestamp).min().unwrap();
    let last = trades.iter().map(|t| t.timestamp).max().unwrap();
    let span = (last - first) as f64 / 1000.0;
    VolumeAtPrice::from_levels(tick, lo, volumes, span)
}

/// Volume-weighted mean price.
pub fn price_mean(dist: &VolumeAtPrice) -> f64 {
    dist.probabilities
        .iter()
        .zip(&dist.prices)
        .map(|(p, x)| p * x)
        .sum()
}
