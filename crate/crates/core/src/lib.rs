//! Volume-at-price distribution modelling.
//!
//! Intraday trade volume accumulated over a price range is modelled by the
//! absolute value of a stationary wave function in the price coordinate. Two
//! analytical eigenfunction families are provided: zero-order Bessel
//! functions `C·|J0(ω(p − p0))|` (and the superposition of two of them), and
//! the exponential-times-Kummer family `C·e^{−√A|p−p0|}·|F(−m, 1, 2√A|p−p0|)|`.
//!
//! The crate is organised as a pipeline:
//!
//! * [`marketdata`] ingests trades and bins them on a tick grid,
//! * [`models`] evaluates the eigenfunction families,
//! * [`fitting`] estimates parameters, scores significance and runs the
//!   model-selection ladder,
//! * [`dynamics`] derives the liquidity, energy and force quantities,
//! * [`oracle`] verifies the closed forms against their governing ODEs,
//! * [`synth`] generates trade streams from a model for testing.

pub mod batch;
pub mod dynamics;
pub mod fitting;
pub mod marketdata;
pub mod models;
pub mod oracle;
pub mod report;
pub mod specfun;
pub mod synth;

pub use fitting::{fit, run_ladder, FitError, FitFamily, FitOptions, FitResult, LadderReport};
pub use marketdata::{build_distribution, ingest_trades, price_mean, MarketDataError, TradeRecord, VolumeAtPrice};
pub use models::{ModelCurve, ModelError, ModelSpec};
