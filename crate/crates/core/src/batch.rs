//! Ladder runs over many distributions and the batch CSV report.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fitting::{run_ladder, FitOptions, FitResult, LadderReport};
use crate::marketdata::{build_distribution, ingest_trades, VolumeAtPrice};
use crate::models::ModelSpec;
use crate::report::SCHEMA_VERSION;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub file: String,
    /// `ok` or `error`.
    pub status: String,
    pub family: Option<String>,
    /// `ω` (Bessel families) or `√A` (Kummer); the first center's for
    /// superpositions.
    pub rate: Option<f64>,
    pub p0: Option<f64>,
    pub rate2: Option<f64>,
    pub p02: Option<f64>,
    pub r_squared: Option<f64>,
    pub r_squared_crit: Option<f64>,
    pub significant: bool,
    /// Ladder index of the chosen family.
    pub ladder_step: Option<usize>,
    pub error: Option<String>,
}

impl BatchRow {
    pub fn failed(file: &str, error: String) -> Self {
        Self {
            file: file.to_string(),
            status: "error".into(),
            family: None,
            rate: None,
            p0: None,
            rate2: None,
            p02: None,
            r_squared: None,
            r_squared_crit: None,
            significant: false,
            ladder_step: None,
            error: Some(error),
        }
    }

    /// Row for a ladder: the chosen fit, or the last attempted one.
    pub fn from_ladder(file: &str, report: &LadderReport) -> Self {
        let Some(result) = report.chosen_result().or_else(|| report.last_result()) else {
            let reason = report
                .attempts
                .iter()
                .filter_map(|a| a.error.clone())
                .next_back()
                .unwrap_or_else(|| "no attempt produced a fit".into());
            return Self::failed(file, reason);
        };
        let mut row = Self::from_fit(file, result);
        row.ladder_step = report.chosen;
        row
    }

    pub fn from_fit(file: &str, result: &FitResult) -> Self {
        let (rate, p0, rate2, p02) = match result.spec {
            ModelSpec::BesselSingle(b) => (b.omega, b.p0, None, None),
            ModelSpec::BesselSuperposition(s) => (s.omega1, s.p01, Some(s.omega2), Some(s.p02)),
            ModelSpec::Kummer(k) => (k.sqrt_a(), k.p0, None, None),
        };
        Self {
            file: file.to_string(),
            status: "ok".into(),
            family: Some(result.family.label()),
            rate: Some(rate),
            p0: Some(p0),
            rate2,
            p02,
            r_squared: Some(result.r_squared),
            r_squared_crit: Some(result.r_squared_crit),
            significant: result.significant,
            ladder_step: None,
            error: None,
        }
    }
}

/// Reads a trade CSV and bins it.
pub fn load_distribution(path: &Path, tick: f64) -> Result<VolumeAtPrice, String> {
    let file = std::fs::File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let trades = ingest_trades(std::io::BufReader::new(file)).map_err(|e| e.to_string())?;
    build_distribution(&trades, tick).map_err(|e| e.to_string())
}

/// Loads and ladders one file; failures become error rows.
pub fn analyze_file(path: &Path, tick: f64, options: &FitOptions) -> BatchRow {
    let name = path.display().to_string();
    match load_distribution(path, tick) {
        Ok(dist) => BatchRow::from_ladder(&name, &run_ladder(&dist, options)),
        Err(e) => BatchRow::failed(&name, e),
    }
}

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
/// Results keep input order.
pub fn ordered_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Ladders every file; rows come back in input order.
pub fn run_batch(paths: &[std::path::PathBuf], tick: f64, options: &FitOptions) -> Vec<BatchRow> {
    ordered_map(paths, |p| analyze_file(p, tick, options))
}

/// Share of rows whose chosen model is significant.
pub fn significant_fraction(rows: &[BatchRow]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    rows.iter().filter(|r| r.significant).count() as f64 / rows.len() as f64
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

/// Batch CSV: `# schema_version=N`, a header, one row per sample, then a
/// `# significant_fraction=k/n=f` footer.
pub fn write_batch_csv<W: Write>(mut sink: W, rows: &[BatchRow]) -> std::io::Result<()> {
    writeln!(sink, "# schema_version={SCHEMA_VERSION}")?;
    {
        let mut w = csv::Writer::from_writer(&mut sink);
        w.write_record([
            "file",
            "status",
            "family",
            "omega_or_sqrt_a",
            "p0",
            "omega2",
            "p02",
            "r_squared",
            "r_squared_crit",
            "significant",
            "ladder_step",
            "error",
        ])?;
        for r in rows {
            w.write_record([
                r.file.clone(),
                r.status.clone(),
                opt(&r.family),
                opt(&r.rate),
                opt(&r.p0),
                opt(&r.rate2),
                opt(&r.p02),
                opt(&r.r_squared),
                opt(&r.r_squared_crit),
                r.significant.to_string(),
                opt(&r.ladder_step),
                opt(&r.error),
            ])?;
        }
        w.flush()?;
    }
    let k = rows.iter().filter(|r| r.significant).count();
    writeln!(
        sink,
        "# significant_fraction={k}/{}={:.4}",
        rows.len(),
        significant_fraction(rows)
    )
}
