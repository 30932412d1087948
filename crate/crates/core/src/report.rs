//! Versioned output envelopes and the plot-data CSV.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::marketdata::VolumeAtPrice;
use crate::models::ModelSpec;

/// Version of every JSON and CSV layout this crate writes.
pub const SCHEMA_VERSION: u32 = 1;

/// Wraps a JSON payload with the schema version and a kind tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versioned<T> {
    pub schema_version: u32,
    pub kind: String,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Versioned<T> {
    pub fn new(kind: &str, body: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: kind.to_string(),
            body,
        }
    }
}

/// `price,empirical_p,model_p,residual` per grid level, preceded by a
/// `# schema_version=N` comment line.
pub fn write_plot_csv<W: Write>(mut sink: W, dist: &VolumeAtPrice, spec: &ModelSpec) -> std::io::Result<()> {
    writeln!(sink, "# schema_version={SCHEMA_VERSION}")?;
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["price", "empirical_p", "model_p", "residual"])?;
    for (&p, &emp) in dist.prices.iter().zip(&dist.probabilities) {
        let model = spec.eval(p);
        w.write_record([
            format!("{p:.8}"),
            format!("{emp:e}"),
            format!("{model:e}"),
            format!("{:e}", emp - model),
        ])?;
    }
    w.flush()
}
