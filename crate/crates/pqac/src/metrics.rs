//! Per-episode metrics CSV.
//!
//! ```text
//! # pqac-metrics v1 condition=<label> env=<name>
//! run_id,seed,episode,train_return,eval_iqm,mean_abs_weight,bound_lo,bound_hi,wall_clock_ms
//! ```
//!
//! `eval_iqm` is blank on episodes without an evaluation; `wall_clock_ms` is
//! blank unless timing was requested.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const METRICS_VERSION: &str = "pqac-metrics v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub run_id: String,
    pub seed: u64,
    pub episode: usize,
    /// Undiscounted task return of the training episode.
    pub train_return: f64,
    pub eval_iqm: Option<f64>,
    pub mean_abs_weight: f64,
    pub bound_lo: f64,
    pub bound_hi: f64,
    pub wall_clock_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricsHeader {
    pub condition: String,
    pub env: String,
}

impl MetricsHeader {
    fn render(&self) -> String {
        format!("# {METRICS_VERSION} condition={} env={}\n", self.condition, self.env)
    }

    fn parse(line: &str, path: &Path) -> Result<Self> {
        let rest = line
            .strip_prefix("# ")
            .and_then(|l| l.strip_prefix(METRICS_VERSION))
            .ok_or_else(|| HarnessError::format(path, format!("first line must start with `# {METRICS_VERSION}`")))?;
        let mut condition = None;
        let mut env = None;
        for field in rest.split_whitespace() {
            match field.split_once('=') {
                Some(("condition", v)) => condition = Some(v.to_string()),
                Some(("env", v)) => env = Some(v.to_string()),
                _ => {}
            }
        }
        match (condition, env) {
            (Some(condition), Some(env)) => Ok(Self { condition, env }),
            _ => Err(HarnessError::format(path, "header comment lacks condition= or env=")),
        }
    }
}

/// CSV text for `rows`, header comment included.
pub fn render_metrics(header: &MetricsHeader, rows: &[MetricsRow]) -> Result<Vec<u8>> {
    let mut out = header.render().into_bytes();
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .has_headers(false)
        .from_writer(Vec::new());
    writer.write_record([
        "run_id",
        "seed",
        "episode",
        "train_return",
        "eval_iqm",
        "mean_abs_weight",
        "bound_lo",
        "bound_hi",
        "wall_clock_ms",
    ])?;
    for row in rows {
        writer.serialize(row)?;
    }
    let body = writer.into_inner().map_err(|e| HarnessError::format("<metrics>", e.to_string()))?;
    out.write_all(&body).expect("writing to a Vec");
    Ok(out)
}

pub fn write_metrics(path: &Path, header: &MetricsHeader, rows: &[MetricsRow]) -> Result<()> {
    fs::write(path, render_metrics(header, rows)?).map_err(HarnessError::io(path))
}

pub fn read_metrics(path: &Path) -> Result<(MetricsHeader, Vec<MetricsRow>)> {
    let text = fs::read_to_string(path).map_err(HarnessError::io(path))?;
    let (first, body) = text.split_once('\n').unwrap_or((&text, ""));
    let header = MetricsHeader::parse(first, path)?;
    let rows = csv::Reader::from_reader(body.as_bytes())
        .deserialize()
        .collect::<Result<Vec<MetricsRow>, _>>()?;
    Ok((header, rows))
}
