//! Result persistence: `results.csv`, `manifest.json`, `config.toml`.

use std::fs;
use std::io;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Study};
use crate::studies::{sampled_columns, Row, Table, Value};

/// Bumped whenever a study's column list or a column's meaning changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultManifest {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub study: Study,
    pub config_hash: String,
    pub config: ExperimentConfig,
    /// Seconds since the Unix epoch.
    pub created: u64,
    pub complete: bool,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl ResultManifest {
    pub fn new(config: &ExperimentConfig, table: Table) -> Self {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        ResultManifest {
            schema: SCHEMA_VERSION,
            tool: "anyonlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            study: config.study,
            config_hash: config.hash(),
            config: config.clone(),
            created,
            complete: table.is_complete(),
            columns: table.columns,
            rows: table.rows,
        }
    }

    pub fn table(&self) -> Table {
        Table {
            study: self.study,
            columns: self.columns.clone(),
            rows: self.rows.clone(),
        }
    }

    pub fn load(dir: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(dir.join("manifest.json"))?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

/// CSV text with a trailing `status` column.
pub fn csv_text(table: &Table) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = table.columns.clone();
    header.push("status".into());
    w.write_record(&header).expect("in-memory write");
    for r in &table.rows {
        let mut rec: Vec<String> = r.values.iter().map(Value::to_cell).collect();
        rec.push(r.status.name().into());
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

pub fn write_outputs(dir: &Path, m: &ResultManifest) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), csv_text(&m.table()))?;
    fs::write(dir.join("manifest.json"), m.to_json())?;
    fs::write(dir.join("config.toml"), m.config.to_toml())
}

/// A complete manifest for the same normalized config, if one exists.
pub fn cached(dir: &Path, config: &ExperimentConfig) -> Option<ResultManifest> {
    let m = ResultManifest::load(dir).ok()?;
    (m.config_hash == config.hash() && m.complete && m.schema == SCHEMA_VERSION).then_some(m)
}

/// Normalize values through the manifest encoding so that fresh and loaded
/// tables compare cell by cell.
fn reencode(rows: &[Row]) -> Vec<Row> {
    serde_json::from_str(&serde_json::to_string(rows).expect("rows serialize")).expect("rows deserialize")
}

/// Differences between a recorded table and a recomputation: exact for
/// deterministic cells, within three combined standard errors for sampled
/// estimates.
pub fn compare(recorded: &Table, fresh: &Table) -> Vec<String> {
    let mut out = Vec::new();
    if recorded.columns != fresh.columns {
        out.push("column lists differ".into());
        return out;
    }
    if recorded.rows.len() != fresh.rows.len() {
        out.push(format!("{} recorded rows, {} recomputed", recorded.rows.len(), fresh.rows.len()));
        return out;
    }
    let sampled: Vec<(usize, usize)> = sampled_columns(recorded.study)
        .iter()
        .filter_map(|(v, e)| Some((recorded.column(v)?, recorded.column(e)?)))
        .collect();
    let fresh_rows = reencode(&fresh.rows);
    for (i, (a, b)) in recorded.rows.iter().zip(&fresh_rows).enumerate() {
        if a.status != b.status {
            out.push(format!("row {i}: status {} vs {}", a.status.name(), b.status.name()));
        }
        for (j, (x, y)) in a.values.iter().zip(&b.values).enumerate() {
            if x == y || sampled.iter().any(|&(_, e)| e == j) {
                continue;
            }
            let within = sampled.iter().find(|(v, _)| *v == j).and_then(|&(_, e)| {
                let (xa, xb) = (x.as_f64()?, y.as_f64()?);
                let (ea, eb) = (a.values[e].as_f64()?, b.values[e].as_f64()?);
                Some((xa - xb).abs() <= 3.0 * ea.hypot(eb))
            });
            if within != Some(true) {
                out.push(format!("row {i}, {}: {} vs {}", recorded.columns[j], x.to_cell(), y.to_cell()));
            }
        }
    }
    out
}
