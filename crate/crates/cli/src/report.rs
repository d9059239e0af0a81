//! Provenance metadata and CSV/JSON writers.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub wall_clock: u64,
    pub config: RunConfig,
}

impl Metadata {
    /// `wall_clock` is `timestamp` when given, then `SOURCE_DATE_EPOCH`, then now.
    pub fn new(command: &str, config: &RunConfig, timestamp: Option<u64>) -> Self {
        let wall_clock = timestamp
            .or_else(|| std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok()))
            .unwrap_or_else(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            });
        Self {
            tool: "bmhull",
            version: VERSION,
            command: command.to_string(),
            seed: config.seed,
            wall_clock,
            config: config.clone(),
        }
    }

    /// Leading `#` comment lines for CSV files.
    pub fn csv_preamble(&self) -> String {
        format!(
            "# tool={} version={} command={} seed={} wall_clock={}\n# config={}\n",
            self.tool,
            self.version,
            self.command,
            self.seed,
            self.wall_clock,
            serde_json::to_string(&self.config).expect("config serializes")
        )
    }
}

/// A CSV table with mandatory header.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, meta: &Metadata) -> String {
        let mut s = meta.csv_preamble();
        s.push_str(&self.header.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    /// Rows as objects keyed by the header.
    pub fn to_json(&self, meta: &Metadata) -> String {
        let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|r| {
                self.header
                    .iter()
                    .zip(r)
                    .map(|(h, c)| (h.clone(), serde_json::Value::String(c.clone())))
                    .collect()
            })
            .collect();
        let doc = serde_json::json!({ "metadata": meta, "header": self.header, "rows": rows });
        serde_json::to_string_pretty(&doc).expect("table serializes") + "\n"
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `{"metadata": .., "data": ..}` as pretty JSON.
pub fn json_document<T: Serialize>(meta: &Metadata, data: &T) -> Result<String> {
    let doc = serde_json::json!({ "metadata": meta, "data": data });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes to `path` or, when absent, to stdout.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).context("writing to stdout")?;
            out.flush().context("writing to stdout")
        }
    }
}
