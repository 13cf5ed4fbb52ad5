use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::manifest::RunManifest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A result in both renderings; CSV is optional for nested reports.
pub struct Artifact {
    pub json: Value,
    pub csv: Option<Table>,
    pub default: Format,
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

impl Artifact {
    pub fn report(result: &impl Serialize) -> Result<Self> {
        Ok(Artifact { json: serde_json::to_value(result)?, csv: None, default: Format::Json })
    }

    pub fn table(result: &impl Serialize, table: Table) -> Result<Self> {
        Ok(Artifact { json: serde_json::to_value(result)?, csv: Some(table), default: Format::Csv })
    }

    pub fn with_csv(mut self, table: Table) -> Self {
        self.csv = Some(table);
        self
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render(artifact: &Artifact, format: Option<Format>, manifest: &RunManifest) -> Result<String> {
    match format.unwrap_or(artifact.default) {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                manifest: &'a RunManifest,
                result: &'a Value,
            }
            let mut s = serde_json::to_string_pretty(&Doc { manifest, result: &artifact.json })?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let table = artifact
                .csv
                .as_ref()
                .context("this command has no CSV rendering; use --format json")?;
            let mut s = String::new();
            let m = serde_json::to_value(manifest)?;
            for (k, v) in m.as_object().into_iter().flatten() {
                s.push_str(&format!("# {k}: {v}\n"));
            }
            let line = |cells: &[String]| cells.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
            s.push_str(&line(&table.header));
            s.push('\n');
            for r in &table.rows {
                s.push_str(&line(r));
                s.push('\n');
            }
            Ok(s)
        }
    }
}

pub fn write(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(text.as_bytes())?;
            Ok(o.flush()?)
        }
    }
}
