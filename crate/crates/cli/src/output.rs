//! Artifacts of a run: the JSON report, CSV tables, SVG plots and the
//! manifest. Nothing written here depends on wall-clock time.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// A numeric table with a header row.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| number(v)))?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

/// Shortest round-trip text, switching to exponent form for very large or
/// small magnitudes.
pub fn number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// What a command produced. `passed` is false when a hypothesis or
/// validation check failed (exit code 2).
#[derive(Debug)]
pub struct Outcome {
    pub report: Value,
    pub tables: Vec<(String, Table)>,
    pub plots: Vec<(String, String)>,
    pub passed: bool,
}

impl Outcome {
    pub fn new(report: Value, passed: bool) -> Self {
        Outcome { report, tables: Vec::new(), plots: Vec::new(), passed }
    }

    pub fn table(mut self, name: &str, t: Table) -> Self {
        self.tables.push((name.to_string(), t));
        self
    }
}

#[derive(Debug, Serialize)]
struct ArtifactEntry {
    name: String,
    bytes: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a Value,
    mcf_threads: Option<usize>,
    passed: bool,
    artifacts: Vec<ArtifactEntry>,
}

/// Writes every artifact and the manifest into `dir`.
pub fn write_all(dir: &Path, command: &str, config: &Value, threads: Option<usize>, out: &Outcome) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files: Vec<(String, String)> = vec![("report.json".into(), pretty(&out.report)?)];
    for (name, t) in &out.tables {
        files.push((format!("{name}.csv"), t.to_csv()?));
    }
    for (name, svg) in &out.plots {
        files.push((format!("{name}.svg"), svg.clone()));
    }
    let mut artifacts = Vec::new();
    for (name, body) in &files {
        fs::write(dir.join(name), body).with_context(|| format!("writing {name}"))?;
        artifacts.push(ArtifactEntry { name: name.clone(), bytes: body.len() });
    }
    let manifest = Manifest {
        tool: "mcf",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        mcf_threads: threads,
        passed: out.passed,
        artifacts,
    };
    fs::write(dir.join("manifest.json"), pretty(&serde_json::to_value(&manifest)?)?).context("writing manifest.json")?;
    Ok(())
}

pub fn pretty(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_shortest_floats() {
        let mut t = Table::new(&["x", "y"]);
        t.push(vec![0.1, 1e-300]);
        t.push(vec![2.0, -3.5e20]);
        t.push(vec![f64::NAN, 0.0]);
        assert_eq!(t.to_csv().unwrap(), "x,y\n0.1,1e-300\n2,-3.5e20\nNaN,0\n");
        for v in [1e-300, 0.1, 123.456, -3.5e20, 5e-5] {
            assert_eq!(number(v).parse::<f64>().unwrap(), v);
        }
    }
}
