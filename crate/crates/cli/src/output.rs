//! Artifact writers: JSON summaries, CSV tables and SVG plots under one
//! directory per experiment.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path, experiment: &str) -> Result<Self, CliError> {
        let dir = root.join(experiment);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self { dir })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes `summary.json` with the schema version, the experiment name,
    /// its configuration, results and overall verdict.
    pub fn write_summary(&self, experiment: &str, config: Value, results: Value, pass: bool) -> Result<(), CliError> {
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "experiment": experiment,
            "config": config,
            "results": results,
            "pass": pass,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("json value serializes");
        text.push('\n');
        self.write_text("summary.json", &text)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    pub fn write_csv<R, I>(&self, name: &str, header: &[&str], rows: R) -> Result<(), CliError>
    where
        R: IntoIterator<Item = I>,
        I: IntoIterator,
        I::Item: AsRef<[u8]>,
    {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::csv(&path, e))?;
        w.write_record(header).map_err(|e| CliError::csv(&path, e))?;
        for row in rows {
            w.write_record(row).map_err(|e| CliError::csv(&path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))
    }
}

/// Polylines drawn in a square plot with data range `[0, extent]^2`, the
/// first axis pointing right and the second up.
pub struct Svg {
    size: f64,
    extent: f64,
    body: String,
}

impl Svg {
    pub fn new(size: f64, extent: f64) -> Self {
        let mut svg = Self { size, extent, body: String::new() };
        let axis = vec![(0.0, extent), (0.0, 0.0), (extent, 0.0)];
        svg.polyline(&axis, "#000000", 1.0, 1.0);
        svg
    }

    fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let margin = 20.0;
        let scale = (self.size - 2.0 * margin) / self.extent;
        (margin + x * scale, self.size - margin - y * scale)
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], color: &str, width: f64, opacity: f64) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        self.body.push_str(&format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\" stroke-opacity=\"{opacity}\"/>\n",
            coords.join(" ")
        ));
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">\n  <rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n{}</svg>\n",
            self.body,
            s = self.size
        )
    }
}

/// Shortest round-trip representation, so equal runs write equal bytes.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
