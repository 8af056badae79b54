use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use cvbell_core::bell::{BISECTION_TOLERANCE, DELTA_GRID_POINTS, DELTA_RANGE, DELTA_TOLERANCE, VIOLATION_MARGIN};
use cvbell_core::measurement::QUADRATURE_TOLERANCE;
use serde_json::{json, Value};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Float(f64),
    Int(u64),
    Missing,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Self::Text(s.into())
    }

    pub fn opt(v: Option<f64>) -> Self {
        v.map(Self::Float).unwrap_or(Self::Missing)
    }

    fn render(&self) -> String {
        match self {
            Self::Text(s) => s.clone(),
            Self::Float(v) => format!("{v:.16e}"),
            Self::Int(v) => v.to_string(),
            Self::Missing => String::new(),
        }
    }
}

/// Result rows with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(w.into_inner().expect("flushed in-memory writer"))
    }
}

/// Metadata written next to every result file.
pub fn sidecar(command: &str, config: &RunConfig, assumptions: &[&str], extra: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "versions": {
            "cvbell": env!("CARGO_PKG_VERSION"),
            "cvbell-core": cvbell_core::VERSION,
        },
        "tolerances": {
            "bisection": config.solver.tolerance,
            "bisection_default": BISECTION_TOLERANCE,
            "delta_golden_section": DELTA_TOLERANCE,
            "delta_grid_points": DELTA_GRID_POINTS,
            "delta_range": [DELTA_RANGE.0, DELTA_RANGE.1],
            "quadrature": QUADRATURE_TOLERANCE,
            "violation_margin": VIOLATION_MARGIN,
        },
        "homodyne_convention": {
            "name": config.solver.convention,
            "tag": config.solver.convention.tag(),
        },
        "assumptions": assumptions,
        "config": config,
        "results": extra,
    })
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".json");
    csv.with_file_name(name)
}

fn temp_path(target: &Path) -> PathBuf {
    let mut name = std::ffi::OsString::from(".");
    name.push(target.file_name().unwrap_or_default());
    name.push(format!(".{}.tmp", std::process::id()));
    target.with_file_name(name)
}

/// Write every file or none: all contents go to temporary siblings first and
/// are renamed into place only once all writes succeeded.
pub fn write_all_or_nothing(files: &[(PathBuf, Vec<u8>)]) -> std::io::Result<()> {
    let mut staged = Vec::new();
    let result = (|| {
        for (path, bytes) in files {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let tmp = temp_path(path);
            staged.push(tmp.clone());
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
        }
        for ((path, _), tmp) in files.iter().zip(&staged) {
            fs::rename(tmp, path)?;
        }
        Ok(())
    })();
    if result.is_err() {
        for tmp in &staged {
            let _ = fs::remove_file(tmp);
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let mut t = Table::new(vec!["x", "label", "missing"]);
        t.push(vec![Cell::Float(0.1), Cell::text("a,b"), Cell::Missing]);
        let s = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(s, "x,label,missing\n1.0000000000000001e-1,\"a,b\",\n");
        let back: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(vec!["a", "b"]);
        assert_eq!(t.to_csv().unwrap(), b"a,b\n");
    }

    #[test]
    fn sidecar_sits_next_to_csv() {
        assert_eq!(sidecar_path(Path::new("out/r.csv")), PathBuf::from("out/r.csv.json"));
    }
}
