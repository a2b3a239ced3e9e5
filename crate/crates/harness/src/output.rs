//! CSV result tables and the sidecar file describing how they were made.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::experiment::Table;
use crate::HarnessError;

pub const HEADER: [&str; 9] = [
    "model", "M", "K", "W", "metric", "value", "stderr", "runs", "seed",
];

pub fn to_csv_bytes(table: &Table) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for r in &table.rows {
        w.write_record([
            r.model.as_str(),
            r.m.as_str(),
            &r.k.to_string(),
            &r.w.to_string(),
            r.metric.as_str(),
            &r.value.to_string(),
            &r.stderr.to_string(),
            &r.runs.to_string(),
            &r.seed.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}

/// Path of the sidecar written next to `csv_path`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".meta.txt");
    PathBuf::from(s)
}

pub fn sidecar_text(cfg: &ExperimentConfig, rows: usize) -> String {
    format!(
        "# {} {}\n# rows = {}\n{}",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        rows,
        cfg.to_text()
    )
}

/// Writes the CSV and its sidecar, creating parent directories.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    table: &Table,
    path: &Path,
) -> Result<(), HarnessError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| HarnessError::Io { path, source }
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    let bytes = to_csv_bytes(table).map_err(|source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, bytes).map_err(io(path))?;
    let side = sidecar_path(path);
    fs::write(&side, sidecar_text(cfg, table.rows.len())).map_err(io(&side))?;
    Ok(())
}
