//! Deterministic CSV emission with a metadata sidecar.

use super::{HarnessError, Report};
use std::fs;
use std::path::{Path, PathBuf};

pub const CSV_HEADER: &str = "scheme,T,mean_gap,std_gap,mean_scaled_gap,std_scaled_gap,replicates";

/// 17 significant digits: round-trips to the same double and is
/// byte-reproducible across runs and platforms.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Renders the report to CSV text: header, then one row per
/// `(scheme, horizon)` in the report's order (scheme label lexical,
/// horizon ascending).
pub fn render_csv(report: &Report) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.scheme,
            row.horizon,
            format_float(row.mean_gap),
            format_float(row.std_gap),
            format_float(row.mean_scaled_gap),
            format_float(row.std_scaled_gap),
            row.replicates
        ));
    }
    out
}

fn render_metadata(report: &Report) -> String {
    let mut out = String::new();
    for (key, value) in &report.metadata {
        out.push_str(&format!("{key}={value}\n"));
    }
    out
}

/// Writes the CSV to `path` and the spec echo to the `<path>.meta` sidecar.
/// Identical reports produce byte-identical files.
pub fn emit_csv(report: &Report, path: &Path) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err(path))?;
        }
    }
    fs::write(path, render_csv(report)).map_err(io_err(path))?;
    let meta_path = sidecar_path(path);
    fs::write(&meta_path, render_metadata(report)).map_err(io_err(&meta_path))?;
    Ok(())
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}
