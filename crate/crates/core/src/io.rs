//! JSON and CSV outputs. Floats are written with 17 significant digits and
//! no locale dependence; nothing time- or host-dependent is recorded, so
//! identical configurations give byte-identical files.

use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    version: &'a str,
    config: &'a RunConfig,
    result: &'a T,
}

/// Writes `{command, version, config, result}` as pretty JSON.
pub fn write_json<T: Serialize>(path: &Path, command: &str, cfg: &RunConfig, result: &T) -> Result<()> {
    let env = Envelope { command, version: VERSION, config: cfg, result };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// One CSV cell.
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

/// Writes a header row followed by `rows`.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> Result<()> {
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::InvalidArgument(format!("CSV row of {} cells under a {}-column header", row.len(), header.len())));
        }
        w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
