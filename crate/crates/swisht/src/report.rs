//! Output files: CSV tables with a header row, single-object JSON reports,
//! and binary PGM images.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use swisht_core::Tensor2D;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `rows` as `<dir>/<stem>.csv` or as a JSON array in `<dir>/<stem>.json`.
pub fn write_table<T: Serialize>(
    dir: &Path,
    stem: &str,
    format: Format,
    rows: &[T],
) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    match format {
        Format::Csv => write_csv(&path, rows)?,
        Format::Json => write_json(&path, rows)?,
    }
    Ok(path)
}

/// Min-max scales `surface` to 0..=255. A constant surface maps to all zeros.
pub fn to_gray(surface: &Tensor2D) -> Vec<u8> {
    let (lo, hi) = surface
        .as_slice()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = hi - lo;
    surface
        .as_slice()
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((v - lo) / span * 255.0).round() as u8
            } else {
                0
            }
        })
        .collect()
}

/// Binary (P5) 8-bit greyscale. Row 0 of `surface` is written last, so a
/// surface indexed by ascending y comes out upright.
pub fn write_pgm(path: &Path, surface: &Tensor2D) -> Result<()> {
    let gray = to_gray(surface);
    let (rows, cols) = surface.shape();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    write!(w, "P5\n{cols} {rows}\n255\n").map_err(io)?;
    for r in (0..rows).rev() {
        w.write_all(&gray[r * cols..(r + 1) * cols]).map_err(io)?;
    }
    w.flush().map_err(io)
}
