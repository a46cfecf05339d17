//! Reading IDX files from disk, gzipped or not.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use swisht_core::Dataset;

use crate::error::{Error, Result};

pub const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];
pub const MNIST_CLASSES: usize = 10;

/// File contents, transparently decompressed when they start with the gzip magic.
pub fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&GZIP_MAGIC) {
        let mut out = Vec::new();
        MultiGzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

pub fn load_idx_dataset(images: &Path, labels: &Path, classes: usize) -> Result<Dataset> {
    let img = read_maybe_gz(images)?;
    let lab = read_maybe_gz(labels)?;
    Ok(Dataset::from_idx(&img, &lab, classes)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MnistFiles {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

impl MnistFiles {
    /// Looks for the four standard file names in `dir`, with or without `.gz`.
    pub fn in_dir(dir: &Path) -> Result<Self> {
        let find = |stem: &str| -> Result<PathBuf> {
            [stem.to_owned(), format!("{stem}.gz")]
                .iter()
                .map(|name| dir.join(name))
                .find(|p| p.is_file())
                .ok_or_else(|| {
                    Error::io(
                        dir.join(stem),
                        std::io::Error::new(std::io::ErrorKind::NotFound, "MNIST file not found"),
                    )
                })
        };
        Ok(Self {
            train_images: find("train-images-idx3-ubyte")?,
            train_labels: find("train-labels-idx1-ubyte")?,
            test_images: find("t10k-images-idx3-ubyte")?,
            test_labels: find("t10k-labels-idx1-ubyte")?,
        })
    }

    pub fn load(&self) -> Result<(Dataset, Dataset)> {
        Ok((
            load_idx_dataset(&self.train_images, &self.train_labels, MNIST_CLASSES)?,
            load_idx_dataset(&self.test_images, &self.test_labels, MNIST_CLASSES)?,
        ))
    }
}
