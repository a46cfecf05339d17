//! IDX container codec (the MNIST file format): big-endian `u32` magic and
//! dimension counts followed by unsigned-byte payload.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::Tensor2D;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], offset: usize, what: &'static str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(Error::Truncated {
            what,
            expected: offset + 4,
            actual: bytes.len(),
        })
}

fn check_magic(bytes: &[u8], expected: u32, what: &'static str) -> Result<()> {
    let found = be_u32(bytes, 0, what)?;
    if found != expected {
        return Err(Error::WrongMagic {
            what,
            expected,
            found,
        });
    }
    Ok(())
}

fn payload<'a>(
    bytes: &'a [u8],
    header: usize,
    count: usize,
    what: &'static str,
) -> Result<&'a [u8]> {
    let expected = header + count;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            what,
            expected,
            actual: bytes.len(),
        });
    }
    Ok(&bytes[header..expected])
}

/// Decodes an image file into an `n x (rows * cols)` matrix with pixels
/// scaled to `[0, 1]` by `/ 255`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Tensor2D> {
    let images = parse_idx_images_raw(bytes)?;
    let data = images
        .pixels
        .iter()
        .map(|&p| f64::from(p) / 255.0)
        .collect();
    Tensor2D::from_vec(images.count, images.rows * images.cols, data)
}

/// Undecoded image payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

pub fn parse_idx_images_raw(bytes: &[u8]) -> Result<RawImages> {
    const WHAT: &str = "images";
    check_magic(bytes, IMAGES_MAGIC, WHAT)?;
    let count = be_u32(bytes, 4, WHAT)? as usize;
    let rows = be_u32(bytes, 8, WHAT)? as usize;
    let cols = be_u32(bytes, 12, WHAT)? as usize;
    if count == 0 {
        return Err(Error::EmptyDataset);
    }
    let pixels = payload(bytes, 16, count * rows * cols, WHAT)?;
    Ok(RawImages {
        count,
        rows,
        cols,
        pixels: pixels.to_vec(),
    })
}

/// Decodes a label file, rejecting any label `>= classes`.
pub fn parse_idx_labels(bytes: &[u8], classes: usize) -> Result<Vec<usize>> {
    const WHAT: &str = "labels";
    check_magic(bytes, LABELS_MAGIC, WHAT)?;
    let count = be_u32(bytes, 4, WHAT)? as usize;
    if count == 0 {
        return Err(Error::EmptyDataset);
    }
    payload(bytes, 8, count, WHAT)?
        .iter()
        .map(|&b| {
            let label = usize::from(b);
            if label < classes {
                Ok(label)
            } else {
                Err(Error::LabelOutOfRange { label, classes })
            }
        })
        .collect()
}

/// Encodes `features` as an image file. Each value is clamped to `[0, 1]` and
/// quantized to the nearest `u8` step; the row length must equal `rows * cols`.
pub fn encode_idx_images(features: &Tensor2D, rows: usize, cols: usize) -> Result<Vec<u8>> {
    if features.cols() != rows * cols {
        return Err(Error::ShapeMismatch {
            context: "IDX image size",
            expected: rows * cols,
            actual: features.cols(),
        });
    }
    let mut out = Vec::with_capacity(16 + features.len());
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    for dim in [features.rows(), rows, cols] {
        out.extend_from_slice(&(dim as u32).to_be_bytes());
    }
    out.extend(features.as_slice().iter().map(|&v| quantize(v)));
    Ok(out)
}

pub fn encode_idx_labels(labels: &[usize]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    for &l in labels {
        let b = u8::try_from(l).map_err(|_| Error::LabelOutOfRange {
            label: l,
            classes: 256,
        })?;
        out.push(b);
    }
    Ok(out)
}

/// Nearest `u8` level of a `[0, 1]` intensity.
pub fn quantize(v: f64) -> u8 {
    libm::round(v.clamp(0.0, 1.0) * 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn image_file(n: u32, r: u32, c: u32, px: &[u8]) -> Vec<u8> {
        let mut v = Vec::new();
        for w in [IMAGES_MAGIC, n, r, c] {
            v.extend_from_slice(&w.to_be_bytes());
        }
        v.extend_from_slice(px);
        v
    }

    #[test]
    fn minimal_image_fixture() {
        let t = parse_idx_images(&image_file(1, 2, 2, &[0, 255, 128, 64])).unwrap();
        assert_eq!(t.shape(), (1, 4));
        assert_eq!(t.as_slice(), &[0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
    }

    #[test]
    fn image_errors() {
        let mut wrong = image_file(1, 2, 2, &[0; 4]);
        wrong[3] = 0x01;
        let err = parse_idx_images(&wrong).unwrap_err();
        assert_eq!(
            err,
            Error::WrongMagic {
                what: "images",
                expected: IMAGES_MAGIC,
                found: LABELS_MAGIC
            }
        );
        assert!(alloc::format!("{err}").contains("wrong magic for images"));

        let header_only = image_file(3, 2, 2, &[]);
        assert_eq!(
            parse_idx_images(&header_only).unwrap_err(),
            Error::Truncated {
                what: "images",
                expected: 28,
                actual: 16
            }
        );
        assert!(matches!(
            parse_idx_images(&[0, 0, 8]),
            Err(Error::Truncated { .. })
        ));
        assert_eq!(
            parse_idx_images(&image_file(0, 2, 2, &[])),
            Err(Error::EmptyDataset)
        );
    }

    #[test]
    fn label_fixture_and_errors() {
        let mut f = vec![0, 0, 8, 1, 0, 0, 0, 3];
        f.extend_from_slice(&[0, 7, 9]);
        assert_eq!(parse_idx_labels(&f, 10).unwrap(), [0, 7, 9]);

        let mut bad = f.clone();
        bad[9] = 12;
        assert_eq!(
            parse_idx_labels(&bad, 10),
            Err(Error::LabelOutOfRange {
                label: 12,
                classes: 10
            })
        );
        assert_eq!(
            parse_idx_labels(&[0, 0, 8, 1, 0, 0, 0, 0], 10),
            Err(Error::EmptyDataset)
        );
        assert!(matches!(
            parse_idx_labels(&f[..9], 10),
            Err(Error::Truncated {
                expected: 11,
                actual: 9,
                ..
            })
        ));
        assert!(matches!(
            parse_idx_labels(&image_file(1, 1, 1, &[0]), 10),
            Err(Error::WrongMagic { what: "labels", .. })
        ));
    }

    #[test]
    fn extra_trailing_bytes_are_ignored() {
        let mut f = image_file(1, 1, 2, &[1, 2]);
        f.push(99);
        assert_eq!(parse_idx_images_raw(&f).unwrap().pixels, [1, 2]);
    }
}
