use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::idx;
use crate::tensor::Tensor2D;

/// Labelled samples, one feature row per label.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Tensor2D,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl Dataset {
    pub fn new(features: Tensor2D, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if features.rows() != labels.len() {
            return Err(Error::ShapeMismatch {
                context: "feature rows per label",
                expected: labels.len(),
                actual: features.rows(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::LabelOutOfRange { label, classes });
        }
        if !features.all_finite() {
            return Err(Error::InvalidConfig("dataset features must be finite"));
        }
        Ok(Self {
            features,
            labels,
            classes,
        })
    }

    /// Pairs an IDX image file with an IDX label file.
    pub fn from_idx(images: &[u8], labels: &[u8], classes: usize) -> Result<Self> {
        let features = idx::parse_idx_images(images)?;
        let labels = idx::parse_idx_labels(labels, classes)?;
        Self::new(features, labels, classes)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }
}

/// Indices of a seeded class-stratified sample of `n` items, in shuffled order.
///
/// Quotas are filled round-robin over the classes (in a seeded order) so that
/// per-class counts differ by at most one whenever every class has enough
/// samples; classes that run out pass their share on to the others.
pub fn subset_indices(ds: &Dataset, n: usize, seed: u64) -> Result<Vec<usize>> {
    if n == 0 || n > ds.len() {
        return Err(Error::SubsetOutOfRange {
            requested: n,
            available: ds.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.classes];
    for (i, &l) in ds.labels.iter().enumerate() {
        by_class[l].push(i);
    }
    for members in &mut by_class {
        members.shuffle(&mut rng);
    }
    let mut class_order: Vec<usize> = (0..ds.classes).collect();
    class_order.shuffle(&mut rng);

    let mut taken = vec![0usize; ds.classes];
    let mut remaining = n;
    while remaining > 0 {
        for &c in &class_order {
            if remaining == 0 {
                break;
            }
            if taken[c] < by_class[c].len() {
                taken[c] += 1;
                remaining -= 1;
            }
        }
    }

    let mut picked: Vec<usize> = by_class
        .iter()
        .zip(&taken)
        .flat_map(|(members, &k)| members[..k].iter().copied())
        .collect();
    picked.shuffle(&mut rng);
    Ok(picked)
}

pub fn subset(ds: &Dataset, n: usize, seed: u64) -> Result<Dataset> {
    Ok(ds.select(&subset_indices(ds, n, seed)?))
}

/// Unit-variance 2-D Gaussian blobs whose centres lie on the x-axis,
/// `separation` apart and symmetric about the origin. Samples are grouped
/// by class.
pub fn synth_blobs(
    n_per_class: usize,
    classes: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_per_class == 0 || classes == 0 {
        return Err(Error::EmptyDataset);
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(Error::InvalidConfig(
            "blob separation must be finite and non-negative",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mid = (classes - 1) as f64 / 2.0;
    let mut data = Vec::with_capacity(2 * n_per_class * classes);
    let mut labels = Vec::with_capacity(n_per_class * classes);
    for c in 0..classes {
        let cx = (c as f64 - mid) * separation;
        for _ in 0..n_per_class {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            data.push(cx + dx);
            data.push(dy);
            labels.push(c);
        }
    }
    Dataset::new(Tensor2D::from_vec(labels.len(), 2, data)?, labels, classes)
}

/// Training accuracy of two-class Fisher LDA (pooled covariance) on 2-D
/// features, solved in closed form. Independent of the network code, so it
/// serves as an oracle for how separable a dataset is.
pub fn lda_accuracy(ds: &Dataset) -> Result<f64> {
    if ds.dim() != 2 || ds.classes != 2 {
        return Err(Error::InvalidConfig(
            "closed-form LDA needs 2-D features and 2 classes",
        ));
    }
    let mut n = [0.0; 2];
    let mut mean = [[0.0; 2]; 2];
    for (row, &l) in ds.features.iter_rows().zip(&ds.labels) {
        n[l] += 1.0;
        mean[l][0] += row[0];
        mean[l][1] += row[1];
    }
    if n[0] == 0.0 || n[1] == 0.0 {
        return Err(Error::EmptyDataset);
    }
    for c in 0..2 {
        mean[c][0] /= n[c];
        mean[c][1] /= n[c];
    }
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (row, &l) in ds.features.iter_rows().zip(&ds.labels) {
        let dx = row[0] - mean[l][0];
        let dy = row[1] - mean[l][1];
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let det = sxx * syy - sxy * sxy;
    let (mx, my) = (mean[1][0] - mean[0][0], mean[1][1] - mean[0][1]);
    // w = S^-1 (m1 - m0); the common 1/det factor keeps its sign.
    let (wx, wy) = (
        (syy * mx - sxy * my) * det.signum(),
        (sxx * my - sxy * mx) * det.signum(),
    );
    let mid = [
        (mean[0][0] + mean[1][0]) / 2.0,
        (mean[0][1] + mean[1][1]) / 2.0,
    ];
    let correct = ds
        .features
        .iter_rows()
        .zip(&ds.labels)
        .filter(|(row, &l)| {
            let score = wx * (row[0] - mid[0]) + wy * (row[1] - mid[1]);
            usize::from(score > 0.0) == l
        })
        .count();
    Ok(correct as f64 / ds.len() as f64)
}
