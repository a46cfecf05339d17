//! Seeded minibatch training of an [`Mlp`] and the per-epoch run report.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::activation::{ActParams, ActivationKind};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{argmax_rows, sgd_step, softmax_cross_entropy, LrSchedule, Mlp, SgdConfig};

/// Rows per chunk when evaluating a whole dataset.
const EVAL_CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub scheduler: LrSchedule,
    pub kind: ActivationKind,
    pub alpha: f64,
    pub beta0: f64,
    pub beta_trainable: bool,
    #[serde(default)]
    pub beta_weight_decay_applies: bool,
    /// Hidden widths; input and output widths come from the data.
    pub hidden: Vec<usize>,
}

impl Default for TrainConfig {
    /// SGD lr 0.01, momentum 0.9, weight decay 5e-4, cosine schedule, batch 32,
    /// `alpha = 0.1`, trainable `beta` from 1.0, two hidden layers 128 / 64.
    fn default() -> Self {
        Self {
            seed: 0,
            epochs: 5,
            batch_size: 32,
            lr0: 0.01,
            momentum: 0.9,
            weight_decay: 5e-4,
            scheduler: LrSchedule::Cosine,
            kind: ActivationKind::SwishTC,
            alpha: 0.1,
            beta0: 1.0,
            beta_trainable: true,
            beta_weight_decay_applies: false,
            hidden: vec![128, 64],
        }
    }
}

impl TrainConfig {
    /// Two hidden layers of 32 for the 2-D synthetic problems.
    pub fn synthetic() -> Self {
        Self {
            hidden: vec![32, 32],
            epochs: 20,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return Err(Error::InvalidConfig("lr0 must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1"));
        }
        if !(self.momentum >= 0.0 && self.momentum.is_finite()) {
            return Err(Error::InvalidConfig(
                "momentum must be finite and non-negative",
            ));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::InvalidConfig(
                "weight_decay must be finite and non-negative",
            ));
        }
        if self.hidden.contains(&0) {
            return Err(Error::InvalidConfig("hidden widths must be non-zero"));
        }
        self.act_params().validate(self.kind)
    }

    pub fn act_params(&self) -> ActParams {
        ActParams {
            alpha: self.alpha,
            beta: self.beta0,
            beta_trainable: self.beta_trainable,
        }
    }

    pub fn sgd(&self) -> SgdConfig {
        SgdConfig {
            momentum: self.momentum,
            weight_decay: self.weight_decay,
            beta_weight_decay: self.beta_weight_decay_applies,
        }
    }

    /// Full width list `[input, hidden.., classes]`.
    pub fn layer_sizes(&self, input: usize, classes: usize) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden.len() + 2);
        sizes.push(input);
        sizes.extend_from_slice(&self.hidden);
        sizes.push(classes);
        sizes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Mean minibatch loss over the epoch.
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_loss: f64,
    pub test_acc: f64,
    pub lr: f64,
    /// `beta` at the end of the epoch.
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub epochs: Vec<EpochMetrics>,
    pub final_beta: f64,
    /// Filled in by callers that can read a clock; zero otherwise.
    pub wall_time_s: f64,
    pub seed: u64,
    pub config: TrainConfig,
}

impl RunReport {
    pub fn last(&self) -> &EpochMetrics {
        // A validated config has at least one epoch.
        &self.epochs[self.epochs.len() - 1]
    }

    pub fn final_test_acc(&self) -> f64 {
        self.last().test_acc
    }

    /// True when the per-epoch metrics of both runs are bitwise identical.
    pub fn same_metrics(&self, other: &RunReport) -> bool {
        let bits = |m: &EpochMetrics| {
            [
                m.train_loss,
                m.train_acc,
                m.test_loss,
                m.test_acc,
                m.lr,
                m.beta,
            ]
            .map(f64::to_bits)
        };
        self.epochs.len() == other.epochs.len()
            && self
                .epochs
                .iter()
                .zip(&other.epochs)
                .all(|(a, b)| a.epoch == b.epoch && bits(a) == bits(b))
            && self.final_beta.to_bits() == other.final_beta.to_bits()
    }
}

/// Mean loss and accuracy of `net` over `ds`.
pub fn evaluate(net: &Mlp, ds: &Dataset) -> Result<(f64, f64)> {
    let mut loss_sum = 0.0;
    let mut correct = 0usize;
    let indices: Vec<usize> = (0..ds.len()).collect();
    for chunk in indices.chunks(EVAL_CHUNK) {
        let x = ds.features.select_rows(chunk);
        let labels: Vec<usize> = chunk.iter().map(|&i| ds.labels[i]).collect();
        let logits = net.predict(&x)?;
        let (loss, _) = softmax_cross_entropy(&logits, &labels)?;
        loss_sum += loss * chunk.len() as f64;
        correct += argmax_rows(&logits)
            .iter()
            .zip(&labels)
            .filter(|(p, l)| p == l)
            .count();
    }
    let n = ds.len() as f64;
    Ok((loss_sum / n, correct as f64 / n))
}

fn check_pair(train: &Dataset, test: &Dataset) -> Result<()> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if train.dim() != test.dim() {
        return Err(Error::ShapeMismatch {
            context: "test feature width",
            expected: train.dim(),
            actual: test.dim(),
        });
    }
    if train.classes != test.classes {
        return Err(Error::ShapeMismatch {
            context: "test class count",
            expected: train.classes,
            actual: test.classes,
        });
    }
    Ok(())
}

/// Builds the network for `config` from its seed. [`train`] calls this
/// first, so the returned network is the one training starts from.
pub fn init_network(
    config: &TrainConfig,
    input: usize,
    classes: usize,
) -> Result<(Mlp, ChaCha8Rng)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let net = Mlp::new(
        &config.layer_sizes(input, classes),
        config.kind,
        config.act_params(),
        &mut rng,
    )?;
    Ok((net, rng))
}

/// Runs the full loop: per-epoch seeded shuffle, minibatch forward/backward,
/// one SGD step per batch (last partial batch kept), then evaluation on the
/// test set. Deterministic given the config.
pub fn train(config: &TrainConfig, train_set: &Dataset, test_set: &Dataset) -> Result<RunReport> {
    train_with(config, train_set, test_set, |_| {})
}

/// [`train`] with a callback after every epoch.
pub fn train_with<F>(
    config: &TrainConfig,
    train_set: &Dataset,
    test_set: &Dataset,
    mut on_epoch: F,
) -> Result<RunReport>
where
    F: FnMut(&EpochMetrics),
{
    check_pair(train_set, test_set)?;
    let (mut net, mut rng) = init_network(config, train_set.dim(), train_set.classes)?;
    let opt = config.sgd();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut epochs = Vec::with_capacity(config.epochs);
    let mut labels = Vec::with_capacity(config.batch_size);

    for epoch in 0..config.epochs {
        let lr = config.scheduler.lr(config.lr0, epoch, config.epochs);
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(config.batch_size) {
            let x = train_set.features.select_rows(batch);
            labels.clear();
            labels.extend(batch.iter().map(|&i| train_set.labels[i]));
            let (loss, hits) = net.loss_and_backward(&x, &labels)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            loss_sum += loss * batch.len() as f64;
            correct += hits;
            sgd_step(&mut net, lr, &opt);
        }
        let n = train_set.len() as f64;
        let (test_loss, test_acc) = evaluate(&net, test_set)?;
        let metrics = EpochMetrics {
            epoch,
            train_loss: loss_sum / n,
            train_acc: correct as f64 / n,
            test_loss,
            test_acc,
            lr,
            beta: net.activation.beta(),
        };
        on_epoch(&metrics);
        epochs.push(metrics);
    }

    Ok(RunReport {
        final_beta: net.activation.beta(),
        epochs,
        wall_time_s: 0.0,
        seed: config.seed,
        config: config.clone(),
    })
}
