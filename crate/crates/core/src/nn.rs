//! Dense layers with hand-written backward passes, the network-wide
//! activation with its shared `beta`, softmax cross-entropy, SGD with
//! momentum and weight decay, and the cosine learning-rate schedule.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::activation::{ActParams, Activation, ActivationKind, BETA_MIN};
use crate::error::{Error, Result};
use crate::math::Uncounted;
use crate::tensor::{axpy, dot, Tensor2D};

/// Fully connected layer `y = x W^T + b` with `W` stored `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Tensor2D,
    pub bias: Vec<f64>,
    pub grad_weights: Tensor2D,
    pub grad_bias: Vec<f64>,
    pub vel_weights: Tensor2D,
    pub vel_bias: Vec<f64>,
    input_cache: Option<Tensor2D>,
}

impl DenseLayer {
    pub fn zeros(input: usize, output: usize) -> Self {
        Self {
            weights: Tensor2D::zeros(output, input),
            bias: vec![0.0; output],
            grad_weights: Tensor2D::zeros(output, input),
            grad_bias: vec![0.0; output],
            vel_weights: Tensor2D::zeros(output, input),
            vel_bias: vec![0.0; output],
            input_cache: None,
        }
    }

    pub fn from_parts(weights: Tensor2D, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::ShapeMismatch {
                context: "DenseLayer bias",
                expected: weights.rows(),
                actual: bias.len(),
            });
        }
        let mut layer = Self::zeros(weights.cols(), weights.rows());
        layer.weights = weights;
        layer.bias = bias;
        Ok(layer)
    }

    /// Weights drawn from `N(0, 1/fan_in)`, zero bias.
    pub fn gaussian<R: Rng + ?Sized>(input: usize, output: usize, rng: &mut R) -> Self {
        let mut layer = Self::zeros(input, output);
        let std = 1.0 / libm::sqrt(input as f64);
        for w in layer.weights.as_mut_slice() {
            let z: f64 = rng.sample(StandardNormal);
            *w = z * std;
        }
        layer
    }

    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    /// Forward pass without touching the backward cache.
    pub fn apply(&self, x: &Tensor2D) -> Result<Tensor2D> {
        if x.cols() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                context: "dense input width",
                expected: self.input_dim(),
                actual: x.cols(),
            });
        }
        let mut y = Tensor2D::zeros(x.rows(), self.output_dim());
        for i in 0..x.rows() {
            let xi = x.row(i);
            let yi = y.row_mut(i);
            for (j, out) in yi.iter_mut().enumerate() {
                *out = dot(xi, self.weights.row(j)) + self.bias[j];
            }
        }
        Ok(y)
    }

    /// Forward pass that stashes `x` for [`DenseLayer::backward`].
    pub fn forward(&mut self, x: &Tensor2D) -> Result<Tensor2D> {
        let y = self.apply(x)?;
        self.input_cache = Some(x.clone());
        Ok(y)
    }

    /// Accumulates `grad_weights += grad_out^T x` and `grad_bias += colsum(grad_out)`,
    /// and returns `grad_out W`.
    pub fn backward(&mut self, grad_out: &Tensor2D) -> Result<Tensor2D> {
        self.accumulate(grad_out)?;
        let mut grad_in = Tensor2D::zeros(grad_out.rows(), self.input_dim());
        for i in 0..grad_out.rows() {
            let gi = grad_out.row(i);
            let gin = grad_in.row_mut(i);
            for (j, &g) in gi.iter().enumerate() {
                if g != 0.0 {
                    axpy(gin, g, self.weights.row(j));
                }
            }
        }
        Ok(grad_in)
    }

    /// Parameter gradients only; used for the first layer, whose input
    /// gradient nobody needs.
    pub fn backward_params(&mut self, grad_out: &Tensor2D) -> Result<()> {
        self.accumulate(grad_out)
    }

    fn accumulate(&mut self, grad_out: &Tensor2D) -> Result<()> {
        let x = self
            .input_cache
            .as_ref()
            .ok_or(Error::BackwardBeforeForward("dense layer"))?;
        if grad_out.cols() != self.output_dim() || grad_out.rows() != x.rows() {
            return Err(Error::ShapeMismatch {
                context: "dense grad_out",
                expected: x.rows() * self.output_dim(),
                actual: grad_out.len(),
            });
        }
        for i in 0..grad_out.rows() {
            let xi = x.row(i);
            for (j, &g) in grad_out.row(i).iter().enumerate() {
                self.grad_bias[j] += g;
                if g != 0.0 {
                    axpy(self.grad_weights.row_mut(j), g, xi);
                }
            }
        }
        Ok(())
    }

    pub fn zero_grad(&mut self) {
        self.grad_weights.fill(0.0);
        self.grad_bias.fill(0.0);
    }

    pub fn clear_cache(&mut self) {
        self.input_cache = None;
    }
}

/// Per-site stash written by [`GlobalActivation::forward`].
#[derive(Debug, Clone, PartialEq)]
pub struct SiteCache {
    pub input: Tensor2D,
    pub dy_dx: Vec<f64>,
    pub dy_dbeta: Vec<f64>,
}

/// The single activation shared by every site of a network, including the
/// training state of its `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalActivation {
    pub kind: ActivationKind,
    pub params: ActParams,
    /// Sum of `dL/dbeta` over all sites since the last optimizer step.
    pub accumulated_dbeta: f64,
    pub beta_momentum: f64,
    sites: Vec<Option<SiteCache>>,
    /// Contribution of each site to `accumulated_dbeta` since the last step.
    site_dbeta: Vec<f64>,
}

impl GlobalActivation {
    pub fn new(kind: ActivationKind, params: ActParams, sites: usize) -> Result<Self> {
        params.validate(kind)?;
        Ok(Self {
            kind,
            params,
            accumulated_dbeta: 0.0,
            beta_momentum: 0.0,
            sites: vec![None; sites],
            site_dbeta: vec![0.0; sites],
        })
    }

    pub fn beta(&self) -> f64 {
        self.params.beta
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    pub fn site_cache(&self, site: usize) -> Option<&SiteCache> {
        self.sites.get(site).and_then(Option::as_ref)
    }

    pub fn site_dbeta(&self) -> &[f64] {
        &self.site_dbeta
    }

    pub fn kernel(&self) -> Result<Activation> {
        Activation::new(self.kind, self.params)
    }

    /// Elementwise activation without caching.
    pub fn apply(&self, x: &Tensor2D) -> Result<Tensor2D> {
        let act = self.kernel()?;
        let mut y = Tensor2D::zeros(x.rows(), x.cols());
        act.forward_into(x.as_slice(), y.as_mut_slice(), &mut Uncounted);
        Ok(y)
    }

    /// Elementwise activation at `site`, caching the input and both
    /// derivatives for the backward pass.
    pub fn forward(&mut self, site: usize, x: &Tensor2D) -> Result<Tensor2D> {
        if site >= self.sites.len() {
            return Err(Error::CacheMismatch {
                site,
                reason: "no such activation site",
            });
        }
        let act = self.kernel()?;
        let n = x.len();
        let mut y = Tensor2D::zeros(x.rows(), x.cols());
        let mut dy_dx = vec![0.0; n];
        let mut dy_dbeta = vec![0.0; n];
        act.fused_into(
            x.as_slice(),
            y.as_mut_slice(),
            &mut dy_dx,
            &mut dy_dbeta,
            &mut Uncounted,
        );
        self.sites[site] = Some(SiteCache {
            input: x.clone(),
            dy_dx,
            dy_dbeta,
        });
        Ok(y)
    }

    /// Returns `grad_out * f'(x)` and adds `sum(grad_out * df/dbeta)` to the
    /// shared `beta` gradient.
    pub fn backward(&mut self, site: usize, grad_out: &Tensor2D) -> Result<Tensor2D> {
        let cache = self
            .sites
            .get(site)
            .ok_or(Error::CacheMismatch {
                site,
                reason: "no such activation site",
            })?
            .as_ref()
            .ok_or(Error::BackwardBeforeForward("activation site"))?;
        if cache.input.shape() != grad_out.shape() {
            return Err(Error::CacheMismatch {
                site,
                reason: "grad_out shape differs from cached input",
            });
        }
        let mut grad_in = Tensor2D::zeros(grad_out.rows(), grad_out.cols());
        let mut dbeta = 0.0;
        for (((gi, &g), &d), &db) in grad_in
            .as_mut_slice()
            .iter_mut()
            .zip(grad_out.as_slice())
            .zip(&cache.dy_dx)
            .zip(&cache.dy_dbeta)
        {
            *gi = g * d;
            dbeta += g * db;
        }
        if self.kind.has_beta() {
            self.accumulated_dbeta += dbeta;
            self.site_dbeta[site] += dbeta;
        }
        Ok(grad_in)
    }

    pub fn zero_grad(&mut self) {
        self.accumulated_dbeta = 0.0;
        self.site_dbeta.fill(0.0);
    }
}

/// Mean softmax cross-entropy over the batch and its gradient
/// `(softmax - onehot) / batch` with respect to the logits.
pub fn softmax_cross_entropy(logits: &Tensor2D, labels: &[usize]) -> Result<(f64, Tensor2D)> {
    let (batch, classes) = logits.shape();
    if labels.len() != batch {
        return Err(Error::ShapeMismatch {
            context: "labels per logit row",
            expected: batch,
            actual: labels.len(),
        });
    }
    if batch == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut grad = Tensor2D::zeros(batch, classes);
    let mut total = 0.0;
    let inv_batch = 1.0 / batch as f64;
    for (i, &label) in labels.iter().enumerate() {
        if label >= classes {
            return Err(Error::LabelOutOfRange { label, classes });
        }
        let row = logits.row(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let g = grad.row_mut(i);
        let mut sum = 0.0;
        for (gj, &z) in g.iter_mut().zip(row) {
            *gj = libm::exp(z - max);
            sum += *gj;
        }
        let log_sum = libm::log(sum) + max;
        total += log_sum - row[label];
        for gj in g.iter_mut() {
            *gj = *gj / sum * inv_batch;
        }
        g[label] -= inv_batch;
    }
    Ok((total * inv_batch, grad))
}

/// Index of the largest entry in each row; ties resolve to the lowest index.
pub fn argmax_rows(t: &Tensor2D) -> Vec<usize> {
    t.iter_rows()
        .map(|r| {
            r.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (j, &v)| {
                    if v > best.1 {
                        (j, v)
                    } else {
                        best
                    }
                })
                .0
        })
        .collect()
}

/// Dense network with the same activation after every hidden layer and raw
/// logits at the output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<DenseLayer>,
    pub activation: GlobalActivation,
}

impl Mlp {
    /// `sizes` lists every width from input to output, e.g. `[784, 128, 64, 10]`.
    pub fn new<R: Rng + ?Sized>(
        sizes: &[usize],
        kind: ActivationKind,
        params: ActParams,
        rng: &mut R,
    ) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidConfig(
                "network needs at least two non-zero widths",
            ));
        }
        let layers: Vec<_> = sizes
            .windows(2)
            .map(|w| DenseLayer::gaussian(w[0], w[1], rng))
            .collect();
        let activation = GlobalActivation::new(kind, params, layers.len() - 1)?;
        Ok(Self { layers, activation })
    }

    pub fn from_layers(
        layers: Vec<DenseLayer>,
        kind: ActivationKind,
        params: ActParams,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("network needs at least one layer"));
        }
        for w in layers.windows(2) {
            if w[0].output_dim() != w[1].input_dim() {
                return Err(Error::ShapeMismatch {
                    context: "consecutive layer widths",
                    expected: w[0].output_dim(),
                    actual: w[1].input_dim(),
                });
            }
        }
        let activation = GlobalActivation::new(kind, params, layers.len() - 1)?;
        Ok(Self { layers, activation })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    /// Training-mode forward pass (fills every cache).
    pub fn forward(&mut self, x: &Tensor2D) -> Result<Tensor2D> {
        let last = self.layers.len() - 1;
        let mut h = self.layers[0].forward(x)?;
        for i in 1..=last {
            h = self.activation.forward(i - 1, &h)?;
            h = self.layers[i].forward(&h)?;
        }
        Ok(h)
    }

    /// Backward pass from the logit gradient; accumulates every parameter
    /// gradient and the shared `beta` gradient.
    pub fn backward(&mut self, grad_logits: &Tensor2D) -> Result<()> {
        let mut g = grad_logits.clone();
        for i in (1..self.layers.len()).rev() {
            g = self.layers[i].backward(&g)?;
            g = self.activation.backward(i - 1, &g)?;
        }
        self.layers[0].backward_params(&g)
    }

    /// Inference forward pass; leaves the caches untouched.
    pub fn predict(&self, x: &Tensor2D) -> Result<Tensor2D> {
        let last = self.layers.len() - 1;
        let mut h = self.layers[0].apply(x)?;
        for i in 1..=last {
            h = self.activation.apply(&h)?;
            h = self.layers[i].apply(&h)?;
        }
        Ok(h)
    }

    /// One training-mode forward/backward on a batch; returns the mean loss
    /// and the number of correct predictions.
    pub fn loss_and_backward(&mut self, x: &Tensor2D, labels: &[usize]) -> Result<(f64, usize)> {
        let logits = self.forward(x)?;
        let (loss, grad) = softmax_cross_entropy(&logits, labels)?;
        let correct = argmax_rows(&logits)
            .iter()
            .zip(labels)
            .filter(|(p, l)| p == l)
            .count();
        self.backward(&grad)?;
        Ok((loss, correct))
    }

    pub fn zero_grad(&mut self) {
        for l in &mut self.layers {
            l.zero_grad();
        }
        self.activation.zero_grad();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub momentum: f64,
    pub weight_decay: f64,
    /// Whether `weight_decay` also pulls `beta` toward zero.
    pub beta_weight_decay: bool,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            momentum: 0.9,
            weight_decay: 5e-4,
            beta_weight_decay: false,
        }
    }
}

#[inline]
fn momentum_update(w: &mut [f64], v: &mut [f64], g: &[f64], lr: f64, opt: &SgdConfig) {
    for ((w, v), &g) in w.iter_mut().zip(v.iter_mut()).zip(g) {
        *v = opt.momentum * *v + g + opt.weight_decay * *w;
        *w -= lr * *v;
    }
}

/// `v = momentum v + g + weight_decay w; w -= lr v` for every weight and bias,
/// the same rule for a trainable `beta` (decay only when enabled), then
/// clears all gradients.
pub fn sgd_step(net: &mut Mlp, lr: f64, opt: &SgdConfig) {
    for layer in &mut net.layers {
        momentum_update(
            layer.weights.as_mut_slice(),
            layer.vel_weights.as_mut_slice(),
            layer.grad_weights.as_slice(),
            lr,
            opt,
        );
        momentum_update(
            &mut layer.bias,
            &mut layer.vel_bias,
            &layer.grad_bias,
            lr,
            opt,
        );
    }

    let act = &mut net.activation;
    if act.params.beta_trainable && act.kind.has_beta() {
        let decay = if opt.beta_weight_decay {
            opt.weight_decay * act.params.beta
        } else {
            0.0
        };
        act.beta_momentum = opt.momentum * act.beta_momentum + act.accumulated_dbeta + decay;
        let mut beta = act.params.beta - lr * act.beta_momentum;
        if act.kind == ActivationKind::SwishTC && beta.abs() < BETA_MIN {
            beta = libm::copysign(BETA_MIN, beta);
        }
        act.params.beta = beta;
    }
    net.zero_grad();
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrSchedule {
    Cosine,
    Constant,
}

impl LrSchedule {
    pub fn lr(self, lr0: f64, epoch: usize, total_epochs: usize) -> f64 {
        match self {
            LrSchedule::Cosine => cosine_lr(lr0, epoch, total_epochs),
            LrSchedule::Constant => lr0,
        }
    }
}

/// `lr0 * (1 + cos(pi * epoch / total_epochs)) / 2`.
pub fn cosine_lr(lr0: f64, epoch: usize, total_epochs: usize) -> f64 {
    let t = epoch as f64 / total_epochs.max(1) as f64;
    lr0 * 0.5 * (1.0 + libm::cos(core::f64::consts::PI * t))
}
