//! Central finite-difference oracle for the analytic activation derivatives.
//!
//! Nothing here shares code with the analytic derivative paths: the oracle
//! only ever calls the forward value and differences it.

use alloc::boxed::Box;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::activation::{ActParams, Activation, ActivationKind};
use crate::error::{Error, Result};
use crate::nn::{softmax_cross_entropy, Mlp};
use crate::tensor::Tensor2D;

pub const DEFAULT_STEP: f64 = 1e-5;
pub const DEFAULT_TOL_REL: f64 = 1e-6;

/// Smallest `|beta|` gradient-checked for Swish-T_C. Below this the `alpha / beta^2`
/// terms amplify round-off in the differenced values.
pub const SWISH_T_C_MIN_CHECKED_BETA: f64 = 0.1;

/// `(f(x + h) - f(x - h)) / 2h`.
pub fn central_diff<F>(mut f: F, x: f64, h: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidConfig(
            "finite-difference step must be positive",
        ));
    }
    let probe = |x: f64, f: &mut F| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x, value: v })
        }
    };
    let hi = probe(x + h, &mut f)?;
    let lo = probe(x - h, &mut f)?;
    Ok((hi - lo) / (2.0 * h))
}

/// Fallible variant of [`central_diff`] for functions that can reject their input.
pub fn try_central_diff<F>(mut f: F, x: f64, h: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut err = None;
    let d = central_diff(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        x,
        h,
    );
    match err {
        Some(e) => Err(e),
        None => d,
    }
}

/// Error of `analytic` against `numeric`, relative to `max(|analytic|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(floor)
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let span = hi - lo;
            let last = (n - 1) as f64;
            (0..n).map(|i| lo + span * i as f64 / last).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheckConfig {
    pub h: f64,
    pub tol_rel: f64,
    /// Lower bound on the denominator of the relative error.
    pub denom_floor: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            h: DEFAULT_STEP,
            tol_rel: DEFAULT_TOL_REL,
            denom_floor: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub alpha: f64,
    pub beta: f64,
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Dx,
    Dbeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub kind: ActivationKind,
    pub param_grid: Vec<(f64, f64)>,
    pub x_grid: Vec<f64>,
    pub h: f64,
    pub tol_rel: f64,
    pub denom_floor: f64,
    pub max_rel_err_dx: f64,
    pub max_rel_err_dbeta: f64,
    /// Grid point of the largest error over both channels.
    pub worst_point: GridPoint,
    pub worst_channel: Channel,
    pub passed: bool,
}

impl GradCheckReport {
    pub fn max_rel_err(&self) -> f64 {
        self.max_rel_err_dx.max(self.max_rel_err_dbeta)
    }
}

/// Analytic derivative sources checked by [`check_derivatives`].
pub trait DerivativeSource {
    fn forward(&self, params: ActParams, x: f64) -> Result<f64>;
    fn dx(&self, params: ActParams, x: f64) -> Result<f64>;
    fn dbeta(&self, params: ActParams, x: f64) -> Result<f64>;
}

/// The production kernels for one activation kind.
#[derive(Debug, Clone, Copy)]
pub struct Kernels(pub ActivationKind);

impl DerivativeSource for Kernels {
    fn forward(&self, params: ActParams, x: f64) -> Result<f64> {
        Ok(Activation::new(self.0, params)?.forward(x))
    }

    fn dx(&self, params: ActParams, x: f64) -> Result<f64> {
        Ok(Activation::new(self.0, params)?.dx(x))
    }

    fn dbeta(&self, params: ActParams, x: f64) -> Result<f64> {
        Ok(Activation::new(self.0, params)?.dbeta(x))
    }
}

/// Compares `act_dx` / `act_dbeta` against central differences of
/// `act_forward` over the Cartesian product of the grids.
///
/// Grid dimensions a kind does not use (alpha for non-Swish-T kinds, beta for
/// kinds without one) collapse to their first entry.
pub fn check_activation(
    kind: ActivationKind,
    alphas: &[f64],
    betas: &[f64],
    x_grid: &[f64],
    h: f64,
    tol_rel: f64,
) -> Result<GradCheckReport> {
    let config = GradCheckConfig {
        h,
        tol_rel,
        ..GradCheckConfig::default()
    };
    check_derivatives(kind, &Kernels(kind), alphas, betas, x_grid, &config)
}

pub fn check_derivatives<S: DerivativeSource>(
    kind: ActivationKind,
    source: &S,
    alphas: &[f64],
    betas: &[f64],
    x_grid: &[f64],
    config: &GradCheckConfig,
) -> Result<GradCheckReport> {
    if alphas.is_empty() || betas.is_empty() || x_grid.is_empty() {
        return Err(Error::InvalidConfig(
            "gradient-check grids must be non-empty",
        ));
    }
    if !(1e-7..=1e-3).contains(&config.h) {
        return Err(Error::InvalidConfig(
            "finite-difference step must lie in [1e-7, 1e-3]",
        ));
    }
    if kind == ActivationKind::SwishTC && betas.iter().any(|b| b.abs() < SWISH_T_C_MIN_CHECKED_BETA)
    {
        return Err(Error::InvalidConfig(
            "swish_t_c gradient check needs |beta| >= 0.1",
        ));
    }

    let alphas = if kind.uses_alpha() {
        alphas
    } else {
        &alphas[..1]
    };
    let betas = if kind.has_beta() { betas } else { &betas[..1] };
    let param_grid: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| betas.iter().map(move |&b| (a, b)))
        .collect();

    let mut max_dx = 0.0_f64;
    let mut max_db = 0.0_f64;
    let mut worst = (
        f64::NEG_INFINITY,
        GridPoint {
            alpha: alphas[0],
            beta: betas[0],
            x: x_grid[0],
        },
        Channel::Dx,
    );

    for &(alpha, beta) in &param_grid {
        let params = ActParams::new(alpha, beta);
        for &x in x_grid {
            let at = |e: Error| Error::AtGridPoint {
                alpha,
                beta,
                x,
                source: Box::new(e),
            };
            let point = GridPoint { alpha, beta, x };

            let dx = source.dx(params, x).map_err(at)?;
            let num_dx =
                try_central_diff(|x| source.forward(params, x), x, config.h).map_err(at)?;
            let err_dx = relative_error(dx, num_dx, config.denom_floor);

            let db = source.dbeta(params, x).map_err(at)?;
            let num_db = try_central_diff(
                |b| source.forward(ActParams { beta: b, ..params }, x),
                beta,
                config.h,
            )
            .map_err(at)?;
            let err_db = relative_error(db, num_db, config.denom_floor);

            // NaN errors must surface as failures, not vanish in max().
            let err_dx = if err_dx.is_nan() {
                f64::INFINITY
            } else {
                err_dx
            };
            let err_db = if err_db.is_nan() {
                f64::INFINITY
            } else {
                err_db
            };
            max_dx = max_dx.max(err_dx);
            max_db = max_db.max(err_db);
            if err_dx > worst.0 {
                worst = (err_dx, point, Channel::Dx);
            }
            if err_db > worst.0 {
                worst = (err_db, point, Channel::Dbeta);
            }
        }
    }

    Ok(GradCheckReport {
        kind,
        param_grid,
        x_grid: x_grid.to_vec(),
        h: config.h,
        tol_rel: config.tol_rel,
        denom_floor: config.denom_floor,
        max_rel_err_dx: max_dx,
        max_rel_err_dbeta: max_db,
        worst_point: worst.1,
        worst_channel: worst.2,
        passed: max_dx <= config.tol_rel && max_db <= config.tol_rel,
    })
}

/// Worst relative errors of the backpropagated gradients of a network's mean
/// cross-entropy loss, per parameter group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkGradReport {
    pub max_rel_err_weights: f64,
    pub max_rel_err_bias: f64,
    pub max_rel_err_beta: f64,
    /// Number of scalar parameters compared, `beta` included when present.
    pub checked: usize,
}

impl NetworkGradReport {
    pub fn max_rel_err(&self) -> f64 {
        self.max_rel_err_weights
            .max(self.max_rel_err_bias)
            .max(self.max_rel_err_beta)
    }
}

/// Differences the loss of `net` on `(x, labels)` with respect to every
/// weight, bias and (for kinds with one) the shared `beta`, and compares
/// against one backward pass.
pub fn check_network(
    net: &Mlp,
    x: &Tensor2D,
    labels: &[usize],
    h: f64,
    denom_floor: f64,
) -> Result<NetworkGradReport> {
    let loss = |n: &Mlp| -> Result<f64> { Ok(softmax_cross_entropy(&n.predict(x)?, labels)?.0) };

    let mut analytic = net.clone();
    analytic.zero_grad();
    analytic.loss_and_backward(x, labels)?;

    let mut probe = net.clone();
    let mut worst_w = 0.0_f64;
    let mut worst_b = 0.0_f64;
    let mut checked = 0;
    let nan_inf = |e: f64| if e.is_nan() { f64::INFINITY } else { e };

    for l in 0..net.layers.len() {
        for k in 0..net.layers[l].weights.len() {
            let w0 = net.layers[l].weights.as_slice()[k];
            let num = try_central_diff(
                |w| {
                    probe.layers[l].weights.as_mut_slice()[k] = w;
                    loss(&probe)
                },
                w0,
                h,
            )?;
            probe.layers[l].weights.as_mut_slice()[k] = w0;
            let a = analytic.layers[l].grad_weights.as_slice()[k];
            worst_w = worst_w.max(nan_inf(relative_error(a, num, denom_floor)));
            checked += 1;
        }
        for k in 0..net.layers[l].bias.len() {
            let b0 = net.layers[l].bias[k];
            let num = try_central_diff(
                |b| {
                    probe.layers[l].bias[k] = b;
                    loss(&probe)
                },
                b0,
                h,
            )?;
            probe.layers[l].bias[k] = b0;
            let a = analytic.layers[l].grad_bias[k];
            worst_b = worst_b.max(nan_inf(relative_error(a, num, denom_floor)));
            checked += 1;
        }
    }

    let mut worst_beta = 0.0_f64;
    if net.activation.kind.has_beta() {
        let beta0 = net.activation.params.beta;
        let num = try_central_diff(
            |b| {
                probe.activation.params.beta = b;
                loss(&probe)
            },
            beta0,
            h,
        )?;
        worst_beta = nan_inf(relative_error(
            analytic.activation.accumulated_dbeta,
            num,
            denom_floor,
        ));
        checked += 1;
    }

    Ok(NetworkGradReport {
        max_rel_err_weights: worst_w,
        max_rel_err_bias: worst_b,
        max_rel_err_beta: worst_beta,
        checked,
    })
}
