//! Elementwise activation kernels: forward values, input derivatives and
//! gate-sharpness (`beta`) derivatives for the Swish-T family and the
//! baselines it is compared against.
//!
//! Every kernel is available in three shapes: scalar free functions
//! ([`act_forward`], [`act_dx`], [`act_dbeta`], [`act_eval_fused`]), a
//! validated [`Activation`] value for hot loops, and batch helpers over
//! slices. They all share the same arithmetic, so the fused evaluation agrees
//! bitwise with the separate scalar operations.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{MathBackend, TranscendentalCounter, Uncounted};

/// Smallest `|beta|` accepted by Swish-T_C, whose bias terms divide by `beta`.
pub const BETA_MIN: f64 = 1e-8;

/// Negative-side slope of [`ActivationKind::LeakyRelu`].
pub const LEAKY_RELU_SLOPE: f64 = 0.01;

const GELU_CUBIC: f64 = 0.044715;
// sqrt(2 / pi)
const GELU_SCALE: f64 = 0.797_884_560_802_865_4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActivationKind {
    #[serde(rename = "relu")]
    Relu,
    #[serde(rename = "leaky_relu")]
    LeakyRelu,
    /// Tanh approximation of GELU.
    #[serde(rename = "gelu")]
    Gelu,
    /// Swish with `beta = 1`.
    #[serde(rename = "silu")]
    Silu,
    /// `x * sigmoid(beta * x)` with trainable `beta`.
    #[serde(rename = "swish")]
    SwishTrainable,
    #[serde(rename = "mish")]
    Mish,
    /// `x * sigmoid(beta x) + alpha * tanh(x)`
    #[serde(rename = "swish_t")]
    SwishT,
    /// `sigmoid(x) (x + 2 alpha) - alpha`
    #[serde(rename = "swish_t_a")]
    SwishTA,
    /// `sigmoid(beta x) (x + 2 alpha) - alpha`
    #[serde(rename = "swish_t_b")]
    SwishTB,
    /// `sigmoid(beta x) (x + 2 alpha / beta) - alpha / beta`
    #[serde(rename = "swish_t_c")]
    SwishTC,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 10] = [
        ActivationKind::Relu,
        ActivationKind::LeakyRelu,
        ActivationKind::Gelu,
        ActivationKind::Silu,
        ActivationKind::SwishTrainable,
        ActivationKind::Mish,
        ActivationKind::SwishT,
        ActivationKind::SwishTA,
        ActivationKind::SwishTB,
        ActivationKind::SwishTC,
    ];

    pub const SWISH_T_FAMILY: [ActivationKind; 4] = [
        ActivationKind::SwishT,
        ActivationKind::SwishTA,
        ActivationKind::SwishTB,
        ActivationKind::SwishTC,
    ];

    /// True for the kinds with a trainable gate sharpness.
    pub fn has_beta(self) -> bool {
        matches!(
            self,
            ActivationKind::SwishTrainable
                | ActivationKind::SwishT
                | ActivationKind::SwishTB
                | ActivationKind::SwishTC
        )
    }

    /// True for the kinds whose formula involves the tanh-bias scale.
    pub fn uses_alpha(self) -> bool {
        self.is_swish_t()
    }

    pub fn is_swish_t(self) -> bool {
        matches!(
            self,
            ActivationKind::SwishT
                | ActivationKind::SwishTA
                | ActivationKind::SwishTB
                | ActivationKind::SwishTC
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Relu => "relu",
            ActivationKind::LeakyRelu => "leaky_relu",
            ActivationKind::Gelu => "gelu",
            ActivationKind::Silu => "silu",
            ActivationKind::SwishTrainable => "swish",
            ActivationKind::Mish => "mish",
            ActivationKind::SwishT => "swish_t",
            ActivationKind::SwishTA => "swish_t_a",
            ActivationKind::SwishTB => "swish_t_b",
            ActivationKind::SwishTC => "swish_t_c",
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    /// Accepts the canonical snake_case names, case-insensitively, with `-`
    /// allowed in place of `_`.
    fn from_str(s: &str) -> Result<Self> {
        let matches = |name: &str| {
            s.len() == name.len()
                && s.bytes().zip(name.bytes()).all(|(a, b)| {
                    let a = a.to_ascii_lowercase();
                    a == b || (a == b'-' && b == b'_')
                })
        };
        ActivationKind::ALL
            .into_iter()
            .find(|k| matches(k.name()))
            .ok_or_else(|| Error::UnknownActivation(s.into()))
    }
}

/// The tanh-bias scale `alpha`, the gate sharpness `beta`, and whether `beta`
/// is updated during training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActParams {
    pub alpha: f64,
    pub beta: f64,
    pub beta_trainable: bool,
}

impl Default for ActParams {
    /// `alpha = 0.1`, `beta = 1.0`, trainable.
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 1.0,
            beta_trainable: true,
        }
    }
}

impl ActParams {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            beta_trainable: true,
        }
    }

    /// Same parameters with `beta` frozen.
    pub fn fixed(alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            beta_trainable: false,
        }
    }

    /// Checks finiteness, and the `|beta| >= BETA_MIN` floor for Swish-T_C.
    pub fn validate(&self, kind: ActivationKind) -> Result<()> {
        let invalid = |reason| Error::InvalidParameter {
            kind,
            alpha: self.alpha,
            beta: self.beta,
            reason,
        };
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(invalid("alpha and beta must be finite"));
        }
        if kind == ActivationKind::SwishTC && self.beta.abs() < BETA_MIN {
            return Err(invalid("|beta| below BETA_MIN"));
        }
        Ok(())
    }
}

/// Output, input derivative and `beta` derivative from one kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalTriple {
    pub y: f64,
    pub dy_dx: f64,
    pub dy_dbeta: f64,
}

/// A validated `(kind, params)` pair with the `beta`-dependent constants
/// precomputed. Construct once per pass, then evaluate without further checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Activation {
    kind: ActivationKind,
    alpha: f64,
    beta: f64,
    // Swish-T_C bias constants; unused (zero) elsewhere.
    alpha_over_beta: f64,
    two_alpha_over_beta: f64,
}

impl Activation {
    pub fn new(kind: ActivationKind, params: ActParams) -> Result<Self> {
        params.validate(kind)?;
        let (alpha_over_beta, two_alpha_over_beta) = if kind == ActivationKind::SwishTC {
            (
                params.alpha / params.beta,
                (2.0 * params.alpha) / params.beta,
            )
        } else {
            (0.0, 0.0)
        };
        Ok(Self {
            kind,
            alpha: params.alpha,
            beta: params.beta,
            alpha_over_beta,
            two_alpha_over_beta,
        })
    }

    pub fn kind(&self) -> ActivationKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[inline]
    pub fn forward(&self, x: f64) -> f64 {
        self.forward_with(x, &mut Uncounted)
    }

    #[inline]
    pub fn dx(&self, x: f64) -> f64 {
        self.dx_with(x, &mut Uncounted)
    }

    #[inline]
    pub fn dbeta(&self, x: f64) -> f64 {
        self.dbeta_with(x, &mut Uncounted)
    }

    #[inline]
    pub fn fused(&self, x: f64) -> EvalTriple {
        self.fused_with(x, &mut Uncounted)
    }

    #[inline]
    pub fn forward_with<M: MathBackend>(&self, x: f64, m: &mut M) -> f64 {
        use ActivationKind::*;
        match self.kind {
            Relu => relu(x),
            LeakyRelu => leaky_relu(x),
            Gelu => {
                let t = m.tanh(gelu_inner(x));
                gelu_value(x, t)
            }
            Silu => x * m.sigmoid(x),
            SwishTrainable => x * m.sigmoid(self.beta * x),
            Mish => {
                let e = m.exp(-x.abs());
                let t = m.tanh(softplus_from(x, e));
                x * t
            }
            SwishT => {
                let s = m.sigmoid(self.beta * x);
                let t = m.tanh(x);
                self.swish_t_value(x, s, t)
            }
            SwishTA => self.swish_t_a_value(x, m.sigmoid(x)),
            SwishTB => self.swish_t_b_value(x, m.sigmoid(self.beta * x)),
            SwishTC => self.swish_t_c_value(x, m.sigmoid(self.beta * x)),
        }
    }

    /// Input derivative. The Swish-T_A/B/C forms are the reduced ones that
    /// reuse the forward value, e.g. `sigmoid(x) (x + alpha + 1 - f_A(x))`.
    #[inline]
    pub fn dx_with<M: MathBackend>(&self, x: f64, m: &mut M) -> f64 {
        use ActivationKind::*;
        match self.kind {
            Relu => relu_dx(x),
            LeakyRelu => leaky_relu_dx(x),
            Gelu => gelu_dx(x, m.tanh(gelu_inner(x))),
            Silu => swish_dx(1.0, x, m.sigmoid(x)),
            SwishTrainable => swish_dx(self.beta, x, m.sigmoid(self.beta * x)),
            Mish => {
                let e = m.exp(-x.abs());
                let t = m.tanh(softplus_from(x, e));
                mish_dx(x, e, t)
            }
            SwishT => {
                let s = m.sigmoid(self.beta * x);
                let s2 = m.sigmoid(2.0 * x);
                self.swish_t_dx(x, s, s2)
            }
            SwishTA => {
                let s = m.sigmoid(x);
                let y = self.swish_t_a_value(x, s);
                self.swish_t_a_dx(x, s, y)
            }
            SwishTB => {
                let s = m.sigmoid(self.beta * x);
                let y = self.swish_t_b_value(x, s);
                self.swish_t_b_dx(x, s, y)
            }
            SwishTC => {
                let s = m.sigmoid(self.beta * x);
                let y = self.swish_t_c_value(x, s);
                self.swish_t_c_dx(x, s, y)
            }
        }
    }

    /// Derivative with respect to `beta`; zero for kinds without one.
    #[inline]
    pub fn dbeta_with<M: MathBackend>(&self, x: f64, m: &mut M) -> f64 {
        use ActivationKind::*;
        match self.kind {
            SwishTrainable | SwishT => x * x * sigmoid_slope(m.sigmoid(self.beta * x)),
            SwishTB => self.swish_t_b_dbeta(x, m.sigmoid(self.beta * x)),
            SwishTC => self.swish_t_c_dbeta(x, m.sigmoid(self.beta * x)),
            Relu | LeakyRelu | Gelu | Silu | Mish | SwishTA => 0.0,
        }
    }

    /// All three quantities with each transcendental evaluated once.
    #[inline]
    pub fn fused_with<M: MathBackend>(&self, x: f64, m: &mut M) -> EvalTriple {
        use ActivationKind::*;
        let (y, dy_dx, dy_dbeta) = match self.kind {
            Relu => (relu(x), relu_dx(x), 0.0),
            LeakyRelu => (leaky_relu(x), leaky_relu_dx(x), 0.0),
            Gelu => {
                let t = m.tanh(gelu_inner(x));
                (gelu_value(x, t), gelu_dx(x, t), 0.0)
            }
            Silu => {
                let s = m.sigmoid(x);
                (x * s, swish_dx(1.0, x, s), 0.0)
            }
            SwishTrainable => {
                let s = m.sigmoid(self.beta * x);
                (x * s, swish_dx(self.beta, x, s), x * x * sigmoid_slope(s))
            }
            Mish => {
                let e = m.exp(-x.abs());
                let t = m.tanh(softplus_from(x, e));
                (x * t, mish_dx(x, e, t), 0.0)
            }
            SwishT => {
                let s = m.sigmoid(self.beta * x);
                let s2 = m.sigmoid(2.0 * x);
                let t = m.tanh(x);
                (
                    self.swish_t_value(x, s, t),
                    self.swish_t_dx(x, s, s2),
                    x * x * sigmoid_slope(s),
                )
            }
            SwishTA => {
                let s = m.sigmoid(x);
                let y = self.swish_t_a_value(x, s);
                (y, self.swish_t_a_dx(x, s, y), 0.0)
            }
            SwishTB => {
                let s = m.sigmoid(self.beta * x);
                let y = self.swish_t_b_value(x, s);
                (y, self.swish_t_b_dx(x, s, y), self.swish_t_b_dbeta(x, s))
            }
            SwishTC => {
                let s = m.sigmoid(self.beta * x);
                let y = self.swish_t_c_value(x, s);
                (y, self.swish_t_c_dx(x, s, y), self.swish_t_c_dbeta(x, s))
            }
        };
        EvalTriple { y, dy_dx, dy_dbeta }
    }

    #[inline(always)]
    fn swish_t_value(&self, x: f64, s: f64, t: f64) -> f64 {
        x * s + self.alpha * t
    }

    // sigma(bx) + bx sigma(bx)(1 - sigma(bx)) + 4 alpha sigma(2x)(1 - sigma(2x))
    #[inline(always)]
    fn swish_t_dx(&self, x: f64, s: f64, s2: f64) -> f64 {
        swish_dx(self.beta, x, s) + 4.0 * self.alpha * sigmoid_slope(s2)
    }

    #[inline(always)]
    fn swish_t_a_value(&self, x: f64, s: f64) -> f64 {
        s * (x + 2.0 * self.alpha) - self.alpha
    }

    #[inline(always)]
    fn swish_t_a_dx(&self, x: f64, s: f64, y: f64) -> f64 {
        s * (x + self.alpha + 1.0 - y)
    }

    #[inline(always)]
    fn swish_t_b_value(&self, x: f64, s: f64) -> f64 {
        s * (x + 2.0 * self.alpha) - self.alpha
    }

    #[inline(always)]
    fn swish_t_b_dx(&self, x: f64, s: f64, y: f64) -> f64 {
        s * (self.beta * (x + self.alpha - y) + 1.0)
    }

    #[inline(always)]
    fn swish_t_b_dbeta(&self, x: f64, s: f64) -> f64 {
        x * (x + 2.0 * self.alpha) * sigmoid_slope(s)
    }

    #[inline(always)]
    fn swish_t_c_value(&self, x: f64, s: f64) -> f64 {
        s * (x + self.two_alpha_over_beta) - self.alpha_over_beta
    }

    #[inline(always)]
    fn swish_t_c_dx(&self, x: f64, s: f64, y: f64) -> f64 {
        s * (self.beta * (x - y) + self.alpha + 1.0)
    }

    // x (x + 2a/b) s(1-s) - 2 a s / b^2 + a / b^2
    #[inline(always)]
    fn swish_t_c_dbeta(&self, x: f64, s: f64) -> f64 {
        let beta_sq = self.beta * self.beta;
        x * (x + self.two_alpha_over_beta) * sigmoid_slope(s) - 2.0 * self.alpha * s / beta_sq
            + self.alpha / beta_sq
    }
}

#[inline(always)]
fn sigmoid_slope(s: f64) -> f64 {
    s * (1.0 - s)
}

// d/dx [x sigmoid(bx)] = s + b x s (1 - s)
#[inline(always)]
fn swish_dx(beta: f64, x: f64, s: f64) -> f64 {
    s + beta * x * sigmoid_slope(s)
}

#[inline(always)]
fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

#[inline(always)]
fn relu_dx(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

#[inline(always)]
fn leaky_relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        LEAKY_RELU_SLOPE * x
    }
}

#[inline(always)]
fn leaky_relu_dx(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        LEAKY_RELU_SLOPE
    }
}

#[inline(always)]
fn gelu_inner(x: f64) -> f64 {
    GELU_SCALE * (x + GELU_CUBIC * x * x * x)
}

#[inline(always)]
fn gelu_value(x: f64, t: f64) -> f64 {
    0.5 * x * (1.0 + t)
}

#[inline(always)]
fn gelu_dx(x: f64, t: f64) -> f64 {
    let du = GELU_SCALE * (1.0 + 3.0 * GELU_CUBIC * x * x);
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du
}

/// Softplus given `e = exp(-|x|)`.
#[inline(always)]
fn softplus_from(x: f64, e: f64) -> f64 {
    x.max(0.0) + libm::log1p(e)
}

// d/dx [x tanh(softplus x)] = t + x (1 - t^2) sigmoid(x); sigmoid(x) rebuilt from e = exp(-|x|).
#[inline(always)]
fn mish_dx(x: f64, e: f64, t: f64) -> f64 {
    let s = if x >= 0.0 {
        1.0 / (1.0 + e)
    } else {
        e / (1.0 + e)
    };
    t + x * (1.0 - t * t) * s
}

pub fn act_forward(kind: ActivationKind, params: ActParams, x: f64) -> Result<f64> {
    Ok(Activation::new(kind, params)?.forward(x))
}

pub fn act_dx(kind: ActivationKind, params: ActParams, x: f64) -> Result<f64> {
    Ok(Activation::new(kind, params)?.dx(x))
}

pub fn act_dbeta(kind: ActivationKind, params: ActParams, x: f64) -> Result<f64> {
    Ok(Activation::new(kind, params)?.dbeta(x))
}

pub fn act_eval_fused(kind: ActivationKind, params: ActParams, x: f64) -> Result<EvalTriple> {
    Ok(Activation::new(kind, params)?.fused(x))
}

/// Fused evaluation that records its transcendental calls in `counter`.
pub fn act_eval_fused_counted(
    kind: ActivationKind,
    params: ActParams,
    x: f64,
    counter: &mut TranscendentalCounter,
) -> Result<EvalTriple> {
    Ok(Activation::new(kind, params)?.fused_with(x, counter))
}

pub fn act_forward_batch(kind: ActivationKind, params: ActParams, xs: &[f64]) -> Result<Vec<f64>> {
    let act = Activation::new(kind, params)?;
    Ok(xs.iter().map(|&x| act.forward(x)).collect())
}

pub fn act_dx_batch(kind: ActivationKind, params: ActParams, xs: &[f64]) -> Result<Vec<f64>> {
    let act = Activation::new(kind, params)?;
    Ok(xs.iter().map(|&x| act.dx(x)).collect())
}

pub fn act_dbeta_batch(kind: ActivationKind, params: ActParams, xs: &[f64]) -> Result<Vec<f64>> {
    let act = Activation::new(kind, params)?;
    Ok(xs.iter().map(|&x| act.dbeta(x)).collect())
}

pub fn act_eval_fused_batch(
    kind: ActivationKind,
    params: ActParams,
    xs: &[f64],
) -> Result<Vec<EvalTriple>> {
    let act = Activation::new(kind, params)?;
    Ok(xs.iter().map(|&x| act.fused(x)).collect())
}

impl Activation {
    /// Writes `forward(xs[i])` into `out[i]`.
    ///
    /// # Panics
    /// If the slices differ in length.
    pub fn forward_into<M: MathBackend>(&self, xs: &[f64], out: &mut [f64], m: &mut M) {
        assert_eq!(xs.len(), out.len(), "forward_into length mismatch");
        for (o, &x) in out.iter_mut().zip(xs) {
            *o = self.forward_with(x, m);
        }
    }

    /// Fused pass over a slice, writing all three outputs elementwise.
    ///
    /// # Panics
    /// If the slices differ in length.
    pub fn fused_into<M: MathBackend>(
        &self,
        xs: &[f64],
        y: &mut [f64],
        dy_dx: &mut [f64],
        dy_dbeta: &mut [f64],
        m: &mut M,
    ) {
        let n = xs.len();
        assert!(
            y.len() == n && dy_dx.len() == n && dy_dbeta.len() == n,
            "fused_into length mismatch"
        );
        for i in 0..n {
            let e = self.fused_with(xs[i], m);
            y[i] = e.y;
            dy_dx[i] = e.dy_dx;
            dy_dbeta[i] = e.dy_dbeta;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ActivationKind::*;

    fn p(alpha: f64, beta: f64) -> ActParams {
        ActParams::new(alpha, beta)
    }

    #[test]
    fn has_beta_matches_the_trainable_kinds() {
        let with: Vec<_> = ActivationKind::ALL
            .into_iter()
            .filter(|k| k.has_beta())
            .collect();
        assert_eq!(with, [SwishTrainable, SwishT, SwishTB, SwishTC]);
    }

    #[test]
    fn names_round_trip_and_unknown_is_rejected() {
        for k in ActivationKind::ALL {
            assert_eq!(k.name().parse::<ActivationKind>().unwrap(), k);
        }
        assert_eq!("Swish-T-C".parse::<ActivationKind>().unwrap(), SwishTC);
        assert!(matches!(
            "smu".parse::<ActivationKind>(),
            Err(Error::UnknownActivation(_))
        ));
        assert!("swish_t_".parse::<ActivationKind>().is_err());
    }

    #[test]
    fn forward_reference_values() {
        // sigmoid(1) * 1.2 - 0.1
        let ta = act_forward(SwishTA, p(0.1, 1.0), 1.0).unwrap();
        assert!((ta - 0.777_270_294_356_005_9).abs() < 1e-15);
        // sigmoid(1) + 0.1 tanh(1)
        let t = act_forward(SwishT, p(0.1, 1.0), 1.0).unwrap();
        assert!((t - 0.807_217_994_225_581_4).abs() < 1e-15);
        let neg = act_forward(SwishT, p(0.1, 1.0), -20.0).unwrap();
        assert!((neg + 0.1).abs() <= 1e-7);
    }

    #[test]
    fn swish_t_family_is_zero_at_origin() {
        for k in ActivationKind::SWISH_T_FAMILY {
            for (a, b) in [(0.1, 1.0), (0.5, 6.0), (1.0, -2.0), (0.3, 1e-4)] {
                assert_eq!(
                    act_forward(k, p(a, b), 0.0).unwrap(),
                    0.0,
                    "{k} a={a} b={b}"
                );
            }
        }
    }

    #[test]
    fn dx_reference_values() {
        assert!((act_dx(SwishTA, p(0.1, 1.0), 0.0).unwrap() - 0.55).abs() < 1e-15);
        assert!((act_dx(SwishT, p(0.1, 1.0), 0.0).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(act_dx(Relu, p(0.1, 1.0), -3.0).unwrap(), 0.0);
        assert_eq!(act_dx(Relu, p(0.1, 1.0), 0.0).unwrap(), 0.0);
        assert_eq!(
            act_dx(LeakyRelu, p(0.1, 1.0), -3.0).unwrap(),
            LEAKY_RELU_SLOPE
        );
    }

    #[test]
    fn dbeta_reference_values() {
        let d = act_dbeta(SwishT, p(0.1, 1.0), 1.0).unwrap();
        assert!((d - 0.196_611_933_241_481_85).abs() < 1e-15);
        for x in [-3.0, 0.0, 2.5] {
            assert_eq!(act_dbeta(SwishTA, p(0.7, 3.0), x).unwrap(), 0.0);
        }
        assert_eq!(act_dbeta(SwishTC, p(0.1, 1.0), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn swish_t_c_rejects_tiny_beta() {
        for b in [0.0, 1e-9, -5e-9] {
            let err = act_forward(SwishTC, p(0.1, b), 1.0).unwrap_err();
            assert!(matches!(err, Error::InvalidParameter { kind: SwishTC, .. }));
        }
        assert!(act_forward(SwishTC, p(0.1, BETA_MIN), 1.0).is_ok());
        assert!(act_forward(SwishTC, p(0.1, -BETA_MIN), 1.0).is_ok());
        // Other kinds accept beta = 0.
        assert!(act_forward(SwishTB, p(0.1, 0.0), 1.0).is_ok());
        assert!(act_forward(SwishT, p(f64::NAN, 1.0), 1.0).is_err());
    }

    #[test]
    fn fused_matches_scalar_ops() {
        let e = act_eval_fused(SwishTB, p(0.1, 1.0), 1.0).unwrap();
        assert_eq!(e.y, act_forward(SwishTB, p(0.1, 1.0), 1.0).unwrap());
        assert!((e.y - 0.777_270_294_356_005_9).abs() < 1e-15);
        assert_eq!(e.dy_dx, act_dx(SwishTB, p(0.1, 1.0), 1.0).unwrap());
        assert_eq!(e.dy_dbeta, act_dbeta(SwishTB, p(0.1, 1.0), 1.0).unwrap());

        let a = act_eval_fused(SwishTA, p(0.1, 1.0), 0.0).unwrap();
        assert_eq!(a.y, 0.0);
        assert!((a.dy_dx - 0.55).abs() < 1e-15);
        assert_eq!(a.dy_dbeta, 0.0);
    }

    #[test]
    fn fused_sigmoid_counts() {
        let cases = [
            (SwishTA, 1, 0),
            (SwishTB, 1, 0),
            (SwishTC, 1, 0),
            (SwishT, 2, 1),
        ];
        for (k, sig, tanh) in cases {
            let mut c = TranscendentalCounter::new();
            let n = 37;
            for i in 0..n {
                act_eval_fused_counted(k, p(0.1, 1.5), i as f64 * 0.3 - 5.0, &mut c).unwrap();
            }
            assert_eq!(c.sigmoid_evals, sig * n, "{k}");
            assert_eq!(c.tanh_evals, tanh * n, "{k}");
            assert_eq!(c.exp_evals, 0, "{k}");
        }
    }

    #[test]
    fn batch_ops_match_scalar() {
        for k in ActivationKind::SWISH_T_FAMILY {
            assert_eq!(
                act_forward_batch(k, p(0.2, 2.0), &[0.0; 3]).unwrap(),
                [0.0; 3]
            );
            let one = act_forward_batch(k, p(0.2, 2.0), &[1.0]).unwrap();
            assert_eq!(one, [act_forward(k, p(0.2, 2.0), 1.0).unwrap()]);
        }
        assert!(act_forward_batch(SwishTC, p(0.2, 0.0), &[1.0]).is_err());
        assert!(act_forward_batch(SwishT, p(0.2, 1.0), &[])
            .unwrap()
            .is_empty());
    }

    #[test]
    fn fused_into_matches_scalar() {
        let act = Activation::new(SwishTC, p(0.1, 2.0)).unwrap();
        let xs = [-1.0, 0.5, 2.0];
        let (mut y, mut d, mut b) = ([0.0; 3], [0.0; 3], [0.0; 3]);
        act.fused_into(&xs, &mut y, &mut d, &mut b, &mut Uncounted);
        for i in 0..3 {
            assert_eq!(y[i], act.forward(xs[i]));
            assert_eq!(d[i], act.dx(xs[i]));
            assert_eq!(b[i], act.dbeta(xs[i]));
        }
    }

    #[test]
    fn baselines_behave() {
        let q = ActParams::default();
        assert_eq!(act_forward(Relu, q, -2.0).unwrap(), 0.0);
        assert_eq!(act_forward(Relu, q, 2.0).unwrap(), 2.0);
        assert_eq!(act_forward(LeakyRelu, q, -2.0).unwrap(), -0.02);
        assert_eq!(act_forward(Silu, q, 0.0).unwrap(), 0.0);
        assert!((act_forward(Gelu, q, 1.0).unwrap() - 0.841_191_990_608_276_7).abs() < 1e-12);
        assert!((act_forward(Mish, q, 1.0).unwrap() - 0.865_098_388_267_310_3).abs() < 1e-12);
        assert_eq!(act_forward(Mish, q, 1000.0).unwrap(), 1000.0);
        assert!(act_forward(Mish, q, -1000.0).unwrap().abs() < 1e-300);
    }
}
