//! Numerically stable scalar primitives and the transcendental-call counter.
//!
//! All kernels in [`crate::activation`] are generic over [`MathBackend`], so the
//! same arithmetic runs either uncounted ([`Uncounted`]) or instrumented
//! ([`TranscendentalCounter`]). Because both backends route to the same
//! functions below, counted and uncounted passes are bitwise identical.

use serde::{Deserialize, Serialize};

/// Logistic sigmoid `1 / (1 + e^-x)`.
///
/// Branches on the sign of `x` so the exponential argument is never positive:
/// no overflow for any finite input, and the negative tail keeps its relative
/// precision instead of rounding to `1 - 1`.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` as `max(x, 0) + ln1p(e^-|x|)`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + libm::log1p(libm::exp(-x.abs()))
}

#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// Source of the transcendental functions used by the activation kernels.
pub trait MathBackend {
    fn sigmoid(&mut self, x: f64) -> f64;
    fn tanh(&mut self, x: f64) -> f64;
    fn exp(&mut self, x: f64) -> f64;
}

/// Zero-cost backend that just evaluates.
#[derive(Debug, Clone, Copy, Default)]
pub struct Uncounted;

impl MathBackend for Uncounted {
    #[inline(always)]
    fn sigmoid(&mut self, x: f64) -> f64 {
        sigmoid(x)
    }

    #[inline(always)]
    fn tanh(&mut self, x: f64) -> f64 {
        tanh(x)
    }

    #[inline(always)]
    fn exp(&mut self, x: f64) -> f64 {
        exp(x)
    }
}

/// Counts every sigmoid, tanh and exponential evaluated by a kernel pass.
///
/// A sigmoid counts once as a sigmoid even though it evaluates an exponential
/// internally; `exp_evals` only counts exponentials a kernel requests directly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscendentalCounter {
    pub sigmoid_evals: u64,
    pub tanh_evals: u64,
    pub exp_evals: u64,
}

impl TranscendentalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    pub fn total(&self) -> u64 {
        self.sigmoid_evals + self.tanh_evals + self.exp_evals
    }
}

impl MathBackend for TranscendentalCounter {
    #[inline]
    fn sigmoid(&mut self, x: f64) -> f64 {
        self.sigmoid_evals += 1;
        sigmoid(x)
    }

    #[inline]
    fn tanh(&mut self, x: f64) -> f64 {
        self.tanh_evals += 1;
        tanh(x)
    }

    #[inline]
    fn exp(&mut self, x: f64) -> f64 {
        self.exp_evals += 1;
        exp(x)
    }
}
