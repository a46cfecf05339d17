//! Output surface of an untrained `2 -> H -> H -> 1` network over a square
//! input grid, for visualising how an activation shapes a random network.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::activation::{ActParams, Activation, ActivationKind};
use crate::error::{Error, Result};
use crate::gradcheck::uniform_grid;
use crate::tensor::{dot, Tensor2D};

pub const DEFAULT_HIDDEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid {
    /// The grid spans `[-half_width, half_width]` on both axes.
    pub half_width: f64,
    pub resolution: usize,
}

impl Default for LandscapeGrid {
    fn default() -> Self {
        Self {
            half_width: 5.0,
            resolution: 256,
        }
    }
}

impl LandscapeGrid {
    pub fn axis(&self) -> Vec<f64> {
        uniform_grid(-self.half_width, self.half_width, self.resolution)
    }
}

#[derive(Debug, Clone)]
struct Layer {
    weights: Tensor2D,
    bias: Vec<f64>,
}

impl Layer {
    fn gaussian<R: Rng>(input: usize, output: usize, rng: &mut R) -> Self {
        let std = 1.0 / libm::sqrt(input as f64);
        let mut draw = || {
            let z: f64 = rng.sample(StandardNormal);
            z * std
        };
        let w: Vec<f64> = (0..input * output).map(|_| draw()).collect();
        let bias = (0..output).map(|_| draw()).collect();
        Self {
            weights: Tensor2D::from_vec(output, input, w).expect("sized by construction"),
            bias,
        }
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.weights.rows()).map(|j| dot(x, self.weights.row(j)) + self.bias[j]));
    }
}

/// Randomly initialised, never trained: every weight and bias is drawn from
/// `N(0, 1/fan_in)`.
#[derive(Debug, Clone)]
pub struct LandscapeNet {
    layers: [Layer; 3],
}

impl LandscapeNet {
    pub fn new(seed: u64, hidden: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l1 = Layer::gaussian(2, hidden, &mut rng);
        let l2 = Layer::gaussian(hidden, hidden, &mut rng);
        let l3 = Layer::gaussian(hidden, 1, &mut rng);
        Self {
            layers: [l1, l2, l3],
        }
    }

    /// Scalar output at `(x, y)` with `act` applied after both hidden layers,
    /// together with the second hidden layer's activations.
    pub fn eval_with<F: Fn(f64) -> f64>(&self, act: F, x: f64, y: f64) -> (f64, Vec<f64>) {
        let mut h1 = Vec::new();
        let mut h2 = Vec::new();
        let mut out = Vec::new();
        self.layers[0].apply(&[x, y], &mut h1);
        h1.iter_mut().for_each(|v| *v = act(*v));
        self.layers[1].apply(&h1, &mut h2);
        h2.iter_mut().for_each(|v| *v = act(*v));
        self.layers[2].apply(&h2, &mut out);
        (out[0], h2)
    }

    /// `R x R` surface; entry `(i, j)` is the output at `(axis[j], axis[i])`.
    pub fn surface_with<F: Fn(f64) -> f64>(
        &self,
        act: F,
        grid: &LandscapeGrid,
    ) -> Result<Tensor2D> {
        if grid.resolution < 2 {
            return Err(Error::InvalidConfig(
                "landscape resolution must be at least 2",
            ));
        }
        if !(grid.half_width > 0.0 && grid.half_width.is_finite()) {
            return Err(Error::InvalidConfig(
                "landscape half-width must be positive",
            ));
        }
        let axis = grid.axis();
        let r = grid.resolution;
        let mut surface = Tensor2D::zeros(r, r);
        for (i, &y) in axis.iter().enumerate() {
            for (j, &x) in axis.iter().enumerate() {
                surface[(i, j)] = self.eval_with(&act, x, y).0;
            }
        }
        Ok(surface)
    }
}

/// Output surface of the `net_seed` network under the given activation.
pub fn landscape(
    net_seed: u64,
    kind: ActivationKind,
    params: ActParams,
    grid: &LandscapeGrid,
) -> Result<Tensor2D> {
    let act = Activation::new(kind, params)?;
    LandscapeNet::new(net_seed, DEFAULT_HIDDEN).surface_with(|v| act.forward(v), grid)
}
