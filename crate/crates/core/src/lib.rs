//! Swish-T activation kernels, a finite-difference oracle, and a small dense
//! network engine with a single network-wide trainable `beta`.
//!
//! The crate is `no_std` and only needs `alloc`. File IO, gzip, report
//! formats and the command-line driver live in the `swisht` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod activation;
pub mod data;
pub mod error;
pub mod gradcheck;
pub mod idx;
pub mod landscape;
pub mod math;
pub mod nn;
pub mod tensor;
pub mod train;

pub use activation::{
    act_dbeta, act_dbeta_batch, act_dx, act_dx_batch, act_eval_fused, act_eval_fused_batch,
    act_eval_fused_counted, act_forward, act_forward_batch, ActParams, Activation, ActivationKind,
    EvalTriple, BETA_MIN,
};
pub use data::{lda_accuracy, subset, subset_indices, synth_blobs, Dataset};
pub use error::{Error, Result};
pub use gradcheck::{central_diff, check_activation, GradCheckConfig, GradCheckReport};
pub use landscape::{landscape, LandscapeGrid, LandscapeNet};
pub use math::{sigmoid, MathBackend, TranscendentalCounter, Uncounted};
pub use nn::{cosine_lr, sgd_step, GlobalActivation, LrSchedule, Mlp, SgdConfig};
pub use tensor::Tensor2D;
pub use train::{evaluate, train, train_with, EpochMetrics, RunReport, TrainConfig};
