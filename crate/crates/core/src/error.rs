use alloc::string::String;

use crate::activation::ActivationKind;

/// Errors produced by the core kernels, the network engine and the data codecs.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters for {kind}: alpha={alpha}, beta={beta} ({reason})")]
    InvalidParameter {
        kind: ActivationKind,
        alpha: f64,
        beta: f64,
        reason: &'static str,
    },

    #[error("unknown activation `{0}`")]
    UnknownActivation(String),

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("backward called before forward on {0}")]
    BackwardBeforeForward(&'static str),

    #[error("activation cache mismatch at site {site}: {reason}")]
    CacheMismatch { site: usize, reason: &'static str },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("wrong magic for {what}: expected {expected:#010x}, found {found:#010x}")]
    WrongMagic {
        what: &'static str,
        expected: u32,
        found: u32,
    },

    #[error("truncated {what}: expected {expected} bytes, found {actual}")]
    Truncated {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("subset size {requested} out of range 1..={available}")]
    SubsetOutOfRange { requested: usize, available: usize },

    #[error("non-finite function value {value} at x={x}")]
    NonFinite { x: f64, value: f64 },

    #[error("gradient check failed at alpha={alpha}, beta={beta}, x={x}: {source}")]
    AtGridPoint {
        alpha: f64,
        beta: f64,
        x: f64,
        source: alloc::boxed::Box<Error>,
    },

    #[error("training diverged in epoch {epoch}: loss {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
