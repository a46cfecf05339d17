//! Kernel throughput and transcendental-count benchmark.

use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use swisht_core::{ActParams, Activation, ActivationKind, TranscendentalCounter, Uncounted};

use crate::error::{Error, Result};

pub const MIN_ELEMENTS: usize = 100_000;
pub const MIN_REPETITIONS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub kind: ActivationKind,
    pub elements_processed: usize,
    /// Minimum over repetitions.
    pub wall_ns_forward: u64,
    /// Minimum over repetitions, for value plus both derivatives.
    pub wall_ns_fused: u64,
    pub sigmoid_evals_per_element: f64,
    pub tanh_evals_per_element: f64,
    pub exp_evals_per_element: f64,
    pub repetitions: usize,
}

/// Sigmoid evaluations per element the fused kernel must use, for the kinds
/// that have a contract.
pub fn sigmoid_contract(kind: ActivationKind) -> Option<f64> {
    match kind {
        ActivationKind::SwishTA | ActivationKind::SwishTB | ActivationKind::SwishTC => Some(1.0),
        ActivationKind::SwishT => Some(2.0),
        _ => None,
    }
}

/// Seeded inputs uniform on `[-10, 10)`.
pub fn bench_inputs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-10.0..10.0)).collect()
}

fn min_ns(reps: usize, mut run: impl FnMut()) -> u64 {
    (0..reps)
        .map(|_| {
            let t = Instant::now();
            run();
            t.elapsed().as_nanos() as u64
        })
        .min()
        .unwrap_or(0)
}

pub fn bench_kind(
    kind: ActivationKind,
    params: ActParams,
    xs: &[f64],
    reps: usize,
) -> Result<BenchReport> {
    if xs.len() < MIN_ELEMENTS {
        return Err(Error::Usage(format!(
            "benchmark needs at least {MIN_ELEMENTS} elements, got {}",
            xs.len()
        )));
    }
    if reps < MIN_REPETITIONS {
        return Err(Error::Usage(format!(
            "benchmark needs at least {MIN_REPETITIONS} repetitions, got {reps}"
        )));
    }
    let act = Activation::new(kind, params)?;
    let n = xs.len();
    let mut y = vec![0.0; n];
    let mut dx = vec![0.0; n];
    let mut db = vec![0.0; n];

    let wall_ns_forward = min_ns(reps, || {
        act.forward_into(black_box(xs), &mut y, &mut Uncounted);
        black_box(&y);
    });
    let wall_ns_fused = min_ns(reps, || {
        act.fused_into(black_box(xs), &mut y, &mut dx, &mut db, &mut Uncounted);
        black_box((&y, &dx, &db));
    });

    // Counted separately so the counter never sits inside a timed region.
    let mut counter = TranscendentalCounter::new();
    act.fused_into(xs, &mut y, &mut dx, &mut db, &mut counter);
    let per = |c: u64| c as f64 / n as f64;

    Ok(BenchReport {
        kind,
        elements_processed: n,
        wall_ns_forward,
        wall_ns_fused,
        sigmoid_evals_per_element: per(counter.sigmoid_evals),
        tanh_evals_per_element: per(counter.tanh_evals),
        exp_evals_per_element: per(counter.exp_evals),
        repetitions: reps,
    })
}

/// Descriptions of every report that breaks its sigmoid contract.
pub fn contract_violations(reports: &[BenchReport]) -> Vec<String> {
    reports
        .iter()
        .filter_map(|r| {
            let want = sigmoid_contract(r.kind)?;
            (r.sigmoid_evals_per_element != want).then(|| {
                format!(
                    "{}: {} sigmoid evaluations per element, expected {want}",
                    r.kind, r.sigmoid_evals_per_element
                )
            })
        })
        .collect()
}
