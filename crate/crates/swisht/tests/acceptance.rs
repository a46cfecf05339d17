//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! MNIST is read from `SWISHT_MNIST_DIR`, or `data/mnist` at the workspace
//! root (see `scripts/fetch_mnist.sh`).

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use swisht::bench::sigmoid_contract;
use swisht::cli::{bench, gradcheck, BenchArgs, GradcheckArgs};
use swisht::io::MnistFiles;
use swisht::report::write_csv;
use swisht_core::gradcheck::{check_network, uniform_grid};
use swisht_core::idx::{parse_idx_images, parse_idx_labels};
use swisht_core::landscape::{landscape, LandscapeGrid};
use swisht_core::{
    act_forward, sigmoid, subset, train, ActParams, ActivationKind, Dataset, Error, Mlp, RunReport,
    Tensor2D, TrainConfig,
};

use ActivationKind::{Relu, SwishT, SwishTA, SwishTB, SwishTC};

type Outcome = Result<String, String>;

const ALPHAS: [f64; 3] = [0.1, 0.5, 1.0];
const BETAS: [f64; 4] = [0.5, 1.0, 2.0, 6.0];
const MNIST_VARIANTS: [ActivationKind; 3] = [SwishT, SwishTB, SwishTC];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn grid() -> Vec<f64> {
    uniform_grid(-10.0, 10.0, 401)
}

fn f(kind: ActivationKind, alpha: f64, beta: f64, x: f64) -> f64 {
    act_forward(kind, ActParams::new(alpha, beta), x).unwrap()
}

fn max_over_grid(g: impl Fn(f64) -> f64) -> f64 {
    grid().into_iter().map(g).fold(0.0, f64::max)
}

fn gradient_suite() -> Outcome {
    let args = GradcheckArgs {
        kinds: vec![
            SwishT,
            SwishTA,
            SwishTB,
            SwishTC,
            ActivationKind::SwishTrainable,
            ActivationKind::Silu,
            ActivationKind::Gelu,
            ActivationKind::Mish,
        ],
        alphas: ALPHAS.to_vec(),
        betas: BETAS.to_vec(),
        xmin: -10.0,
        xmax: 10.0,
        points: 401,
        h: 1e-5,
        tol: 1e-6,
    };
    let summary = gradcheck(&args).map_err(|e| e.to_string())?;
    let worst = summary
        .reports
        .iter()
        .map(|r| r.max_rel_err())
        .fold(0.0, f64::max);
    let failed: Vec<_> = summary
        .reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.kind.name())
        .collect();
    ensure(summary.passed, || {
        format!("failed kinds {failed:?}, worst rel err {worst:.3e}")
    })?;
    Ok(format!("8 kinds, worst rel err {worst:.3e} <= 1e-6"))
}

fn identity_suite() -> Outcome {
    let swish = |x: f64, b: f64| x * sigmoid(b * x);
    let mut worst = [0.0_f64; 6];
    for a in ALPHAS {
        for b in BETAS {
            worst[0] = worst[0].max(max_over_grid(|x| {
                (f(SwishT, a, b, x) - (swish(x, b) + 2.0 * a * sigmoid(2.0 * x) - a)).abs()
            }));
            worst[4] = worst[4].max(max_over_grid(|x| {
                (f(SwishTB, a, b, x) - (swish(x, b) + a * (b * x / 2.0).tanh())).abs()
            }));
            worst[5] = worst[5].max(max_over_grid(|x| {
                (f(SwishTC, a, b, x) - (swish(x, b) + a / b * (b * x / 2.0).tanh())).abs()
            }));
        }
        worst[1] = worst[1].max(max_over_grid(|x| {
            (f(SwishTA, a, 1.0, x) - (swish(x, 1.0) + a * (x / 2.0).tanh())).abs()
        }));
        worst[2] = worst[2].max(max_over_grid(|x| {
            (f(SwishTB, a, 1.0, x) - f(SwishTA, a, 1.0, x)).abs()
        }));
        worst[3] = worst[3].max(max_over_grid(|x| {
            (f(SwishTC, a, 1.0, x) - f(SwishTB, a, 1.0, x)).abs()
        }));
    }
    let names = [
        "T two forms",
        "TA = Swish-1 + a tanh(x/2)",
        "TB(b=1) = TA",
        "TC(b=1) = TB(b=1)",
        "TB tanh form",
        "TC tanh form",
    ];
    for (name, w) in names.iter().zip(worst) {
        ensure(w <= 1e-12, || format!("{name}: {w:.3e} > 1e-12"))?;
    }
    let max = worst.iter().copied().fold(0.0, f64::max);
    Ok(format!("6 identities, max deviation {max:.3e} <= 1e-12"))
}

fn property_suite() -> Outcome {
    // Absolute slack for the bias bounds: the bias is computed as a difference
    // of two O(10) values, which costs a few ulps.
    const ROUND_OFF: f64 = 1e-12;
    let swish = |x: f64, b: f64| x * sigmoid(b * x);
    for kind in ActivationKind::SWISH_T_FAMILY {
        for a in ALPHAS {
            for b in BETAS {
                let y = f(kind, a, b, 0.0);
                ensure(y.abs() <= 1e-16, || {
                    format!("{kind}({a}, {b}) at 0 = {y:e}")
                })?;
            }
        }
    }
    for a in ALPHAS {
        for b in BETAS {
            let t = max_over_grid(|x| (f(SwishT, a, b, x) - swish(x, b)).abs());
            ensure(t <= a + ROUND_OFF, || {
                format!("swish_t bias {t} > alpha {a}")
            })?;
            let c = max_over_grid(|x| (f(SwishTC, a, b, x) - swish(x, b)).abs());
            ensure(c <= a / b + ROUND_OFF, || {
                format!("swish_t_c bias {c} > alpha/beta {}", a / b)
            })?;
            let s = max_over_grid(|x| (f(SwishTC, a, -b, x) + f(SwishTC, a, b, -x)).abs());
            ensure(s <= 1e-12, || format!("sign symmetry {s:e} at ({a}, {b})"))?;
        }
    }
    let mut asym = 0.0_f64;
    for kind in ActivationKind::SWISH_T_FAMILY {
        for a in [0.1, 1.0] {
            asym = asym.max((f(kind, a, 1.0, -20.0) + a).abs());
        }
    }
    ensure(asym <= 1e-7, || format!("|f(-20) + alpha| = {asym:e}"))?;
    let id = max_over_grid(|x| (f(SwishTC, 1.0, 1e-4, x) - x).abs());
    ensure(id <= 3e-3, || format!("identity limit {id:e} > 3e-3"))?;
    Ok(format!("zero-centering, bias bounds, |f(-20)+a| = {asym:.1e}, identity limit {id:.3e}, sign symmetry"))
}

fn backprop_oracle() -> Outcome {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let x =
        Tensor2D::from_vec(5, 2, (0..10).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
    let labels = [0, 1, 1, 0, 1];
    let mut worst = 0.0_f64;
    for kind in ActivationKind::SWISH_T_FAMILY {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let net = Mlp::new(&[2, 4, 3, 2], kind, ActParams::default(), &mut rng).unwrap();
        let r = check_network(&net, &x, &labels, 1e-5, 1e-8).map_err(|e| e.to_string())?;
        ensure(r.max_rel_err() <= 1e-5, || format!("{kind}: {r:?}"))?;
        worst = worst.max(r.max_rel_err());
    }
    Ok(format!(
        "4 variants, all weights, biases and beta, worst rel err {worst:.3e} <= 1e-5"
    ))
}

fn mnist_dir() -> PathBuf {
    std::env::var_os("SWISHT_MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"))
}

struct Mnist {
    train: Dataset,
    test: Dataset,
}

fn load_mnist() -> Result<Mnist, String> {
    let dir = mnist_dir();
    let files = MnistFiles::in_dir(&dir)
        .map_err(|e| format!("{e} (run scripts/fetch_mnist.sh or set SWISHT_MNIST_DIR)"))?;
    let (full, test) = files.load().map_err(|e| e.to_string())?;
    let train = subset(&full, 10_000, 0).map_err(|e| e.to_string())?;
    Ok(Mnist { train, test })
}

fn mnist_config(kind: ActivationKind, fixed_beta: Option<f64>) -> TrainConfig {
    TrainConfig {
        seed: 0,
        epochs: 5,
        kind,
        beta0: fixed_beta.unwrap_or(1.0),
        beta_trainable: fixed_beta.is_none(),
        ..TrainConfig::default()
    }
}

/// Every MNIST run the criteria need, in a fixed order.
struct MnistRuns {
    relu: RunReport,
    trainable: Vec<RunReport>,
    fixed: Vec<RunReport>,
    elapsed: Duration,
}

fn mnist_runs(data: &Mnist) -> Result<MnistRuns, String> {
    let start = Instant::now();
    let run = |cfg: TrainConfig| train(&cfg, &data.train, &data.test).map_err(|e| e.to_string());
    let relu = run(mnist_config(Relu, None))?;
    let trainable = MNIST_VARIANTS
        .iter()
        .map(|&k| run(mnist_config(k, None)))
        .collect::<Result<_, _>>()?;
    let fixed = MNIST_VARIANTS
        .iter()
        .map(|&k| run(mnist_config(k, Some(6.0))))
        .collect::<Result<_, _>>()?;
    Ok(MnistRuns {
        relu,
        trainable,
        fixed,
        elapsed: start.elapsed(),
    })
}

fn mnist_analog(runs: &MnistRuns) -> Outcome {
    let relu = runs.relu.final_test_acc();
    let mut parts = vec![format!("relu {relu:.4}")];
    for r in &runs.trainable {
        let acc = r.final_test_acc();
        let kind = r.config.kind;
        ensure(acc >= 0.93, || format!("{kind} test acc {acc:.4} < 0.93"))?;
        ensure((acc - relu).abs() <= 0.02, || {
            format!("{kind} {acc:.4} vs relu {relu:.4}")
        })?;
        parts.push(format!("{kind} {acc:.4}"));
    }
    // Criterion 5 covers four of the seven runs.
    let share = runs.elapsed.as_secs_f64() * 4.0 / 7.0;
    ensure(share < 300.0, || format!("{share:.0} s > 300 s"))?;
    Ok(format!("{} ({share:.0} s)", parts.join(", ")))
}

fn fixed_beta_ablation(runs: &MnistRuns) -> Outcome {
    let mut parts = Vec::new();
    for (fixed, free) in runs.fixed.iter().zip(&runs.trainable) {
        let kind = fixed.config.kind;
        ensure(
            fixed
                .epochs
                .iter()
                .all(|m| m.beta.to_bits() == 6.0_f64.to_bits())
                && fixed.final_beta.to_bits() == 6.0_f64.to_bits(),
            || format!("{kind}: beta moved off 6.0"),
        )?;
        let (a, b) = (fixed.final_test_acc(), free.final_test_acc());
        ensure((a - b).abs() <= 0.02, || {
            format!("{kind}: fixed {a:.4} vs trainable {b:.4}")
        })?;
        parts.push(format!("{kind} {a:.4} vs {b:.4}"));
    }
    Ok(parts.join(", "))
}

fn beta_drift(runs: &MnistRuns) -> Outcome {
    let mut parts = Vec::new();
    for r in &runs.trainable {
        let kind = r.config.kind;
        ensure(r.epochs.iter().all(|m| m.beta.is_finite()), || {
            format!("{kind}: non-finite beta")
        })?;
        ensure(r.final_beta.is_finite() && r.final_beta != 1.0, || {
            format!("{kind}: final beta {}", r.final_beta)
        })?;
        parts.push(format!("{kind} 1.0 -> {:.4}", r.final_beta));
    }
    Ok(parts.join(", "))
}

fn transcendental_contract() -> Outcome {
    let args = BenchArgs {
        kinds: ActivationKind::SWISH_T_FAMILY.to_vec(),
        elements: 1_000_000,
        reps: 3,
        alpha: 0.1,
        beta: 1.0,
    };
    let summary = bench(&args, 0).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for r in &summary.reports {
        let want = sigmoid_contract(r.kind).unwrap();
        ensure(r.sigmoid_evals_per_element == want, || {
            format!(
                "{}: {} sigmoid/element, expected {want}",
                r.kind, r.sigmoid_evals_per_element
            )
        })?;
        parts.push(format!(
            "{} {} ({} ns fused)",
            r.kind, r.sigmoid_evals_per_element, r.wall_ns_fused
        ));
    }
    ensure(summary.contract_ok, || {
        "bench reported a contract violation".into()
    })?;
    Ok(parts.join(", "))
}

fn metric_table(r: &RunReport) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.csv");
    write_csv(&p, &r.epochs).unwrap();
    std::fs::read(p).unwrap()
}

fn determinism(data: &Mnist, first: &MnistRuns) -> Outcome {
    let second = mnist_runs(data)?;
    let pairs = std::iter::once((&first.relu, &second.relu))
        .chain(first.trainable.iter().zip(&second.trainable))
        .chain(first.fixed.iter().zip(&second.fixed));
    let mut n = 0;
    for (a, b) in pairs {
        ensure(
            a.same_metrics(b) && metric_table(a) == metric_table(b),
            || {
                format!(
                    "{} (trainable {}) differs between runs",
                    a.config.kind, a.config.beta_trainable
                )
            },
        )?;
        n += 1;
    }
    let g = LandscapeGrid::default();
    for seed in [0, 1, 42] {
        let a = landscape(seed, SwishTC, ActParams::default(), &g).unwrap();
        let b = landscape(seed, SwishTC, ActParams::default(), &g).unwrap();
        ensure(
            a.as_slice()
                .iter()
                .zip(b.as_slice())
                .all(|(x, y)| x.to_bits() == y.to_bits()),
            || format!("landscape seed {seed} differs"),
        )?;
    }
    Ok(format!(
        "{n} MNIST runs repeated bitwise, 3 landscape seeds at 256x256"
    ))
}

fn idx_parsing() -> Outcome {
    let header = |magic: u32, dims: &[u32]| -> Vec<u8> {
        std::iter::once(magic)
            .chain(dims.iter().copied())
            .flat_map(u32::to_be_bytes)
            .collect()
    };
    let mut img = header(0x803, &[1, 2, 2]);
    img.extend([0, 255, 128, 64]);
    let t = parse_idx_images(&img).map_err(|e| e.to_string())?;
    ensure(
        t.as_slice() == [0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0],
        || format!("image fixture parsed to {:?}", t.as_slice()),
    )?;

    let mut lab = header(0x801, &[3]);
    lab.extend([0, 7, 9]);
    let l = parse_idx_labels(&lab, 10).map_err(|e| e.to_string())?;
    ensure(l == [0, 7, 9], || format!("label fixture parsed to {l:?}"))?;

    let mut wrong = header(0x801, &[1, 2, 2]);
    wrong.extend([0; 4]);
    let e = parse_idx_images(&wrong).unwrap_err();
    ensure(e.to_string().contains("wrong magic for images"), || {
        format!("wrong magic gave: {e}")
    })?;

    let e = parse_idx_images(&header(0x803, &[3, 2, 2])).unwrap_err();
    ensure(
        e == Error::Truncated {
            what: "images",
            expected: 28,
            actual: 16,
        },
        || format!("truncation gave: {e}"),
    )?;

    let mut bad = header(0x801, &[1]);
    bad.push(12);
    let e = parse_idx_labels(&bad, 10).unwrap_err();
    ensure(
        e == Error::LabelOutOfRange {
            label: 12,
            classes: 10,
        },
        || format!("label 12 gave: {e}"),
    )?;

    let e = parse_idx_labels(&header(0x801, &[0]), 10).unwrap_err();
    ensure(e.to_string().contains("empty dataset"), || {
        format!("empty gave: {e}")
    })?;
    Ok("fixtures exact; wrong magic, truncation, label range and empty errors as specified".into())
}

struct Report {
    failures: usize,
}

impl Report {
    fn run(
        &mut self,
        id: u8,
        name: &str,
        limit: Option<Duration>,
        check: impl FnOnce() -> Outcome,
    ) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        let result = match (result, limit) {
            (Ok(_), Some(l)) if took > l => Err(format!("took {took:.2?}, limit {l:?}")),
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("PASS  {id:>2} {name}: {detail} [{took:.2?}]"),
            Err(why) => {
                self.failures += 1;
                println!("FAIL  {id:>2} {name}: {why} [{took:.2?}]");
            }
        }
    }
}

fn main() -> ExitCode {
    let mut report = Report { failures: 0 };
    let secs = Duration::from_secs;
    report.run(1, "gradient suite", Some(secs(5)), gradient_suite);
    report.run(2, "identity suite", Some(secs(1)), identity_suite);
    report.run(3, "property suite", None, property_suite);
    report.run(
        4,
        "end-to-end backprop oracle",
        Some(secs(10)),
        backprop_oracle,
    );

    let mnist = load_mnist().and_then(|data| mnist_runs(&data).map(|runs| (data, runs)));
    match &mnist {
        Ok((data, runs)) => {
            report.run(5, "MNIST desk-scale analog", None, || mnist_analog(runs));
            report.run(6, "fixed-beta ablation", None, || fixed_beta_ablation(runs));
            report.run(7, "beta drift", None, || beta_drift(runs));
            report.run(8, "transcendental contract", None, transcendental_contract);
            report.run(9, "determinism", None, || determinism(data, runs));
        }
        Err(why) => {
            for (id, name) in [
                (5, "MNIST desk-scale analog"),
                (6, "fixed-beta ablation"),
                (7, "beta drift"),
            ] {
                report.run(id, name, None, || Err(why.clone()));
            }
            report.run(8, "transcendental contract", None, transcendental_contract);
            report.run(9, "determinism", None, || Err(why.clone()));
        }
    }
    report.run(10, "IDX parsing", None, idx_parsing);

    println!("acceptance: {}/10 criteria passed", 10 - report.failures);
    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
