//! Command-line definitions and the runners behind each subcommand.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use swisht_core::gradcheck::{check_activation, uniform_grid, GradCheckReport};
use swisht_core::landscape::{landscape, LandscapeGrid};
use swisht_core::nn::LrSchedule;
use swisht_core::{
    subset, synth_blobs, train_with, ActParams, ActivationKind, Dataset, RunReport, TrainConfig,
};

use crate::bench::{bench_inputs, bench_kind, contract_violations, BenchReport};
use crate::curve::curve;
use crate::error::{Error, Result};
use crate::io::{load_idx_dataset, MnistFiles, MNIST_CLASSES};
use crate::report::{write_json, write_pgm, write_table, Format};

pub const CONFIG_ECHO: &str = "config.json";

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "swisht", version, about = "Swish-T activation experiments")]
pub struct Cli {
    /// Seed for every random choice a command makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Format of tabular outputs; reports are always JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Dump f, df/dx and df/dbeta over a uniform grid.
    Eval(EvalArgs),
    /// Compare analytic derivatives with central differences.
    Gradcheck(GradcheckArgs),
    /// Output surface of a random untrained 2-16-16-1 network.
    Landscape(LandscapeArgs),
    /// Train an MLP on MNIST or synthetic blobs.
    Train(TrainArgs),
    /// Time the kernels and count transcendental calls.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ActArgs {
    #[arg(long, default_value = "swish_t_c")]
    pub kind: ActivationKind,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Defaults to 1.0; ignored with a warning for kinds without beta.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub act: ActArgs,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    pub xmin: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub xmax: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GradcheckArgs {
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "swish_t,swish_t_a,swish_t_b,swish_t_c,swish,silu,gelu,mish"
    )]
    pub kinds: Vec<ActivationKind>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.1,0.5,1.0",
        allow_hyphen_values = true
    )]
    pub alphas: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.5,1,2,6",
        allow_hyphen_values = true
    )]
    pub betas: Vec<f64>,
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub xmin: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub xmax: f64,
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub h: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LandscapeArgs {
    #[command(flatten)]
    pub act: ActArgs,
    /// The grid spans [-range, range] on both axes.
    #[arg(long, default_value_t = 5.0)]
    pub range: f64,
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    Mnist,
    Synth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerArg {
    Cosine,
    Constant,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub data: DataSource,
    /// Directory holding the four standard MNIST files (optionally .gz).
    #[arg(long)]
    pub mnist_dir: Option<PathBuf>,
    #[arg(long)]
    pub mnist_images: Option<PathBuf>,
    #[arg(long)]
    pub mnist_labels: Option<PathBuf>,
    #[arg(long)]
    pub mnist_test_images: Option<PathBuf>,
    #[arg(long)]
    pub mnist_test_labels: Option<PathBuf>,
    /// Stratified training subset size.
    #[arg(long)]
    pub subset: Option<usize>,
    #[arg(long, default_value_t = 200)]
    pub synth_per_class: usize,
    #[arg(long, default_value_t = 10.0)]
    pub synth_separation: f64,
    #[arg(long, default_value = "swish_t_c")]
    pub kind: ActivationKind,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Initial trainable beta (default 1.0).
    #[arg(long, conflicts_with = "beta_fixed")]
    pub beta: Option<f64>,
    /// Freeze beta at this value.
    #[arg(long)]
    pub beta_fixed: Option<f64>,
    /// Apply weight decay to beta as well.
    #[arg(long)]
    pub beta_weight_decay: bool,
    /// Defaults to 5 for MNIST and 20 for synthetic data.
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    #[arg(long, default_value_t = 5e-4)]
    pub weight_decay: f64,
    #[arg(long, value_enum, default_value_t = SchedulerArg::Cosine)]
    pub scheduler: SchedulerArg,
    /// Hidden widths; defaults to 128,64 for MNIST and 32,32 for synthetic data.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "swish_t,swish_t_a,swish_t_b,swish_t_c"
    )]
    pub kinds: Vec<ActivationKind>,
    #[arg(long, default_value_t = 1_000_000)]
    pub elements: usize,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
}

/// What a successful run produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn warn(&mut self, msg: String) {
        eprintln!("warning: {msg}");
        self.warnings.push(msg);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckSummary {
    pub passed: bool,
    pub reports: Vec<GradCheckReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub contract_ok: bool,
    pub reports: Vec<BenchReport>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SurfacePoint {
    pub x: f64,
    pub y: f64,
    pub output: f64,
}

fn beta_warning(kind: ActivationKind) -> String {
    format!("beta ignored: {kind} has no beta parameter")
}

fn act_params(act: &ActArgs, out: &mut Outcome) -> ActParams {
    let mut beta = act.beta;
    if beta.is_some() && !act.kind.has_beta() {
        out.warn(beta_warning(act.kind));
        beta = None;
    }
    ActParams::new(act.alpha, beta.unwrap_or(1.0))
}

/// Runs the parsed command, writing every output plus a config echo under
/// `--out-dir`.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let dir = cli.out_dir.as_path();
    let mut out = Outcome::default();
    let echo = dir.join(CONFIG_ECHO);
    write_json(&echo, cli)?;
    out.files.push(echo);
    match &cli.command {
        Command::Eval(a) => run_eval(a, dir, cli.format, &mut out)?,
        Command::Gradcheck(a) => run_gradcheck(a, dir, &mut out)?,
        Command::Landscape(a) => run_landscape(a, cli.seed, dir, cli.format, &mut out)?,
        Command::Train(a) => run_train(a, cli.seed, dir, cli.format, &mut out)?,
        Command::Bench(a) => run_bench(a, cli.seed, dir, cli.format, &mut out)?,
    }
    Ok(out)
}

fn run_eval(a: &EvalArgs, dir: &Path, format: Format, out: &mut Outcome) -> Result<()> {
    let params = act_params(&a.act, out);
    let rows = curve(a.act.kind, params, a.xmin, a.xmax, a.points)?;
    out.files.push(write_table(dir, "curve", format, &rows)?);
    Ok(())
}

pub fn gradcheck(a: &GradcheckArgs) -> Result<GradcheckSummary> {
    if a.points < 2 || !(a.xmin < a.xmax && a.xmin.is_finite() && a.xmax.is_finite()) {
        return Err(Error::Usage(
            "gradcheck grid needs --points >= 2 and --xmin < --xmax".into(),
        ));
    }
    let grid = uniform_grid(a.xmin, a.xmax, a.points);
    let reports = a
        .kinds
        .iter()
        .map(|&kind| check_activation(kind, &a.alphas, &a.betas, &grid, a.h, a.tol))
        .collect::<swisht_core::Result<Vec<_>>>()?;
    Ok(GradcheckSummary {
        passed: reports.iter().all(|r| r.passed),
        reports,
    })
}

fn run_gradcheck(a: &GradcheckArgs, dir: &Path, out: &mut Outcome) -> Result<()> {
    let summary = gradcheck(a)?;
    let path = dir.join("gradcheck.json");
    write_json(&path, &summary)?;
    out.files.push(path);
    for r in &summary.reports {
        eprintln!(
            "{:<10} dx {:.3e}  dbeta {:.3e}  {}",
            r.kind.name(),
            r.max_rel_err_dx,
            r.max_rel_err_dbeta,
            if r.passed { "ok" } else { "FAIL" }
        );
    }
    if !summary.passed {
        let failed: Vec<_> = summary
            .reports
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.kind.name())
            .collect();
        return Err(Error::Validation(format!(
            "gradient check failed for {}",
            failed.join(", ")
        )));
    }
    Ok(())
}

fn run_landscape(
    a: &LandscapeArgs,
    seed: u64,
    dir: &Path,
    format: Format,
    out: &mut Outcome,
) -> Result<()> {
    let params = act_params(&a.act, out);
    let grid = LandscapeGrid {
        half_width: a.range,
        resolution: a.resolution,
    };
    let surface = landscape(seed, a.act.kind, params, &grid)?;
    let axis = grid.axis();
    let points: Vec<SurfacePoint> = axis
        .iter()
        .enumerate()
        .flat_map(|(i, &y)| {
            let surface = &surface;
            axis.iter().enumerate().map(move |(j, &x)| SurfacePoint {
                x,
                y,
                output: surface[(i, j)],
            })
        })
        .collect();
    out.files
        .push(write_table(dir, "landscape", format, &points)?);
    let pgm = dir.join("landscape.pgm");
    write_pgm(&pgm, &surface)?;
    out.files.push(pgm);
    Ok(())
}

impl TrainArgs {
    /// The training configuration these flags describe.
    pub fn config(&self, seed: u64, out: &mut Outcome) -> TrainConfig {
        let (mut beta, mut fixed) = (self.beta, self.beta_fixed);
        if (beta.is_some() || fixed.is_some()) && !self.kind.has_beta() {
            out.warn(beta_warning(self.kind));
            (beta, fixed) = (None, None);
        }
        let (beta0, beta_trainable) = match (beta, fixed) {
            (_, Some(b)) => (b, false),
            (b, None) => (b.unwrap_or(1.0), true),
        };
        let base = match self.data {
            DataSource::Mnist => TrainConfig::default(),
            DataSource::Synth => TrainConfig::synthetic(),
        };
        TrainConfig {
            seed,
            epochs: self.epochs.unwrap_or(base.epochs),
            batch_size: self.batch,
            lr0: self.lr,
            momentum: self.momentum,
            weight_decay: self.weight_decay,
            scheduler: match self.scheduler {
                SchedulerArg::Cosine => LrSchedule::Cosine,
                SchedulerArg::Constant => LrSchedule::Constant,
            },
            kind: self.kind,
            alpha: self.alpha,
            beta0,
            beta_trainable,
            beta_weight_decay_applies: self.beta_weight_decay,
            hidden: self.hidden.clone().unwrap_or(base.hidden),
        }
    }

    fn mnist_files(&self) -> Result<MnistFiles> {
        let from_dir = match &self.mnist_dir {
            Some(d) => Some(MnistFiles::in_dir(d)?),
            None => None,
        };
        let pick =
            |flag: &Option<PathBuf>, fallback: Option<&PathBuf>, name: &str| -> Result<PathBuf> {
                flag.clone().or_else(|| fallback.cloned()).ok_or_else(|| {
                    Error::Usage(format!("--data mnist needs --{name} or --mnist-dir"))
                })
            };
        Ok(MnistFiles {
            train_images: pick(
                &self.mnist_images,
                from_dir.as_ref().map(|f| &f.train_images),
                "mnist-images",
            )?,
            train_labels: pick(
                &self.mnist_labels,
                from_dir.as_ref().map(|f| &f.train_labels),
                "mnist-labels",
            )?,
            test_images: pick(
                &self.mnist_test_images,
                from_dir.as_ref().map(|f| &f.test_images),
                "mnist-test-images",
            )?,
            test_labels: pick(
                &self.mnist_test_labels,
                from_dir.as_ref().map(|f| &f.test_labels),
                "mnist-test-labels",
            )?,
        })
    }

    /// Training and test sets, with the training subset applied.
    pub fn datasets(&self, seed: u64) -> Result<(Dataset, Dataset)> {
        let (train, test) = match self.data {
            DataSource::Mnist => {
                let f = self.mnist_files()?;
                (
                    load_idx_dataset(&f.train_images, &f.train_labels, MNIST_CLASSES)?,
                    load_idx_dataset(&f.test_images, &f.test_labels, MNIST_CLASSES)?,
                )
            }
            DataSource::Synth => {
                if !(self.synth_separation > 0.0 && self.synth_separation.is_finite()) {
                    return Err(Error::Usage("--synth-separation must be positive".into()));
                }
                (
                    synth_blobs(self.synth_per_class, 2, self.synth_separation, seed)?,
                    synth_blobs(
                        self.synth_per_class,
                        2,
                        self.synth_separation,
                        seed.wrapping_add(1),
                    )?,
                )
            }
        };
        let train = match self.subset {
            Some(n) => subset(&train, n, seed)?,
            None => train,
        };
        Ok((train, test))
    }
}

/// Trains with the given flags and fills in the wall time.
pub fn train_run(a: &TrainArgs, seed: u64, out: &mut Outcome) -> Result<RunReport> {
    let config = a.config(seed, out);
    config.validate()?;
    let (train_set, test_set) = a.datasets(seed)?;
    let start = Instant::now();
    let mut report = train_with(&config, &train_set, &test_set, |m| {
        eprintln!(
            "epoch {:>3}/{}  train_loss {:.4}  train_acc {:.4}  test_loss {:.4}  test_acc {:.4}  lr {:.3e}  beta {:.6}",
            m.epoch + 1,
            config.epochs,
            m.train_loss,
            m.train_acc,
            m.test_loss,
            m.test_acc,
            m.lr,
            m.beta
        );
    })?;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

fn run_train(
    a: &TrainArgs,
    seed: u64,
    dir: &Path,
    format: Format,
    out: &mut Outcome,
) -> Result<()> {
    let report = train_run(a, seed, out)?;
    let path = dir.join("run_report.json");
    write_json(&path, &report)?;
    out.files.push(path);
    out.files
        .push(write_table(dir, "metrics", format, &report.epochs)?);
    Ok(())
}

pub fn bench(a: &BenchArgs, seed: u64) -> Result<BenchSummary> {
    let xs = bench_inputs(a.elements, seed);
    let params = ActParams::new(a.alpha, a.beta);
    let reports = a
        .kinds
        .iter()
        .map(|&kind| bench_kind(kind, params, &xs, a.reps))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchSummary {
        contract_ok: contract_violations(&reports).is_empty(),
        reports,
    })
}

fn run_bench(
    a: &BenchArgs,
    seed: u64,
    dir: &Path,
    format: Format,
    out: &mut Outcome,
) -> Result<()> {
    let summary = bench(a, seed)?;
    let path = dir.join("bench.json");
    write_json(&path, &summary)?;
    out.files.push(path);
    if format == Format::Csv {
        out.files
            .push(write_table(dir, "bench", format, &summary.reports)?);
    }
    for r in &summary.reports {
        eprintln!(
            "{:<10} forward {:>12} ns  fused {:>12} ns  sigmoid/elem {}  tanh/elem {}  exp/elem {}",
            r.kind.name(),
            r.wall_ns_forward,
            r.wall_ns_fused,
            r.sigmoid_evals_per_element,
            r.tanh_evals_per_element,
            r.exp_evals_per_element
        );
    }
    let violations = contract_violations(&summary.reports);
    if !violations.is_empty() {
        return Err(Error::Validation(violations.join("; ")));
    }
    Ok(())
}
