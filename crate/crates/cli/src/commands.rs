//! One function per subcommand. Each reads a merged [`RunConfig`], writes
//! its outputs, and prints a short summary to stdout.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use optlab_core::experiment::{run_experiment, ExperimentConfig, GridCenters};
use optlab_core::io::{write_json, WeightsDocument};
use optlab_core::lsq::{self, fresh_labels, generate_synthetic, Dataset, DEV_STREAM};
use optlab_core::optim::{AdamForm, MethodKind, OptimizerSpec};
use optlab_core::oracle::{
    analytic_test_error, min_norm_solution, sign_condition_check, sign_solution,
    uncorrected_alphas, SolutionKind,
};
use optlab_core::train::{train, Cadence, Metric, RunStatus, TrainOptions};
use optlab_core::tune::{make_log_grid, tune, DecayPolicy, Init, TuneConfig};
use optlab_core::{Error, ErrorCategory};

use crate::config::RunConfig;

/// Fresh labels behind the dev-error column of `train` and `tune`.
const DEV_DRAWS: usize = 2000;
/// Half-width of the uniform random initialization used by `tune --init uniform`.
const INIT_SCALE: f64 = 0.01;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e.category() {
                ErrorCategory::Usage => 1,
                ErrorCategory::Numerical => 2,
                ErrorCategory::Io => 3,
            },
        }
    }
}

/// A command that ran to completion but hit a numerical failure still
/// writes its outputs; it reports `Numerical` so the process exits with 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Numerical,
}

type CmdResult = Result<Outcome, CliError>;

fn required<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, CliError> {
    value
        .clone()
        .ok_or_else(|| CliError::Usage(format!("missing required --{flag}")))
}

fn load_dataset(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let path: PathBuf = required(&cfg.data, "data")?;
    Ok(Dataset::load(&path)?)
}

fn method(cfg: &RunConfig) -> Result<MethodKind, CliError> {
    Ok(required(&cfg.method, "method")?.parse()?)
}

fn policy(cfg: &RunConfig) -> Result<DecayPolicy, CliError> {
    let delta = cfg.delta.unwrap_or(0.9);
    let p = match cfg.decay.as_deref().unwrap_or("none") {
        "none" => DecayPolicy::None,
        "dev" | "dev_decay" => DecayPolicy::DevDecay { delta },
        "fixed" | "fixed_decay" => DecayPolicy::FixedDecay {
            delta,
            period: cfg.period.unwrap_or(10),
        },
        other => return Err(CliError::Usage(format!("unknown decay policy: {other}"))),
    };
    p.validate()?;
    Ok(p)
}

fn spec(cfg: &RunConfig, method: MethodKind, alpha: f64) -> Result<OptimizerSpec, CliError> {
    let mut s = OptimizerSpec::new(method, alpha);
    if let Some(e) = cfg.epsilon {
        s = s.with_epsilon(e);
    }
    if let Some(b) = cfg.beta2 {
        s = s.with_beta2(b);
    }
    if let Some(f) = &cfg.adam_form {
        s = s.with_adam_form(f.parse()?);
    }
    s.validate()?;
    Ok(s)
}

fn cadence(cfg: &RunConfig) -> Cadence {
    let d = Cadence::default();
    Cadence {
        dense_until: cfg.trace_dense_until.unwrap_or(d.dense_until),
        every: cfg.trace_every.unwrap_or(d.every),
    }
}

/// Dev labels for a synthetic dataset, drawn from the dataset's own seed
/// unless `--seed` is given.
fn dev_labels(cfg: &RunConfig, ds: &Dataset) -> Option<Vec<f64>> {
    let p = ds.p()?;
    let seed = cfg.seed.or(ds.seed()).unwrap_or(0);
    Some(fresh_labels(seed, DEV_STREAM, DEV_DRAWS, p))
}

pub fn cmd_generate(cfg: &RunConfig) -> CmdResult {
    let out: PathBuf = required(&cfg.out, "out")?;
    let ds = generate_synthetic(
        cfg.n.unwrap_or(100),
        cfg.p.unwrap_or(0.75),
        cfg.seed.unwrap_or(0),
    )?;
    ds.save(&out)?;
    println!(
        "wrote {}: n={} d={} n_pos={} n_neg={} b={} rejections={}",
        out.display(),
        ds.n(),
        ds.d(),
        ds.n_pos(),
        ds.n_neg(),
        ds.label_sum(),
        ds.rejections()
    );
    Ok(Outcome::Ok)
}

#[derive(Debug, Serialize)]
struct TrainMeta {
    spec: OptimizerSpec,
    policy: DecayPolicy,
    status: RunStatus,
    iters_run: usize,
    final_train_loss: f64,
    final_alpha: f64,
}

pub fn cmd_train(cfg: &RunConfig) -> CmdResult {
    let out: PathBuf = required(&cfg.out, "out")?;
    let ds = load_dataset(cfg)?;
    let spec = spec(cfg, method(cfg)?, required(&cfg.alpha, "alpha")?)?;
    let policy = policy(cfg)?;
    let dev = dev_labels(cfg, &ds);
    let opts = TrainOptions {
        iters: cfg.iters.unwrap_or(1000),
        iters_per_epoch: cfg.iters_per_epoch.unwrap_or(100),
        stop_loss: cfg.stop_loss,
        cadence: cadence(cfg),
        metric: if dev.is_some() {
            Metric::DevError
        } else {
            Metric::TrainLoss
        },
        dev_labels: dev,
        ..Default::default()
    };
    let run = train(&ds, &spec, &policy, &opts)?;

    fs::create_dir_all(&out).map_err(Error::from)?;
    run.trace.write_csv(&out.join("trace.csv"))?;
    let meta = TrainMeta {
        spec,
        policy,
        status: run.status,
        iters_run: run.iters_run,
        final_train_loss: run.final_loss,
        final_alpha: run.final_alpha,
    };
    write_json(
        &out.join("weights.json"),
        &WeightsDocument::new(&run.w, meta),
    )?;
    println!(
        "status={} method={} iters={} train_loss={}",
        run.status, spec.method, run.iters_run, run.final_loss
    );
    Ok(if run.status.is_ok() {
        Outcome::Ok
    } else {
        Outcome::Numerical
    })
}

#[derive(Debug, Serialize)]
struct SolutionReport {
    available: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    margin: Option<f64>,
    l2_norm: Option<f64>,
    analytic_test_error: Option<f64>,
    weights: Vec<(usize, f64)>,
}

#[derive(Debug, Serialize)]
struct OracleReport {
    n: usize,
    d: usize,
    n_pos: usize,
    n_neg: usize,
    synthetic: bool,
    c: Option<f64>,
    tau: Option<f64>,
    alpha_plus: Option<f64>,
    alpha_minus: Option<f64>,
    /// The commonly quoted closed form, which disagrees with the kernel solve.
    uncorrected_alpha_plus: Option<f64>,
    uncorrected_alpha_minus: Option<f64>,
    min_norm: SolutionReport,
    sign: SolutionReport,
}

fn solution_report(ds: &Dataset, kind: SolutionKind, w: &[f64]) -> SolutionReport {
    SolutionReport {
        available: true,
        reason: None,
        margin: lsq::margin(ds, w).ok(),
        l2_norm: Some(lsq::l2_norm(w)),
        analytic_test_error: match (ds.is_synthetic(), ds.p()) {
            (true, Some(p)) => Some(analytic_test_error(kind, p, ds.n_pos(), ds.n_neg())),
            _ => None,
        },
        weights: WeightsDocument::new(w, ()).weights,
    }
}

fn unavailable(reason: String) -> SolutionReport {
    SolutionReport {
        available: false,
        reason: Some(reason),
        margin: None,
        l2_norm: None,
        analytic_test_error: None,
        weights: Vec::new(),
    }
}

pub fn cmd_oracle(cfg: &RunConfig) -> CmdResult {
    let out: PathBuf = required(&cfg.out, "out")?;
    let ds = load_dataset(cfg)?;
    let mn = min_norm_solution(&ds)?;
    let c = sign_condition_check(&ds);
    let uncorrected = ds
        .has_synthetic_layout()
        .then(|| uncorrected_alphas(ds.n_pos(), ds.n_neg()));
    let sign = match sign_solution(&ds) {
        Ok(s) => solution_report(&ds, SolutionKind::Sign, &s.w),
        Err(Error::SignCondition(m)) => unavailable(m),
        Err(e) => return Err(e.into()),
    };
    let report = OracleReport {
        n: ds.n(),
        d: ds.d(),
        n_pos: ds.n_pos(),
        n_neg: ds.n_neg(),
        synthetic: ds.is_synthetic(),
        c,
        tau: c.map(|c| 1.0 / c),
        alpha_plus: mn.alpha_plus,
        alpha_minus: mn.alpha_minus,
        uncorrected_alpha_plus: uncorrected.map(|a| a.0),
        uncorrected_alpha_minus: uncorrected.map(|a| a.1),
        min_norm: solution_report(&ds, SolutionKind::MinNorm, &mn.w),
        sign,
    };
    write_json(&out, &report)?;
    match c {
        Some(c) => println!("wrote {}: c={} tau={}", out.display(), c, 1.0 / c),
        None => println!("wrote {}: sign solution unavailable", out.display()),
    }
    Ok(Outcome::Ok)
}

pub fn cmd_tune(cfg: &RunConfig) -> CmdResult {
    let out: PathBuf = required(&cfg.out, "out")?;
    let ds = load_dataset(cfg)?;
    let method = method(cfg)?;
    let center = cfg
        .alpha
        .unwrap_or_else(|| GridCenters::default().get(method));
    let template = spec(cfg, method, center)?;
    let policy = policy(cfg)?;
    let ipe = cfg.iters_per_epoch.unwrap_or(100);
    if ipe == 0 {
        return Err(CliError::Usage("--iters-per-epoch must be positive".into()));
    }
    let dev = dev_labels(cfg, &ds);
    let selection = match cfg.select.as_deref() {
        None if dev.is_some() => Metric::DevError,
        None | Some("loss") | Some("train_loss") => Metric::TrainLoss,
        Some("dev") | Some("dev_error") => Metric::DevError,
        Some(other) => {
            return Err(CliError::Usage(format!(
                "unknown selection metric: {other}"
            )))
        }
    };
    let init = match cfg.init.as_deref().unwrap_or("zero") {
        "zero" => Init::Zero,
        "uniform" => Init::Uniform { scale: INIT_SCALE },
        other => return Err(CliError::Usage(format!("unknown init: {other}"))),
    };
    let tcfg = TuneConfig {
        epochs: cfg.iters.unwrap_or(20_000).div_ceil(ipe),
        iters_per_epoch: ipe,
        stop_loss: Some(cfg.stop_loss.unwrap_or(1e-20)),
        selection,
        dev_labels: dev,
        init,
        cadence: cadence(cfg),
        ..Default::default()
    };
    let base = cfg.seed.unwrap_or(0);
    let seeds: Vec<u64> = (0..cfg.seeds.unwrap_or(1) as u64)
        .map(|s| base + s)
        .collect();
    let grid = make_log_grid(center, 2.0, 5)?;
    let report = tune(&ds, &template, &grid, &policy, &tcfg, &seeds)?;
    write_json(&out, &report)?;
    println!(
        "wrote {}: method={} alpha0={} extensions={} loss={}±{}",
        out.display(),
        method,
        report.winner.alpha0,
        report.extensions,
        report.winner.mean_final_train_loss,
        report.winner.std_final_train_loss
    );
    Ok(Outcome::Ok)
}

/// Experiment settings from the merged config; unset fields keep the
/// experiment defaults.
pub fn experiment_config(cfg: &RunConfig) -> Result<ExperimentConfig, CliError> {
    let mut e = ExperimentConfig::default();
    e.n = cfg.n.unwrap_or(e.n);
    e.p = cfg.p.unwrap_or(e.p);
    e.seed = cfg.seed.unwrap_or(e.seed);
    e.seeds = cfg.seeds.unwrap_or(e.seeds);
    e.iters_per_epoch = cfg.iters_per_epoch.unwrap_or(e.iters_per_epoch);
    if e.iters_per_epoch == 0 {
        return Err(CliError::Usage("--iters-per-epoch must be positive".into()));
    }
    if let Some(iters) = cfg.iters {
        e.epochs = iters.div_ceil(e.iters_per_epoch);
    }
    e.stop_loss = cfg.stop_loss.unwrap_or(e.stop_loss);
    e.test_draws = cfg.test_draws.unwrap_or(e.test_draws);
    e.rmsprop_beta2 = cfg.beta2.unwrap_or(e.rmsprop_beta2);
    if let Some(f) = &cfg.adam_form {
        e.adam_form = f.parse::<AdamForm>()?;
    }
    if cfg.decay.is_some() {
        e.policy = policy(cfg)?;
    }
    e.cadence = cadence(cfg);
    e.validate()?;
    Ok(e)
}

pub fn cmd_experiment(cfg: &RunConfig) -> CmdResult {
    let out: PathBuf = required(&cfg.out, "out")?;
    let ecfg = experiment_config(cfg)?;
    let exp = run_experiment(&ecfg)?;
    exp.write(&out)?;
    print_summary(&out, &exp.summary.rows);
    Ok(Outcome::Ok)
}

fn print_summary(out: &Path, rows: &[optlab_core::experiment::SummaryRow]) {
    println!("wrote {}", out.display());
    println!(
        "{:>6} {:>8} {:>12} {:>10} {:>10} {:>10} {:>8} {:>8}",
        "seed", "method", "alpha0", "loss", "d_minnorm", "d_sign", "test_err", "analytic"
    );
    for r in rows {
        println!(
            "{:>6} {:>8} {:>12.4e} {:>10.2e} {:>10.2e} {:>10.2e} {:>8.4} {:>8.4}",
            r.seed,
            r.method.to_string(),
            r.alpha0,
            r.final_train_loss,
            r.dist_min_norm,
            r.dist_sign,
            r.test_error,
            r.analytic_test_error
        );
    }
}
