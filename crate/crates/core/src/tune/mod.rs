//! Step-size tuning: logarithmic grids extended at the edges, and the
//! dev-decay / fixed-decay schedules.
//!
//! The grid search keeps extending while the best step size sits on an edge
//! of the grid. Extension past the upper edge multiplies by the grid ratio;
//! the lower edge is handled the same way, dividing instead.

mod presets;

pub use presets::{reference_grid, reference_grid_names};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lsq::Dataset;
use crate::optim::{MethodKind, OptimizerSpec};
use crate::train::{train, Cadence, Metric, RunStatus, Trace, TrainOptions};

/// Default cap on edge extensions per search.
pub const EXTENSION_CAP: usize = 8;

/// Relative tolerance when matching a step size against grid values.
const MATCH_TOL: f64 = 1e-12;

/// Geometric grid of step sizes, stored largest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub values: Vec<f64>,
    pub ratio: f64,
    pub extensions: usize,
}

impl Grid {
    /// Grid from explicit values. Values are sorted largest first and
    /// de-duplicated.
    pub fn from_values(mut values: Vec<f64>, ratio: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(
                "step sizes must be positive".into(),
            ));
        }
        if ratio.is_nan() || ratio <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "grid ratio must exceed 1, got {ratio}"
            )));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        values.dedup_by(|a, b| same(*a, *b));
        Ok(Grid {
            values,
            ratio,
            extensions: 0,
        })
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("grid is never empty")
    }

    pub fn contains(&self, alpha: f64) -> bool {
        self.values.iter().any(|v| same(*v, alpha))
    }

    /// Insert a value, keeping order; returns false for a duplicate.
    pub fn insert(&mut self, alpha: f64) -> bool {
        if self.contains(alpha) {
            return false;
        }
        let pos = self.values.partition_point(|v| *v > alpha);
        self.values.insert(pos, alpha);
        true
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= MATCH_TOL * a.abs().max(b.abs())
}

/// `count` step sizes spaced by `ratio`, centered on `center`.
pub fn make_log_grid(center: f64, ratio: f64, count: usize) -> Result<Grid> {
    if count == 0 {
        return Err(Error::InvalidParameter(
            "grid needs at least one point".into(),
        ));
    }
    if !(center > 0.0 && center.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "grid center must be positive, got {center}"
        )));
    }
    let half = (count as f64 - 1.0) / 2.0;
    let values = (0..count)
        .map(|i| {
            let e = half - i as f64;
            if e >= 0.0 {
                center * ratio.powf(e)
            } else {
                center / ratio.powf(-e)
            }
        })
        .collect();
    Grid::from_values(values, ratio)
}

/// Next step size to try when `best` sits on an edge of `grid`.
///
/// Returns `best * ratio` at the top edge, `best / ratio` at the bottom edge
/// and `None` for an interior best. A one-point grid extends upward.
pub fn extend_if_edge(grid: &Grid, best: f64) -> Result<Option<f64>> {
    if !grid.contains(best) {
        return Err(Error::NotInGrid(best));
    }
    if same(best, grid.max()) {
        Ok(Some(best * grid.ratio))
    } else if same(best, grid.min()) {
        Ok(Some(best / grid.ratio))
    } else {
        Ok(None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    LowerIsBetter,
    HigherIsBetter,
}

impl Direction {
    /// Strict improvement of `candidate` over `incumbent`. NaN never improves.
    pub fn better(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Direction::LowerIsBetter => candidate < incumbent,
            Direction::HigherIsBetter => candidate > incumbent,
        }
    }

    fn worst(self) -> f64 {
        match self {
            Direction::LowerIsBetter => f64::INFINITY,
            Direction::HigherIsBetter => f64::NEG_INFINITY,
        }
    }
}

/// Learning-rate schedule applied at epoch boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayPolicy {
    None,
    /// Multiply by `delta` after every epoch without a new best dev metric.
    DevDecay {
        delta: f64,
    },
    /// Multiply by `delta` every `period` epochs.
    FixedDecay {
        delta: f64,
        period: usize,
    },
}

impl DecayPolicy {
    pub fn validate(&self) -> Result<()> {
        let delta = match *self {
            DecayPolicy::None => return Ok(()),
            DecayPolicy::DevDecay { delta } => delta,
            DecayPolicy::FixedDecay { delta, period } => {
                if period == 0 {
                    return Err(Error::InvalidParameter(
                        "decay period must be positive".into(),
                    ));
                }
                delta
            }
        };
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "decay factor must lie in (0, 1), got {delta}"
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            DecayPolicy::None => "none",
            DecayPolicy::DevDecay { .. } => "dev_decay",
            DecayPolicy::FixedDecay { .. } => "fixed_decay",
        }
    }
}

/// Step size for the next epoch, and the updated best dev metric.
///
/// The best-so-far value is tracked under every policy; only dev-decay reads
/// it. Epoch 0 never decays.
pub fn next_alpha(
    policy: &DecayPolicy,
    current_alpha: f64,
    epoch: usize,
    dev_metric: f64,
    best_so_far: Option<f64>,
    direction: Direction,
) -> (f64, Option<f64>) {
    let improved = match best_so_far {
        None => !dev_metric.is_nan(),
        Some(b) => direction.better(dev_metric, b),
    };
    let new_best = if improved {
        Some(dev_metric)
    } else {
        best_so_far
    };
    if epoch == 0 {
        return (current_alpha, new_best);
    }
    let alpha = match *policy {
        DecayPolicy::None => current_alpha,
        DecayPolicy::DevDecay { delta } => {
            if improved {
                current_alpha
            } else {
                current_alpha * delta
            }
        }
        DecayPolicy::FixedDecay { delta, period } => {
            if epoch.is_multiple_of(period) {
                current_alpha * delta
            } else {
                current_alpha
            }
        }
    };
    (alpha, new_best)
}

/// Starting point of each trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Init {
    Zero,
    /// Coordinates uniform in `[-scale, scale]`, from the trial's RNG stream.
    Uniform {
        scale: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneConfig {
    pub epochs: usize,
    pub iters_per_epoch: usize,
    pub stop_loss: Option<f64>,
    /// Selection metric. `DevError` needs `dev_labels`.
    pub selection: Metric,
    pub dev_labels: Option<Vec<f64>>,
    pub init: Init,
    pub extension_cap: usize,
    pub cadence: Cadence,
    pub analytic_bound: Option<f64>,
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig {
            epochs: 200,
            iters_per_epoch: 100,
            stop_loss: Some(1e-20),
            selection: Metric::TrainLoss,
            dev_labels: None,
            init: Init::Zero,
            extension_cap: EXTENSION_CAP,
            cadence: Cadence::default(),
            analytic_bound: None,
        }
    }
}

/// One (step size, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub method: MethodKind,
    pub alpha0: f64,
    pub policy: DecayPolicy,
    pub seed: u64,
    pub spec: OptimizerSpec,
    pub final_train_loss: f64,
    /// Best value of the selection metric over the run.
    pub best_dev: f64,
    pub epoch_of_best: usize,
    pub epochs: usize,
    pub iters_run: usize,
    pub status: RunStatus,
    pub trace_ref: String,
    #[serde(skip)]
    pub final_w: Vec<f64>,
    #[serde(skip)]
    pub trace: Trace,
}

/// Winning step size with its spread across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Winner {
    pub alpha0: f64,
    pub score: f64,
    pub mean_final_train_loss: f64,
    pub std_final_train_loss: f64,
    pub mean_best_dev: f64,
    pub std_best_dev: f64,
    pub trace_refs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub method: MethodKind,
    pub policy: DecayPolicy,
    pub selection: Metric,
    pub grid: Grid,
    pub extensions: usize,
    pub trials: Vec<TrialResult>,
    pub winner: Winner,
}

impl TuneReport {
    /// Trials of the winning step size, in seed order.
    pub fn winner_trials(&self) -> Vec<&TrialResult> {
        self.trials
            .iter()
            .filter(|t| same(t.alpha0, self.winner.alpha0))
            .collect()
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn run_trial(
    ds: &Dataset,
    template: &OptimizerSpec,
    alpha: f64,
    alpha_index: usize,
    seed: u64,
    policy: &DecayPolicy,
    cfg: &TuneConfig,
) -> Result<TrialResult> {
    let spec = template.with_alpha(alpha);
    let w0 = match cfg.init {
        Init::Zero => None,
        Init::Uniform { scale } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(alpha_index as u64);
            Some(
                (0..ds.d())
                    .map(|_| scale * (2.0 * rng.random::<f64>() - 1.0))
                    .collect(),
            )
        }
    };
    let opts = TrainOptions {
        iters: cfg.epochs * cfg.iters_per_epoch,
        iters_per_epoch: cfg.iters_per_epoch,
        stop_loss: cfg.stop_loss,
        cadence: cfg.cadence,
        dev_labels: cfg.dev_labels.clone(),
        metric: cfg.selection,
        w0,
        analytic_bound: cfg.analytic_bound,
        record_trace: true,
    };
    let out = train(ds, &spec, policy, &opts)?;
    Ok(TrialResult {
        method: spec.method,
        alpha0: alpha,
        policy: *policy,
        seed,
        spec,
        final_train_loss: out.final_loss,
        best_dev: out.best_metric,
        epoch_of_best: out.epoch_of_best,
        epochs: cfg.epochs,
        iters_run: out.iters_run,
        status: out.status,
        trace_ref: format!("{}-a{}-s{}", spec.method, alpha_index, seed),
        final_w: out.w,
        trace: out.trace,
    })
}

/// Score of a step size: mean selection metric across its seeds, with any
/// failed trial scoring worst. Metrics below `floor` count as `floor`, so
/// runs that all reached the stopping loss tie.
fn score(trials: &[TrialResult], direction: Direction, floor: Option<f64>) -> f64 {
    if trials
        .iter()
        .any(|t| !t.status.is_ok() || t.best_dev.is_nan())
    {
        return direction.worst();
    }
    let clamp = |m: f64| floor.map_or(m, |f| m.max(f));
    trials.iter().map(|t| clamp(t.best_dev)).sum::<f64>() / trials.len() as f64
}

/// Best step size; ties go to the larger step.
fn select(
    evaluated: &[(f64, Vec<TrialResult>)],
    direction: Direction,
    floor: Option<f64>,
) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for (alpha, trials) in evaluated {
        let s = score(trials, direction, floor);
        if s == direction.worst() {
            continue;
        }
        best = match best {
            None => Some((*alpha, s)),
            Some((ba, bs)) => {
                if direction.better(s, bs) || (s == bs && *alpha > ba) {
                    Some((*alpha, s))
                } else {
                    Some((ba, bs))
                }
            }
        };
    }
    best
}

/// Grid search over step sizes with edge extension.
///
/// Every step size runs once per seed (seeds only matter for random
/// initialization). Under training-loss selection, losses below
/// `cfg.stop_loss` count as equal, so the largest step that converged wins. While the best step size sits on a grid edge, the grid
/// is extended past that edge, up to `cfg.extension_cap` times.
pub fn tune(
    ds: &Dataset,
    template: &OptimizerSpec,
    grid: &Grid,
    policy: &DecayPolicy,
    cfg: &TuneConfig,
    seeds: &[u64],
) -> Result<TuneReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter(
            "tuning needs at least one seed".into(),
        ));
    }
    template.validate()?;
    policy.validate()?;
    if cfg.selection == Metric::DevError && cfg.dev_labels.is_none() {
        return Err(Error::InvalidParameter(
            "dev-error selection needs dev labels".into(),
        ));
    }
    let direction = cfg.selection.direction();
    let floor = match cfg.selection {
        Metric::TrainLoss => cfg.stop_loss,
        Metric::DevError => None,
    };
    let mut grid = grid.clone();
    grid.extensions = 0;

    let run_batch = |alphas: &[(usize, f64)]| -> Result<Vec<(f64, Vec<TrialResult>)>> {
        let jobs: Vec<(usize, f64, u64)> = alphas
            .iter()
            .flat_map(|&(i, a)| seeds.iter().map(move |&s| (i, a, s)))
            .collect();
        let results: Vec<TrialResult> = jobs
            .par_iter()
            .map(|&(i, a, s)| run_trial(ds, template, a, i, s, policy, cfg))
            .collect::<Result<_>>()?;
        let mut grouped: Vec<(f64, Vec<TrialResult>)> =
            alphas.iter().map(|&(_, a)| (a, Vec::new())).collect();
        for (k, r) in results.into_iter().enumerate() {
            grouped[k / seeds.len()].1.push(r);
        }
        Ok(grouped)
    };

    let initial: Vec<(usize, f64)> = grid.values.iter().cloned().enumerate().collect();
    let mut evaluated = run_batch(&initial)?;

    loop {
        let Some((best, _)) = select(&evaluated, direction, floor) else {
            return Err(Error::AllDiverged(grid.values.clone()));
        };
        if grid.extensions >= cfg.extension_cap {
            break;
        }
        let Some(next) = extend_if_edge(&grid, best)? else {
            break;
        };
        if !grid.insert(next) {
            break;
        }
        grid.extensions += 1;
        let index = evaluated.len();
        evaluated.extend(run_batch(&[(index, next)])?);
    }

    let (alpha0, best_score) = select(&evaluated, direction, floor).expect("checked above");
    let winners = &evaluated
        .iter()
        .find(|(a, _)| same(*a, alpha0))
        .expect("winner was evaluated")
        .1;
    let losses: Vec<f64> = winners.iter().map(|t| t.final_train_loss).collect();
    let devs: Vec<f64> = winners.iter().map(|t| t.best_dev).collect();
    let (ml, sl) = mean_std(&losses);
    let (md, sd) = mean_std(&devs);
    let winner = Winner {
        alpha0,
        score: best_score,
        mean_final_train_loss: ml,
        std_final_train_loss: sl,
        mean_best_dev: md,
        std_best_dev: sd,
        trace_refs: winners.iter().map(|t| t.trace_ref.clone()).collect(),
    };

    Ok(TuneReport {
        method: template.method,
        policy: *policy,
        selection: cfg.selection,
        extensions: grid.extensions,
        grid,
        trials: evaluated.into_iter().flat_map(|(_, t)| t).collect(),
        winner,
    })
}
