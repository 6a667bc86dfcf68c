//! Full-batch training runs on a dataset, with learning-curve traces.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::csv_num;
use crate::lsq::{self, Dataset, RowSpace};
use crate::optim::{init_state, OptimizerSpec};
use crate::tune::{next_alpha, DecayPolicy, Direction};

/// Header of every trace CSV.
pub const TRACE_HEADER: &str = "iter,alpha,train_loss,dev_error,w_l2,w_linf,margin,rowspan_resid";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Diverged,
    SingularPreconditioner,
}

impl RunStatus {
    pub fn is_ok(self) -> bool {
        self == RunStatus::Ok
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Ok => "ok",
            RunStatus::Diverged => "diverged",
            RunStatus::SingularPreconditioner => "singular_preconditioner",
        })
    }
}

/// Metric that drives dev-decay and trial selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Classification error on held-out synthetic labels.
    DevError,
    /// Training loss, for setups without a development split.
    TrainLoss,
}

impl Metric {
    pub fn direction(self) -> Direction {
        Direction::LowerIsBetter
    }
}

/// Which iterations land in the trace: all of the first `dense_until`,
/// then every `every`-th. Iteration 0 and the final iterate are always kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cadence {
    pub dense_until: usize,
    pub every: usize,
}

impl Default for Cadence {
    fn default() -> Self {
        Cadence {
            dense_until: 1000,
            every: 10,
        }
    }
}

impl Cadence {
    pub fn records(&self, iter: usize) -> bool {
        iter <= self.dense_until || (self.every > 0 && iter.is_multiple_of(self.every))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub alpha: f64,
    pub train_loss: f64,
    pub dev_error: f64,
    /// Population error of the oracle this method is expected to reach.
    /// Not written to CSV.
    pub analytic_test_error_bound: f64,
    pub w_l2: f64,
    pub w_linf: f64,
    pub margin: f64,
    pub rowspan_resid: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.iter,
                csv_num(r.alpha),
                csv_num(r.train_loss),
                csv_num(r.dev_error),
                csv_num(r.w_l2),
                csv_num(r.w_linf),
                csv_num(r.margin),
                csv_num(r.rowspan_resid)
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub iters: usize,
    /// Iterations per epoch; decay decisions happen at epoch ends.
    pub iters_per_epoch: usize,
    /// Stop as soon as the training loss is at or below this value.
    pub stop_loss: Option<f64>,
    pub cadence: Cadence,
    /// Fresh synthetic labels for the dev error column.
    pub dev_labels: Option<Vec<f64>>,
    pub metric: Metric,
    /// Starting point; zero when absent.
    pub w0: Option<Vec<f64>>,
    pub analytic_bound: Option<f64>,
    pub record_trace: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            iters: 1000,
            iters_per_epoch: 100,
            stop_loss: None,
            cadence: Cadence::default(),
            dev_labels: None,
            metric: Metric::TrainLoss,
            w0: None,
            analytic_bound: None,
            record_trace: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub status: RunStatus,
    pub w: Vec<f64>,
    pub final_loss: f64,
    pub iters_run: usize,
    /// Step size in force after the last epoch boundary.
    pub final_alpha: f64,
    /// Best value of the selection metric seen at an epoch end (or at the
    /// end of the run if it was shorter than an epoch).
    pub best_metric: f64,
    pub epoch_of_best: usize,
    pub trace: Trace,
}

/// Error rate of `w` on fresh synthetic examples with the given labels.
pub fn dev_error(w: &[f64], labels: &[f64]) -> Result<f64> {
    let scores: Vec<(f64, f64)> = labels.iter().map(|&y| (lsq::test_score(w, y), y)).collect();
    lsq::error_rate(&scores)
}

struct Recorder<'a> {
    ds: &'a Dataset,
    space: Option<RowSpace<'a>>,
    opts: &'a TrainOptions,
    trace: Trace,
}

impl<'a> Recorder<'a> {
    fn record(&mut self, iter: usize, alpha: f64, loss: f64, w: &[f64]) -> Result<()> {
        let Some(space) = &self.space else {
            return Ok(());
        };
        let dev = match &self.opts.dev_labels {
            Some(l) => dev_error(w, l)?,
            None => f64::NAN,
        };
        let resid = if w.iter().all(|v| v.is_finite()) {
            space.residual(w)?
        } else {
            f64::NAN
        };
        self.trace.rows.push(TraceRow {
            iter,
            alpha,
            train_loss: loss,
            dev_error: dev,
            analytic_test_error_bound: self.opts.analytic_bound.unwrap_or(f64::NAN),
            w_l2: lsq::l2_norm(w),
            w_linf: lsq::linf_norm(w),
            margin: lsq::margin(self.ds, w).unwrap_or(f64::NAN),
            rowspan_resid: resid,
        });
        Ok(())
    }
}

fn epoch_metric(opts: &TrainOptions, w: &[f64], loss: f64) -> Result<f64> {
    match (opts.metric, &opts.dev_labels) {
        (Metric::DevError, Some(l)) => dev_error(w, l),
        (Metric::DevError, None) => Err(Error::InvalidParameter(
            "dev-error metric needs dev labels".into(),
        )),
        (Metric::TrainLoss, _) => Ok(loss),
    }
}

/// Run `spec` on `ds` under a decay policy.
///
/// Non-finite loss or iterate ends the run as [`RunStatus::Diverged`]; a
/// singular preconditioner ends it as [`RunStatus::SingularPreconditioner`].
/// Both are outcomes, not errors.
pub fn train(
    ds: &Dataset,
    spec: &OptimizerSpec,
    policy: &DecayPolicy,
    opts: &TrainOptions,
) -> Result<TrainOutcome> {
    spec.validate()?;
    policy.validate()?;
    if opts.iters_per_epoch == 0 {
        return Err(Error::InvalidParameter(
            "iters_per_epoch must be positive".into(),
        ));
    }
    let w0 = match &opts.w0 {
        Some(w) => {
            ds.check_dim(w)?;
            w.clone()
        }
        None => vec![0.0; ds.d()],
    };

    let mut rec = Recorder {
        ds,
        space: opts.record_trace.then(|| RowSpace::new(ds)),
        opts,
        trace: Trace::default(),
    };
    let mut state = init_state(spec, &w0);
    let mut alpha = spec.alpha;
    let mut loss = lsq::loss(ds, &state.w)?;
    rec.record(0, alpha, loss, &state.w)?;

    let direction = opts.metric.direction();
    let mut best: Option<f64> = None;
    let mut epoch_of_best = 0;
    let mut status = RunStatus::Ok;
    let mut iter = 0;
    let mut last_recorded = 0;

    let converged = |l: f64| opts.stop_loss.is_some_and(|s| l <= s);

    while iter < opts.iters && !converged(loss) {
        let grad = |w: &[f64]| lsq::gradient(ds, w).expect("iterate dimension is fixed");
        match state.advance(spec, grad, Some(alpha)) {
            Ok(()) => {}
            Err(Error::SingularPreconditioner { .. }) => {
                status = RunStatus::SingularPreconditioner;
                break;
            }
            Err(e) => return Err(e),
        }
        iter += 1;
        loss = lsq::loss(ds, &state.w)?;
        if !loss.is_finite() || state.w.iter().any(|v| !v.is_finite()) {
            status = RunStatus::Diverged;
            break;
        }
        if rec.opts.cadence.records(iter) {
            rec.record(iter, alpha, loss, &state.w)?;
            last_recorded = iter;
        }
        if iter % opts.iters_per_epoch == 0 {
            let epoch = iter / opts.iters_per_epoch;
            let m = epoch_metric(opts, &state.w, loss)?;
            let (next, new_best) = next_alpha(policy, alpha, epoch, m, best, direction);
            if new_best != best {
                epoch_of_best = epoch;
            }
            alpha = next;
            best = new_best;
        }
    }

    if last_recorded != iter {
        rec.record(iter, alpha, loss, &state.w)?;
    }

    let final_metric = if status.is_ok() {
        epoch_metric(opts, &state.w, loss)?
    } else {
        f64::NAN
    };
    // runs that stop mid-epoch still count their final point
    if status.is_ok() && best.is_none_or(|b| direction.better(final_metric, b)) {
        best = Some(final_metric);
        epoch_of_best = iter.div_ceil(opts.iters_per_epoch);
    }

    Ok(TrainOutcome {
        status,
        w: state.w,
        final_loss: loss,
        iters_run: iter,
        final_alpha: alpha,
        best_metric: best.unwrap_or(f64::NAN),
        epoch_of_best,
        trace: rec.trace,
    })
}
