//! End-to-end comparison on the adversarial synthetic model: tune every
//! method, train to interpolation, and compare each final iterate with the
//! oracle it should reach and with the predicted test error.
//!
//! Adaptive methods run with `epsilon = 0` and are expected to land on the
//! sign solution; non-adaptive methods on the minimum-norm solution. There is
//! no development split, so step sizes are selected by training loss, and
//! dev error is only reported in the traces.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{csv_num, write_json};
use crate::lsq::{self, fresh_labels, generate_synthetic, Dataset, DEV_STREAM, TEST_STREAM};
use crate::optim::{AdamForm, MethodKind, OptimizerSpec};
use crate::oracle::{analytic_test_error, min_norm_solution, sign_solution, SolutionKind};
use crate::train::{dev_error, Cadence, Metric, Trace};
use crate::tune::{make_log_grid, tune, DecayPolicy, Init, TuneConfig, TuneReport};

/// Training loss at or below which a run counts as converged.
pub const CONVERGED_LOSS: f64 = 1e-8;
/// Relative L2 distance within which a final iterate matches its oracle.
pub const ORACLE_TOL: f64 = 1e-4;
/// Allowed gap between empirical and predicted test error.
pub const TEST_ERROR_TOL: f64 = 0.02;

/// Center of each method's initial step-size grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCenters {
    pub sgd: f64,
    pub hb: f64,
    pub nag: f64,
    pub adagrad: f64,
    pub rmsprop: f64,
    pub adam: f64,
}

impl GridCenters {
    pub fn get(&self, method: MethodKind) -> f64 {
        match method {
            MethodKind::Sgd => self.sgd,
            MethodKind::Hb => self.hb,
            MethodKind::Nag => self.nag,
            MethodKind::AdaGrad => self.adagrad,
            MethodKind::RmsProp => self.rmsprop,
            MethodKind::Adam => self.adam,
        }
    }
}

impl Default for GridCenters {
    fn default() -> Self {
        GridCenters {
            sgd: 1e-3,
            hb: 1e-3,
            nag: 1e-3,
            adagrad: 0.05,
            rmsprop: 0.01,
            adam: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p: f64,
    /// Dataset `s` is drawn with seed `seed + s`.
    pub seed: u64,
    /// Number of independent datasets.
    pub seeds: usize,
    pub epochs: usize,
    pub iters_per_epoch: usize,
    pub stop_loss: f64,
    /// Fresh labels drawn to estimate test error.
    pub test_draws: usize,
    /// Fresh labels behind the dev-error trace column.
    pub dev_draws: usize,
    pub grid_centers: GridCenters,
    pub grid_ratio: f64,
    pub grid_count: usize,
    pub extension_cap: usize,
    pub policy: DecayPolicy,
    pub adam_form: AdamForm,
    pub rmsprop_beta2: f64,
    pub cadence: Cadence,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 100,
            p: 0.75,
            seed: 0,
            seeds: 5,
            epochs: 200,
            iters_per_epoch: 100,
            stop_loss: 1e-20,
            test_draws: 20_000,
            dev_draws: 2_000,
            grid_centers: GridCenters::default(),
            grid_ratio: 2.0,
            grid_count: 5,
            extension_cap: crate::tune::EXTENSION_CAP,
            policy: DecayPolicy::None,
            adam_form: AdamForm::BiasCorrected,
            rmsprop_beta2: 0.9,
            cadence: Cadence::default(),
        }
    }
}

impl ExperimentConfig {
    /// Optimizer template (step size unset) used for `method`.
    pub fn template(&self, method: MethodKind) -> OptimizerSpec {
        let mut spec = OptimizerSpec::new(method, 1.0);
        if method.is_adaptive() {
            spec = spec.with_epsilon(0.0);
        }
        match method {
            MethodKind::RmsProp => spec.with_beta2(self.rmsprop_beta2),
            MethodKind::Adam => spec.with_adam_form(self.adam_form),
            _ => spec,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 {
            return Err(Error::InvalidParameter("seeds must be at least 1".into()));
        }
        if self.test_draws == 0 || self.dev_draws == 0 {
            return Err(Error::InvalidParameter(
                "label draw counts must be positive".into(),
            ));
        }
        self.policy.validate()
    }
}

/// One (dataset, method) line of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub seed: u64,
    pub method: MethodKind,
    pub adaptive: bool,
    pub n_pos: usize,
    pub n_neg: usize,
    /// `n_+ > n_- / 3`, under which the minimum-norm solution is exact.
    pub precondition: bool,
    pub alpha0: f64,
    pub extensions: usize,
    pub iters_run: usize,
    pub final_train_loss: f64,
    pub converged: bool,
    /// Relative L2 distance to the minimum-norm solution.
    pub dist_min_norm: f64,
    /// Relative L2 distance to the sign solution.
    pub dist_sign: f64,
    pub expected_oracle: SolutionKind,
    pub oracle_match: bool,
    pub w_l2: f64,
    pub rowspan_resid: f64,
    pub margin: f64,
    pub test_error: f64,
    pub analytic_test_error: f64,
    pub test_error_match: bool,
    pub trace: String,
}

impl SummaryRow {
    pub const CSV_HEADER: &'static str = "seed,method,adaptive,n_pos,n_neg,precondition,alpha0,extensions,iters_run,final_train_loss,converged,dist_min_norm,dist_sign,expected_oracle,oracle_match,w_l2,rowspan_resid,margin,test_error,analytic_test_error,test_error_match,trace";

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.method,
            self.adaptive,
            self.n_pos,
            self.n_neg,
            self.precondition,
            csv_num(self.alpha0),
            self.extensions,
            self.iters_run,
            csv_num(self.final_train_loss),
            self.converged,
            csv_num(self.dist_min_norm),
            csv_num(self.dist_sign),
            self.expected_oracle,
            self.oracle_match,
            csv_num(self.w_l2),
            csv_num(self.rowspan_resid),
            csv_num(self.margin),
            csv_num(self.test_error),
            csv_num(self.analytic_test_error),
            self.test_error_match,
            self.trace
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub rows: Vec<SummaryRow>,
}

impl ExperimentSummary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SummaryRow::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv_line());
            out.push('\n');
        }
        out
    }
}

/// Summary plus the artifacts behind it.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub summary: ExperimentSummary,
    /// Winning trace of each row, keyed like `SummaryRow::trace`.
    pub traces: Vec<(String, Trace)>,
    pub reports: Vec<(String, TuneReport)>,
    /// Final iterate of each row.
    pub weights: Vec<Vec<f64>>,
}

impl Experiment {
    /// Write `config.json`, `summary.csv`, `summary.json`, `traces/*.csv`
    /// and `tuning/*.json` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir.join("traces"))?;
        fs::create_dir_all(dir.join("tuning"))?;
        write_json(&dir.join("config.json"), &self.summary.config)?;
        fs::write(dir.join("summary.csv"), self.summary.to_csv())?;
        write_json(&dir.join("summary.json"), &self.summary)?;
        for (name, trace) in &self.traces {
            trace.write_csv(&dir.join("traces").join(format!("{name}.csv")))?;
        }
        for (name, report) in &self.reports {
            write_json(&dir.join("tuning").join(format!("{name}.json")), report)?;
        }
        Ok(())
    }
}

fn rel_dist(w: &[f64], target: &[f64]) -> f64 {
    let diff: Vec<f64> = w.iter().zip(target).map(|(a, b)| a - b).collect();
    lsq::l2_norm(&diff) / lsq::l2_norm(target)
}

fn run_one(
    cfg: &ExperimentConfig,
    ds: &Dataset,
    seed: u64,
    method: MethodKind,
) -> Result<(SummaryRow, Trace, TuneReport, Vec<f64>)> {
    let p = cfg.p;
    let dev = fresh_labels(seed, DEV_STREAM, cfg.dev_draws, p);
    let test = fresh_labels(seed, TEST_STREAM, cfg.test_draws, p);
    let expected = if method.is_adaptive() {
        SolutionKind::Sign
    } else {
        SolutionKind::MinNorm
    };
    let analytic = analytic_test_error(expected, p, ds.n_pos(), ds.n_neg());

    let tcfg = TuneConfig {
        epochs: cfg.epochs,
        iters_per_epoch: cfg.iters_per_epoch,
        stop_loss: Some(cfg.stop_loss),
        selection: Metric::TrainLoss,
        dev_labels: Some(dev),
        init: Init::Zero,
        extension_cap: cfg.extension_cap,
        cadence: cfg.cadence,
        analytic_bound: Some(analytic),
    };
    let grid = make_log_grid(cfg.grid_centers.get(method), cfg.grid_ratio, cfg.grid_count)?;
    let report = tune(
        ds,
        &cfg.template(method),
        &grid,
        &cfg.policy,
        &tcfg,
        &[seed],
    )?;
    let trial = report.winner_trials()[0].clone();
    let w = trial.final_w;

    let min_norm = min_norm_solution(ds)?;
    let sign = sign_solution(ds)?;
    let dist_min_norm = rel_dist(&w, &min_norm.w);
    let dist_sign = rel_dist(&w, &sign.w);
    let test_error = dev_error(&w, &test)?;
    let name = format!("seed{seed}-{method}");
    let row = SummaryRow {
        seed,
        method,
        adaptive: method.is_adaptive(),
        n_pos: ds.n_pos(),
        n_neg: ds.n_neg(),
        precondition: 3 * ds.n_pos() > ds.n_neg(),
        alpha0: trial.alpha0,
        extensions: report.extensions,
        iters_run: trial.iters_run,
        final_train_loss: trial.final_train_loss,
        converged: trial.final_train_loss <= CONVERGED_LOSS,
        dist_min_norm,
        dist_sign,
        expected_oracle: expected,
        oracle_match: match expected {
            SolutionKind::MinNorm => dist_min_norm <= ORACLE_TOL,
            SolutionKind::Sign => dist_sign <= ORACLE_TOL,
        },
        w_l2: lsq::l2_norm(&w),
        rowspan_resid: lsq::row_span_residual(ds, &w)?,
        margin: lsq::margin(ds, &w).unwrap_or(f64::NAN),
        test_error,
        analytic_test_error: analytic,
        test_error_match: if analytic == 0.0 {
            test_error == 0.0
        } else {
            (test_error - analytic).abs() <= TEST_ERROR_TOL
        },
        trace: name,
    };
    Ok((row, trial.trace, report, w))
}

/// Run every method on `cfg.seeds` independent datasets.
///
/// Results depend only on `cfg`: trials run in parallel but are collected in
/// a fixed order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    cfg.validate()?;
    let datasets: Vec<(u64, Dataset)> = (0..cfg.seeds as u64)
        .map(|s| {
            let seed = cfg.seed + s;
            generate_synthetic(cfg.n, cfg.p, seed).map(|ds| (seed, ds))
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, MethodKind)> = (0..datasets.len())
        .flat_map(|i| MethodKind::ALL.into_iter().map(move |m| (i, m)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(i, m)| run_one(cfg, &datasets[i].1, datasets[i].0, m))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(results.len());
    let mut traces = Vec::with_capacity(results.len());
    let mut reports = Vec::with_capacity(results.len());
    let mut weights = Vec::with_capacity(results.len());
    for (row, trace, report, w) in results {
        traces.push((row.trace.clone(), trace));
        reports.push((row.trace.clone(), report));
        weights.push(w);
        rows.push(row);
    }
    Ok(Experiment {
        summary: ExperimentSummary {
            config: cfg.clone(),
            rows,
        },
        traces,
        reports,
        weights,
    })
}
