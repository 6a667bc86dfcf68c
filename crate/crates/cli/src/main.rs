//! `optlab`: generate synthetic data, train, compute oracles, tune step
//! sizes and run the full adaptive-vs-non-adaptive comparison.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure (divergence,
//! singular preconditioner or kernel), 3 I/O error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, Outcome};
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "optlab",
    version,
    about = "Adaptive vs non-adaptive optimizers on least squares"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic dataset.
    Generate(GenerateArgs),
    /// Train one method and write its trace and final weights.
    Train(TrainArgs),
    /// Compute the minimum-norm and sign solutions of a dataset.
    Oracle(OracleArgs),
    /// Grid-search the step size of one method.
    Tune(TuneArgs),
    /// Tune and train every method on fresh datasets and compare with the oracles.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DrawArgs {
    /// Number of training examples.
    #[arg(long)]
    n: Option<usize>,
    /// Probability of a positive label, in (1/2, 1).
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct MethodArgs {
    /// sgd, hb, nag, adagrad, rmsprop or adam.
    #[arg(long)]
    method: Option<String>,
    /// Step size (grid center for `tune`).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    /// Adam accumulator form: table or corrected.
    #[arg(long)]
    adam_form: Option<String>,
}

#[derive(Args)]
struct ScheduleArgs {
    /// none, dev or fixed.
    #[arg(long)]
    decay: Option<String>,
    /// Decay factor in (0, 1).
    #[arg(long)]
    delta: Option<f64>,
    /// Epochs between fixed decays.
    #[arg(long)]
    period: Option<usize>,
    /// Iteration budget per run.
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    iters_per_epoch: Option<usize>,
    /// Stop once the training loss is at or below this value.
    #[arg(long)]
    stop_loss: Option<f64>,
}

#[derive(Args)]
struct TraceArgs {
    /// Record every iteration up to this one.
    #[arg(long)]
    trace_dense_until: Option<usize>,
    /// Afterwards record every this many iterations.
    #[arg(long)]
    trace_every: Option<usize>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    draw: DrawArgs,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// Dataset file.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Seed of the dev labels (defaults to the dataset's seed).
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[command(flatten)]
    trace: TraceArgs,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    /// Dataset file.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    common: Common,
    /// Dataset file.
    #[arg(long)]
    data: Option<PathBuf>,
    /// First trial seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeds per step size.
    #[arg(long)]
    seeds: Option<usize>,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Starting point: zero or uniform.
    #[arg(long)]
    init: Option<String>,
    /// Selection metric: dev or loss.
    #[arg(long)]
    select: Option<String>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    draw: DrawArgs,
    /// Number of independent datasets.
    #[arg(long)]
    seeds: Option<usize>,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Fresh labels used to estimate test error.
    #[arg(long)]
    test_draws: Option<usize>,
    /// RMSProp second-moment decay.
    #[arg(long)]
    beta2: Option<f64>,
    /// Adam accumulator form: table or corrected.
    #[arg(long)]
    adam_form: Option<String>,
    #[command(flatten)]
    trace: TraceArgs,
}

impl Common {
    fn apply(&self, c: &mut RunConfig) {
        c.out = self.out.clone();
    }
}

impl DrawArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.n = self.n;
        c.p = self.p;
        c.seed = self.seed;
    }
}

impl MethodArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.method = self.method.clone();
        c.alpha = self.alpha;
        c.epsilon = self.epsilon;
        c.beta2 = self.beta2;
        c.adam_form = self.adam_form.clone();
    }
}

impl ScheduleArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.decay = self.decay.clone();
        c.delta = self.delta;
        c.period = self.period;
        c.iters = self.iters;
        c.iters_per_epoch = self.iters_per_epoch;
        c.stop_loss = self.stop_loss;
    }
}

impl TraceArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.trace_dense_until = self.trace_dense_until;
        c.trace_every = self.trace_every;
    }
}

/// Flag values as a config, plus the config file to layer them on.
fn flags(command: &Command) -> (RunConfig, Option<PathBuf>) {
    let mut c = RunConfig::default();
    let common = match command {
        Command::Generate(a) => {
            a.draw.apply(&mut c);
            &a.common
        }
        Command::Train(a) => {
            c.data = a.data.clone();
            c.seed = a.seed;
            a.method.apply(&mut c);
            a.schedule.apply(&mut c);
            a.trace.apply(&mut c);
            &a.common
        }
        Command::Oracle(a) => {
            c.data = a.data.clone();
            &a.common
        }
        Command::Tune(a) => {
            c.data = a.data.clone();
            c.seed = a.seed;
            c.seeds = a.seeds;
            c.init = a.init.clone();
            c.select = a.select.clone();
            a.method.apply(&mut c);
            a.schedule.apply(&mut c);
            &a.common
        }
        Command::Experiment(a) => {
            a.draw.apply(&mut c);
            c.seeds = a.seeds;
            c.test_draws = a.test_draws;
            c.beta2 = a.beta2;
            c.adam_form = a.adam_form.clone();
            a.schedule.apply(&mut c);
            a.trace.apply(&mut c);
            &a.common
        }
    };
    common.apply(&mut c);
    (c, common.config.clone())
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let (from_flags, file) = flags(&cli.command);
    let cfg = match file {
        Some(path) => RunConfig::load(&path)?.overlay(from_flags),
        None => from_flags,
    };
    match cli.command {
        Command::Generate(_) => commands::cmd_generate(&cfg),
        Command::Train(_) => commands::cmd_train(&cfg),
        Command::Oracle(_) => commands::cmd_oracle(&cfg),
        Command::Tune(_) => commands::cmd_tune(&cfg),
        Command::Experiment(_) => commands::cmd_experiment(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Numerical) => ExitCode::from(2),
        Err(e) => {
            eprintln!("optlab: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
