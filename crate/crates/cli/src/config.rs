//! Run configuration: every flag, as an optional field. A config file
//! supplies defaults and command-line flags override it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use optlab_core::io::read_json;
use optlab_core::Result;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub seeds: Option<usize>,
    pub data: Option<PathBuf>,
    pub method: Option<String>,
    pub alpha: Option<f64>,
    pub decay: Option<String>,
    pub delta: Option<f64>,
    pub period: Option<usize>,
    pub iters: Option<usize>,
    pub iters_per_epoch: Option<usize>,
    pub epsilon: Option<f64>,
    pub beta2: Option<f64>,
    pub adam_form: Option<String>,
    pub stop_loss: Option<f64>,
    pub test_draws: Option<usize>,
    pub trace_dense_until: Option<usize>,
    pub trace_every: Option<usize>,
    pub init: Option<String>,
    pub select: Option<String>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(self, other: RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => {
                RunConfig { $($f: other.$f.or(self.$f)),* }
            };
        }
        pick!(
            n,
            p,
            seed,
            seeds,
            data,
            method,
            alpha,
            decay,
            delta,
            period,
            iters,
            iters_per_epoch,
            epsilon,
            beta2,
            adam_form,
            stop_loss,
            test_draws,
            trace_dense_until,
            trace_every,
            init,
            select,
            out
        )
    }
}
