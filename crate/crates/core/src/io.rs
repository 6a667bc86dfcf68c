//! Weight-vector documents shared by the oracle and training outputs.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A weight vector stored like a dataset row: nonzero `(index, value)`
/// pairs with 1-based indices, plus a metadata block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsDocument<M> {
    pub d: usize,
    pub weights: Vec<(usize, f64)>,
    pub metadata: M,
}

impl<M> WeightsDocument<M> {
    pub fn new(w: &[f64], metadata: M) -> Self {
        WeightsDocument {
            d: w.len(),
            weights: w
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, v)| (j + 1, *v))
                .collect(),
            metadata,
        }
    }

    pub fn dense(&self) -> Result<Vec<f64>> {
        let mut w = vec![0.0; self.d];
        for &(j, v) in &self.weights {
            if j == 0 || j > self.d {
                return Err(Error::InvalidParameter(format!(
                    "weight index {j} outside 1..={}",
                    self.d
                )));
            }
            w[j - 1] = v;
        }
        Ok(w)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Shortest round-trip text for a CSV cell: positional for moderate
/// magnitudes, exponent form for very small or very large ones.
pub fn csv_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
