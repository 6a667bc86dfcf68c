use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of rejected draws before `generate_synthetic` gives up.
pub const MAX_REJECTIONS: usize = 1000;

/// One sparse row: `(index, value)` pairs, 0-based, strictly increasing index.
pub type SparseRow = Vec<(usize, f64)>;

/// Design matrix `X` (sparse rows) with labels in `{-1, +1}`.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    d: usize,
    rows: Vec<SparseRow>,
    y: Vec<f64>,
    p: Option<f64>,
    seed: Option<u64>,
    rejections: usize,
}

impl Dataset {
    /// Build a dataset from explicit rows. Rows are sorted; duplicate
    /// indices, out-of-range indices and non-±1 labels are rejected.
    pub fn new(d: usize, rows: Vec<SparseRow>, y: Vec<f64>) -> Result<Self> {
        if rows.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: y.len(),
            });
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(bad) = y.iter().find(|v| **v != 1.0 && **v != -1.0) {
            return Err(Error::InvalidParameter(format!("label {bad} is not ±1")));
        }
        let mut clean = Vec::with_capacity(rows.len());
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for pair in row.windows(2) {
                if pair[0].0 == pair[1].0 {
                    return Err(Error::InvalidParameter(format!(
                        "duplicate feature index {}",
                        pair[0].0
                    )));
                }
            }
            if let Some(&(j, _)) = row.last() {
                if j >= d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: j + 1,
                    });
                }
            }
            clean.push(row);
        }
        Ok(Dataset {
            d,
            rows: clean,
            y,
            p: None,
            seed: None,
            rejections: 0,
        })
    }

    /// Dense convenience constructor; zero entries are dropped.
    pub fn from_dense(x: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let d = x.first().map_or(0, Vec::len);
        let mut rows = Vec::with_capacity(x.len());
        for r in x {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: r.len(),
                });
            }
            rows.push(
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (j, *v))
                    .collect(),
            );
        }
        Dataset::new(d, rows, y)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn labels(&self) -> &[f64] {
        &self.y
    }

    pub fn p(&self) -> Option<f64> {
        self.p
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn rejections(&self) -> usize {
        self.rejections
    }

    pub fn n_pos(&self) -> usize {
        self.y.iter().filter(|v| **v > 0.0).count()
    }

    pub fn n_neg(&self) -> usize {
        self.n() - self.n_pos()
    }

    /// `b = sum_i y_i`.
    pub fn label_sum(&self) -> i64 {
        self.n_pos() as i64 - self.n_neg() as i64
    }

    /// True when the dataset came from the synthetic generator.
    pub fn is_synthetic(&self) -> bool {
        self.p.is_some()
    }

    /// True when the rows follow the synthetic template for these labels,
    /// whether or not the generator produced them.
    pub fn has_synthetic_layout(&self) -> bool {
        self.d == 3 + 5 * self.n()
            && self
                .rows
                .iter()
                .zip(&self.y)
                .enumerate()
                .all(|(i, (row, &y))| {
                    let start = private_block_start(i);
                    row.len() == 3 + private_block_width(y)
                        && row[..3] == [(0, y), (1, 1.0), (2, 1.0)]
                        && row[3..]
                            .iter()
                            .enumerate()
                            .all(|(k, &(j, v))| j == start + k && v == 1.0)
                })
    }

    /// `X w`.
    pub fn matvec(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(w)?;
        Ok(self.rows.iter().map(|r| sparse_dot(r, w)).collect())
    }

    /// `X^T r`.
    pub fn rmatvec(&self, r: &[f64]) -> Result<Vec<f64>> {
        if r.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: r.len(),
            });
        }
        let mut out = vec![0.0; self.d];
        for (row, ri) in self.rows.iter().zip(r) {
            for &(j, v) in row {
                out[j] += v * ri;
            }
        }
        Ok(out)
    }

    pub(crate) fn check_dim(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: w.len(),
            });
        }
        Ok(())
    }

    pub fn to_document(&self) -> DatasetDocument {
        DatasetDocument {
            n: self.n(),
            d: self.d,
            p: self.p,
            seed: self.seed,
            labels: self
                .y
                .iter()
                .map(|v| if *v > 0.0 { 1 } else { -1 })
                .collect(),
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&(j, v)| (j + 1, v)).collect())
                .collect(),
            rejections: self.rejections,
        }
    }

    pub fn from_document(doc: DatasetDocument) -> Result<Self> {
        if doc.labels.len() != doc.n {
            return Err(Error::DimensionMismatch {
                expected: doc.n,
                got: doc.labels.len(),
            });
        }
        let mut rows = Vec::with_capacity(doc.rows.len());
        for r in doc.rows {
            let mut row = Vec::with_capacity(r.len());
            for (j, v) in r {
                if j == 0 {
                    return Err(Error::InvalidParameter(
                        "feature indices are 1-based; found 0".into(),
                    ));
                }
                row.push((j - 1, v));
            }
            rows.push(row);
        }
        let y = doc.labels.iter().map(|&l| l as f64).collect();
        let mut ds = Dataset::new(doc.d, rows, y)?;
        ds.p = doc.p;
        ds.seed = doc.seed;
        ds.rejections = doc.rejections;
        Ok(ds)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_document())?;
        fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Dataset::from_document(serde_json::from_str(&text)?)
    }
}

/// Serialized dataset. Feature indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDocument {
    pub n: usize,
    pub d: usize,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub labels: Vec<i8>,
    pub rows: Vec<Vec<(usize, f64)>>,
    #[serde(default)]
    pub rejections: usize,
}

pub(crate) fn sparse_dot(row: &[(usize, f64)], w: &[f64]) -> f64 {
    row.iter().map(|&(j, v)| v * w[j]).sum()
}

pub(crate) fn sparse_sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Start of example `i`'s private block (0-based example, 0-based feature).
pub fn private_block_start(i: usize) -> usize {
    3 + 5 * i
}

/// Private block width: one feature for a positive example, five for a negative one.
pub fn private_block_width(label: f64) -> usize {
    if label > 0.0 {
        1
    } else {
        5
    }
}

/// Rows of the adversarial model for the given labels, `d = 3 + 5n`.
///
/// Feature 1 is the label, features 2 and 3 are constant one, and each
/// example owns a block of ones that no other example touches.
pub fn synthetic_from_labels(labels: &[f64]) -> Result<Dataset> {
    let n = labels.len();
    let d = 3 + 5 * n;
    let rows = labels
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let mut row = vec![(0, y), (1, 1.0), (2, 1.0)];
            let start = private_block_start(i);
            row.extend((start..start + private_block_width(y)).map(|j| (j, 1.0)));
            row
        })
        .collect();
    Dataset::new(d, rows, labels.to_vec())
}

/// Label stream for draw `attempt` of seed `seed`.
pub(crate) fn label_rng(seed: u64, attempt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt);
    rng
}

/// Stream reserved for development labels of a seed.
pub const DEV_STREAM: u64 = 1 << 32;
/// Stream reserved for test labels of a seed.
pub const TEST_STREAM: u64 = (1 << 32) + 1;

/// `m` fresh labels with `P(+1) = p`, from `stream` of `seed`. The reserved
/// streams lie far above any generator attempt index.
pub fn fresh_labels(seed: u64, stream: u64, m: usize, p: f64) -> Vec<f64> {
    let mut rng = label_rng(seed, stream);
    (0..m).map(|_| draw_label(&mut rng, p)).collect()
}

/// One `{-1, +1}` label with `P(+1) = p`.
pub fn draw_label<R: Rng>(rng: &mut R, p: f64) -> f64 {
    if rng.random::<f64>() < p {
        1.0
    } else {
        -1.0
    }
}

/// Draw `n` labels i.i.d. with `P(y = 1) = p` and build the adversarial
/// dataset. Draws with `sum y <= 0` are discarded and redrawn on a fresh
/// stream of the same seed; the discard count is kept on the dataset.
pub fn generate_synthetic(n: usize, p: f64, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(p > 0.5 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p must lie in (1/2, 1), got {p}"
        )));
    }
    for attempt in 0..=MAX_REJECTIONS {
        let mut rng = label_rng(seed, attempt as u64);
        let labels: Vec<f64> = (0..n).map(|_| draw_label(&mut rng, p)).collect();
        let b: f64 = labels.iter().sum();
        if b > 0.0 {
            let mut ds = synthetic_from_labels(&labels)?;
            ds.p = Some(p);
            ds.seed = Some(seed);
            ds.rejections = attempt;
            return Ok(ds);
        }
    }
    Err(Error::RejectionCap(MAX_REJECTIONS))
}
