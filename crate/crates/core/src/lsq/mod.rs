//! Least-squares classification `R_S[w] = ||Xw - y||^2`, the adversarial
//! sparse data model, and evaluation metrics.
//!
//! The gradient keeps the factor two: `grad R_S(w) = 2 X^T (Xw - y)`.

mod dataset;

pub(crate) use dataset::sparse_sparse_dot;
pub use dataset::{
    draw_label, fresh_labels, generate_synthetic, private_block_start, private_block_width,
    synthetic_from_labels, Dataset, DatasetDocument, SparseRow, DEV_STREAM, MAX_REJECTIONS,
    TEST_STREAM,
};

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `||Xw - y||^2`.
pub fn loss(ds: &Dataset, w: &[f64]) -> Result<f64> {
    let xw = ds.matvec(w)?;
    Ok(xw
        .iter()
        .zip(ds.labels())
        .map(|(a, y)| (a - y) * (a - y))
        .sum())
}

/// `2 X^T (Xw - y)`.
pub fn gradient(ds: &Dataset, w: &[f64]) -> Result<Vec<f64>> {
    let mut r = ds.matvec(w)?;
    for (ri, y) in r.iter_mut().zip(ds.labels()) {
        *ri = 2.0 * (*ri - y);
    }
    ds.rmatvec(&r)
}

/// Score of a fresh synthetic example with label `y_test`.
///
/// A fresh example shares only features 1-3 with any training coordinate,
/// so the score is `w1 * y_test + w2 + w3`. Panics if `w.len() < 3`.
pub fn test_score(w: &[f64], y_test: f64) -> f64 {
    w[0] * y_test + w[1] + w[2]
}

/// Fraction of `(score, label)` pairs whose sign disagrees with the label.
/// A score of exactly zero is an error.
pub fn error_rate(scores: &[(f64, f64)]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    let wrong = scores
        .iter()
        .filter(|(s, y)| (s * y).partial_cmp(&0.0) != Some(Ordering::Greater))
        .count();
    Ok(wrong as f64 / scores.len() as f64)
}

/// `min_i y_i <w, x_i> / ||w||_2`.
pub fn margin(ds: &Dataset, w: &[f64]) -> Result<f64> {
    let norm = l2_norm(w);
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let xw = ds.matvec(w)?;
    Ok(xw
        .iter()
        .zip(ds.labels())
        .map(|(s, y)| y * s)
        .fold(f64::INFINITY, f64::min)
        / norm)
}

/// Distance from `w` to the row span of `X`.
pub fn row_span_residual(ds: &Dataset, w: &[f64]) -> Result<f64> {
    RowSpace::new(ds).residual(w)
}

pub fn l2_norm(w: &[f64]) -> f64 {
    w.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn linf_norm(w: &[f64]) -> f64 {
    w.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Dense Gram matrix `XX^T`.
pub fn gram(ds: &Dataset) -> DMatrix<f64> {
    let n = ds.n();
    let rows = ds.rows();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = sparse_sparse_dot(&rows[i], &rows[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

enum Factor {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Svd(nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

/// Orthogonal projector onto span{x_1, ..., x_n}, via the normal equations
/// of the Gram matrix. Factor once, project many times.
pub struct RowSpace<'a> {
    ds: &'a Dataset,
    factor: Factor,
}

impl<'a> RowSpace<'a> {
    pub fn new(ds: &'a Dataset) -> Self {
        let k = gram(ds);
        let factor = match k.clone().cholesky() {
            Some(c) => Factor::Cholesky(c),
            None => Factor::Svd(k.svd(true, true)),
        };
        RowSpace { ds, factor }
    }

    /// Coefficients `a` with `X^T a` the projection of `w`.
    fn coefficients(&self, w: &[f64]) -> Result<DVector<f64>> {
        let b = DVector::from_vec(self.ds.matvec(w)?);
        Ok(match &self.factor {
            Factor::Cholesky(c) => c.solve(&b),
            Factor::Svd(s) => s
                .solve(&b, 1e-12 * s.singular_values.max())
                .map_err(|e| Error::InvalidParameter(e.to_string()))?,
        })
    }

    pub fn project(&self, w: &[f64]) -> Result<Vec<f64>> {
        let a = self.coefficients(w)?;
        self.ds.rmatvec(a.as_slice())
    }

    pub fn residual(&self, w: &[f64]) -> Result<f64> {
        let proj = self.project(w)?;
        Ok(w.iter()
            .zip(&proj)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

/// Snapshot of a weight vector on a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub loss: f64,
    /// Training-set classification error.
    pub error_rate: f64,
    /// `NaN` for the zero vector.
    pub margin: f64,
    pub l2_norm: f64,
    pub linf_norm: f64,
    pub rowspan_residual: f64,
}

pub fn evaluate(ds: &Dataset, space: &RowSpace<'_>, w: &[f64]) -> Result<EvalReport> {
    let xw = ds.matvec(w)?;
    let scores: Vec<(f64, f64)> = xw
        .iter()
        .cloned()
        .zip(ds.labels().iter().cloned())
        .collect();
    let loss = scores.iter().map(|(s, y)| (s - y) * (s - y)).sum();
    Ok(EvalReport {
        loss,
        error_rate: error_rate(&scores)?,
        margin: margin(ds, w).unwrap_or(f64::NAN),
        l2_norm: l2_norm(w),
        linf_norm: linf_norm(w),
        rowspan_residual: space.residual(w)?,
    })
}
