//! Closed-form solutions of `Xw = y` and the predictions they imply.
//!
//! * the sign solution `w = sign(X^T y) / c`, reached by AdaGrad, RMSProp and
//!   Adam from `w0 = 0` whenever `X sign(X^T y) = c y`;
//! * the minimum-norm solution `w = X^T (XX^T)^{-1} y`, reached by the
//!   non-adaptive methods from any start in the row span;
//! * the closed-form kernel coefficients and test-time scores on the
//!   adversarial synthetic model.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::WeightsDocument;
use crate::lsq::{gram, Dataset};

/// Relative slack used when checking `X sign(u) = c y`.
const CONDITION_TOL: f64 = 1e-12;

/// Smallest Cholesky pivot, relative to the largest, before the kernel is
/// treated as singular (condition number around 1e14).
const PIVOT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    MinNorm,
    Sign,
}

impl fmt::Display for SolutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolutionKind::MinNorm => "min_norm",
            SolutionKind::Sign => "sign",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub kind: SolutionKind,
    pub w: Vec<f64>,
    /// Scale `c` with `X sign(X^T y) = c y` (sign kind).
    pub c: Option<f64>,
    /// Component magnitude `1/c` (sign kind).
    pub tau: Option<f64>,
    /// Class coefficients recovered from the kernel solve (min-norm kind,
    /// synthetic data). `alpha_minus` is reported positive.
    pub alpha_plus: Option<f64>,
    pub alpha_minus: Option<f64>,
    /// Kernel coefficients `(XX^T)^{-1} y` (min-norm kind).
    pub coefficients: Option<Vec<f64>>,
}

/// Metadata block of a serialized oracle solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleMeta {
    pub kind: SolutionKind,
    pub c: Option<f64>,
    pub tau: Option<f64>,
    pub alpha_plus: Option<f64>,
    pub alpha_minus: Option<f64>,
}

impl OracleSolution {
    pub fn meta(&self) -> OracleMeta {
        OracleMeta {
            kind: self.kind,
            c: self.c,
            tau: self.tau,
            alpha_plus: self.alpha_plus,
            alpha_minus: self.alpha_minus,
        }
    }

    pub fn to_document(&self) -> WeightsDocument<OracleMeta> {
        WeightsDocument::new(&self.w, self.meta())
    }
}

/// `X^T y`.
pub fn xty(ds: &Dataset) -> Vec<f64> {
    ds.rmatvec(ds.labels()).expect("labels have length n")
}

/// Coordinates touched by at least one row.
fn used_columns(ds: &Dataset) -> Vec<bool> {
    let mut used = vec![false; ds.d()];
    for row in ds.rows() {
        for &(j, v) in row {
            if v != 0.0 {
                used[j] = true;
            }
        }
    }
    used
}

fn signum0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The constant `c > 0` with `X sign(X^T y) = c y`, if it exists and
/// `X^T y` has no zero component on a coordinate some row uses.
/// Coordinates no row touches are outside the problem and are ignored.
pub fn sign_condition_check(ds: &Dataset) -> Option<f64> {
    let u = xty(ds);
    let used = used_columns(ds);
    if u.iter().zip(&used).any(|(uj, used)| *used && *uj == 0.0) {
        return None;
    }
    let s: Vec<f64> = u.iter().map(|v| signum0(*v)).collect();
    let xs = ds.matvec(&s).ok()?;
    let y = ds.labels();
    let c = xs[0] * y[0];
    if c.is_nan() || c <= 0.0 {
        return None;
    }
    let tol = CONDITION_TOL * c.max(1.0);
    xs.iter()
        .zip(y)
        .all(|(v, yi)| (v - c * yi).abs() <= tol)
        .then_some(c)
}

/// `w = sign(X^T y) / c`, which satisfies `Xw = y`.
pub fn sign_solution(ds: &Dataset) -> Result<OracleSolution> {
    let c = sign_condition_check(ds).ok_or_else(|| {
        Error::SignCondition("X sign(X^T y) is not a positive multiple of y".into())
    })?;
    let tau = 1.0 / c;
    let w = xty(ds).into_iter().map(|v| tau * signum0(v)).collect();
    Ok(OracleSolution {
        kind: SolutionKind::Sign,
        w,
        c: Some(c),
        tau: Some(tau),
        alpha_plus: None,
        alpha_minus: None,
        coefficients: None,
    })
}

/// `w = X^T (XX^T)^{-1} y`, by dense Cholesky of the kernel.
pub fn min_norm_solution(ds: &Dataset) -> Result<OracleSolution> {
    let k = kernel_matrix(ds);
    let chol = k.cholesky().ok_or(Error::SingularKernel)?;
    let l = chol.l_dirty().diagonal();
    if l.min() <= PIVOT_TOL * l.max() {
        return Err(Error::SingularKernel);
    }
    let alpha: DVector<f64> = chol.solve(&DVector::from_column_slice(ds.labels()));
    if alpha.iter().any(|a| !a.is_finite()) {
        return Err(Error::SingularKernel);
    }
    let w = ds.rmatvec(alpha.as_slice())?;

    let (mut alpha_plus, mut alpha_minus) = (None, None);
    if ds.has_synthetic_layout() {
        let mean = |sign: f64| {
            let vals: Vec<f64> = alpha
                .iter()
                .zip(ds.labels())
                .filter(|(_, y)| **y == sign)
                .map(|(a, _)| sign * a)
                .collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        };
        alpha_plus = mean(1.0);
        alpha_minus = mean(-1.0);
    }
    Ok(OracleSolution {
        kind: SolutionKind::MinNorm,
        w,
        c: None,
        tau: None,
        alpha_plus,
        alpha_minus,
        coefficients: Some(alpha.as_slice().to_vec()),
    })
}

/// `XX^T`. On synthetic data the entries are 4 / 8 on the diagonal (positive
/// / negative example) and 3 / 1 off it (same / opposite labels).
pub fn kernel_matrix(ds: &Dataset) -> DMatrix<f64> {
    gram(ds)
}

/// Class coefficients of the minimum-norm solution on synthetic data.
///
/// Positing `alpha_i = alpha_+` on positives and `-alpha_-` on negatives,
/// the kernel case table reduces `XX^T alpha = y` to
///
/// ```text
///  (3 n_+ + 1) alpha_+ -           n_- alpha_- = 1
///     -n_+ alpha_+     + (3 n_- + 5) alpha_- = 1
/// ```
///
/// whose solution is
///
/// ```text
/// alpha_+ = (4 n_- + 5) / (8 n_+ n_- + 15 n_+ + 3 n_- + 5)
/// alpha_- = (4 n_+ + 1) / (8 n_+ n_- + 15 n_+ + 3 n_- + 5)
/// ```
///
/// See [`uncorrected_alphas`] for the frequently quoted variant.
pub fn synthetic_alphas(n_pos: usize, n_neg: usize) -> (f64, f64) {
    let (np, nn) = (n_pos as f64, n_neg as f64);
    let den = 8.0 * np * nn + 15.0 * np + 3.0 * nn + 5.0;
    ((4.0 * nn + 5.0) / den, (4.0 * np + 1.0) / den)
}

/// The commonly quoted closed form:
///
/// ```text
/// alpha_+ = (4 n_- + 3) / (9 n_+ + 3 n_- + 8 n_+ n_- + 3)
/// alpha_- = (4 n_+ + 1) / (9 n_+ + 3 n_- + 8 n_+ n_- + 3)
/// ```
///
/// It solves the reduced system with `3 n_- + 3` in place of `3 n_- + 5`,
/// i.e. a negative-example self-similarity of 6 instead of the actual 8, so
/// it does not reproduce the kernel solve. Kept for comparison only.
pub fn uncorrected_alphas(n_pos: usize, n_neg: usize) -> (f64, f64) {
    let (np, nn) = (n_pos as f64, n_neg as f64);
    let den = 9.0 * np + 3.0 * nn + 8.0 * np * nn + 3.0;
    ((4.0 * nn + 3.0) / den, (4.0 * np + 1.0) / den)
}

/// Score the oracle assigns to a fresh synthetic example with label `y_test`.
/// The sign solution uses `tau = 1/4`.
pub fn predicted_test_score(kind: SolutionKind, n_pos: usize, n_neg: usize, y_test: f64) -> f64 {
    match kind {
        SolutionKind::Sign => 0.25 * (y_test + 2.0),
        SolutionKind::MinNorm => {
            let (ap, am) = synthetic_alphas(n_pos, n_neg);
            let (np, nn) = (n_pos as f64, n_neg as f64);
            y_test * (np * ap + nn * am) + 2.0 * (np * ap - nn * am)
        }
    }
}

/// Population test error of the oracle when fresh labels are `+1` with
/// probability `p`.
pub fn analytic_test_error(kind: SolutionKind, p: f64, n_pos: usize, n_neg: usize) -> f64 {
    let mut err = 0.0;
    if predicted_test_score(kind, n_pos, n_neg, 1.0).partial_cmp(&0.0) != Some(Ordering::Greater) {
        err += p;
    }
    if predicted_test_score(kind, n_pos, n_neg, -1.0).partial_cmp(&0.0) != Some(Ordering::Less) {
        err += 1.0 - p;
    }
    err
}

/// How closely a trajectory follows `w_k = lambda_k sign(X^T y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignTrajectory {
    pub lambdas: Vec<f64>,
    /// Max over iterates and support coordinates of `|w_kj - lambda_k sign(u_j)|`.
    pub max_deviation: f64,
    /// Max `|w_kj|` over coordinates where `u_j = 0`; must be 0.
    pub off_support_max: f64,
    /// `mu_k = 2 (c lambda_k - 1)`, the gradient multiplier at `w_k`.
    pub mus: Option<Vec<f64>>,
    /// Accumulator multipliers; unknown without the optimizer state.
    pub nus: Option<Vec<f64>>,
}

impl SignTrajectory {
    pub fn max_abs_lambda(&self) -> f64 {
        self.lambdas.iter().fold(0.0, |m, l| m.max(l.abs()))
    }
}

/// Check a trajectory started at zero against the sign-proportional form.
/// `lambda_k` is read from coordinate 1, which is always in the support on
/// synthetic data (`u_1 = n`).
pub fn verify_sign_trajectory(iterates: &[Vec<f64>], ds: &Dataset) -> Result<SignTrajectory> {
    let first = iterates.first().ok_or(Error::EmptyInput)?;
    ds.check_dim(first)?;
    if first.iter().any(|v| *v != 0.0) {
        return Err(Error::NonzeroStart);
    }
    let c = sign_condition_check(ds)
        .ok_or_else(|| Error::SignCondition("condition does not hold".into()))?;
    let s: Vec<f64> = xty(ds).into_iter().map(signum0).collect();
    let anchor = s
        .iter()
        .position(|v| *v != 0.0)
        .ok_or_else(|| Error::SignCondition("X^T y is zero".into()))?;

    let mut lambdas = Vec::with_capacity(iterates.len());
    let mut mus = Vec::with_capacity(iterates.len());
    let (mut max_dev, mut off_max) = (0.0_f64, 0.0_f64);
    for w in iterates {
        ds.check_dim(w)?;
        let lambda = w[anchor] * s[anchor];
        for (wj, sj) in w.iter().zip(&s) {
            if *sj == 0.0 {
                off_max = off_max.max(wj.abs());
            } else {
                max_dev = max_dev.max((wj - lambda * sj).abs());
            }
        }
        lambdas.push(lambda);
        mus.push(2.0 * (c * lambda - 1.0));
    }
    Ok(SignTrajectory {
        lambdas,
        max_deviation: max_dev,
        off_support_max: off_max,
        mus: Some(mus),
        nus: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lsq::{generate_synthetic, loss, synthetic_from_labels, test_score};

    fn identity2() -> Dataset {
        Dataset::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]], vec![1.0, -1.0]).unwrap()
    }

    #[test]
    fn synthetic_condition_constant_is_four() {
        for seed in 0..10 {
            let ds = generate_synthetic(15, 0.7, seed).unwrap();
            assert_eq!(sign_condition_check(&ds), Some(4.0));
        }
    }

    #[test]
    fn zero_component_fails_condition() {
        let ds = Dataset::from_dense(&[vec![1.0, 1.0], vec![1.0, -1.0]], vec![1.0, 1.0]).unwrap();
        assert_eq!(sign_condition_check(&ds), None);
        assert!(matches!(sign_solution(&ds), Err(Error::SignCondition(_))));
    }

    #[test]
    fn identity_condition() {
        assert_eq!(sign_condition_check(&identity2()), Some(1.0));
        let s = sign_solution(&identity2()).unwrap();
        assert_eq!(s.w, vec![1.0, -1.0]);
    }

    #[test]
    fn synthetic_sign_solution() {
        let ds = generate_synthetic(12, 0.75, 4).unwrap();
        let s = sign_solution(&ds).unwrap();
        assert_eq!(s.tau, Some(0.25));
        assert!(s.w.iter().all(|v| [0.0, 0.25, -0.25].contains(v)));
        assert!(loss(&ds, &s.w).unwrap() < 1e-28);
        assert_eq!(test_score(&s.w, -1.0), 0.25);
    }

    #[test]
    fn min_norm_examples() {
        let s = min_norm_solution(&identity2()).unwrap();
        assert!((s.w[0] - 1.0).abs() < 1e-15 && (s.w[1] + 1.0).abs() < 1e-15);

        let ds = Dataset::from_dense(&[vec![1.0, 0.0, 0.0]], vec![1.0]).unwrap();
        let s = min_norm_solution(&ds).unwrap();
        assert_eq!(s.w, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn singular_kernel_is_reported() {
        let ds = Dataset::from_dense(&[vec![1.0, 1.0], vec![2.0, 2.0]], vec![1.0, -1.0]).unwrap();
        assert!(matches!(min_norm_solution(&ds), Err(Error::SingularKernel)));
    }

    #[test]
    fn kernel_entries_on_small_synthetic() {
        let ds = synthetic_from_labels(&[1.0, -1.0, 1.0]).unwrap();
        let k = kernel_matrix(&ds);
        assert_eq!(k[(0, 0)], 4.0);
        assert_eq!(k[(1, 1)], 8.0);
        assert_eq!(k[(0, 1)], 1.0);
        assert_eq!(k[(0, 2)], 3.0);
    }

    #[test]
    fn alphas_for_two_positive_one_negative() {
        let (ap, am) = synthetic_alphas(2, 1);
        assert!((ap - 1.0 / 6.0).abs() < 1e-15);
        assert!((am - 1.0 / 6.0).abs() < 1e-15);
        // (3n+ + 1) a+ - n- a- = 1 and -n+ a+ + (3n- + 5) a- = 1
        assert!((7.0 * ap - am - 1.0).abs() < 1e-15);
        assert!((-2.0 * ap + 8.0 * am - 1.0).abs() < 1e-15);

        let ds = synthetic_from_labels(&[1.0, -1.0, 1.0]).unwrap();
        let mn = min_norm_solution(&ds).unwrap();
        assert!((mn.alpha_plus.unwrap() - ap).abs() < 1e-14);
        assert!((mn.alpha_minus.unwrap() - am).abs() < 1e-14);
    }

    #[test]
    fn uncorrected_alphas_solve_the_uncorrected_system() {
        let (ap, am) = uncorrected_alphas(2, 1);
        assert!((ap - 7.0 / 40.0).abs() < 1e-15);
        assert!((am - 9.0 / 40.0).abs() < 1e-15);
        // (3n+ + 1) a+ - n- a- = 1 and -n+ a+ + (3n- + 3) a- = 1
        assert!((7.0 * ap - am - 1.0).abs() < 1e-15);
        assert!((-2.0 * ap + 6.0 * am - 1.0).abs() < 1e-15);
        // but not the kernel system
        assert!((-2.0 * ap + 8.0 * am - 1.0).abs() > 0.4);
    }

    #[test]
    fn alphas_with_a_single_class() {
        // only positives: (I + 3 11^T) a = 1
        assert_eq!(synthetic_alphas(4, 0).0, 1.0 / 13.0);
        // only negatives: (5I + 3 11^T) a = -1
        assert_eq!(synthetic_alphas(0, 2).1, 1.0 / 11.0);
    }

    #[test]
    fn predicted_scores() {
        assert_eq!(
            4.0 * predicted_test_score(SolutionKind::Sign, 3, 3, -1.0),
            1.0
        );
        assert!((predicted_test_score(SolutionKind::MinNorm, 2, 1, 1.0) - 5.0 / 6.0).abs() < 1e-15);
        assert!(
            (predicted_test_score(SolutionKind::MinNorm, 2, 1, -1.0) + 1.0 / 6.0).abs() < 1e-15
        );
    }

    #[test]
    fn analytic_errors() {
        assert_eq!(analytic_test_error(SolutionKind::Sign, 0.75, 10, 3), 0.25);
        for p in [0.55, 0.75, 0.99] {
            assert_eq!(analytic_test_error(SolutionKind::MinNorm, p, 2, 1), 0.0);
        }
        let near_half = analytic_test_error(SolutionKind::Sign, 0.5 + 1e-9, 5, 4);
        assert!((near_half - 0.5).abs() < 1e-8);
    }

    #[test]
    fn min_norm_error_needs_a_positive_example() {
        // with n+ >= 1 both test scores have the right sign, even below n- / 3
        assert_eq!(analytic_test_error(SolutionKind::MinNorm, 0.8, 1, 10), 0.0);
        // with no positives the positive test example is scored negative
        assert!(predicted_test_score(SolutionKind::MinNorm, 0, 4, 1.0) < 0.0);
        assert_eq!(analytic_test_error(SolutionKind::MinNorm, 0.8, 0, 4), 0.8);
        // with no negatives every test example is scored positive
        assert!((analytic_test_error(SolutionKind::MinNorm, 0.8, 5, 0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_trajectory_has_no_deviation() {
        let ds = generate_synthetic(5, 0.8, 0).unwrap();
        let traj = vec![vec![0.0; ds.d()]; 4];
        let t = verify_sign_trajectory(&traj, &ds).unwrap();
        assert_eq!(t.max_deviation, 0.0);
        assert_eq!(t.lambdas, vec![0.0; 4]);
    }

    #[test]
    fn nonzero_start_is_rejected() {
        let ds = generate_synthetic(5, 0.8, 0).unwrap();
        let mut w0 = vec![0.0; ds.d()];
        w0[0] = 1.0;
        assert!(matches!(
            verify_sign_trajectory(&[w0], &ds),
            Err(Error::NonzeroStart)
        ));
    }

    #[test]
    fn oracle_document_carries_metadata() {
        let ds = generate_synthetic(6, 0.8, 2).unwrap();
        let doc = sign_solution(&ds).unwrap().to_document();
        assert_eq!(doc.metadata.kind, SolutionKind::Sign);
        assert_eq!(doc.metadata.c, Some(4.0));
        let text = serde_json::to_string(&doc).unwrap();
        assert!(text.contains("\"kind\":\"sign\""));
    }
}
