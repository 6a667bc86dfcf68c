//! One update engine for SGD, heavy-ball, Nesterov, AdaGrad, RMSProp and Adam.
//!
//! Every method is an instance of the preconditioned momentum iteration
//!
//! ```text
//! g_k     = grad f(w_k + gamma_k (w_k - w_{k-1}))
//! G_k     = g_keep * G_{k-1} + g_new * (g_k o g_k)
//! H_k     = diag(sqrt(G_k)) + eps
//! w_{k+1} = w_k - alpha_k H_k^{-1} g_k + beta_k H_k^{-1} H_{k-1} (w_k - w_{k-1})
//! ```
//!
//! with `H_k = I` for the non-adaptive methods. The per-step coefficients are
//! produced by [`step_coefficients`]. `H_0` is taken to be the identity, so
//! the momentum term of the first step never touches an unset preconditioner.
//!
//! `eps` is added after the square root. With `eps = 0` the preconditioner is
//! exactly proportional to `|g|` on the first step, which makes the first
//! adaptive step a pure sign step.
//!
//! A coordinate whose preconditioner entry is exactly zero is left unchanged
//! when both its gradient and its momentum contribution are zero (features
//! that never appear in the data). Any other zero entry is a
//! [`Error::SingularPreconditioner`].

mod presets;
pub mod reference;

pub use presets::{framework_preset, Framework};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accumulator entries above this are renormalized by a power of two.
const RESCALE_ABOVE: f64 = 1.157_920_892_373_162e77; // 2^256

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Sgd,
    Hb,
    Nag,
    AdaGrad,
    RmsProp,
    Adam,
}

impl MethodKind {
    pub const ALL: [MethodKind; 6] = [
        MethodKind::Sgd,
        MethodKind::Hb,
        MethodKind::Nag,
        MethodKind::AdaGrad,
        MethodKind::RmsProp,
        MethodKind::Adam,
    ];

    /// True for the methods with a history-dependent preconditioner.
    pub fn is_adaptive(self) -> bool {
        matches!(
            self,
            MethodKind::AdaGrad | MethodKind::RmsProp | MethodKind::Adam
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Sgd => "sgd",
            MethodKind::Hb => "hb",
            MethodKind::Nag => "nag",
            MethodKind::AdaGrad => "adagrad",
            MethodKind::RmsProp => "rmsprop",
            MethodKind::Adam => "adam",
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(MethodKind::Sgd),
            "hb" | "heavyball" | "heavy-ball" | "momentum" => Ok(MethodKind::Hb),
            "nag" | "nesterov" => Ok(MethodKind::Nag),
            "adagrad" => Ok(MethodKind::AdaGrad),
            "rmsprop" => Ok(MethodKind::RmsProp),
            "adam" => Ok(MethodKind::Adam),
            _ => Err(Error::Unknown {
                kind: "method",
                value: s.to_string(),
            }),
        }
    }
}

/// Which second-moment recurrence Adam uses.
///
/// `TableLiteral` keeps `G_k = beta2/(1-beta2^k) G_{k-1} + (1-beta2)/(1-beta2^k) D_k`.
/// Its keep-coefficient exceeds one for thousands of steps, so the
/// accumulator grows super-exponentially and the iterate freezes after a few
/// dozen steps. `BiasCorrected` uses `beta2 (1-beta2^{k-1})/(1-beta2^k)` as
/// the keep-coefficient, which makes `G_k` the bias-corrected second moment
/// and the whole iteration identical to textbook Adam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdamForm {
    #[default]
    TableLiteral,
    BiasCorrected,
}

impl FromStr for AdamForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "table" | "table_literal" | "literal" => Ok(AdamForm::TableLiteral),
            "corrected" | "bias_corrected" | "reference" => Ok(AdamForm::BiasCorrected),
            _ => Err(Error::Unknown {
                kind: "adam form",
                value: s.to_string(),
            }),
        }
    }
}

/// Method identity plus hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSpec {
    pub method: MethodKind,
    /// Base step size.
    pub alpha: f64,
    /// Momentum for HB and NAG.
    pub beta: f64,
    /// Adam first-moment decay.
    pub beta1: f64,
    /// Second-moment decay for RMSProp and Adam.
    pub beta2: f64,
    pub epsilon: f64,
    /// Initial value of every accumulator entry.
    pub g_init: f64,
    #[serde(default)]
    pub adam_form: AdamForm,
}

impl OptimizerSpec {
    /// Spec with the usual defaults: momentum 0.9 for HB/NAG, beta1 0.9,
    /// beta2 0.9 (RMSProp) or 0.999 (Adam), eps 1e-8, zero accumulator.
    pub fn new(method: MethodKind, alpha: f64) -> Self {
        let beta = match method {
            MethodKind::Hb | MethodKind::Nag => 0.9,
            _ => 0.0,
        };
        let beta2 = match method {
            MethodKind::RmsProp => 0.9,
            MethodKind::Adam => 0.999,
            _ => 0.0,
        };
        OptimizerSpec {
            method,
            alpha,
            beta,
            beta1: 0.9,
            beta2,
            epsilon: 1e-8,
            g_init: 0.0,
            adam_form: AdamForm::default(),
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_beta1(mut self, beta1: f64) -> Self {
        self.beta1 = beta1;
        self
    }

    pub fn with_beta2(mut self, beta2: f64) -> Self {
        self.beta2 = beta2;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_g_init(mut self, g_init: f64) -> Self {
        self.g_init = g_init;
        self
    }

    pub fn with_adam_form(mut self, form: AdamForm) -> Self {
        self.adam_form = form;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        for (name, b) in [
            ("beta", self.beta),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
        ] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1), got {b}"
                )));
            }
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        if !(self.g_init >= 0.0 && self.g_init.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "g_init must be nonnegative, got {}",
                self.g_init
            )));
        }
        Ok(())
    }
}

/// Coefficients of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCoefficients {
    pub alpha_k: f64,
    pub beta_k: f64,
    pub gamma_k: f64,
    /// Weight on `G_{k-1}`.
    pub g_keep: f64,
    /// Weight on `D_k = g_k o g_k`.
    pub g_new: f64,
}

/// Coefficients of step `k` (1-based) for the spec's method.
///
/// Non-adaptive methods report `g_keep = g_new = 0`; their preconditioner is
/// the identity and never reads the accumulator.
pub fn step_coefficients(spec: &OptimizerSpec, k: usize) -> Result<StepCoefficients> {
    if k == 0 {
        return Err(Error::ZeroStepIndex);
    }
    let a = spec.alpha;
    let c = match spec.method {
        MethodKind::Sgd => StepCoefficients {
            alpha_k: a,
            beta_k: 0.0,
            gamma_k: 0.0,
            g_keep: 0.0,
            g_new: 0.0,
        },
        MethodKind::Hb => StepCoefficients {
            alpha_k: a,
            beta_k: spec.beta,
            gamma_k: 0.0,
            g_keep: 0.0,
            g_new: 0.0,
        },
        MethodKind::Nag => StepCoefficients {
            alpha_k: a,
            beta_k: spec.beta,
            gamma_k: spec.beta,
            g_keep: 0.0,
            g_new: 0.0,
        },
        MethodKind::AdaGrad => StepCoefficients {
            alpha_k: a,
            beta_k: 0.0,
            gamma_k: 0.0,
            g_keep: 1.0,
            g_new: 1.0,
        },
        MethodKind::RmsProp => StepCoefficients {
            alpha_k: a,
            beta_k: 0.0,
            gamma_k: 0.0,
            g_keep: spec.beta2,
            g_new: 1.0 - spec.beta2,
        },
        MethodKind::Adam => {
            let k = k as i32;
            let (b1, b2) = (spec.beta1, spec.beta2);
            let bc1 = 1.0 - b1.powi(k);
            let bc2 = 1.0 - b2.powi(k);
            let g_keep = match spec.adam_form {
                AdamForm::TableLiteral => b2 / bc2,
                AdamForm::BiasCorrected => b2 * (1.0 - b2.powi(k - 1)) / bc2,
            };
            StepCoefficients {
                alpha_k: a * (1.0 - b1) / bc1,
                beta_k: b1 * (1.0 - b1.powi(k - 1)) / bc1,
                gamma_k: 0.0,
                g_keep,
                g_new: (1.0 - b2) / bc2,
            }
        }
    };
    Ok(c)
}

/// Iterate pair plus diagonal accumulator.
///
/// The accumulator is stored as `mantissa * 2^exponent` so that recurrences
/// whose entries exceed the `f64` range stay representable. The exponent is
/// always even and is zero unless an entry has passed `2^256`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    /// Number of completed steps.
    pub k: usize,
    pub w: Vec<f64>,
    pub w_prev: Vec<f64>,
    accum: Vec<f64>,
    accum_exp: i32,
}

/// Fresh state at `w0` with every accumulator entry equal to `spec.g_init`.
pub fn init_state(spec: &OptimizerSpec, w0: &[f64]) -> OptimizerState {
    OptimizerState {
        k: 0,
        w: w0.to_vec(),
        w_prev: w0.to_vec(),
        accum: vec![spec.g_init; w0.len()],
        accum_exp: 0,
    }
}

impl OptimizerState {
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// Diagonal of `G_k`. Entries may be `inf` if the true value exceeds the
    /// `f64` range; the engine itself never materializes this vector.
    pub fn g_accum(&self) -> Vec<f64> {
        let scale = pow2(self.accum_exp);
        self.accum.iter().map(|a| a * scale).collect()
    }

    /// Power-of-two exponent applied to the stored accumulator.
    pub fn accum_exponent(&self) -> i32 {
        self.accum_exp
    }

    /// Preconditioner as `(mantissa, exponent)` with `H = mantissa * 2^exponent`.
    fn preconditioner_scaled(&self, epsilon: f64) -> (Vec<f64>, i32) {
        let half = self.accum_exp / 2;
        let eps = epsilon * pow2(-half);
        let h = self.accum.iter().map(|a| a.sqrt() + eps).collect();
        (h, half)
    }

    /// Advance one step in place.
    pub fn advance<F>(
        &mut self,
        spec: &OptimizerSpec,
        grad_at: F,
        alpha_override: Option<f64>,
    ) -> Result<()>
    where
        F: FnOnce(&[f64]) -> Vec<f64>,
    {
        let t = self.k + 1;
        let mut eff = *spec;
        if let Some(a) = alpha_override {
            eff.alpha = a;
        }
        let c = step_coefficients(&eff, t)?;
        let d = self.w.len();

        let g = if c.gamma_k != 0.0 {
            let x: Vec<f64> = self
                .w
                .iter()
                .zip(&self.w_prev)
                .map(|(w, wp)| w + c.gamma_k * (w - wp))
                .collect();
            grad_at(&x)
        } else {
            grad_at(&self.w)
        };
        if g.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: g.len(),
            });
        }

        let next: Vec<f64> = if !spec.method.is_adaptive() {
            (0..d)
                .map(|j| self.w[j] - c.alpha_k * g[j] + c.beta_k * (self.w[j] - self.w_prev[j]))
                .collect()
        } else {
            // H_{k-1}, read before the accumulator moves; identity on step one.
            let prev = (t > 1).then(|| self.preconditioner_scaled(spec.epsilon));

            let down = pow2(-self.accum_exp);
            for (a, gj) in self.accum.iter_mut().zip(&g) {
                *a = c.g_keep * *a + c.g_new * (gj * gj) * down;
            }
            self.renormalize();

            let (h, h_exp) = self.preconditioner_scaled(spec.epsilon);
            let step_scale = c.alpha_k * pow2(-h_exp);
            let (hp, ratio_scale) = match &prev {
                Some((hp, hp_exp)) => (Some(hp), pow2(hp_exp - h_exp)),
                None => (None, pow2(-h_exp)),
            };

            let mut next = Vec::with_capacity(d);
            for j in 0..d {
                let delta = self.w[j] - self.w_prev[j];
                let hp_j = hp.map_or(1.0, |v| v[j]);
                let momentum = if c.beta_k != 0.0 { hp_j * delta } else { 0.0 };
                if h[j] == 0.0 {
                    if g[j] == 0.0 && momentum == 0.0 {
                        next.push(self.w[j]);
                        continue;
                    }
                    return Err(Error::SingularPreconditioner { step: t, coord: j });
                }
                next.push(
                    self.w[j] - step_scale * (g[j] / h[j])
                        + c.beta_k * (hp_j * ratio_scale / h[j]) * delta,
                );
            }
            next
        };

        self.w_prev = std::mem::replace(&mut self.w, next);
        self.k = t;
        Ok(())
    }

    fn renormalize(&mut self) {
        let max = self.accum.iter().cloned().fold(0.0_f64, f64::max);
        if max > RESCALE_ABOVE && max.is_finite() {
            let mut e = max.log2().floor() as i32;
            e -= e % 2;
            let s = pow2(-e);
            for a in &mut self.accum {
                *a *= s;
            }
            self.accum_exp += e;
        }
    }
}

/// Functional form of [`OptimizerState::advance`].
pub fn step<F>(
    state: &OptimizerState,
    spec: &OptimizerSpec,
    grad_at: F,
    alpha_override: Option<f64>,
) -> Result<OptimizerState>
where
    F: FnOnce(&[f64]) -> Vec<f64>,
{
    let mut next = state.clone();
    next.advance(spec, grad_at, alpha_override)?;
    Ok(next)
}

/// Diagonal of `H_k`: `sqrt(G_k) + eps` for adaptive methods, all ones otherwise.
pub fn preconditioner_diag(state: &OptimizerState, spec: &OptimizerSpec) -> Vec<f64> {
    if !spec.method.is_adaptive() {
        return vec![1.0; state.dim()];
    }
    let (h, e) = state.preconditioner_scaled(spec.epsilon);
    let s = pow2(e);
    h.into_iter().map(|v| v * s).collect()
}

/// Every iterate `w_0, ..., w_iters` of a constant-step run.
pub fn trajectory<F>(
    spec: &OptimizerSpec,
    w0: &[f64],
    mut grad_at: F,
    iters: usize,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    spec.validate()?;
    let mut state = init_state(spec, w0);
    let mut out = Vec::with_capacity(iters + 1);
    out.push(state.w.clone());
    for _ in 0..iters {
        state.advance(spec, &mut grad_at, None)?;
        out.push(state.w.clone());
    }
    Ok(out)
}

fn pow2(e: i32) -> f64 {
    2.0_f64.powi(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(method: MethodKind, alpha: f64) -> OptimizerSpec {
        OptimizerSpec::new(method, alpha)
    }

    #[test]
    fn init_state_fills_accumulator() {
        let s = init_state(&spec(MethodKind::AdaGrad, 0.1), &[0.0; 3]);
        assert_eq!(s.g_accum(), vec![0.0; 3]);
        assert_eq!(s.k, 0);

        let s = init_state(&spec(MethodKind::AdaGrad, 0.1).with_g_init(0.1), &[0.0; 3]);
        assert_eq!(s.g_accum(), vec![0.1; 3]);

        let s = init_state(&spec(MethodKind::Sgd, 0.1), &[1.0, 2.0]);
        assert_eq!(s.w, vec![1.0, 2.0]);
        assert_eq!(s.w_prev, vec![1.0, 2.0]);
    }

    #[test]
    fn coefficients_reject_step_zero() {
        assert!(matches!(
            step_coefficients(&spec(MethodKind::Adam, 0.1), 0),
            Err(Error::ZeroStepIndex)
        ));
    }

    #[test]
    fn adam_first_step_coefficients() {
        let c = step_coefficients(&spec(MethodKind::Adam, 0.3), 1).unwrap();
        assert!((c.alpha_k - 0.3).abs() < 1e-15);
        assert_eq!(c.beta_k, 0.0);
        assert!((c.g_new - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adam_literal_and_corrected_keep_coefficients() {
        let s = spec(MethodKind::Adam, 1.0);
        let lit = step_coefficients(&s, 2).unwrap();
        assert!((lit.g_keep - 0.999 / (1.0 - 0.999f64.powi(2))).abs() < 1e-9);
        let cor = step_coefficients(&s.with_adam_form(AdamForm::BiasCorrected), 2).unwrap();
        assert!((cor.g_keep - 0.999 * 0.001 / (1.0 - 0.999f64.powi(2))).abs() < 1e-12);
        assert!((cor.g_keep + cor.g_new - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nag_gamma_equals_beta() {
        for k in [1, 2, 7, 100] {
            let c = step_coefficients(&spec(MethodKind::Nag, 0.1).with_beta(0.8), k).unwrap();
            assert_eq!(c.gamma_k, 0.8);
            assert_eq!(c.beta_k, 0.8);
        }
    }

    #[test]
    fn adagrad_keeps_everything() {
        for k in [1, 5, 50] {
            let c = step_coefficients(&spec(MethodKind::AdaGrad, 0.1), k).unwrap();
            assert_eq!((c.g_keep, c.g_new), (1.0, 1.0));
        }
    }

    #[test]
    fn sgd_step_by_substitution() {
        let s = spec(MethodKind::Sgd, 0.1);
        let st = init_state(&s, &[0.0, 0.0]);
        let next = step(&st, &s, |_| vec![1.0, -2.0], None).unwrap();
        assert!((next.w[0] + 0.1).abs() < 1e-15);
        assert!((next.w[1] - 0.2).abs() < 1e-15);
        assert_eq!(next.w_prev, vec![0.0, 0.0]);
        assert_eq!(next.k, 1);
    }

    #[test]
    fn adagrad_first_step_is_sign_step() {
        let s = spec(MethodKind::AdaGrad, 0.25).with_epsilon(0.0);
        let st = init_state(&s, &[0.0; 4]);
        let next = step(&st, &s, |_| vec![3.0, -0.5, 1e-3, -200.0], None).unwrap();
        assert_eq!(next.w, vec![-0.25, 0.25, -0.25, 0.25]);
    }

    #[test]
    fn heavy_ball_scalar_recurrence() {
        // gradient map g(w) = w from w0 = 1
        let s = spec(MethodKind::Hb, 0.1).with_beta(0.9);
        let mut st = init_state(&s, &[1.0]);
        st.advance(&s, |w| w.to_vec(), None).unwrap();
        assert!((st.w[0] - 0.9).abs() < 1e-15);
        st.advance(&s, |w| w.to_vec(), None).unwrap();
        assert!((st.w[0] - 0.72).abs() < 1e-15);
    }

    #[test]
    fn preconditioner_examples() {
        let s = spec(MethodKind::Sgd, 0.1);
        assert_eq!(
            preconditioner_diag(&init_state(&s, &[0.0; 3]), &s),
            vec![1.0; 3]
        );

        let s = spec(MethodKind::AdaGrad, 0.1).with_epsilon(0.0);
        let st = step(&init_state(&s, &[0.0; 2]), &s, |_| vec![3.0, 4.0], None).unwrap();
        assert_eq!(preconditioner_diag(&st, &s), vec![3.0, 4.0]);

        for b2 in [0.5, 0.9, 0.999] {
            for form in [AdamForm::TableLiteral, AdamForm::BiasCorrected] {
                let s = spec(MethodKind::Adam, 0.1)
                    .with_epsilon(0.0)
                    .with_beta2(b2)
                    .with_adam_form(form);
                let st = step(&init_state(&s, &[0.0; 2]), &s, |_| vec![3.0, 4.0], None).unwrap();
                let h = preconditioner_diag(&st, &s);
                assert!(
                    (h[0] - 3.0).abs() < 1e-12 && (h[1] - 4.0).abs() < 1e-12,
                    "{h:?}"
                );
            }
        }
    }

    #[test]
    fn alpha_override_replaces_base_step() {
        let s = spec(MethodKind::Sgd, 0.1);
        let st = init_state(&s, &[0.0]);
        let next = step(&st, &s, |_| vec![1.0], Some(0.5)).unwrap();
        assert_eq!(next.w, vec![-0.5]);
    }

    #[test]
    fn dead_coordinate_is_left_alone() {
        let s = spec(MethodKind::Adam, 0.1).with_epsilon(0.0);
        let mut st = init_state(&s, &[0.0, 0.0]);
        for _ in 0..5 {
            st.advance(&s, |_| vec![1.0, 0.0], None).unwrap();
        }
        assert_eq!(st.w[1], 0.0);
        assert!(st.w[0] < 0.0);
    }

    #[test]
    fn underflowing_gradient_is_singular() {
        let s = spec(MethodKind::AdaGrad, 0.1).with_epsilon(0.0);
        let st = init_state(&s, &[0.0]);
        let err = step(&st, &s, |_| vec![1e-170], None).unwrap_err();
        assert!(matches!(
            err,
            Error::SingularPreconditioner { step: 1, coord: 0 }
        ));
    }

    #[test]
    fn gradient_length_is_checked() {
        let s = spec(MethodKind::Sgd, 0.1);
        let st = init_state(&s, &[0.0, 0.0]);
        assert!(matches!(
            step(&st, &s, |_| vec![1.0], None),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn literal_adam_accumulator_stays_finite() {
        let s = spec(MethodKind::Adam, 0.01).with_epsilon(0.0);
        let mut st = init_state(&s, &[0.0; 2]);
        for _ in 0..2000 {
            st.advance(&s, |w| vec![2.0 * (w[0] - 1.0), 2.0 * (w[1] + 1.0)], None)
                .unwrap();
        }
        assert!(st.w.iter().all(|v| v.is_finite()));
        assert!(st.accum_exponent() > 1024);
        // true G overflows f64 long before step 2000
        assert!(st.g_accum().iter().all(|v| v.is_infinite()));
    }

    #[test]
    fn validate_rejects_bad_hyperparameters() {
        assert!(spec(MethodKind::Sgd, 0.0).validate().is_err());
        assert!(spec(MethodKind::Hb, 0.1).with_beta(1.0).validate().is_err());
        assert!(spec(MethodKind::Adam, 0.1)
            .with_epsilon(-1.0)
            .validate()
            .is_err());
        assert!(spec(MethodKind::Adam, 0.1).validate().is_ok());
    }

    #[test]
    fn method_names_round_trip() {
        for m in MethodKind::ALL {
            assert_eq!(m.name().parse::<MethodKind>().unwrap(), m);
        }
        assert!("lbfgs".parse::<MethodKind>().is_err());
    }
}
