//! Textbook Adam (first/second moment form), kept for comparison with the
//! engine's Adam column. Nothing in the training path uses it.

use super::{init_state, MethodKind, OptimizerSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ReferenceAdam {
    alpha: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    t: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl ReferenceAdam {
    pub fn new(dim: usize, alpha: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        ReferenceAdam {
            alpha,
            beta1,
            beta2,
            epsilon,
            t: 0,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
        }
    }

    pub fn from_spec(dim: usize, spec: &OptimizerSpec) -> Self {
        Self::new(dim, spec.alpha, spec.beta1, spec.beta2, spec.epsilon)
    }

    pub fn step(&mut self, w: &mut [f64], g: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for j in 0..w.len() {
            self.m[j] = self.beta1 * self.m[j] + (1.0 - self.beta1) * g[j];
            self.v[j] = self.beta2 * self.v[j] + (1.0 - self.beta2) * g[j] * g[j];
            let m_hat = self.m[j] / bc1;
            let denom = (self.v[j] / bc2).sqrt() + self.epsilon;
            if denom > 0.0 {
                w[j] -= self.alpha * m_hat / denom;
            }
        }
    }
}

/// Per-step maximum absolute gap between the engine's Adam trajectory (in
/// whichever [`super::AdamForm`] `spec` selects) and textbook Adam, both
/// started at `w0`. Index `k` compares `w_k`; entry 0 is always 0.
pub fn adam_form_deviation<F>(
    spec: &OptimizerSpec,
    w0: &[f64],
    mut grad_at: F,
    iters: usize,
) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    if spec.method != MethodKind::Adam {
        return Err(Error::InvalidParameter(format!(
            "adam_form_deviation needs an Adam spec, got {}",
            spec.method
        )));
    }
    let mut engine = init_state(spec, w0);
    let mut reference = ReferenceAdam::from_spec(w0.len(), spec);
    let mut w_ref = w0.to_vec();
    let mut gaps = Vec::with_capacity(iters + 1);
    gaps.push(0.0);
    for _ in 0..iters {
        engine.advance(spec, &mut grad_at, None)?;
        let g = grad_at(&w_ref);
        reference.step(&mut w_ref, &g);
        let gap = engine
            .w
            .iter()
            .zip(&w_ref)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        gaps.push(gap);
    }
    Ok(gaps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::AdamForm;

    fn quad(w: &[f64]) -> Vec<f64> {
        w.iter()
            .enumerate()
            .map(|(j, x)| (j as f64 + 1.0) * (x - 0.5 * j as f64))
            .collect()
    }

    #[test]
    fn corrected_form_matches_textbook_adam() {
        let spec =
            OptimizerSpec::new(MethodKind::Adam, 0.01).with_adam_form(AdamForm::BiasCorrected);
        let gaps = adam_form_deviation(&spec, &[0.3, -0.2, 1.0, 0.0], quad, 300).unwrap();
        let worst = gaps.iter().cloned().fold(0.0, f64::max);
        assert!(worst < 1e-12, "worst gap {worst}");
    }

    #[test]
    fn literal_form_departs_from_textbook_adam() {
        let spec = OptimizerSpec::new(MethodKind::Adam, 0.01);
        let gaps = adam_form_deviation(&spec, &[0.3, -0.2, 1.0, 0.0], quad, 300).unwrap();
        // identical on the first step, where both keep-coefficients multiply a zero accumulator
        assert!(gaps[1] < 1e-15);
        assert!(gaps[300] > 1e-3);
    }

    #[test]
    fn rejects_non_adam_spec() {
        let spec = OptimizerSpec::new(MethodKind::Sgd, 0.01);
        assert!(adam_form_deviation(&spec, &[0.0], quad, 1).is_err());
    }
}
