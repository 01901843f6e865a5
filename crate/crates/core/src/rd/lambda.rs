use std::collections::VecDeque;

use super::HyperbolicFit;
use crate::{Error, Result};

/// Weights of the newest, second and third most recent history entries.
pub const TAU: [f64; 3] = [5.0, 3.0, 1.0];

/// Slope magnitude `|D'(q) / R'(q)|` of the surrogate RD curve.
pub fn lambda_at(q: f64, r_fit: &HyperbolicFit, d_fit: &HyperbolicFit) -> Result<f64> {
    let dr = r_fit.derivative(q);
    let dd = d_fit.derivative(q);
    if dr == 0.0 || !dr.is_finite() {
        return Err(Error::FlatRateModel);
    }
    let l = (dd / dr).abs();
    if !l.is_finite() {
        return Err(Error::FlatRateModel);
    }
    Ok(l)
}

/// Step sizes and lambdas actually used by the last (up to) three frames of
/// one temporal level, newest first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LambdaState {
    history: VecDeque<(f64, f64)>,
}

impl LambdaState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `(q, lambda)`; non-positive lambdas are ignored.
    pub fn push(&mut self, q: f64, lambda: f64) {
        if !(lambda > 0.0) || !lambda.is_finite() || !(q > 0.0) {
            return;
        }
        self.history.push_front((q, lambda));
        self.history.truncate(TAU.len());
    }

    pub fn history(&self) -> impl Iterator<Item = &(f64, f64)> {
        self.history.iter()
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }
}

/// Weighted mean of `Gamma_m = lambda_m / lambda_at(Q_m)` over the history.
/// Returns `None` when no entry gives a usable ratio.
pub fn stabilization_scale(
    state: &LambdaState,
    r_fit: &HyperbolicFit,
    d_fit: &HyperbolicFit,
) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (&(q, l), &tau) in state.history().zip(TAU.iter()) {
        match lambda_at(q, r_fit, d_fit) {
            Ok(model) if model > 0.0 => {
                num += tau * l / model;
                den += tau;
            }
            _ => {}
        }
    }
    (den > 0.0).then(|| num / den)
}

/// Scales `lambda_raw` by the history ratio, or returns it unchanged when
/// there is no usable history.
pub fn stabilize_lambda(
    lambda_raw: f64,
    state: &LambdaState,
    r_fit: &HyperbolicFit,
    d_fit: &HyperbolicFit,
) -> f64 {
    stabilization_scale(state, r_fit, d_fit).map_or(lambda_raw, |s| s * lambda_raw)
}
