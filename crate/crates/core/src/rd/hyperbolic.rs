use crate::{Error, Result};

/// `y(Q) = coeff * Q^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicFit {
    pub coeff: f64,
    pub exponent: f64,
}

impl HyperbolicFit {
    pub fn eval(&self, q: f64) -> f64 {
        self.coeff * q.powf(-self.exponent)
    }

    pub fn derivative(&self, q: f64) -> f64 {
        -self.coeff * self.exponent * q.powf(-self.exponent - 1.0)
    }
}

/// Least squares of `ln y = ln a - b ln Q`. Points with `y <= 0` are dropped.
pub fn fit_hyperbolic(points: &[(f64, f64)]) -> Result<HyperbolicFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(q, y)| q > 0.0 && y > 0.0 && q.is_finite() && y.is_finite())
        .map(|&(q, y)| (q.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return Err(Error::InsufficientFitData);
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientFitData);
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(HyperbolicFit {
        coeff: (my - slope * mx).exp(),
        exponent: -slope,
    })
}
