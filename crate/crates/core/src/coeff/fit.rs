use super::{alpha_from_beta, CoefficientHistogram, CompositeCauchyModel};
use crate::{Error, Result};

/// Candidate shape values searched by the least-squares fits, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaGrid {
    values: Vec<f64>,
}

impl BetaGrid {
    /// `min, min*ratio, min*ratio^2, ...` up to and including `max` (within
    /// rounding).
    pub fn geometric(min: f64, max: f64, ratio: f64) -> Result<Self> {
        check_bounds(min, max)?;
        if !(ratio > 1.0) {
            return Err(Error::domain(format!("grid ratio must exceed 1, got {ratio}")));
        }
        let mut values = Vec::new();
        let mut k = 0i32;
        loop {
            let v = min * ratio.powi(k);
            if v > max * (1.0 + 1e-12) {
                break;
            }
            values.push(v);
            k += 1;
        }
        Ok(Self { values })
    }

    pub fn linear(min: f64, max: f64, step: f64) -> Result<Self> {
        check_bounds(min, max)?;
        if !(step > 0.0) {
            return Err(Error::domain(format!("grid step must be positive, got {step}")));
        }
        let n = ((max - min) / step + 1e-9).floor() as usize;
        Ok(Self {
            values: (0..=n).map(|k| min + step * k as f64).collect(),
        })
    }

    pub fn explicit(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::domain("grid values must be positive and non-empty"));
        }
        values.sort_by(|a, b| a.total_cmp(b));
        values.dedup();
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Default for BetaGrid {
    fn default() -> Self {
        Self::geometric(0.05, 500.0, 1.05).expect("static grid bounds")
    }
}

fn check_bounds(min: f64, max: f64) -> Result<()> {
    if !(min > 0.0) || !(max > min) || !max.is_finite() {
        return Err(Error::domain(format!(
            "grid bounds need 0 < min < max, got [{min}, {max}]"
        )));
    }
    Ok(())
}

/// Index of the grid value minimizing `objective`; the first (smallest) value
/// wins ties.
pub(super) fn argmin_on_grid(grid: &BetaGrid, mut objective: impl FnMut(f64) -> f64) -> f64 {
    let mut best = (f64::INFINITY, grid.values[0]);
    for &beta in &grid.values {
        let err = objective(beta);
        if err < best.0 {
            best = (err, beta);
        }
    }
    best.1
}

/// Fits the composite model to a histogram.
///
/// `p0` is taken directly from the zero bin. `beta` is the grid value whose
/// pmf has the smallest squared error against the empirical pmf on the
/// observed non-zero levels; `alpha` follows from normalization.
pub fn fit_composite_cauchy(
    hist: &CoefficientHistogram,
    grid: &BetaGrid,
) -> Result<CompositeCauchyModel> {
    if hist.nonzero_total() == 0 {
        return Err(Error::DegenerateHistogram);
    }
    let p0 = hist.zero_fraction();
    let total = hist.total() as f64;
    let observed: Vec<(f64, f64)> = hist
        .iter()
        .filter(|&(level, _)| level != 0)
        .map(|(level, count)| ((level as f64).powi(2), count as f64 / total))
        .collect();

    let beta = argmin_on_grid(grid, |beta| {
        let alpha = alpha_from_beta(beta, p0).unwrap_or(0.0);
        observed
            .iter()
            .map(|&(n2, emp)| {
                let d = alpha / (n2 + beta) - emp;
                d * d
            })
            .sum::<f64>()
    });
    CompositeCauchyModel::new(beta, p0)
}
