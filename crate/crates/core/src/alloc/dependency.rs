use std::collections::BTreeMap;

use super::fsum;
use crate::{Error, Result};

/// A frame of the GOP with its temporal level and the indices (coding order)
/// of the frames it references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSlot {
    pub level: u8,
    pub refs: Vec<usize>,
}

/// Reference structure plus dependency factors `pi(i <- j)`, the slope of
/// frame `i`'s RD cost with respect to the distortion of its reference `j`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DependencyGraph {
    frames: Vec<FrameSlot>,
    pi: BTreeMap<(usize, usize), f64>,
}

impl DependencyGraph {
    /// Every reference must point to an earlier frame in coding order.
    pub fn new(frames: Vec<FrameSlot>) -> Result<Self> {
        for (i, f) in frames.iter().enumerate() {
            if let Some(&bad) = f.refs.iter().find(|&&j| j >= i) {
                return Err(Error::domain(format!(
                    "frame {i} references frame {bad}, which is not coded before it"
                )));
            }
        }
        Ok(Self {
            frames,
            pi: BTreeMap::new(),
        })
    }

    pub fn frames(&self) -> &[FrameSlot] {
        &self.frames
    }

    pub fn set_pi(&mut self, dependent: usize, reference: usize, pi: f64) -> Result<()> {
        let ok = self
            .frames
            .get(dependent)
            .is_some_and(|f| f.refs.contains(&reference));
        if !ok {
            return Err(Error::domain(format!(
                "frame {dependent} does not reference frame {reference}"
            )));
        }
        self.pi.insert((dependent, reference), pi);
        Ok(())
    }

    pub fn pi(&self, dependent: usize, reference: usize) -> f64 {
        self.pi.get(&(dependent, reference)).copied().unwrap_or(0.0)
    }

    /// `1 + sum of pi over the frames that reference frame j`.
    pub fn kappa(&self, j: usize) -> f64 {
        1.0 + self
            .frames
            .iter()
            .enumerate()
            .filter(|(_, f)| f.refs.contains(&j))
            .map(|(k, _)| self.pi(k, j))
            .sum::<f64>()
    }

    pub fn kappas(&self) -> Vec<f64> {
        (0..self.frames.len()).map(|j| self.kappa(j)).collect()
    }
}

/// Ordinary least-squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(samples: &[(f64, f64)]) -> Result<LineFit> {
    if samples.len() < 2 {
        return Err(Error::NoSlopeInformation);
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::NoSlopeInformation);
    }
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let syy: f64 = samples.iter().map(|s| (s.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Dependency factor from `(reference distortion, dependent RD cost)` pairs:
/// the least-squares slope, floored at zero.
pub fn estimate_pi(samples: &[(f64, f64)]) -> Result<f64> {
    Ok(fit_line(samples)?.slope.max(0.0))
}

/// Re-attribution of external costs: entry `[i][j]` is the part of frame
/// `i`'s cost caused by reference `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReindexedCosts {
    /// Cost attributed to each frame as a reference (column sums).
    pub attributed: Vec<f64>,
    /// External cost carried by each frame as a dependent (row sums).
    pub carried: Vec<f64>,
    pub total_by_rows: f64,
    pub total_by_columns: f64,
}

pub fn external_cost_reindex(matrix: &[Vec<f64>]) -> Result<ReindexedCosts> {
    let n = matrix.len();
    for (row, r) in matrix.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NonSquare {
                rows: n,
                row,
                len: r.len(),
            });
        }
    }
    let carried: Vec<f64> = matrix.iter().map(|r| fsum(r.iter().copied())).collect();
    let attributed: Vec<f64> = (0..n).map(|j| fsum(matrix.iter().map(|r| r[j]))).collect();
    let total_by_rows = fsum(matrix.iter().flat_map(|r| r.iter().copied()));
    let total_by_columns = fsum((0..n).flat_map(|j| matrix.iter().map(move |r| r[j])));
    Ok(ReindexedCosts {
        attributed,
        carried,
        total_by_rows,
        total_by_columns,
    })
}
