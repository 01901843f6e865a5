use std::f64::consts::PI;

use super::fit::argmin_on_grid;
use super::{BetaGrid, CoefficientHistogram, DiscretePmf};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Laplacian,
    Cauchy,
}

/// Zero-centred discretized Laplacian or Cauchy distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineModel {
    kind: BaselineKind,
    scale: f64,
    // Laplacian: decay ratio r; Cauchy: normalizing constant.
    aux: f64,
}

impl BaselineModel {
    pub fn new(kind: BaselineKind, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::domain(format!("baseline scale must be positive, got {scale}")));
        }
        let aux = match kind {
            BaselineKind::Laplacian => (-1.0 / scale).exp(),
            // sum over all integers of 1/(n^2+s^2) = pi*coth(pi*s)/s
            BaselineKind::Cauchy => scale * (PI * scale).tanh() / PI,
        };
        Ok(Self { kind, scale, aux })
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl DiscretePmf for BaselineModel {
    fn pmf(&self, n: i64) -> f64 {
        match self.kind {
            BaselineKind::Laplacian => {
                let r = self.aux;
                (1.0 - r) / (1.0 + r) * r.powi(n.unsigned_abs().min(i32::MAX as u64) as i32)
            }
            BaselineKind::Cauchy => {
                let n = n as f64;
                self.aux / (n * n + self.scale * self.scale)
            }
        }
    }

    fn ln_pmf(&self, n: i64) -> f64 {
        match self.kind {
            BaselineKind::Laplacian => {
                let r = self.aux;
                ((1.0 - r) / (1.0 + r)).ln() - n.unsigned_abs() as f64 / self.scale
            }
            BaselineKind::Cauchy => self.pmf(n).ln(),
        }
    }
}

/// Fits a baseline model.
///
/// The Laplacian scale is the mean absolute level. The Cauchy scale is
/// grid-searched (`scale^2` runs over `grid`) to minimize squared pmf error on
/// every observed level, zero included.
pub fn fit_baseline(
    hist: &CoefficientHistogram,
    kind: BaselineKind,
    grid: &BetaGrid,
) -> Result<BaselineModel> {
    if hist.nonzero_total() == 0 {
        return Err(Error::DegenerateHistogram);
    }
    match kind {
        BaselineKind::Laplacian => BaselineModel::new(kind, hist.mean_abs()),
        BaselineKind::Cauchy => {
            let total = hist.total() as f64;
            let observed: Vec<(f64, f64)> = hist
                .iter()
                .map(|(l, c)| ((l as f64).powi(2), c as f64 / total))
                .collect();
            let s2 = argmin_on_grid(grid, |s2| {
                let s = s2.sqrt();
                let c = s * (PI * s).tanh() / PI;
                observed
                    .iter()
                    .map(|&(n2, emp)| {
                        let d = c / (n2 + s2) - emp;
                        d * d
                    })
                    .sum::<f64>()
            });
            BaselineModel::new(kind, s2.sqrt())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::build_histogram;

    fn mass(m: &BaselineModel, cutoff: i64) -> f64 {
        (-cutoff..=cutoff).rev().map(|n| m.pmf(n)).sum()
    }

    #[test]
    fn laplacian_unit_scale() {
        let h = CoefficientHistogram::from_counts([(1, 1), (-1, 1), (0, 0)]).unwrap();
        let m = fit_baseline(&h, BaselineKind::Laplacian, &BetaGrid::default()).unwrap();
        assert_eq!(m.scale(), 1.0);
    }

    #[test]
    fn symmetric_pmfs() {
        let h = build_histogram(&[-3, -1, -1, 0, 0, 0, 1, 1, 3]).unwrap();
        for kind in [BaselineKind::Laplacian, BaselineKind::Cauchy] {
            let m = fit_baseline(&h, kind, &BetaGrid::default()).unwrap();
            for n in 1..40 {
                assert_eq!(m.pmf(n), m.pmf(-n));
            }
        }
    }

    #[test]
    fn normalized() {
        for scale in [0.3, 1.0, 7.5] {
            let lap = BaselineModel::new(BaselineKind::Laplacian, scale).unwrap();
            assert!((mass(&lap, 10_000) - 1.0).abs() < 1e-12);
            let cau = BaselineModel::new(BaselineKind::Cauchy, scale).unwrap();
            // Tail beyond N is about 2*c/N.
            let n = 1_000_000;
            let tail = 2.0 * cau.aux / n as f64;
            assert!((mass(&cau, n) + tail - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn degenerate() {
        let h = build_histogram(&[0, 0]).unwrap();
        assert!(fit_baseline(&h, BaselineKind::Laplacian, &BetaGrid::default()).is_err());
        assert!(fit_baseline(&h, BaselineKind::Cauchy, &BetaGrid::default()).is_err());
    }
}
