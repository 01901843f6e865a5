use std::f64::consts::{FRAC_PI_2, PI};

use super::DiscretePmf;
use crate::{Error, Result};

/// Levels with `|n|` above this cutoff are accounted for by the integral tail.
pub const TAIL_CUTOFF: u64 = 10_000;

/// Scale `alpha` that normalizes the composite pmf for a given shape and
/// zero probability:
///
/// `alpha = (1 - p0) * beta * tanh(pi * sqrt(beta)) / (pi * sqrt(beta) - tanh(pi * sqrt(beta)))`
pub fn alpha_from_beta(beta: f64, p0: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::domain(format!("p0 must lie in [0, 1], got {p0}")));
    }
    let s = beta.sqrt() * PI;
    let t = s.tanh();
    Ok((1.0 - p0) * beta * t / (s - t))
}

/// Composite discrete Cauchy distribution: `p0` at zero and
/// `alpha / (n^2 + beta)` on every other integer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeCauchyModel {
    alpha: f64,
    beta: f64,
    p0: f64,
}

impl CompositeCauchyModel {
    pub fn new(beta: f64, p0: f64) -> Result<Self> {
        let alpha = alpha_from_beta(beta, p0)?;
        Ok(Self { alpha, beta, p0 })
    }

    /// All mass at zero. Used for frames whose coefficients quantize or round
    /// to zero everywhere.
    pub fn all_zero() -> Self {
        Self {
            alpha: 0.0,
            beta: 1.0,
            p0: 1.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn is_all_zero(&self) -> bool {
        self.alpha == 0.0
    }

    /// Probability of a single non-zero level, ignoring the spike.
    #[inline]
    pub fn cauchy_mass(&self, n: i64) -> f64 {
        let n = n as f64;
        self.alpha / (n * n + self.beta)
    }

    /// Two-sided mass of all levels with `|n| > cutoff`, approximated by the
    /// integral of the continuous density from the cutoff outwards.
    pub fn tail_mass(&self, cutoff: u64) -> f64 {
        let sb = self.beta.sqrt();
        2.0 * self.alpha * (FRAC_PI_2 - (cutoff as f64 / sb).atan()) / sb
    }

    /// Mass of `|n| <= cutoff` summed exactly, plus the analytic tail.
    pub fn total_mass(&self, cutoff: u64) -> f64 {
        let mut s = 0.0;
        for n in (1..=cutoff as i64).rev() {
            s += self.cauchy_mass(n);
        }
        self.p0 + 2.0 * s + self.tail_mass(cutoff)
    }
}

impl DiscretePmf for CompositeCauchyModel {
    fn pmf(&self, n: i64) -> f64 {
        if n == 0 {
            self.p0
        } else {
            self.cauchy_mass(n)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_unit_beta() {
        let a = alpha_from_beta(1.0, 0.0).unwrap();
        // sum_{n != 0} 1/(n^2 + 1) = pi * coth(pi) - 1
        let series = PI / PI.tanh() - 1.0;
        assert!((a - 1.0 / series).abs() < 1e-12, "{a}");
        assert!((a - 0.46440).abs() < 1e-4, "{a}");
    }

    #[test]
    fn alpha_all_mass_at_zero() {
        assert_eq!(alpha_from_beta(1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn alpha_half_mass() {
        // Numeric summation with an integral tail as the oracle.
        let a = alpha_from_beta(4.0, 0.5).unwrap();
        let mut s = 0.0;
        let cutoff = 1_000_000u64;
        for n in (1..=cutoff).rev() {
            let n = n as f64;
            s += a / (n * n + 4.0);
        }
        s += a * (FRAC_PI_2 - ((cutoff as f64 + 0.5) / 2.0).atan()) / 2.0;
        assert!((2.0 * s - 0.5).abs() < 1e-6, "{}", 2.0 * s);
    }

    #[test]
    fn alpha_rejects_bad_beta() {
        assert!(matches!(alpha_from_beta(0.0, 0.1), Err(Error::Domain(_))));
        assert!(matches!(alpha_from_beta(-2.0, 0.1), Err(Error::Domain(_))));
        assert!(alpha_from_beta(1.0, 1.5).is_err());
    }

    #[test]
    fn pmf_shape() {
        let m = CompositeCauchyModel::new(4.0, 0.3).unwrap();
        assert_eq!(m.pmf(0), 0.3);
        for n in 1..50 {
            assert_eq!(m.pmf(n), m.pmf(-n));
            assert!(m.pmf(n + 1) < m.pmf(n));
        }
    }

    #[test]
    fn normalized_with_tail() {
        for &beta in &[0.01, 0.5, 4.0, 77.0, 1000.0] {
            for &p0 in &[0.0, 0.3, 0.9] {
                let m = CompositeCauchyModel::new(beta, p0).unwrap();
                let total = m.total_mass(TAIL_CUTOFF);
                assert!((total - 1.0).abs() < 1e-6, "beta={beta} p0={p0} total={total}");
            }
        }
    }
}
