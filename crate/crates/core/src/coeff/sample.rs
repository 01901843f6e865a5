use rand::Rng;

use super::DiscretePmf;

/// Inverse-CDF sampler for a symmetric pmf, truncated at `max_level`.
///
/// Mass beyond the truncation point is dropped and the remainder
/// renormalized; pick `max_level` so that the dropped tail is negligible for
/// the sample size at hand.
#[derive(Debug, Clone)]
pub struct PmfSampler {
    p_zero: f64,
    // cumulative mass of |n| = 1..=k (one side, doubled), normalized.
    cdf: Vec<f64>,
}

impl PmfSampler {
    pub fn new(pmf: &impl DiscretePmf, max_level: u32) -> Self {
        let mut cdf = Vec::with_capacity(max_level as usize);
        let mut acc = pmf.pmf(0);
        for n in 1..=max_level as i64 {
            acc += 2.0 * pmf.pmf(n);
            cdf.push(acc);
        }
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Self {
            p_zero: pmf.pmf(0) / total,
            cdf,
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> i64 {
        let u: f64 = rng.random();
        if u < self.p_zero || self.cdf.is_empty() {
            return 0;
        }
        let idx = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        let magnitude = idx as i64 + 1;
        if rng.random::<bool>() {
            magnitude
        } else {
            -magnitude
        }
    }

    pub fn sample_n(&self, rng: &mut impl Rng, n: usize) -> Vec<i64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}
