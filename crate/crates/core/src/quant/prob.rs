use std::f64::consts::FRAC_PI_2;

use crate::coeff::{CompositeCauchyModel, TAIL_CUTOFF};
use crate::{Error, Result};

use super::QuantizerConfig;

/// How level probabilities are evaluated from the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProbabilityPath {
    /// Exact sum of the discrete pmf over each level's integer interval.
    Sum,
    /// Closed-form integral of the continuous density over each interval.
    #[default]
    Integral,
}

/// Quantization-level probabilities and their entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProfile {
    /// `P_N` for `N` in `[-l_max, l_max]`, stored at index `N + l_max`.
    pub level_probs: Vec<f64>,
    pub entropy_bits: f64,
}

impl EntropyProfile {
    /// Wraps a symmetric probability vector of odd length `2 * l_max + 1`.
    pub fn from_probs(level_probs: Vec<f64>) -> Self {
        let entropy_bits = level_probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum();
        Self {
            level_probs,
            entropy_bits,
        }
    }

    pub fn l_max(&self) -> i64 {
        (self.level_probs.len() as i64 - 1) / 2
    }

    pub fn prob(&self, level: i64) -> f64 {
        let idx = level + self.l_max();
        self.level_probs
            .get(usize::try_from(idx).unwrap_or(usize::MAX))
            .copied()
            .unwrap_or(0.0)
    }
}

fn check_level(cfg: &QuantizerConfig, level: i64) -> Result<u32> {
    let m = level.unsigned_abs();
    if m > cfg.l_max() as u64 {
        return Err(Error::domain(format!(
            "level {level} outside [-{l}, {l}]",
            l = cfg.l_max()
        )));
    }
    Ok(m as u32)
}

// Mass of the integers first..=last (`None`: unbounded). Levels up to the
// model's tail cutoff are summed exactly, smallest terms first; each integer
// `n` beyond it carries the density integral over `[n - 1, n]`, which tiles
// the model's analytic tail.
fn range_mass(model: &CompositeCauchyModel, first: u64, last: Option<u64>) -> f64 {
    if last.is_some_and(|l| l < first) || model.is_all_zero() {
        return 0.0;
    }
    let mut s = 0.0;
    let exact_last = last.map_or(TAIL_CUTOFF, |l| l.min(TAIL_CUTOFF));
    let (sb, a) = (model.beta().sqrt(), model.alpha());
    let beyond = match last {
        Some(l) if l <= TAIL_CUTOFF => 0.0,
        _ => {
            let lo = (first.max(1) - 1).max(TAIL_CUTOFF) as f64 / sb;
            let hi = last.map_or(FRAC_PI_2, |l| (l as f64 / sb).atan());
            a / sb * (hi - lo.atan())
        }
    };
    s += beyond;
    for n in (first..=exact_last).rev() {
        s += model.cauchy_mass(n as i64);
    }
    s
}

// One-sided exact probability of magnitude level m >= 1.
fn sum_magnitude(model: &CompositeCauchyModel, cfg: &QuantizerConfig, m: u32) -> f64 {
    let start = cfg.level_start(m).max(1);
    if m < cfg.l_max() {
        let end = cfg.level_start(m + 1);
        range_mass(model, start, Some(end.saturating_sub(1)))
    } else {
        // Outermost level absorbs everything beyond it.
        range_mass(model, start, None)
    }
}

// One-sided integral approximation of magnitude level m >= 1.
fn integral_magnitude(model: &CompositeCauchyModel, cfg: &QuantizerConfig, m: u32) -> f64 {
    let alpha = model.alpha();
    if alpha == 0.0 {
        return 0.0;
    }
    let beta = model.beta();
    let sb = beta.sqrt();
    let q = cfg.q_step();
    let lo = (m as f64 - cfg.gamma()) * q;
    if m < cfg.l_max() {
        let hi = lo + q;
        // atan(hi/sb) - atan(lo/sb), written to avoid cancellation.
        alpha / sb * (q * sb / (beta + lo * hi)).atan()
    } else {
        alpha / sb * (sb / lo).atan()
    }
}

/// Exact probability of quantization level `level`: the model pmf summed
/// over every integer the hard quantizer maps to it. `P_0` is the complement
/// of all other levels.
pub fn level_prob_sum(model: &CompositeCauchyModel, cfg: &QuantizerConfig, level: i64) -> Result<f64> {
    let m = check_level(cfg, level)?;
    if m == 0 {
        let rest: f64 = (1..=cfg.l_max()).map(|k| sum_magnitude(model, cfg, k)).sum();
        return Ok((1.0 - 2.0 * rest).max(0.0));
    }
    Ok(sum_magnitude(model, cfg, m))
}

/// Integral approximation of the probability of level `level`:
/// `(alpha / sqrt(beta)) * [atan(((N+1)Q - gQ) / sqrt(beta)) - atan((NQ - gQ) / sqrt(beta))]`,
/// with the outermost level integrated to infinity and `P_0` the complement.
pub fn level_prob_integral(
    model: &CompositeCauchyModel,
    cfg: &QuantizerConfig,
    level: i64,
) -> Result<f64> {
    let m = check_level(cfg, level)?;
    if m == 0 {
        let rest: f64 = (1..=cfg.l_max())
            .map(|k| integral_magnitude(model, cfg, k))
            .sum();
        return Ok((1.0 - 2.0 * rest).max(0.0));
    }
    Ok(integral_magnitude(model, cfg, m))
}

/// All level probabilities `P_{-l_max} ..= P_{l_max}`.
pub fn level_probs(model: &CompositeCauchyModel, cfg: &QuantizerConfig, path: ProbabilityPath) -> Vec<f64> {
    let l = cfg.l_max() as usize;
    let one_sided: Vec<f64> = match path {
        ProbabilityPath::Sum => sum_all(model, cfg),
        ProbabilityPath::Integral => (1..=cfg.l_max())
            .map(|m| integral_magnitude(model, cfg, m))
            .collect(),
    };
    let rest: f64 = one_sided.iter().sum();
    let p0 = (1.0 - 2.0 * rest).max(0.0);
    let mut probs = vec![0.0; 2 * l + 1];
    probs[l] = p0;
    for (k, &p) in one_sided.iter().enumerate() {
        probs[l + 1 + k] = p;
        probs[l - 1 - k] = p;
    }
    probs
}

// Exact one-sided probabilities for every level in a single pass.
fn sum_all(model: &CompositeCauchyModel, cfg: &QuantizerConfig) -> Vec<f64> {
    if model.is_all_zero() {
        return vec![0.0; cfg.l_max() as usize];
    }
    let starts: Vec<u64> = (1..=cfg.l_max())
        .map(|m| cfg.level_start(m).max(1))
        .collect();
    let mut out = Vec::with_capacity(starts.len());
    for (i, &s) in starts.iter().enumerate() {
        if i + 1 < starts.len() {
            out.push(range_mass(model, s, Some(starts[i + 1].saturating_sub(1))));
        } else {
            out.push(sum_magnitude(model, cfg, cfg.l_max()));
        }
    }
    out
}

/// Entropy of the quantized coefficients in bits, integral path.
pub fn entropy(model: &CompositeCauchyModel, cfg: &QuantizerConfig) -> EntropyProfile {
    entropy_with(model, cfg, ProbabilityPath::Integral)
}

pub fn entropy_with(
    model: &CompositeCauchyModel,
    cfg: &QuantizerConfig,
    path: ProbabilityPath,
) -> EntropyProfile {
    EntropyProfile::from_probs(level_probs(model, cfg, path))
}
