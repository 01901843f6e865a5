use std::collections::BTreeMap;

use super::{CoefficientHistogram, DiscretePmf};
use crate::{Error, Result};

/// A pmf restricted to a finite support.
pub type Pmf = BTreeMap<i64, f64>;

/// `sum f_r(n) * log2(f_r(n) / f_p(n))`. Terms with `f_r(n) = 0` contribute
/// nothing; `f_p(n) = 0` where `f_r(n) > 0` is an error.
pub fn kl_divergence(f_r: &Pmf, f_p: &Pmf) -> Result<f64> {
    let mut kl = 0.0;
    for (&level, &r) in f_r {
        if r <= 0.0 {
            continue;
        }
        let p = f_p.get(&level).copied().unwrap_or(0.0);
        if p <= 0.0 {
            return Err(Error::UnsupportedModelMass { level });
        }
        kl += r * (r / p).log2();
    }
    // Rounding can push an exact match a hair below zero.
    Ok(kl.max(0.0))
}

/// KL divergence of `model` from the histogram's empirical pmf, with the
/// model restricted to the observed levels and renormalized there. Works in
/// the log domain so that a model whose tail underflows still gets a finite
/// (if large) divergence; only levels of truly zero model mass are rejected.
pub fn model_kl(hist: &CoefficientHistogram, model: &impl DiscretePmf) -> Result<f64> {
    let f_r = hist.pmf();
    let ln_p: Vec<(i64, f64, f64)> = f_r.iter().map(|(&l, &r)| (l, r, model.ln_pmf(l))).collect();
    if let Some(&(level, _, _)) = ln_p.iter().find(|e| e.2 == f64::NEG_INFINITY || e.2.is_nan()) {
        return Err(Error::UnsupportedModelMass { level });
    }
    let max = ln_p.iter().map(|e| e.2).fold(f64::NEG_INFINITY, f64::max);
    let ln_mass = max + ln_p.iter().map(|e| (e.2 - max).exp()).sum::<f64>().ln();
    let kl: f64 = ln_p
        .iter()
        .filter(|e| e.1 > 0.0)
        .map(|&(_, r, lp)| r * (r.ln() - (lp - ln_mass)))
        .sum();
    Ok((kl / std::f64::consts::LN_2).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_zero() {
        let f: Pmf = [(-1, 0.2), (0, 0.5), (4, 0.3)].into_iter().collect();
        assert_eq!(kl_divergence(&f, &f).unwrap(), 0.0);
    }

    #[test]
    fn two_term_example() {
        let f_r: Pmf = [(-1, 0.5), (1, 0.5)].into_iter().collect();
        let f_p: Pmf = [(-1, 0.25), (1, 0.75)].into_iter().collect();
        // 0.5*log2(2) + 0.5*log2(2/3)
        let expected = 0.5 + 0.5 * (2.0f64 / 3.0).log2();
        let kl = kl_divergence(&f_r, &f_p).unwrap();
        assert!((kl - expected).abs() < 1e-12);
        assert!((kl - 0.207519).abs() < 1e-6);
    }

    #[test]
    fn missing_model_mass() {
        let f_r: Pmf = [(0, 0.5), (2, 0.5)].into_iter().collect();
        let f_p: Pmf = [(0, 1.0)].into_iter().collect();
        assert!(matches!(
            kl_divergence(&f_r, &f_p),
            Err(Error::UnsupportedModelMass { level: 2 })
        ));
    }

    #[test]
    fn zero_reference_terms_ignored() {
        let f_r: Pmf = [(0, 1.0), (3, 0.0)].into_iter().collect();
        let f_p: Pmf = [(0, 1.0)].into_iter().collect();
        assert_eq!(kl_divergence(&f_r, &f_p).unwrap(), 0.0);
    }
}
