use crate::coeff::CompositeCauchyModel;

use super::QuantizerConfig;

/// Per-level squared reconstruction error and its two-sided total.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionProfile {
    /// `D_0, D_1, ..., D_{l_max}`; negative levels mirror positive ones.
    pub level_distortions: Vec<f64>,
    pub total: f64,
}

/// Expected squared error of the dead-zone quantizer with reconstruction at
/// `N * Q`, integrating the continuous Cauchy density over each level's
/// interval. The point mass at zero contributes nothing.
pub fn distortion(model: &CompositeCauchyModel, cfg: &QuantizerConfig) -> DistortionProfile {
    let l = cfg.l_max() as usize;
    if model.is_all_zero() {
        return DistortionProfile {
            level_distortions: vec![0.0; l + 1],
            total: 0.0,
        };
    }
    let alpha = model.alpha();
    let beta = model.beta();
    let sb = beta.sqrt();
    let q = cfg.q_step();
    let g = cfg.gamma();

    let t = (1.0 - g) * q;
    let d0 = 2.0 * alpha * (t - sb * (t / sb).atan());

    let mut level_distortions = Vec::with_capacity(l + 1);
    level_distortions.push(d0.max(0.0));
    for n in 1..=l {
        let nf = n as f64;
        let a = (nf - g) * q;
        let b = a + q;
        let atan_diff = (q * sb / (beta + a * b)).atan();
        let psi1 = (alpha * nf * nf * q * q - alpha * beta) / sb * atan_diff;
        let psi2 = alpha * nf * q * ((b * b + beta) / (a * a + beta)).ln();
        level_distortions.push((alpha * q + psi1 - psi2).max(0.0));
    }
    let total = level_distortions[0] + 2.0 * level_distortions[1..].iter().sum::<f64>();
    DistortionProfile {
        level_distortions,
        total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::DiscretePmf;
    use crate::quant::{dequantize, quantize_hard, DEFAULT_L_MAX};

    #[test]
    fn zero_spike_has_no_distortion() {
        let cfg = QuantizerConfig::new(8.0, 1.0 / 6.0, DEFAULT_L_MAX).unwrap();
        let d = distortion(&CompositeCauchyModel::all_zero(), &cfg);
        assert_eq!(d.total, 0.0);
        let m = CompositeCauchyModel::new(4.0, 1.0).unwrap();
        assert_eq!(distortion(&m, &cfg).total, 0.0);
    }

    #[test]
    fn total_is_two_sided_sum() {
        let m = CompositeCauchyModel::new(4.0, 0.3).unwrap();
        let cfg = QuantizerConfig::new(5.0, 1.0 / 3.0, 64).unwrap();
        let d = distortion(&m, &cfg);
        assert_eq!(d.level_distortions.len(), 65);
        let manual = d.level_distortions[0] + 2.0 * d.level_distortions[1..].iter().sum::<f64>();
        assert!((d.total - manual).abs() < 1e-9);
    }

    #[test]
    fn level_matches_quadrature() {
        let m = CompositeCauchyModel::new(2.5, 0.2).unwrap();
        let cfg = QuantizerConfig::new(3.0, 1.0 / 6.0, DEFAULT_L_MAX).unwrap();
        let d = distortion(&m, &cfg);
        for level in [0usize, 1, 2, 5] {
            let (lo, hi) = if level == 0 {
                (-(1.0 - 1.0 / 6.0) * 3.0, (1.0 - 1.0 / 6.0) * 3.0)
            } else {
                let lo = (level as f64 - 1.0 / 6.0) * 3.0;
                (lo, lo + 3.0)
            };
            let recon = level as f64 * 3.0;
            let f = |x: f64| (x - recon).powi(2) * m.alpha() / (x * x + m.beta());
            let steps = 20_000;
            let h = (hi - lo) / steps as f64;
            let mut s = f(lo) + f(hi);
            for k in 1..steps {
                s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(lo + k as f64 * h);
            }
            s *= h / 3.0;
            let got = d.level_distortions[level];
            assert!((got - s).abs() < 1e-9 * s.max(1.0), "level {level}: {got} vs {s}");
        }
    }

    #[test]
    fn brute_force_reconstruction_error() {
        let m = CompositeCauchyModel::new(4.0, 0.3).unwrap();
        let q = 8.0;
        let l_max = (10_000.0 / q) as u32 + 2;
        let cfg = QuantizerConfig::new(q, 1.0 / 6.0, l_max).unwrap();
        let mut brute = 0.0;
        for n in (1..=10_000i64).rev() {
            let e = n as f64 - dequantize(quantize_hard(n as f64, &cfg), &cfg);
            brute += 2.0 * e * e * m.pmf(n);
        }
        let closed = distortion(&m, &cfg).total;
        assert!((closed - brute).abs() / brute <= 0.05, "{closed} vs {brute}");
    }

    #[test]
    fn coarse_quantizer_distorts_more() {
        let m = CompositeCauchyModel::new(4.0, 0.3).unwrap();
        let fine = QuantizerConfig::new(1.0, 1.0 / 6.0, DEFAULT_L_MAX).unwrap();
        let coarse = QuantizerConfig::new(64.0, 1.0 / 6.0, DEFAULT_L_MAX).unwrap();
        assert!(distortion(&m, &fine).total < distortion(&m, &coarse).total);
    }
}
