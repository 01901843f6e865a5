use super::{fit_hyperbolic, lambda_at, DistortionModel, FrameCalibration, HyperbolicFit, RateModel};
use crate::coeff::CompositeCauchyModel;
use crate::quant::{distortion, entropy, qp_to_qstep, QuantizerConfig, SliceType, MAX_QP, MIN_QP};
use crate::Result;

pub const N_CANDIDATES: usize = 7;

/// Seven consecutive QPs centred on `center`, shifted as a block to stay
/// inside the legal QP range.
pub fn candidate_qps(center: i32) -> [i32; N_CANDIDATES] {
    let half = (N_CANDIDATES / 2) as i32;
    let lo = (center - half).clamp(MIN_QP, MAX_QP - 2 * half);
    std::array::from_fn(|k| lo + k as i32)
}

/// Calibrated rate and distortion predictors of one frame evaluated on its
/// QP candidate grid, with hyperbolic surrogates fitted to those points.
#[derive(Debug, Clone)]
pub struct RdSurrogate {
    pub candidates: [i32; N_CANDIDATES],
    pub q_steps: [f64; N_CANDIDATES],
    pub r_hat: [f64; N_CANDIDATES],
    pub d_hat: [f64; N_CANDIDATES],
    /// `None` when the predicted points cannot support a power-law fit.
    pub r_fit: Option<HyperbolicFit>,
    pub d_fit: Option<HyperbolicFit>,
    model: CompositeCauchyModel,
    gamma: f64,
    l_max: u32,
    rate: RateModel,
    dist: DistortionModel,
}

impl RdSurrogate {
    pub fn build(
        model: &CompositeCauchyModel,
        slice: SliceType,
        cal: &FrameCalibration,
        qp_center: i32,
    ) -> Result<Self> {
        let base = QuantizerConfig::for_slice(cal.q_prev, slice)?;
        let rate = RateModel::calibrate(cal, entropy(model, &base).entropy_bits)?;
        let dist = DistortionModel::calibrate(cal, distortion(model, &base).total)?;
        let candidates = candidate_qps(qp_center);
        let mut q_steps = [0.0; N_CANDIDATES];
        let mut r_hat = [0.0; N_CANDIDATES];
        let mut d_hat = [0.0; N_CANDIDATES];
        for (k, &qp) in candidates.iter().enumerate() {
            let cfg = base.with_q_step(qp_to_qstep(qp)?)?;
            q_steps[k] = cfg.q_step();
            r_hat[k] = rate.predict(entropy(model, &cfg).entropy_bits);
            d_hat[k] = dist.predict(distortion(model, &cfg).total);
        }
        let r_pts: Vec<(f64, f64)> = q_steps.iter().copied().zip(r_hat).collect();
        let d_pts: Vec<(f64, f64)> = q_steps.iter().copied().zip(d_hat).collect();
        Ok(Self {
            candidates,
            q_steps,
            r_hat,
            d_hat,
            r_fit: fit_hyperbolic(&r_pts).ok(),
            d_fit: fit_hyperbolic(&d_pts).ok(),
            model: *model,
            gamma: base.gamma(),
            l_max: base.l_max(),
            rate,
            dist,
        })
    }

    fn cfg(&self, q: f64) -> Result<QuantizerConfig> {
        QuantizerConfig::new(q, self.gamma, self.l_max)
    }

    /// Calibrated rate prediction at any step size.
    pub fn rate_at(&self, q: f64) -> Result<f64> {
        Ok(self.rate.predict(entropy(&self.model, &self.cfg(q)?).entropy_bits))
    }

    /// Calibrated distortion prediction at any step size.
    pub fn distortion_at(&self, q: f64) -> Result<f64> {
        Ok(self.dist.predict(distortion(&self.model, &self.cfg(q)?).total))
    }

    /// True when the predicted rate does not change across the grid, so it
    /// cannot discriminate between candidates.
    pub fn rate_is_flat(&self) -> bool {
        self.r_hat.iter().all(|&r| r == self.r_hat[0])
    }

    /// Surrogate slopes `|D'/R'|` on the candidate grid, `None` when a fit is
    /// missing or flat.
    pub fn lambdas(&self) -> Option<[f64; N_CANDIDATES]> {
        let (r, d) = (self.r_fit.as_ref()?, self.d_fit.as_ref()?);
        let mut out = [0.0; N_CANDIDATES];
        for (k, &q) in self.q_steps.iter().enumerate() {
            let l = lambda_at(q, r, d).ok()?;
            if !(l > 0.0) {
                return None;
            }
            out[k] = l;
        }
        Some(out)
    }

    pub fn model(&self) -> &CompositeCauchyModel {
        &self.model
    }
}

/// One candidate row of a frame's surrogate, for trace export.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelTraceRow {
    pub poc: usize,
    pub level: u8,
    pub qp_candidate: i32,
    pub r_hat: f64,
    pub d_hat: f64,
    pub lambda: f64,
}

impl ModelTraceRow {
    pub fn rows(poc: usize, level: u8, s: &RdSurrogate) -> Vec<Self> {
        let lambdas = s.lambdas();
        (0..N_CANDIDATES)
            .map(|k| Self {
                poc,
                level,
                qp_candidate: s.candidates[k],
                r_hat: s.r_hat[k],
                d_hat: s.d_hat[k],
                lambda: lambdas.map_or(f64::NAN, |l| l[k]),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cal(q: f64) -> FrameCalibration {
        FrameCalibration {
            r_prev: 0.4,
            header_prev: 0.01,
            q_prev: q,
            d_prev_nonskip: 20.0,
            skip_ratio_prev: 0.1,
            d_prev_skip: 4.0,
            d_prev_ref: 15.0,
        }
    }

    #[test]
    fn candidate_window() {
        assert_eq!(candidate_qps(30), [27, 28, 29, 30, 31, 32, 33]);
        assert_eq!(candidate_qps(2), [1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(candidate_qps(51), [45, 46, 47, 48, 49, 50, 51]);
    }

    #[test]
    fn monotone_predictions() {
        let m = CompositeCauchyModel::new(30.0, 0.5).unwrap();
        let s = RdSurrogate::build(&m, SliceType::B, &cal(qp_to_qstep(32).unwrap()), 32).unwrap();
        for k in 1..N_CANDIDATES {
            assert!(s.r_hat[k] <= s.r_hat[k - 1]);
            assert!(s.d_hat[k] >= s.d_hat[k - 1]);
        }
        let r = s.r_fit.unwrap();
        let d = s.d_fit.unwrap();
        assert!(r.exponent > 0.0 && d.exponent < 0.0);
        for k in 0..N_CANDIDATES {
            assert!((r.eval(s.q_steps[k]) - s.r_hat[k]).abs() / s.r_hat[k] <= 0.03);
            assert!((d.eval(s.q_steps[k]) - s.d_hat[k]).abs() / s.d_hat[k] <= 0.03);
        }
        let l = s.lambdas().unwrap();
        assert!(l.iter().all(|&x| x > 0.0));
        assert_eq!(s.r_hat[3], 0.4);
    }

    #[test]
    fn rate_at_grid_matches() {
        let m = CompositeCauchyModel::new(8.0, 0.6).unwrap();
        let s = RdSurrogate::build(&m, SliceType::I, &cal(8.0), 22).unwrap();
        for k in 0..N_CANDIDATES {
            assert_eq!(s.rate_at(s.q_steps[k]).unwrap(), s.r_hat[k]);
            assert_eq!(s.distortion_at(s.q_steps[k]).unwrap(), s.d_hat[k]);
        }
        assert_eq!(ModelTraceRow::rows(3, 2, &s).len(), N_CANDIDATES);
    }
}
