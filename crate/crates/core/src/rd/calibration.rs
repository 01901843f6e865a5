use crate::coeff::CompositeCauchyModel;
use crate::quant::{distortion, entropy, QuantizerConfig};
use crate::{Error, Result};

/// Statistics of the most recent coded frame at the same temporal level.
///
/// Rates are in bits per pixel, distortions are per-pixel MSE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameCalibration {
    pub r_prev: f64,
    pub header_prev: f64,
    pub q_prev: f64,
    pub d_prev_nonskip: f64,
    pub skip_ratio_prev: f64,
    pub d_prev_skip: f64,
    pub d_prev_ref: f64,
}

impl FrameCalibration {
    pub fn validate(&self) -> Result<()> {
        if !(self.header_prev >= 0.0 && self.r_prev >= self.header_prev) {
            return Err(Error::domain(format!(
                "calibration needs r_prev >= header_prev >= 0, got {} and {}",
                self.r_prev, self.header_prev
            )));
        }
        if !(0.0..=1.0).contains(&self.skip_ratio_prev) {
            return Err(Error::domain(format!(
                "skip ratio {} outside [0, 1]",
                self.skip_ratio_prev
            )));
        }
        if !(self.q_prev > 0.0) || !self.q_prev.is_finite() {
            return Err(Error::domain(format!("q_prev must be positive, got {}", self.q_prev)));
        }
        if self.d_prev_nonskip < 0.0 || self.d_prev_skip < 0.0 {
            return Err(Error::domain("negative calibration distortion"));
        }
        Ok(())
    }
}

/// `R(Q) = phi * H(Q) + psi` anchored on the previous frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateModel {
    pub phi: f64,
    pub psi: f64,
    h_prev: f64,
    r_prev: f64,
}

impl RateModel {
    /// `phi = (R_p - r_p^h) / H(Q_p)`, `psi = r_p^h`.
    pub fn calibrate(cal: &FrameCalibration, h_prev: f64) -> Result<Self> {
        cal.validate()?;
        if !(h_prev > 0.0) {
            return Err(Error::CalibrationDegenerate);
        }
        Ok(Self {
            phi: (cal.r_prev - cal.header_prev) / h_prev,
            psi: cal.header_prev,
            h_prev,
            r_prev: cal.r_prev,
        })
    }

    pub fn predict(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return self.psi;
        }
        // Same line as phi * h + psi, written around the anchor so that the
        // previous frame's entropy maps back to its rate bit for bit.
        (self.r_prev + self.phi * (h - self.h_prev)).max(self.psi)
    }
}

/// Previous-frame scaling of the model distortion mixed with the SKIP
/// distortion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionModel {
    pub d_nonskip: f64,
    pub d_model_prev: f64,
    pub skip_ratio: f64,
    pub d_skip: f64,
}

impl DistortionModel {
    pub fn calibrate(cal: &FrameCalibration, d_model_prev: f64) -> Result<Self> {
        cal.validate()?;
        if !(d_model_prev > 0.0) {
            return Err(Error::CalibrationDegenerate);
        }
        Ok(Self {
            d_nonskip: cal.d_prev_nonskip,
            d_model_prev,
            skip_ratio: cal.skip_ratio_prev,
            d_skip: cal.d_prev_skip,
        })
    }

    /// `(D_ns / D(Q_p)) * D(Q) * (1 - P_s) + P_s * D_s`
    pub fn predict(&self, d_model: f64) -> f64 {
        self.d_nonskip * (d_model / self.d_model_prev) * (1.0 - self.skip_ratio)
            + self.skip_ratio * self.d_skip
    }
}

/// Predicted bits per pixel of the frame at `cfg`.
pub fn estimate_rate(
    model: &CompositeCauchyModel,
    cfg: &QuantizerConfig,
    cal: &FrameCalibration,
) -> Result<f64> {
    let prev = cfg.with_q_step(cal.q_prev)?;
    let rm = RateModel::calibrate(cal, entropy(model, &prev).entropy_bits)?;
    Ok(rm.predict(entropy(model, cfg).entropy_bits))
}

/// Predicted per-pixel MSE of the frame at `cfg`.
pub fn estimate_distortion(
    model: &CompositeCauchyModel,
    cfg: &QuantizerConfig,
    cal: &FrameCalibration,
) -> Result<f64> {
    let prev = cfg.with_q_step(cal.q_prev)?;
    let dm = DistortionModel::calibrate(cal, distortion(model, &prev).total)?;
    Ok(dm.predict(distortion(model, cfg).total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cal() -> FrameCalibration {
        FrameCalibration {
            r_prev: 0.20,
            header_prev: 0.02,
            q_prev: 8.0,
            d_prev_nonskip: 100.0,
            skip_ratio_prev: 0.25,
            d_prev_skip: 40.0,
            d_prev_ref: 30.0,
        }
    }

    #[test]
    fn rate_linear_form() {
        let rm = RateModel::calibrate(&cal(), 1.2).unwrap();
        assert!((rm.predict(0.6) - 0.11).abs() < 1e-12);
        assert_eq!(rm.predict(0.0), 0.02);
        assert_eq!(rm.predict(1.2), 0.20);
    }

    #[test]
    fn distortion_mixture() {
        let dm = DistortionModel::calibrate(&cal(), 50.0).unwrap();
        assert!((dm.predict(80.0) - 130.0).abs() < 1e-12);
        let mut c = cal();
        c.skip_ratio_prev = 1.0;
        let dm = DistortionModel::calibrate(&c, 50.0).unwrap();
        assert_eq!(dm.predict(1.0), 40.0);
        assert_eq!(dm.predict(1e6), 40.0);
    }

    #[test]
    fn degenerate_calibration() {
        assert!(matches!(
            RateModel::calibrate(&cal(), 0.0),
            Err(Error::CalibrationDegenerate)
        ));
        assert!(matches!(
            DistortionModel::calibrate(&cal(), 0.0),
            Err(Error::CalibrationDegenerate)
        ));
        let m = CompositeCauchyModel::all_zero();
        let cfg = QuantizerConfig::new(8.0, 1.0 / 6.0, 255).unwrap();
        assert!(estimate_rate(&m, &cfg, &cal()).is_err());
    }

    #[test]
    fn invalid_calibration() {
        let mut c = cal();
        c.header_prev = 0.3;
        assert!(c.validate().is_err());
        let mut c = cal();
        c.skip_ratio_prev = 1.5;
        assert!(c.validate().is_err());
        let mut c = cal();
        c.q_prev = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn fixed_points() {
        let m = CompositeCauchyModel::new(6.0, 0.4).unwrap();
        let mut c = cal();
        c.skip_ratio_prev = 0.0;
        let cfg = QuantizerConfig::new(c.q_prev, 1.0 / 6.0, 255).unwrap();
        assert_eq!(estimate_rate(&m, &cfg, &c).unwrap(), c.r_prev);
        assert_eq!(estimate_distortion(&m, &cfg, &c).unwrap(), c.d_prev_nonskip);
    }
}
