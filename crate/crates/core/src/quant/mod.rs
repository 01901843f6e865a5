//! Hard-decision quantization and the model-based entropy and distortion it
//! induces.

mod distortion;
mod prob;

pub use distortion::{distortion, DistortionProfile};
pub use prob::{
    entropy, entropy_with, level_prob_integral, level_prob_sum, level_probs, EntropyProfile,
    ProbabilityPath,
};

use serde::{Deserialize, Serialize};

use crate::coeff::CompositeCauchyModel;
use crate::{Error, Result};

pub const DEFAULT_L_MAX: u32 = 255;
pub const MIN_QP: i32 = 1;
pub const MAX_QP: i32 = 51;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SliceType {
    I,
    B,
}

impl SliceType {
    /// Rounding offset of the hard quantizer for this slice type.
    pub fn rounding_offset(self) -> f64 {
        match self {
            SliceType::I => 1.0 / 3.0,
            SliceType::B => 1.0 / 6.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SliceType::I => "I",
            SliceType::B => "B",
        }
    }
}

impl std::str::FromStr for SliceType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" => Ok(SliceType::I),
            "B" | "b" | "P" | "p" => Ok(SliceType::B),
            other => Err(Error::Config(format!("unknown slice type {other:?}"))),
        }
    }
}

/// Step size, rounding offset and maximum level of a dead-zone quantizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerConfig {
    q_step: f64,
    gamma: f64,
    l_max: u32,
}

impl QuantizerConfig {
    pub fn new(q_step: f64, gamma: f64, l_max: u32) -> Result<Self> {
        if !(q_step > 0.0) || !q_step.is_finite() {
            return Err(Error::domain(format!("q_step must be positive, got {q_step}")));
        }
        if !(0.0..0.5).contains(&gamma) {
            return Err(Error::domain(format!("gamma must lie in [0, 0.5), got {gamma}")));
        }
        if l_max == 0 {
            return Err(Error::domain("l_max must be at least 1"));
        }
        Ok(Self {
            q_step,
            gamma,
            l_max,
        })
    }

    pub fn for_slice(q_step: f64, slice: SliceType) -> Result<Self> {
        Self::new(q_step, slice.rounding_offset(), DEFAULT_L_MAX)
    }

    pub fn from_qp(qp: i32, slice: SliceType) -> Result<Self> {
        Self::for_slice(qp_to_qstep(qp)?, slice)
    }

    pub fn with_q_step(self, q_step: f64) -> Result<Self> {
        Self::new(q_step, self.gamma, self.l_max)
    }

    pub fn with_l_max(self, l_max: u32) -> Result<Self> {
        Self::new(self.q_step, self.gamma, l_max)
    }

    pub fn q_step(&self) -> f64 {
        self.q_step
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    // Magnitude level before clamping.
    #[inline]
    fn raw_magnitude(&self, magnitude: f64) -> f64 {
        (magnitude / self.q_step + self.gamma).floor()
    }

    /// Smallest non-negative integer coefficient whose unclamped level is at
    /// least `level`.
    pub(crate) fn level_start(&self, level: u32) -> u64 {
        if level == 0 {
            return 0;
        }
        let target = level as f64;
        let mut n = ((target - self.gamma) * self.q_step).ceil().max(0.0) as u64;
        while n > 0 && self.raw_magnitude((n - 1) as f64) >= target {
            n -= 1;
        }
        while self.raw_magnitude(n as f64) < target {
            n += 1;
        }
        n
    }
}

/// `sign(c) * floor(|c| / Q + gamma)`, clamped to `[-l_max, l_max]`.
#[inline]
pub fn quantize_hard(c: f64, cfg: &QuantizerConfig) -> i64 {
    let m = cfg.raw_magnitude(c.abs()).min(cfg.l_max as f64) as i64;
    if c < 0.0 {
        -m
    } else {
        m
    }
}

#[inline]
pub fn dequantize(level: i64, cfg: &QuantizerConfig) -> f64 {
    level as f64 * cfg.q_step
}

/// `Q = 2^((qp - 4) / 6)` for `qp` in `[1, 51]`.
pub fn qp_to_qstep(qp: i32) -> Result<f64> {
    if !(MIN_QP..=MAX_QP).contains(&qp) {
        return Err(Error::domain(format!("qp {qp} outside [{MIN_QP}, {MAX_QP}]")));
    }
    Ok(2f64.powf((qp - 4) as f64 / 6.0))
}

/// `QP = 4.2005 * ln(lambda) + 13.7122`, unclamped.
pub fn qp_from_lambda(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!("lambda must be positive, got {lambda}")));
    }
    Ok(4.2005 * lambda.ln() + 13.7122)
}

/// Inverse of [`qp_from_lambda`].
pub fn lambda_from_qp(qp: f64) -> f64 {
    ((qp - 13.7122) / 4.2005).exp()
}

/// One row of a model R-Q / D-Q curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdCurvePoint {
    pub qp: i32,
    pub q_step: f64,
    pub entropy_bits: f64,
    pub distortion: f64,
}

/// Entropy and distortion of `model` at each QP, in the order given.
pub fn rd_curve(
    model: &CompositeCauchyModel,
    qps: &[i32],
    slice: SliceType,
    path: ProbabilityPath,
) -> Result<Vec<RdCurvePoint>> {
    qps.iter()
        .map(|&qp| {
            let cfg = QuantizerConfig::from_qp(qp, slice)?;
            Ok(RdCurvePoint {
                qp,
                q_step: cfg.q_step(),
                entropy_bits: entropy_with(model, &cfg, path).entropy_bits,
                distortion: distortion(model, &cfg).total,
            })
        })
        .collect()
}
