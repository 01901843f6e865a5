use crate::{Error, Result};

/// Sequence budget split evenly over GOPs, with a sliding-window correction
/// that spreads any over- or underspend over the next `window` GOPs.
#[derive(Debug, Clone, PartialEq)]
pub struct GopBudget {
    pub r_seq_target: f64,
    pub n_gop: usize,
    pub r_gop_nominal: f64,
    pub window: usize,
    pub bits_spent: f64,
    pub frames_coded: usize,
    pub gops_coded: usize,
}

/// Smallest GOP target as a fraction of the nominal share.
pub const MIN_TARGET_FRACTION: f64 = 0.1;

impl GopBudget {
    pub fn new(r_seq_target: f64, n_gop: usize, window: usize) -> Result<Self> {
        if n_gop == 0 {
            return Err(Error::Config("a budget needs at least one GOP".into()));
        }
        if window == 0 {
            return Err(Error::Config("sliding window must be at least 1".into()));
        }
        if !(r_seq_target > 0.0) || !r_seq_target.is_finite() {
            return Err(Error::Config(format!(
                "sequence target must be positive, got {r_seq_target}"
            )));
        }
        Ok(Self {
            r_seq_target,
            n_gop,
            r_gop_nominal: r_seq_target / n_gop as f64,
            window,
            bits_spent: 0.0,
            frames_coded: 0,
            gops_coded: 0,
        })
    }

    /// `R_gop - (R_cost - R_gop * N_coded_gops) / N_SW`, floored at 10% of
    /// the nominal share.
    pub fn gop_target(&self) -> f64 {
        let deficit = self.bits_spent - self.r_gop_nominal * self.gops_coded as f64;
        let t = self.r_gop_nominal - deficit / self.window as f64;
        t.max(MIN_TARGET_FRACTION * self.r_gop_nominal)
    }

    pub fn record_frame(&mut self, bits: f64) {
        self.bits_spent += bits;
        self.frames_coded += 1;
    }

    pub fn finish_gop(&mut self) {
        self.gops_coded += 1;
    }

    pub fn remaining_gops(&self) -> usize {
        self.n_gop.saturating_sub(self.gops_coded)
    }
}
