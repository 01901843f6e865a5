use std::ops::RangeInclusive;

use super::{Encoder, EncoderParams, Frame};
use crate::alloc::{estimate_pi, fit_line};
use crate::quant::{lambda_from_qp, SliceType};
use crate::{Error, Result};

/// Averages over the probed frame pairs for one reference QP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub ref_qp: i32,
    pub ref_mse: f64,
    pub cur_bits: f64,
    pub cur_mse: f64,
    /// `cur_mse + lambda(probe_qp) * cur_bpp`
    pub cur_rd_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub probe_qp: i32,
    pub rows: Vec<ProbeRow>,
    /// Slope of cost against reference distortion, floored at zero; `None`
    /// when the rows carry no slope information.
    pub pi: Option<f64>,
    pub r_squared: Option<f64>,
}

/// Frame pairs used by the probe.
pub const PROBE_PAIRS: usize = 8;

/// Codes frame `k` as an I frame at every QP of `ref_qps` and frame `k + 1`
/// as a B frame at `probe_qp` predicted from it, for the first few pairs.
pub fn dependency_probe(
    frames: &[Frame],
    params: &EncoderParams,
    probe_qp: i32,
    ref_qps: RangeInclusive<i32>,
) -> Result<ProbeResult> {
    if frames.len() < 2 {
        return Err(Error::Config("the probe needs at least two frames".into()));
    }
    if ref_qps.is_empty() {
        return Err(Error::Config("empty reference QP range".into()));
    }
    let enc = Encoder::new(*params);
    let pairs = (frames.len() - 1).min(PROBE_PAIRS);
    let lambda = lambda_from_qp(probe_qp as f64);
    let mut rows = Vec::new();
    for ref_qp in ref_qps {
        let (mut rm, mut cb, mut cm, mut cj) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..pairs {
            let (rrec, rrecon) = enc.encode(&frames[k], &[], ref_qp, SliceType::I)?;
            let (crec, _) = enc.encode(&frames[k + 1], &[&rrecon], probe_qp, SliceType::B)?;
            rm += rrec.mse;
            cb += crec.bits;
            cm += crec.mse;
            cj += crec.mse + lambda * crec.bpp();
        }
        let p = pairs as f64;
        rows.push(ProbeRow {
            ref_qp,
            ref_mse: rm / p,
            cur_bits: cb / p,
            cur_mse: cm / p,
            cur_rd_cost: cj / p,
        });
    }
    let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.ref_mse, r.cur_rd_cost)).collect();
    let (pi, r_squared) = match fit_line(&samples) {
        Ok(fit) => (Some(estimate_pi(&samples)?), Some(fit.r_squared)),
        Err(_) => (None, None),
    };
    Ok(ProbeResult {
        probe_qp,
        rows,
        pi,
        r_squared,
    })
}
