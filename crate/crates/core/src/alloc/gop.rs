use std::collections::BTreeMap;

use super::ClipTable;
use crate::rd::N_CANDIDATES;
use crate::{Error, Result};

/// What the allocator needs to know about one frame of the GOP, listed in
/// coding order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAllocInput {
    pub level: u8,
    pub kappa: f64,
    pub candidates: [i32; N_CANDIDATES],
    pub q_steps: [f64; N_CANDIDATES],
    /// Predicted bits per pixel at each candidate.
    pub r_hat: [f64; N_CANDIDATES],
    /// Surrogate slope `|D'/R'|` at each candidate; `None` if the frame's
    /// surrogates are unusable.
    pub lambdas: Option<[f64; N_CANDIDATES]>,
    pub is_anchor: bool,
}

/// Clip table with the last coded QP of each level before this GOP.
#[derive(Debug, Clone, PartialEq)]
pub struct QpClip<'a> {
    pub table: &'a ClipTable,
    pub prev_qps: BTreeMap<u8, i32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannedFrame {
    pub qp: i32,
    pub q_step: f64,
    /// The frame's own surrogate slope at the selected candidate.
    pub lambda: f64,
    pub target_bpp: f64,
    /// 0-based index of the selected candidate.
    pub candidate_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GopPlan {
    pub frames: Vec<PlannedFrame>,
    pub gop_lambda: f64,
    /// 1-based index of the selected candidate list.
    pub chosen_list_index: usize,
}

const MIDDLE: usize = N_CANDIDATES / 2;

/// First index minimising `key`.
fn argmin_by<F: Fn(usize) -> f64>(n: usize, key: F) -> usize {
    let mut best = 0;
    let mut best_v = key(0);
    for k in 1..n {
        let v = key(k);
        if v < best_v {
            best = k;
            best_v = v;
        }
    }
    best
}

/// Per-frame candidate picked for a GOP-wide lambda.
fn select_list(frames: &[FrameAllocInput], gop_lambda: f64) -> Vec<usize> {
    frames
        .iter()
        .map(|f| match &f.lambdas {
            Some(l) => argmin_by(N_CANDIDATES, |u| (f.kappa * l[u] - gop_lambda).abs()),
            None => MIDDLE,
        })
        .collect()
}

/// Frame-level bit allocation over one GOP.
///
/// For each anchor candidate `v` the GOP lambda is `kappa_j * lambda_j[v]`;
/// every frame then takes the candidate whose `kappa_i * lambda_i[u]` is
/// closest to it. The list whose summed predicted rate is closest to
/// `budget_bpp_sum` wins, and its QPs are clipped in coding order. Frames
/// without usable surrogates keep their middle candidate. If the anchor has
/// no usable surrogate the usable frame with the largest `kappa` stands in.
pub fn allocate_gop(
    frames: &[FrameAllocInput],
    budget_bpp_sum: f64,
    clip: Option<QpClip<'_>>,
) -> Result<GopPlan> {
    if frames.is_empty() {
        return Err(Error::EmptyGop);
    }
    let anchors = frames.iter().filter(|f| f.is_anchor).count();
    if anchors != 1 {
        return Err(Error::domain(format!(
            "a GOP needs exactly one anchor frame, found {anchors}"
        )));
    }
    let anchor = frames
        .iter()
        .position(|f| f.is_anchor && f.lambdas.is_some())
        .or_else(|| {
            let usable: Vec<usize> = (0..frames.len()).filter(|&i| frames[i].lambdas.is_some()).collect();
            usable
                .iter()
                .copied()
                .reduce(|a, b| if frames[b].kappa > frames[a].kappa { b } else { a })
        })
        .ok_or(Error::NoAllocatableFrames)?;
    let anchor_l = frames[anchor].lambdas.expect("anchor has lambdas");

    let mut lists = Vec::with_capacity(N_CANDIDATES);
    let mut gop_lambdas = [0.0; N_CANDIDATES];
    let mut gaps = [0.0; N_CANDIDATES];
    for v in 0..N_CANDIDATES {
        let gl = frames[anchor].kappa * anchor_l[v];
        let list = select_list(frames, gl);
        let total: f64 = list.iter().zip(frames).map(|(&u, f)| f.r_hat[u]).sum();
        gop_lambdas[v] = gl;
        gaps[v] = (total - budget_bpp_sum).abs();
        lists.push(list);
    }
    let v_o = argmin_by(N_CANDIDATES, |v| gaps[v]);

    let mut prev = clip.as_ref().map(|c| c.prev_qps.clone()).unwrap_or_default();
    let planned = lists[v_o]
        .iter()
        .zip(frames)
        .map(|(&u, f)| {
            let mut qp = f.candidates[u];
            if let Some(c) = &clip {
                qp = c.table.clip_qp(qp, f.level, &prev);
                prev.insert(f.level, qp);
            }
            let q_step = match f.candidates.iter().position(|&c| c == qp) {
                Some(k) => f.q_steps[k],
                None => crate::quant::qp_to_qstep(qp)?,
            };
            Ok(PlannedFrame {
                qp,
                q_step,
                lambda: f.lambdas.map_or(f64::NAN, |l| l[u]),
                target_bpp: f.r_hat[u],
                candidate_index: u,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GopPlan {
        frames: planned,
        gop_lambda: gop_lambdas[v_o],
        chosen_list_index: v_o + 1,
    })
}
