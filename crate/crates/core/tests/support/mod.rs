//! Brute-force reference for the frame-level allocator and a generator of
//! random GOPs for it. Values live on a dyadic grid so every sum is exact and
//! ties are real ties.

#![allow(dead_code)]

use cauchy_rc::alloc::{ClipTable, FrameAllocInput, QpClip};
use cauchy_rc::quant::qp_to_qstep;
use cauchy_rc::rd::{candidate_qps, N_CANDIDATES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct OraclePlan {
    pub qps: Vec<i32>,
    /// 1-based index of the winning candidate list.
    pub v_o: usize,
}

fn anchor_index(frames: &[FrameAllocInput]) -> usize {
    if let Some(a) = frames.iter().position(|f| f.is_anchor && f.lambdas.is_some()) {
        return a;
    }
    let mut best: Option<usize> = None;
    for (i, f) in frames.iter().enumerate() {
        if f.lambdas.is_some() && best.is_none_or(|b| f.kappa > frames[b].kappa) {
            best = Some(i);
        }
    }
    best.expect("some frame has lambdas")
}

/// Every candidate list for every anchor candidate, scored exhaustively.
pub fn oracle_allocate(frames: &[FrameAllocInput], budget: f64, clip: Option<(&ClipTable, &std::collections::BTreeMap<u8, i32>)>) -> OraclePlan {
    let n = frames.len();
    let a = anchor_index(frames);
    let anchor_l = frames[a].lambdas.unwrap();
    let lists = N_CANDIDATES.pow(n as u32);
    let mut best_v = 0;
    let mut best_gap = f64::INFINITY;
    let mut best_list = vec![0; n];
    for v in 0..N_CANDIDATES {
        let gl = frames[a].kappa * anchor_l[v];
        // Lexicographic sweep; the first list with the smallest summed
        // deviation wins. Frames without slopes are pinned to the middle.
        let mut chosen = vec![0; n];
        let mut chosen_dev = f64::INFINITY;
        'lists: for code in 0..lists {
            let mut rest = code;
            let mut list = vec![0; n];
            for i in (0..n).rev() {
                list[i] = rest % N_CANDIDATES;
                rest /= N_CANDIDATES;
            }
            let mut dev = 0.0;
            for (i, f) in frames.iter().enumerate() {
                match f.lambdas {
                    Some(l) => dev += (f.kappa * l[list[i]] - gl).abs(),
                    None if list[i] != N_CANDIDATES / 2 => continue 'lists,
                    None => {}
                }
            }
            if dev < chosen_dev {
                chosen_dev = dev;
                chosen = list;
            }
        }
        let total: f64 = chosen.iter().zip(frames).map(|(&u, f)| f.r_hat[u]).sum();
        let gap = (total - budget).abs();
        if gap < best_gap {
            best_gap = gap;
            best_v = v;
            best_list = chosen;
        }
    }
    let mut prev = clip.map(|c| c.1.clone()).unwrap_or_default();
    let qps = best_list
        .iter()
        .zip(frames)
        .map(|(&u, f)| {
            let mut qp = f.candidates[u];
            if let Some((table, _)) = clip {
                qp = table.clip_qp(qp, f.level, &prev);
                prev.insert(f.level, qp);
            }
            qp
        })
        .collect();
    OraclePlan { qps, v_o: best_v + 1 }
}

fn grid(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> f64 {
    rng.random_range(lo..=hi) as f64 / 4.0
}

/// Random GOP of 1..=`max_len` frames with one anchor, plus a budget in the
/// range the predicted rates span.
pub fn random_gop(seed: u64, max_len: usize) -> (Vec<FrameAllocInput>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_len);
    let anchor = rng.random_range(0..n);
    let frames: Vec<FrameAllocInput> = (0..n)
        .map(|i| {
            let candidates = candidate_qps(rng.random_range(10..=45));
            let mut q_steps = [0.0; N_CANDIDATES];
            for k in 0..N_CANDIDATES {
                q_steps[k] = qp_to_qstep(candidates[k]).unwrap();
            }
            let mut r_hat = [0.0; N_CANDIDATES];
            let mut r = grid(&mut rng, 8, 40);
            for v in r_hat.iter_mut() {
                *v = r;
                r = (r - grid(&mut rng, 0, 4)).max(0.25);
            }
            let lambdas = if i != anchor && rng.random_bool(0.1) {
                None
            } else {
                let mut l = [0.0; N_CANDIDATES];
                let mut x = grid(&mut rng, 1, 40);
                for v in l.iter_mut() {
                    *v = x;
                    // Mostly increasing, occasionally flat or dipping.
                    x = (x + grid(&mut rng, 0, 40) - 2.0).max(0.25);
                }
                Some(l)
            };
            FrameAllocInput {
                level: rng.random_range(1..=3),
                kappa: grid(&mut rng, 4, 24),
                candidates,
                q_steps,
                r_hat,
                lambdas,
                is_anchor: i == anchor,
            }
        })
        .collect();
    let lo: f64 = frames.iter().map(|f| f.r_hat[N_CANDIDATES - 1]).sum();
    let hi: f64 = frames.iter().map(|f| f.r_hat[0]).sum();
    let budget = lo + (hi - lo) * rng.random_range(0..=16) as f64 / 16.0;
    (frames, budget)
}

pub fn low_delay_clip(prev: &std::collections::BTreeMap<u8, i32>) -> QpClip<'static> {
    static TABLE: std::sync::OnceLock<ClipTable> = std::sync::OnceLock::new();
    QpClip {
        table: TABLE.get_or_init(ClipTable::low_delay),
        prev_qps: prev.clone(),
    }
}
