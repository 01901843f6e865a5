use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{coding_order, CodedFrame, Encoder, GopKind, EncoderParams, Frame, SequenceConfig, SimFrameRecord};
use crate::alloc::{
    allocate_gop, estimate_pi, influence_factor, DependencyGraph, FrameAllocInput, FrameSlot, GopBudget,
    QpClip,
};
use crate::coeff::{fit_composite_cauchy, BetaGrid, CompositeCauchyModel};
use crate::quant::{lambda_from_qp, qp_from_lambda, qp_to_qstep, SliceType, MAX_QP, MIN_QP};
use crate::rd::{
    stabilize_lambda, FrameCalibration, LambdaState, ModelTraceRow, RdSurrogate,
};
use crate::{Error, Result};

/// How a sequence is coded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RunMode {
    FixedQp { qp: i32 },
    /// Fixed-ratio allocation with per-level R-lambda models.
    DefaultRc { target_bps: f64 },
    /// Model-based allocation and QP selection.
    ProposedRc { target_bps: f64 },
}

impl RunMode {
    pub fn name(&self) -> &'static str {
        match self {
            RunMode::FixedQp { .. } => "fixed_qp",
            RunMode::DefaultRc { .. } => "default_rc",
            RunMode::ProposedRc { .. } => "proposed_rc",
        }
    }

    pub fn target_bps(&self) -> Option<f64> {
        match *self {
            RunMode::FixedQp { .. } => None,
            RunMode::DefaultRc { target_bps } | RunMode::ProposedRc { target_bps } => Some(target_bps),
        }
    }
}

/// Tunables of the control loop.
#[derive(Debug, Clone, PartialEq)]
pub struct RcParams {
    pub encoder: EncoderParams,
    /// Target of the leading I frame relative to the average frame share.
    pub i_ratio: f64,
    /// Frames coded with the fixed-ratio split before adaptive allocation.
    pub warmup_frames: usize,
    /// Sliding-window length in frames; converted to GOPs.
    pub window_frames: usize,
    /// Re-estimate influence factors from coded frames instead of tables.
    pub online_pi: bool,
    pub beta_grid: BetaGrid,
}

impl Default for RcParams {
    fn default() -> Self {
        Self {
            encoder: EncoderParams::default(),
            i_ratio: 6.0,
            warmup_frames: 32,
            window_frames: 40,
            online_pi: false,
            beta_grid: BetaGrid::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub mode: String,
    pub target_bps: Option<f64>,
    pub total_bits: f64,
    pub actual_bps: f64,
    pub mean_psnr: f64,
    pub bit_err_pct: Option<f64>,
    pub frames: usize,
}

/// One frame of an allocation plan and its outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanRow {
    pub gop: usize,
    pub poc: usize,
    pub level: u8,
    pub qp: i32,
    pub lambda: f64,
    pub target_bpp: f64,
    pub actual_bpp: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// Per-frame records in coding order.
    pub records: Vec<SimFrameRecord>,
    pub summary: RunSummary,
    pub plan: Vec<PlanRow>,
    pub trace: Vec<ModelTraceRow>,
}

impl RunResult {
    /// Records sorted by POC.
    pub fn records_by_poc(&self) -> Vec<&SimFrameRecord> {
        let mut v: Vec<&SimFrameRecord> = self.records.iter().collect();
        v.sort_by_key(|r| r.poc);
        v
    }
}

// HM-style R-lambda model `lambda = alpha * bpp^beta`.
#[derive(Debug, Clone, Copy)]
struct RLambda {
    alpha: f64,
    beta: f64,
}

const RL_BETA0: f64 = -1.367;

impl RLambda {
    fn from_first(lambda: f64, bpp: f64) -> Self {
        let alpha = (lambda / bpp.max(1e-6).powf(RL_BETA0)).clamp(0.05, 500.0);
        Self {
            alpha,
            beta: RL_BETA0,
        }
    }

    fn lambda(&self, bpp: f64) -> f64 {
        self.alpha * bpp.max(1e-6).powf(self.beta)
    }

    fn update(&mut self, lambda_used: f64, bpp: f64) {
        let bpp = bpp.max(1e-6);
        let cal = self.lambda(bpp);
        let used = lambda_used.clamp(cal / 10.0, cal * 10.0);
        let diff = used.ln() - cal.ln();
        let lnbpp = bpp.ln().clamp(-5.0, -0.1);
        self.alpha = (self.alpha + 0.1 * diff * self.alpha).clamp(0.05, 500.0);
        self.beta = (self.beta + 0.05 * diff * lnbpp).clamp(-3.0, -0.1);
    }
}

// Everything remembered about the last frames of one temporal level.
#[derive(Debug, Clone)]
struct LevelState {
    qp: i32,
    cal: FrameCalibration,
    model: Option<CompositeCauchyModel>,
    lambdas: LambdaState,
    rl: RLambda,
}

struct Loop<'a> {
    frames: &'a [Frame],
    cfg: &'a SequenceConfig,
    params: &'a RcParams,
    encoder: Encoder,
    recon: Vec<Option<Frame>>,
    mse_by_poc: Vec<Option<f64>>,
    levels: HashMap<StateKey, LevelState>,
    last_qp: BTreeMap<u8, i32>,
    records: Vec<SimFrameRecord>,
    plan: Vec<PlanRow>,
    trace: Vec<ModelTraceRow>,
    // (dependent level, reference level) -> (reference mse, dependent cost)
    pi_samples: BTreeMap<(u8, u8), Vec<(f64, f64)>>,
}

// State key: intra frames share the state of the leading I frame. Low-delay
// frames are also split by GOP position, since positions of one level see
// references of different quality.
type StateKey = (u8, usize);

fn state_key(f: &CodedFrame, kind: GopKind) -> StateKey {
    match (f.slice, kind) {
        (SliceType::I, _) => (0, 0),
        (_, GopKind::Ld4) => (f.level, f.position),
        _ => (f.level, 0),
    }
}

fn argmin_abs(values: &[f64], target: f64) -> usize {
    let mut best = 0;
    for k in 1..values.len() {
        if (values[k] - target).abs() < (values[best] - target).abs() {
            best = k;
        }
    }
    best
}

impl<'a> Loop<'a> {
    fn pixels(&self) -> f64 {
        (self.cfg.width * self.cfg.height) as f64
    }

    fn refs(&self, f: &CodedFrame) -> Result<Vec<&Frame>> {
        f.refs
            .iter()
            .map(|&p| self.recon[p].as_ref().ok_or(Error::MissingReference))
            .collect()
    }

    fn encode(&self, f: &CodedFrame, qp: i32) -> Result<(SimFrameRecord, Frame)> {
        let refs = self.refs(f)?;
        self.encoder.encode(&self.frames[f.poc], &refs, qp, f.slice)
    }

    /// QP whose actual bits come closest to `target_bits`, by bisection.
    fn trial_qp(&self, f: &CodedFrame, target_bits: f64, lo: i32, hi: i32) -> Result<i32> {
        let bits = |qp: i32| -> Result<f64> { Ok(self.encode(f, qp)?.0.bits) };
        if bits(hi)? > target_bits {
            return Ok(hi);
        }
        if bits(lo)? <= target_bits {
            return Ok(lo);
        }
        // bits(lo) > target >= bits(hi)
        let (mut a, mut b) = (lo, hi);
        while b - a > 1 {
            let m = (a + b) / 2;
            if bits(m)? <= target_bits {
                b = m;
            } else {
                a = m;
            }
        }
        let (ba, bb) = (bits(a)?, bits(b)?);
        Ok(if (ba - target_bits).abs() < (bb - target_bits).abs() { a } else { b })
    }

    fn calibration(&self, rec: &SimFrameRecord, f: &CodedFrame) -> FrameCalibration {
        let d_ref = f
            .refs
            .first()
            .and_then(|&p| self.mse_by_poc[p])
            .unwrap_or(0.0);
        FrameCalibration {
            r_prev: rec.bpp(),
            header_prev: rec.header_bpp(),
            q_prev: qp_to_qstep(rec.qp).expect("coded QP is valid"),
            d_prev_nonskip: rec.mse_nonskip,
            skip_ratio_prev: rec.skip_ratio,
            d_prev_skip: rec.mse_skip,
            d_prev_ref: d_ref,
        }
    }

    fn surrogate(&self, key: StateKey, slice: SliceType) -> Option<RdSurrogate> {
        let st = self.levels.get(&key)?;
        let model = st.model.as_ref()?;
        RdSurrogate::build(model, slice, &st.cal, st.qp)
            .ok()
            .filter(|s| !s.rate_is_flat())
    }

    fn commit(&mut self, f: &CodedFrame, mut rec: SimFrameRecord, recon: Frame, lambda: f64) {
        rec.poc = f.poc;
        rec.level = f.level;
        rec.lambda = lambda;
        let key = self.key(f);
        if f.slice != SliceType::I {
            self.last_qp.insert(f.level, rec.qp);
        }
        let cal = self.calibration(&rec, f);
        let fitted = rec
            .coeff_histogram
            .as_ref()
            .and_then(|h| fit_composite_cauchy(h, &self.params.beta_grid).ok());
        let q = qp_to_qstep(rec.qp).expect("coded QP is valid");
        match self.levels.get_mut(&key) {
            Some(st) => {
                st.qp = rec.qp;
                st.cal = cal;
                if fitted.is_some() {
                    st.model = fitted;
                }
                st.lambdas.push(q, lambda);
                st.rl.update(lambda, rec.bpp());
            }
            None => {
                let mut lambdas = LambdaState::new();
                lambdas.push(q, lambda);
                self.levels.insert(
                    key,
                    LevelState {
                        qp: rec.qp,
                        cal,
                        model: fitted,
                        lambdas,
                        rl: RLambda::from_first(lambda, rec.bpp()),
                    },
                );
            }
        }
        if self.params.online_pi && f.slice == SliceType::B {
            let cost = rec.mse + lambda * rec.bpp();
            for &r in &f.refs {
                if let (Some(d), Some(rl)) = (self.mse_by_poc[r], self.level_of(r)) {
                    self.pi_samples.entry((f.level, rl)).or_default().push((d, cost));
                }
            }
        }
        self.mse_by_poc[f.poc] = Some(rec.mse);
        self.recon[f.poc] = Some(recon);
        self.records.push(rec);
    }

    fn level_of(&self, poc: usize) -> Option<u8> {
        self.records.iter().find(|r| r.poc == poc).map(|r| r.level)
    }

    fn prev_qps(&self) -> BTreeMap<u8, i32> {
        self.last_qp.clone()
    }

    fn key(&self, f: &CodedFrame) -> StateKey {
        state_key(f, self.cfg.gop_structure)
    }

    /// Influence factors of the GOP's frames.
    fn kappas(&self, gop: &[CodedFrame], gop_bpp: f64) -> Vec<f64> {
        let table: Vec<f64> = gop
            .iter()
            .map(|f| influence_factor(self.cfg.gop_structure.alloc_config(), f.level, gop_bpp, f.position))
            .collect();
        if !self.params.online_pi {
            return table;
        }
        let index: HashMap<usize, usize> = gop.iter().enumerate().map(|(i, f)| (f.poc, i)).collect();
        let slots: Vec<FrameSlot> = gop
            .iter()
            .map(|f| FrameSlot {
                level: f.level,
                refs: f.refs.iter().filter_map(|p| index.get(p).copied()).collect(),
            })
            .collect();
        let Ok(mut graph) = DependencyGraph::new(slots) else {
            return table;
        };
        for (i, f) in gop.iter().enumerate() {
            for &p in &f.refs {
                let Some(&j) = index.get(&p) else { continue };
                let Some(samples) = self.pi_samples.get(&(f.level, gop[j].level)) else {
                    return table;
                };
                if samples.len() < 4 {
                    return table;
                }
                match estimate_pi(samples) {
                    Ok(pi) => {
                        let _ = graph.set_pi(i, j, pi);
                    }
                    Err(_) => return table,
                }
            }
        }
        graph.kappas()
    }

    fn summary(&self, mode: &RunMode) -> Result<RunSummary> {
        let total_bits: f64 = self.records.iter().map(|r| r.bits).sum();
        let n = self.records.len() as f64;
        let actual_bps = total_bits * self.cfg.fps / n;
        let mean_psnr = self.records.iter().map(|r| r.psnr_db).sum::<f64>() / n;
        let bit_err_pct = match mode.target_bps() {
            Some(t) => Some(super::bit_err(t, actual_bps)?),
            None => None,
        };
        Ok(RunSummary {
            mode: mode.name().to_string(),
            target_bps: mode.target_bps(),
            total_bits,
            actual_bps,
            mean_psnr,
            bit_err_pct,
            frames: self.records.len(),
        })
    }
}

fn clamp_qp(qp: i32) -> i32 {
    qp.clamp(MIN_QP, MAX_QP)
}

/// Codes a sequence under `mode` and reports per-frame statistics.
pub fn run_sequence(
    frames: &[Frame],
    cfg: &SequenceConfig,
    mode: RunMode,
    params: &RcParams,
) -> Result<RunResult> {
    cfg.validate()?;
    if frames.len() != cfg.frame_count {
        return Err(Error::Config(format!(
            "configured for {} frames, got {}",
            cfg.frame_count,
            frames.len()
        )));
    }
    if let Some(f) = frames.iter().find(|f| f.width != cfg.width || f.height != cfg.height) {
        return Err(Error::Config(format!(
            "frame of size {}x{} in a {}x{} sequence",
            f.width, f.height, cfg.width, cfg.height
        )));
    }
    if let Some(t) = mode.target_bps() {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Config(format!("target bit-rate must be positive, got {t}")));
        }
    }
    let mut encoder_params = params.encoder;
    encoder_params.block_size = cfg.block_size;
    let mut lp = Loop {
        frames,
        cfg,
        params,
        encoder: Encoder::new(encoder_params),
        recon: vec![None; frames.len()],
        mse_by_poc: vec![None; frames.len()],
        levels: HashMap::new(),
        last_qp: BTreeMap::new(),
        records: Vec::with_capacity(frames.len()),
        plan: Vec::new(),
        trace: Vec::new(),
        pi_samples: BTreeMap::new(),
    };
    let order = coding_order(cfg.gop_structure, cfg.frame_count, cfg.intra_period);
    match mode {
        RunMode::FixedQp { qp } => run_fixed(&mut lp, &order, qp)?,
        RunMode::DefaultRc { target_bps } => run_rc(&mut lp, &order, target_bps, false)?,
        RunMode::ProposedRc { target_bps } => run_rc(&mut lp, &order, target_bps, true)?,
    }
    let summary = lp.summary(&mode)?;
    Ok(RunResult {
        records: lp.records,
        summary,
        plan: lp.plan,
        trace: lp.trace,
    })
}

fn run_fixed(lp: &mut Loop<'_>, order: &[CodedFrame], base: i32) -> Result<()> {
    qp_to_qstep(base)?;
    for f in order {
        let qp = if f.slice == SliceType::I {
            base
        } else {
            clamp_qp(base + lp.cfg.gop_structure.qp_offset(f.level))
        };
        let (rec, recon) = lp.encode(f, qp)?;
        let bpp = rec.bpp();
        lp.commit(f, rec, recon, lambda_from_qp(qp as f64));
        lp.plan.push(PlanRow {
            gop: f.gop.map_or(0, |g| g + 1),
            poc: f.poc,
            level: f.level,
            qp,
            lambda: lambda_from_qp(qp as f64),
            target_bpp: f64::NAN,
            actual_bpp: bpp,
        });
    }
    Ok(())
}

fn run_rc(lp: &mut Loop<'_>, order: &[CodedFrame], target_bps: f64, proposed: bool) -> Result<()> {
    let n = lp.cfg.frame_count as f64;
    let total_bits = target_bps * n / lp.cfg.fps;
    let avg = total_bits / n;
    let pixels = lp.pixels();
    let g = lp.cfg.gop_structure.size();
    let clip = lp.cfg.gop_structure.clip_table();

    // Leading I frame.
    let first = &order[0];
    let i_target = (lp.params.i_ratio * avg).min(0.5 * total_bits);
    let qp0 = lp.trial_qp(first, i_target, MIN_QP, MAX_QP)?;
    let (rec, recon) = lp.encode(first, qp0)?;
    let i_bits = rec.bits;
    let i_bpp = rec.bpp();
    lp.commit(first, rec, recon, lambda_from_qp(qp0 as f64));
    lp.plan.push(PlanRow {
        gop: 0,
        poc: 0,
        level: 0,
        qp: qp0,
        lambda: lambda_from_qp(qp0 as f64),
        target_bpp: i_target / pixels,
        actual_bpp: i_bpp,
    });
    if order.len() == 1 {
        return Ok(());
    }

    let n_gops = order.iter().filter_map(|f| f.gop).max().map_or(0, |m| m + 1);
    let base_window = (lp.params.window_frames / g).max(1);
    let mut budget = GopBudget::new((total_bits - i_bits).max(1e-9 * total_bits), n_gops, base_window)?;

    for gi in 0..n_gops {
        let gop: Vec<CodedFrame> = order.iter().filter(|f| f.gop == Some(gi)).cloned().collect();
        budget.window = base_window.min(budget.remaining_gops()).max(1);
        let gop_bits = budget.gop_target();
        let gop_bpp = gop_bits / (pixels * gop.len() as f64);
        let kappas = lp.kappas(&gop, gop_bpp);

        let warm = lp.records.len() < lp.params.warmup_frames
            || gop.iter().any(|f| !lp.levels.contains_key(&lp.key(f)));
        let mut plan_bits: Vec<f64> = {
            let ks: f64 = kappas.iter().sum();
            kappas.iter().map(|k| gop_bits * k / ks).collect()
        };
        if proposed && !warm {
            if let Some(bits) = plan_with_algorithm(lp, &gop, &kappas, gop_bits, &clip) {
                plan_bits = bits;
            }
        }

        let mut spent = 0.0;
        for (i, f) in gop.iter().enumerate() {
            let remaining = gop_bits - spent;
            let planned_rest: f64 = plan_bits[i..].iter().sum();
            let target = (plan_bits[i] * remaining / planned_rest).max(0.1 * plan_bits[i]);
            let target_bpp = target / pixels;
            let key = lp.key(f);

            let mut surrogate = None;
            let (mut qp, mut lambda) = match lp.levels.get(&key) {
                None => {
                    let qp = lp.trial_qp(f, target, MIN_QP, MAX_QP)?;
                    (qp, lambda_from_qp(qp as f64))
                }
                Some(st) if !proposed => {
                    let l = st.rl.lambda(target_bpp);
                    let raw = qp_from_lambda(l)?.round() as i32;
                    let qp = clamp_qp(raw.clamp(st.qp - 3, st.qp + 3));
                    let lambda = if qp == raw { l } else { lambda_from_qp(qp as f64) };
                    (qp, lambda)
                }
                Some(st) => match lp.surrogate(key, f.slice) {
                    Some(s) => {
                        let k = argmin_abs(&s.r_hat, target_bpp);
                        lp.trace.extend(ModelTraceRow::rows(f.poc, f.level, &s));
                        let qp = s.candidates[k];
                        surrogate = Some(s);
                        (qp, f64::NAN)
                    }
                    None => {
                        // A header-only previous frame says nothing about how far
                        // the residual cliff is, so move one step at a time.
                        let header_only = st.cal.r_prev <= st.cal.header_prev;
                        let ratio = (st.cal.r_prev / target_bpp).max(1e-6);
                        let step = if header_only {
                            if target_bpp > st.cal.r_prev { -1 } else { 0 }
                        } else {
                            (6.0 * ratio.log2()).round().clamp(-3.0, 3.0) as i32
                        };
                        let qp = clamp_qp(st.qp + step);
                        (qp, lambda_from_qp(qp as f64))
                    }
                },
            };
            if f.slice == SliceType::B {
                let clipped = clip.clip_qp(qp, f.level, &lp.prev_qps());
                if clipped != qp {
                    qp = clipped;
                    if !proposed {
                        lambda = lambda_from_qp(qp as f64);
                    }
                }
            }
            if let Some(s) = &surrogate {
                lambda = model_lambda(lp, key, s, qp)?;
            }
            let (rec, recon) = lp.encode(f, qp)?;
            let bits = rec.bits;
            spent += bits;
            budget.record_frame(bits);
            lp.commit(f, rec, recon, lambda);
            lp.plan.push(PlanRow {
                gop: gi + 1,
                poc: f.poc,
                level: f.level,
                qp,
                lambda,
                target_bpp,
                actual_bpp: bits / pixels,
            });
        }
        budget.finish_gop();
    }
    Ok(())
}

/// Stabilized surrogate slope at `qp`, or the QP-mapped lambda when the
/// surrogate has no usable slope.
fn model_lambda(lp: &Loop<'_>, key: StateKey, s: &RdSurrogate, qp: i32) -> Result<f64> {
    let q = qp_to_qstep(qp)?;
    let raw = match (s.r_fit.as_ref(), s.d_fit.as_ref()) {
        (Some(r), Some(d)) => crate::rd::lambda_at(q, r, d).ok().filter(|l| *l > 0.0).map(|l| (l, r, d)),
        _ => None,
    };
    Ok(match (raw, lp.levels.get(&key)) {
        (Some((l, r, d)), Some(st)) => stabilize_lambda(l, &st.lambdas, r, d),
        (Some((l, _, _)), None) => l,
        (None, _) => lambda_from_qp(qp as f64),
    })
}

/// Per-frame bit plan from the frame-level allocation, or `None` when the
/// surrogates cannot support it.
fn plan_with_algorithm(
    lp: &Loop<'_>,
    gop: &[CodedFrame],
    kappas: &[f64],
    gop_bits: f64,
    clip: &crate::alloc::ClipTable,
) -> Option<Vec<f64>> {
    let pixels = lp.pixels();
    let mut inputs = Vec::with_capacity(gop.len());
    for (f, &kappa) in gop.iter().zip(kappas) {
        let s = lp.surrogate(lp.key(f), f.slice)?;
        inputs.push(FrameAllocInput {
            level: f.level,
            kappa,
            candidates: s.candidates,
            q_steps: s.q_steps,
            r_hat: s.r_hat,
            lambdas: s.lambdas(),
            is_anchor: f.is_anchor,
        });
    }
    let plan = allocate_gop(
        &inputs,
        gop_bits / pixels,
        Some(QpClip {
            table: clip,
            prev_qps: lp.prev_qps(),
        }),
    )
    .ok()?;
    let bits: Vec<f64> = plan.frames.iter().map(|p| p.target_bpp * pixels).collect();
    (bits.iter().all(|&b| b > 0.0)).then_some(bits)
}
