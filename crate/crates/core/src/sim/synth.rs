use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Frame;
use crate::{Error, Result};

/// Synthetic test content.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynthKind {
    /// Textured bump drifting over a static textured background;
    /// `velocity` in pixels per frame.
    MovingBlob { velocity: f64 },
    /// Band-limited random texture panned horizontally.
    TexturedPan { velocity: f64 },
    /// Independent per-pixel AR(1) processes with lag-1 `correlation`.
    NoiseAr1 { correlation: f64 },
}

impl SynthKind {
    pub fn name(&self) -> &'static str {
        match self {
            SynthKind::MovingBlob { .. } => "moving_blob",
            SynthKind::TexturedPan { .. } => "textured_pan",
            SynthKind::NoiseAr1 { .. } => "noise_ar1",
        }
    }

    /// The generator with its default parameter.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "moving_blob" => Ok(SynthKind::MovingBlob { velocity: 1.5 }),
            "textured_pan" => Ok(SynthKind::TexturedPan { velocity: 0.5 }),
            "noise_ar1" => Ok(SynthKind::NoiseAr1 { correlation: 0.95 }),
            other => Err(Error::Config(format!("unknown synthetic sequence {other:?}"))),
        }
    }
}

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

// White noise smoothed by a separable box blur of radius r, rescaled to unit
// variance.
fn smooth_noise(rng: &mut ChaCha8Rng, w: usize, h: usize, r: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..w * h).map(|_| StandardNormal.sample(rng)).collect();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for d in 0..=2 * r {
                let xx = (x + w + d - r) % w;
                s += raw[y * w + xx];
            }
            tmp[y * w + x] = s;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for d in 0..=2 * r {
                let yy = (y + h + d - r) % h;
                s += tmp[yy * w + x];
            }
            out[y * w + x] = s;
        }
    }
    let var = out.iter().map(|v| v * v).sum::<f64>() / out.len() as f64;
    let sd = var.sqrt().max(1e-12);
    out.iter_mut().for_each(|v| *v /= sd);
    out
}

fn moving_blob(w: usize, h: usize, n: usize, velocity: f64, rng: &mut ChaCha8Rng) -> Vec<Frame> {
    let fine = smooth_noise(rng, w, h, 1);
    let coarse = smooth_noise(rng, w, h, 4);
    let phase: f64 = rng.random::<f64>() * 2.0 * PI;
    let bg: Vec<f64> = (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            100.0 + 25.0 * (2.0 * PI * x / 41.0 + phase).sin() * (2.0 * PI * y / 31.0).cos()
                + 12.0 * coarse[i]
                + 4.0 * fine[i]
        })
        .collect();
    let radius = w.min(h) as f64 / 6.0;
    let (x0, y0) = (w as f64 * 0.3, h as f64 * 0.4);
    (0..n)
        .map(|t| {
            let cx = x0 + velocity * t as f64;
            let cy = y0 + 0.5 * velocity * t as f64;
            let data = (0..w * h)
                .map(|i| {
                    let (x, y) = ((i % w) as f64, (i / w) as f64);
                    let (dx, dy) = (x - cx, y - cy);
                    let g = (-(dx * dx + dy * dy) / (2.0 * radius * radius)).exp();
                    let stripes = 1.0 + 0.35 * (dx * 0.9).sin() * (dy * 0.7).cos();
                    to_u8(bg[i] + 80.0 * g * stripes)
                })
                .collect();
            Frame {
                width: w,
                height: h,
                data,
            }
        })
        .collect()
}

fn textured_pan(w: usize, h: usize, n: usize, velocity: f64, rng: &mut ChaCha8Rng) -> Vec<Frame> {
    let span = w + (velocity.abs() * n as f64).ceil() as usize + 2;
    let fine = smooth_noise(rng, span, h, 1);
    let mid = smooth_noise(rng, span, h, 3);
    let coarse = smooth_noise(rng, span, h, 8);
    let tex: Vec<f64> = (0..span * h)
        .map(|i| 128.0 + 30.0 * coarse[i] + 18.0 * mid[i] + 8.0 * fine[i])
        .collect();
    let sample = |x: f64, y: usize| {
        let x0 = x.floor();
        let f = x - x0;
        let i0 = (x0 as usize).min(span - 1);
        let i1 = (i0 + 1).min(span - 1);
        tex[y * span + i0] * (1.0 - f) + tex[y * span + i1] * f
    };
    let start = if velocity < 0.0 { (span - w - 1) as f64 } else { 0.0 };
    (0..n)
        .map(|t| {
            let off = start + velocity * t as f64;
            let data = (0..w * h)
                .map(|i| to_u8(sample(off + (i % w) as f64, i / w)))
                .collect();
            Frame {
                width: w,
                height: h,
                data,
            }
        })
        .collect()
}

fn noise_ar1(w: usize, h: usize, n: usize, rho: f64, rng: &mut ChaCha8Rng) -> Vec<Frame> {
    let innov = (1.0 - rho * rho).max(0.0).sqrt();
    let mut state: Vec<f64> = (0..w * h).map(|_| StandardNormal.sample(rng)).collect();
    let mut frames = Vec::with_capacity(n);
    for t in 0..n {
        if t > 0 {
            for s in state.iter_mut() {
                let e: f64 = StandardNormal.sample(rng);
                *s = rho * *s + innov * e;
            }
        }
        frames.push(Frame {
            width: w,
            height: h,
            data: state.iter().map(|&s| to_u8(128.0 + 30.0 * s)).collect(),
        });
    }
    frames
}

/// Deterministic synthetic sequence for a given seed.
pub fn generate_synthetic(
    kind: SynthKind,
    width: usize,
    height: usize,
    frames: usize,
    seed: u64,
) -> Result<Vec<Frame>> {
    if width == 0 || height == 0 {
        return Err(Error::Config("frame dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match kind {
        SynthKind::MovingBlob { velocity } => moving_blob(width, height, frames, velocity, &mut rng),
        SynthKind::TexturedPan { velocity } => textured_pan(width, height, frames, velocity, &mut rng),
        SynthKind::NoiseAr1 { correlation } => {
            if !(-1.0..=1.0).contains(&correlation) {
                return Err(Error::Config(format!("correlation {correlation} outside [-1, 1]")));
            }
            noise_ar1(width, height, frames, correlation, &mut rng)
        }
    })
}
