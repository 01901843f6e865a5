use std::collections::HashMap;

use super::{Dct, Frame};
use crate::coeff::CoefficientHistogram;
use crate::quant::{dequantize, lambda_from_qp, quantize_hard, qp_to_qstep, QuantizerConfig, SliceType};
use crate::{Error, Result};

/// Largest quantization level the simulated entropy coder represents.
pub const ENCODER_L_MAX: u32 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncoderParams {
    pub block_size: usize,
    /// Per-pixel residual energy below which a B block is skipped.
    pub skip_threshold: f64,
    pub header_bits_per_block: f64,
    pub frame_header_bits: f64,
}

impl Default for EncoderParams {
    fn default() -> Self {
        Self {
            block_size: 8,
            skip_threshold: 1.0,
            header_bits_per_block: 0.5,
            frame_header_bits: 64.0,
        }
    }
}

/// Statistics of one coded frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SimFrameRecord {
    pub poc: usize,
    pub level: u8,
    pub slice: SliceType,
    pub qp: i32,
    pub lambda: f64,
    pub bits: f64,
    pub header_bits: f64,
    pub pixels: usize,
    pub psnr_db: f64,
    pub mse: f64,
    pub skip_ratio: f64,
    pub mse_nonskip: f64,
    pub mse_skip: f64,
    /// Rounded transform coefficients of the coded (non-SKIP) blocks; `None`
    /// when every block was skipped.
    pub coeff_histogram: Option<CoefficientHistogram>,
}

impl SimFrameRecord {
    pub fn bpp(&self) -> f64 {
        self.bits / self.pixels as f64
    }

    pub fn header_bpp(&self) -> f64 {
        self.header_bits / self.pixels as f64
    }
}

/// Block-transform encoder with co-located temporal prediction.
#[derive(Debug, Clone)]
pub struct Encoder {
    params: EncoderParams,
    dct: Dct,
}

fn entropy_bits(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum::<f64>()
        * t
}

impl Encoder {
    pub fn new(params: EncoderParams) -> Self {
        Self {
            dct: Dct::new(params.block_size),
            params,
        }
    }

    pub fn params(&self) -> &EncoderParams {
        &self.params
    }

    /// Codes `frame` at `qp`. B slices predict each block from the best of
    /// the co-located reference blocks and the average of the first two
    /// references; I slices predict mid-grey.
    pub fn encode(
        &self,
        frame: &Frame,
        refs: &[&Frame],
        qp: i32,
        slice: SliceType,
    ) -> Result<(SimFrameRecord, Frame)> {
        let bs = self.params.block_size;
        let (w, h) = (frame.width, frame.height);
        if w % bs != 0 || h % bs != 0 {
            return Err(Error::Config(format!("{w}x{h} is not divisible into {bs}x{bs} blocks")));
        }
        if slice == SliceType::B && refs.is_empty() {
            return Err(Error::MissingReference);
        }
        if refs.iter().any(|r| r.width != w || r.height != h) {
            return Err(Error::domain("reference frame size differs from the frame"));
        }
        let cfg = QuantizerConfig::new(qp_to_qstep(qp)?, slice.rounding_offset(), ENCODER_L_MAX)?;
        let l = ENCODER_L_MAX as i64;
        let mut level_counts = vec![0u64; (2 * l + 1) as usize];
        let mut coeffs: HashMap<i64, u64> = HashMap::new();
        let mut recon = Frame::filled(w, h, 0);

        let n = bs * bs;
        let mut cur = vec![0i32; n];
        let mut pred = vec![0i32; n];
        let mut cand = vec![0i32; n];
        let mut buf = vec![0.0f64; n];
        let mut tmp = vec![0.0f64; n];
        let (mut skip_blocks, mut blocks) = (0usize, 0usize);
        let (mut err_skip, mut err_coded) = (0.0f64, 0.0f64);
        let mut coded_coeffs = 0u64;

        for by in (0..h).step_by(bs) {
            for bx in (0..w).step_by(bs) {
                blocks += 1;
                for y in 0..bs {
                    for x in 0..bs {
                        cur[y * bs + x] = frame.at(bx + x, by + y) as i32;
                    }
                }
                let mut best_sse = i64::MAX;
                let mut consider = |p: &[i32], best: &mut Vec<i32>| {
                    let sse: i64 = cur.iter().zip(p).map(|(&c, &q)| ((c - q) as i64).pow(2)).sum();
                    if sse < best_sse {
                        best_sse = sse;
                        best.copy_from_slice(p);
                    }
                };
                match slice {
                    SliceType::I => {
                        cand.fill(128);
                        consider(&cand, &mut pred);
                    }
                    SliceType::B => {
                        for r in refs {
                            for y in 0..bs {
                                for x in 0..bs {
                                    cand[y * bs + x] = r.at(bx + x, by + y) as i32;
                                }
                            }
                            consider(&cand, &mut pred);
                        }
                        if refs.len() >= 2 {
                            for y in 0..bs {
                                for x in 0..bs {
                                    let a = refs[0].at(bx + x, by + y) as i32;
                                    let b = refs[1].at(bx + x, by + y) as i32;
                                    cand[y * bs + x] = (a + b + 1) >> 1;
                                }
                            }
                            consider(&cand, &mut pred);
                        }
                    }
                }

                if slice == SliceType::B && (best_sse as f64) / (n as f64) < self.params.skip_threshold {
                    skip_blocks += 1;
                    err_skip += best_sse as f64;
                    for y in 0..bs {
                        for x in 0..bs {
                            recon.data[(by + y) * w + bx + x] = pred[y * bs + x] as u8;
                        }
                    }
                    continue;
                }

                for k in 0..n {
                    buf[k] = (cur[k] - pred[k]) as f64;
                }
                self.dct.forward(&mut buf, &mut tmp);
                for c in buf.iter_mut() {
                    *coeffs.entry(c.round() as i64).or_insert(0) += 1;
                    let lv = quantize_hard(*c, &cfg);
                    level_counts[(lv + l) as usize] += 1;
                    *c = dequantize(lv, &cfg);
                }
                coded_coeffs += n as u64;
                self.dct.inverse(&mut buf, &mut tmp);
                for y in 0..bs {
                    for x in 0..bs {
                        let k = y * bs + x;
                        let v = (pred[k] as f64 + buf[k]).round().clamp(0.0, 255.0);
                        recon.data[(by + y) * w + bx + x] = v as u8;
                        let d = cur[k] as f64 - v;
                        err_coded += d * d;
                    }
                }
            }
        }

        let pixels = w * h;
        let header_bits =
            self.params.header_bits_per_block * blocks as f64 + self.params.frame_header_bits;
        let bits = header_bits + entropy_bits(&level_counts);
        let skip_pixels = skip_blocks * n;
        let coded_pixels = pixels - skip_pixels;
        let mse = (err_skip + err_coded) / pixels as f64;
        let coeff_histogram = if coded_coeffs > 0 {
            Some(CoefficientHistogram::from_counts(coeffs)?)
        } else {
            None
        };
        Ok((
            SimFrameRecord {
                poc: 0,
                level: 0,
                slice,
                qp,
                lambda: lambda_from_qp(qp as f64),
                bits,
                header_bits,
                pixels,
                psnr_db: super::psnr(mse),
                mse,
                skip_ratio: skip_blocks as f64 / blocks as f64,
                mse_nonskip: if coded_pixels > 0 { err_coded / coded_pixels as f64 } else { 0.0 },
                mse_skip: if skip_pixels > 0 { err_skip / skip_pixels as f64 } else { 0.0 },
                coeff_histogram,
            },
            recon,
        ))
    }
}

/// Codes a single frame with default encoder parameters.
pub fn encode_frame(
    frame: &Frame,
    refs: &[&Frame],
    qp: i32,
    slice: SliceType,
    params: &EncoderParams,
) -> Result<(SimFrameRecord, Frame)> {
    Encoder::new(*params).encode(frame, refs, qp, slice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_synthetic, SynthKind};

    fn textured() -> Frame {
        generate_synthetic(SynthKind::TexturedPan { velocity: 1.0 }, 32, 32, 1, 5)
            .unwrap()
            .remove(0)
    }

    #[test]
    fn perfect_prediction_skips() {
        let f = textured();
        let p = EncoderParams::default();
        let (rec, recon) = encode_frame(&f, &[&f], 30, SliceType::B, &p).unwrap();
        assert_eq!(rec.skip_ratio, 1.0);
        assert_eq!(rec.bits, rec.header_bits);
        assert_eq!(rec.mse, 0.0);
        assert_eq!(recon, f);
        assert!(rec.coeff_histogram.is_none());
    }

    #[test]
    fn flat_intra_frame() {
        let f = Frame::filled(16, 16, 128);
        let (rec, _) = encode_frame(&f, &[], 20, SliceType::I, &EncoderParams::default()).unwrap();
        assert_eq!(rec.bits, rec.header_bits);
        assert_eq!(rec.header_bits, 4.0 * 0.5 + 64.0);
        assert_eq!(rec.mse, 0.0);
        assert_eq!(rec.psnr_db, 100.0);
    }

    #[test]
    fn qp_monotonicity_on_one_frame() {
        let f = textured();
        let p = EncoderParams::default();
        let (lo, _) = encode_frame(&f, &[], 1, SliceType::I, &p).unwrap();
        let (hi, _) = encode_frame(&f, &[], 51, SliceType::I, &p).unwrap();
        assert!(hi.bits < lo.bits);
        assert!(hi.mse > lo.mse);
    }

    #[test]
    fn fine_quantizer_reconstruction() {
        let f = textured();
        let (_, recon) = encode_frame(&f, &[], 4, SliceType::I, &EncoderParams::default()).unwrap();
        for (a, b) in recon.data.iter().zip(&f.data) {
            assert!((*a as i32 - *b as i32).abs() <= 1);
        }
    }

    #[test]
    fn b_slice_needs_reference() {
        let f = textured();
        assert!(matches!(
            encode_frame(&f, &[], 30, SliceType::B, &EncoderParams::default()),
            Err(Error::MissingReference)
        ));
    }

    #[test]
    fn energy_accounting() {
        let seq = generate_synthetic(SynthKind::MovingBlob { velocity: 2.0 }, 64, 64, 2, 1).unwrap();
        let p = EncoderParams {
            skip_threshold: 20.0,
            ..EncoderParams::default()
        };
        let (rec, _) = encode_frame(&seq[1], &[&seq[0]], 30, SliceType::B, &p).unwrap();
        assert!(rec.skip_ratio > 0.0 && rec.skip_ratio < 1.0);
        let mix = rec.skip_ratio * rec.mse_skip + (1.0 - rec.skip_ratio) * rec.mse_nonskip;
        assert!((mix - rec.mse).abs() < 1e-9);
    }
}
