use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GopKind;
use crate::{Error, Result};

/// One 8-bit luma plane, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Frame {
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }
}

fn default_block_size() -> usize {
    8
}

fn default_fps() -> f64 {
    30.0
}

/// Geometry and coding structure of a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceConfig {
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    #[serde(default = "default_fps")]
    pub fps: f64,
    pub gop_structure: GopKind,
    #[serde(default = "default_block_size")]
    pub block_size: usize,
    /// Code every frame whose POC is a positive multiple of this as an I
    /// slice. Must be a multiple of the GOP size.
    #[serde(default)]
    pub intra_period: Option<usize>,
}

impl SequenceConfig {
    pub fn new(width: usize, height: usize, frame_count: usize, gop_structure: GopKind) -> Self {
        Self {
            width,
            height,
            frame_count,
            fps: default_fps(),
            gop_structure,
            block_size: default_block_size(),
            intra_period: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bs = self.block_size;
        if bs == 0 || self.width == 0 || self.height == 0 {
            return Err(Error::Config("width, height and block size must be positive".into()));
        }
        if self.width % bs != 0 || self.height % bs != 0 {
            return Err(Error::Config(format!(
                "{}x{} is not divisible into {bs}x{bs} blocks",
                self.width, self.height
            )));
        }
        let g = self.gop_structure.size();
        if self.frame_count < g {
            return Err(Error::Config(format!(
                "frame_count {} is smaller than the GOP size {g}",
                self.frame_count
            )));
        }
        if !(self.fps > 0.0) || !self.fps.is_finite() {
            return Err(Error::Config(format!("fps must be positive, got {}", self.fps)));
        }
        if let Some(p) = self.intra_period {
            if p == 0 || p % g != 0 {
                return Err(Error::Config(format!(
                    "intra period {p} must be a positive multiple of the GOP size {g}"
                )));
            }
        }
        Ok(())
    }

    pub fn frame_bytes(&self) -> usize {
        self.width * self.height
    }
}

/// Reads a raw planar 8-bit luma file holding exactly `frame_count` frames.
pub fn load_sequence(path: &Path, cfg: &SequenceConfig) -> Result<Vec<Frame>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    split_frames(bytes, cfg)
}

pub fn split_frames(bytes: Vec<u8>, cfg: &SequenceConfig) -> Result<Vec<Frame>> {
    let fb = cfg.frame_bytes();
    let expected = fb * cfg.frame_count;
    if bytes.len() != expected {
        return Err(Error::SizeMismatch {
            expected: expected as u64,
            actual: bytes.len() as u64,
        });
    }
    Ok(bytes
        .chunks_exact(fb)
        .map(|c| Frame {
            width: cfg.width,
            height: cfg.height,
            data: c.to_vec(),
        })
        .collect())
}

pub fn write_sequence<W: Write>(frames: &[Frame], mut out: W) -> Result<()> {
    for f in frames {
        out.write_all(&f.data)?;
    }
    out.flush()?;
    Ok(())
}
