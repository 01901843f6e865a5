//! Sequence selection and configuration resolution.
//!
//! Every setting resolves as: command-line flag, then the JSON config file,
//! then the built-in default.

use std::path::{Path, PathBuf};

use anyhow::Context;
use cauchy_rc::coeff::BetaGrid;
use cauchy_rc::sim::{generate_synthetic, load_sequence, Frame, GopKind, RcParams, SequenceConfig, SynthKind};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::output::{file_digest, InputDigest};
use crate::CliError;

pub const DEFAULT_WIDTH: usize = 128;
pub const DEFAULT_HEIGHT: usize = 128;
pub const DEFAULT_FRAMES: usize = 65;
pub const DEFAULT_SEED: u64 = 1;

/// Where frames come from and how they are coded.
#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Raw planar 8-bit luma file. Geometry comes from flags or --config.
    #[arg(long, conflicts_with = "synth")]
    pub input: Option<PathBuf>,
    /// Synthetic sequence: moving_blob, textured_pan or noise_ar1.
    #[arg(long)]
    pub synth: Option<String>,
    /// JSON config file; its values are overridden by flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Frame width [config: width, default 128].
    #[arg(long)]
    pub width: Option<usize>,
    /// Frame height [config: height, default 128].
    #[arg(long)]
    pub height: Option<usize>,
    /// Number of frames [config: frame_count, default 65].
    #[arg(long)]
    pub frames: Option<usize>,
    /// Frames per second [config: fps, default 30].
    #[arg(long)]
    pub fps: Option<f64>,
    /// GOP structure, LD4 or RA16 [config: gop_structure, default LD4].
    #[arg(long)]
    pub gop: Option<String>,
    /// Transform block size [config: block_size, default 8].
    #[arg(long)]
    pub block_size: Option<usize>,
    /// Intra period in frames [config: intra_period, default none].
    #[arg(long)]
    pub intra_period: Option<usize>,
    /// Seed of the synthetic generator [config: seed, default 1].
    #[arg(long)]
    pub seed: Option<u64>,
    /// SKIP threshold in MSE per pixel [config: skip_threshold, default 1.0].
    #[arg(long)]
    pub skip_threshold: Option<f64>,
}

/// Contents of the JSON config file. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub frame_count: Option<usize>,
    pub fps: Option<f64>,
    pub gop_structure: Option<GopKind>,
    pub block_size: Option<usize>,
    pub intra_period: Option<usize>,
    pub seed: Option<u64>,
    pub synth: Option<String>,
    pub input: Option<PathBuf>,
    pub skip_threshold: Option<f64>,
    pub header_bits_per_block: Option<f64>,
    pub frame_header_bits: Option<f64>,
    pub i_ratio: Option<f64>,
    pub warmup_frames: Option<usize>,
    pub window_frames: Option<usize>,
    pub online_pi: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(CliError::Data)?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))
            .map_err(CliError::Data)
    }
}

/// Fully resolved settings, recorded in the manifest.
#[derive(Debug, Serialize)]
pub struct Resolved {
    pub source: String,
    pub sequence: SequenceConfig,
    pub seed: Option<u64>,
    pub skip_threshold: f64,
    pub header_bits_per_block: f64,
    pub frame_header_bits: f64,
    pub i_ratio: f64,
    pub warmup_frames: usize,
    pub window_frames: usize,
    pub online_pi: bool,
}

pub struct Loaded {
    pub frames: Vec<Frame>,
    pub resolved: Resolved,
    pub params: RcParams,
    pub inputs: Vec<InputDigest>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl SourceArgs {
    pub fn load(&self) -> Result<Loaded, CliError> {
        let file = FileConfig::load(self.config.as_deref())?;
        let mut inputs = Vec::new();
        if let Some(cfg) = &self.config {
            inputs.push(digest(cfg)?);
        }

        let gop = match &self.gop {
            Some(g) => g.parse::<GopKind>().map_err(|e| usage(e.to_string()))?,
            None => file.gop_structure.unwrap_or(GopKind::Ld4),
        };
        let mut seq = SequenceConfig::new(
            self.width.or(file.width).unwrap_or(DEFAULT_WIDTH),
            self.height.or(file.height).unwrap_or(DEFAULT_HEIGHT),
            self.frames.or(file.frame_count).unwrap_or(DEFAULT_FRAMES),
            gop,
        );
        if let Some(fps) = self.fps.or(file.fps) {
            seq.fps = fps;
        }
        if let Some(bs) = self.block_size.or(file.block_size) {
            seq.block_size = bs;
        }
        seq.intra_period = self.intra_period.or(file.intra_period);
        seq.validate().map_err(|e| usage(e.to_string()))?;

        let mut params = RcParams::default();
        params.encoder.block_size = seq.block_size;
        params.encoder.skip_threshold = self.skip_threshold.or(file.skip_threshold).unwrap_or(params.encoder.skip_threshold);
        params.encoder.header_bits_per_block = file.header_bits_per_block.unwrap_or(params.encoder.header_bits_per_block);
        params.encoder.frame_header_bits = file.frame_header_bits.unwrap_or(params.encoder.frame_header_bits);
        params.i_ratio = file.i_ratio.unwrap_or(params.i_ratio);
        params.warmup_frames = file.warmup_frames.unwrap_or(params.warmup_frames);
        params.window_frames = file.window_frames.unwrap_or(params.window_frames);
        params.online_pi = file.online_pi.unwrap_or(params.online_pi);
        params.beta_grid = BetaGrid::default();
        if !(params.encoder.skip_threshold >= 0.0) {
            return Err(usage("skip threshold must be non-negative"));
        }

        let input = self.input.clone().or_else(|| if self.synth.is_some() { None } else { file.input.clone() });
        let synth = self.synth.clone().or_else(|| if self.input.is_some() { None } else { file.synth.clone() });
        let (frames, source, seed) = match (input, synth) {
            (Some(_), Some(_)) => return Err(usage("give either an input file or a synthetic sequence, not both")),
            (None, None) => return Err(usage("no sequence: pass --input or --synth")),
            (Some(path), None) => {
                inputs.push(digest(&path)?);
                let frames = load_sequence(&path, &seq)
                    .with_context(|| format!("loading {}", path.display()))
                    .map_err(CliError::Data)?;
                (frames, path.display().to_string(), None)
            }
            (None, Some(name)) => {
                let kind = SynthKind::by_name(&name).map_err(|e| usage(e.to_string()))?;
                let seed = self.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
                let frames = generate_synthetic(kind, seq.width, seq.height, seq.frame_count, seed)
                    .map_err(|e| usage(e.to_string()))?;
                (frames, format!("synth:{name}"), Some(seed))
            }
        };
        let resolved = Resolved {
            source,
            sequence: seq,
            seed,
            skip_threshold: params.encoder.skip_threshold,
            header_bits_per_block: params.encoder.header_bits_per_block,
            frame_header_bits: params.encoder.frame_header_bits,
            i_ratio: params.i_ratio,
            warmup_frames: params.warmup_frames,
            window_frames: params.window_frames,
            online_pi: params.online_pi,
        };
        Ok(Loaded {
            frames,
            resolved,
            params,
            inputs,
        })
    }
}

pub fn digest(path: &Path) -> Result<InputDigest, CliError> {
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: file_digest(path).map_err(CliError::Data)?,
    })
}
