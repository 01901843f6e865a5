//! A small block-transform codec that closes the rate-control loop.
//!
//! Prediction is co-located (no motion search), residuals go through an
//! orthonormal block DCT and the hard quantizer, and bits are counted as the
//! order-0 entropy of the quantized levels plus fixed headers.

mod control;
mod dct;
mod encoder;
mod frame;
mod gop;
mod metrics;
mod probe;
mod synth;

pub use control::{run_sequence, PlanRow, RcParams, RunMode, RunResult, RunSummary};
pub use dct::Dct;
pub use encoder::{encode_frame, Encoder, EncoderParams, SimFrameRecord, ENCODER_L_MAX};
pub use frame::{load_sequence, split_frames, write_sequence, Frame, SequenceConfig};
pub use gop::{coding_order, CodedFrame, GopEntry, GopKind, GopStructure};
pub use metrics::{bit_err, psnr};
pub use probe::{dependency_probe, ProbeResult, ProbeRow, PROBE_PAIRS};
pub use synth::{generate_synthetic, SynthKind};
