//! GOP budgeting, influence factors, QP clipping and frame-level bit
//! allocation.

mod budget;
mod clip;
mod dependency;
mod fsum;
mod gop;
mod influence;

pub use budget::{GopBudget, MIN_TARGET_FRACTION};
pub use clip::{ClipTable, RelBound};
pub use dependency::{
    estimate_pi, external_cost_reindex, fit_line, DependencyGraph, FrameSlot, LineFit,
    ReindexedCosts,
};
pub use fsum::fsum;
pub use gop::{allocate_gop, FrameAllocInput, GopPlan, PlannedFrame, QpClip};
pub use influence::{influence_factor, GopConfig};
