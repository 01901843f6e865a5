use std::collections::BTreeMap;

use crate::quant::{MAX_QP, MIN_QP};

/// A bound `QP_p^(level) + offset` relative to the last coded QP of a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelBound {
    pub level: u8,
    pub offset: i32,
}

const fn rel(level: u8, offset: i32) -> Option<RelBound> {
    Some(RelBound { level, offset })
}

/// Per-level QP bounds relative to previously coded frames. `None` means
/// unbounded on that side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClipTable {
    rows: BTreeMap<u8, (Option<RelBound>, Option<RelBound>)>,
}

impl ClipTable {
    pub fn low_delay() -> Self {
        Self {
            rows: BTreeMap::from([
                (3, (rel(1, 0), None)),
                (2, (rel(1, 0), rel(3, 0))),
                (1, (None, rel(3, -4))),
            ]),
        }
    }

    pub fn random_access() -> Self {
        Self {
            rows: BTreeMap::from([
                (5, (rel(1, 0), rel(1, 13))),
                (4, (rel(1, 0), rel(1, 13))),
                (3, (rel(1, 0), rel(1, 10))),
                (2, (rel(1, 0), rel(1, 6))),
                (1, (rel(5, -11), rel(5, -4))),
            ]),
        }
    }

    /// Resolved `[lower, upper]` for `level`. A bound whose reference level
    /// has not been coded yet is dropped. If the bounds cross, the lower one
    /// wins.
    pub fn resolve(&self, level: u8, prev_qps: &BTreeMap<u8, i32>) -> (i32, i32) {
        let eval = |b: &Option<RelBound>| b.and_then(|b| prev_qps.get(&b.level).map(|q| q + b.offset));
        let (lo, hi) = match self.rows.get(&level) {
            Some((lo, hi)) => (
                eval(lo).unwrap_or(MIN_QP).clamp(MIN_QP, MAX_QP),
                eval(hi).unwrap_or(MAX_QP).clamp(MIN_QP, MAX_QP),
            ),
            None => (MIN_QP, MAX_QP),
        };
        (lo, hi.max(lo))
    }

    pub fn clip_qp(&self, qp: i32, level: u8, prev_qps: &BTreeMap<u8, i32>) -> i32 {
        let (lo, hi) = self.resolve(level, prev_qps);
        qp.clamp(lo, hi)
    }
}
