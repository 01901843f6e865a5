use serde::{Deserialize, Serialize};

use crate::alloc::{ClipTable, GopConfig};
use crate::quant::SliceType;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GopKind {
    #[serde(rename = "LD4", alias = "ld4")]
    Ld4,
    #[serde(rename = "RA16", alias = "ra16")]
    Ra16,
}

impl GopKind {
    pub fn size(self) -> usize {
        match self {
            GopKind::Ld4 => 4,
            GopKind::Ra16 => 16,
        }
    }

    pub fn structure(self) -> GopStructure {
        match self {
            GopKind::Ld4 => GopStructure::ld4(),
            GopKind::Ra16 => GopStructure::ra16(),
        }
    }

    pub fn alloc_config(self) -> GopConfig {
        match self {
            GopKind::Ld4 => GopConfig::LowDelayB,
            GopKind::Ra16 => GopConfig::RandomAccess,
        }
    }

    pub fn clip_table(self) -> ClipTable {
        match self {
            GopKind::Ld4 => ClipTable::low_delay(),
            GopKind::Ra16 => ClipTable::random_access(),
        }
    }

    /// QP offset of each temporal level relative to the base QP in fixed-QP
    /// runs.
    pub fn qp_offset(self, level: u8) -> i32 {
        match (self, level) {
            (GopKind::Ld4, 1) => 1,
            (GopKind::Ld4, 2) => 4,
            (GopKind::Ld4, _) => 5,
            (GopKind::Ra16, 1 | 2) => 1,
            (GopKind::Ra16, 3) => 4,
            (GopKind::Ra16, 4) => 5,
            (GopKind::Ra16, _) => 6,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GopKind::Ld4 => "LD4",
            GopKind::Ra16 => "RA16",
        }
    }
}

impl std::str::FromStr for GopKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LD4" | "LD" | "LDB" => Ok(GopKind::Ld4),
            "RA16" | "RA" => Ok(GopKind::Ra16),
            _ => Err(Error::Config(format!("unknown GOP structure {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GopEntry {
    /// POC offset from the start of the GOP, 1-based.
    pub poc_offset: usize,
    pub level: u8,
    pub ref_offsets: Vec<i64>,
}

/// Coding order of one GOP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GopStructure {
    pub size: usize,
    pub entries: Vec<GopEntry>,
}

fn e(poc_offset: usize, level: u8, refs: &[i64]) -> GopEntry {
    GopEntry {
        poc_offset,
        level,
        ref_offsets: refs.to_vec(),
    }
}

impl GopStructure {
    pub fn ld4() -> Self {
        Self {
            size: 4,
            entries: vec![
                e(1, 3, &[-1, -5, -9]),
                e(2, 2, &[-1, -2, -6]),
                e(3, 3, &[-1, -3, -7]),
                e(4, 1, &[-1, -4, -8]),
            ],
        }
    }

    pub fn ra16() -> Self {
        Self {
            size: 16,
            entries: vec![
                e(16, 1, &[-16]),
                e(8, 2, &[-8, 8]),
                e(4, 3, &[-4, 4]),
                e(2, 4, &[-2, 2]),
                e(1, 5, &[-1, 1]),
                e(3, 5, &[-1, 1]),
                e(6, 4, &[-2, 2]),
                e(5, 5, &[-1, 1]),
                e(7, 5, &[-1, 1]),
                e(12, 3, &[-4, 4]),
                e(10, 4, &[-2, 2]),
                e(9, 5, &[-1, 1]),
                e(11, 5, &[-1, 1]),
                e(14, 4, &[-2, 2]),
                e(13, 5, &[-1, 1]),
                e(15, 5, &[-1, 1]),
            ],
        }
    }
}

/// One frame of the sequence in coding order.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedFrame {
    pub poc: usize,
    pub level: u8,
    pub slice: SliceType,
    /// POCs of the references, all coded earlier.
    pub refs: Vec<usize>,
    /// GOP index, `None` for the leading I frame.
    pub gop: Option<usize>,
    /// 1-based position of the frame's POC within its GOP.
    pub position: usize,
    pub is_anchor: bool,
}

/// Coding order for `frame_count` frames: an I frame at POC 0 followed by
/// GOPs of `kind`. Frames past the end are dropped along with references to
/// them; in a truncated GOP the lowest-level frame becomes the anchor.
pub fn coding_order(kind: GopKind, frame_count: usize, intra_period: Option<usize>) -> Vec<CodedFrame> {
    let st = kind.structure();
    let mut out = vec![CodedFrame {
        poc: 0,
        level: 0,
        slice: SliceType::I,
        refs: vec![],
        gop: None,
        position: 0,
        is_anchor: false,
    }];
    if frame_count <= 1 {
        return out;
    }
    let last = frame_count - 1;
    let n_gops = last.div_ceil(st.size);
    for g in 0..n_gops {
        let base = g * st.size;
        let mut gop: Vec<CodedFrame> = st
            .entries
            .iter()
            .filter(|en| base + en.poc_offset <= last)
            .map(|en| {
                let poc = base + en.poc_offset;
                let refs: Vec<usize> = en
                    .ref_offsets
                    .iter()
                    .map(|&o| poc as i64 + o)
                    .filter(|&r| r >= 0 && r as usize <= last)
                    .map(|r| r as usize)
                    .collect();
                let intra = intra_period.is_some_and(|p| poc % p == 0);
                CodedFrame {
                    poc,
                    level: en.level,
                    slice: if intra { SliceType::I } else { SliceType::B },
                    refs: if intra { vec![] } else { refs },
                    gop: Some(g),
                    position: en.poc_offset,
                    is_anchor: false,
                }
            })
            .collect();
        if let Some(a) = (0..gop.len()).min_by_key(|&i| (gop[i].level, i)) {
            gop[a].is_anchor = true;
        }
        out.extend(gop);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_order(kind: GopKind, n: usize) {
        let order = coding_order(kind, n, None);
        assert_eq!(order.len(), n);
        let mut done = std::collections::HashSet::new();
        for f in &order {
            for r in &f.refs {
                assert!(done.contains(r), "{kind:?}: POC {} uses {r} before it is coded", f.poc);
            }
            assert!(done.insert(f.poc));
        }
    }

    #[test]
    fn references_precede_dependents() {
        for n in [5, 9, 17, 33, 65, 30] {
            check_order(GopKind::Ld4, n);
            check_order(GopKind::Ra16, n.max(17));
        }
    }

    #[test]
    fn shapes() {
        assert_eq!(GopStructure::ld4().entries.len(), 4);
        assert_eq!(GopStructure::ra16().entries.len(), 16);
        let mut pocs: Vec<usize> = GopStructure::ra16().entries.iter().map(|e| e.poc_offset).collect();
        pocs.sort();
        assert_eq!(pocs, (1..=16).collect::<Vec<_>>());
    }

    #[test]
    fn anchors() {
        let order = coding_order(GopKind::Ra16, 33, None);
        let anchors: Vec<usize> = order.iter().filter(|f| f.is_anchor).map(|f| f.poc).collect();
        assert_eq!(anchors, vec![16, 32]);
        let order = coding_order(GopKind::Ld4, 9, None);
        let anchors: Vec<usize> = order.iter().filter(|f| f.is_anchor).map(|f| f.poc).collect();
        assert_eq!(anchors, vec![4, 8]);
        let order = coding_order(GopKind::Ra16, 25, None);
        assert_eq!(order.iter().filter(|f| f.is_anchor).count(), 2);
    }

    #[test]
    fn intra_period_marks_i_slices() {
        let order = coding_order(GopKind::Ld4, 17, Some(8));
        let intra: Vec<usize> = order.iter().filter(|f| f.slice == SliceType::I).map(|f| f.poc).collect();
        assert_eq!(intra, vec![0, 8, 16]);
    }
}
