use serde::{Deserialize, Serialize};

/// Hierarchical GOP configuration the tables are defined for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GopConfig {
    RandomAccess,
    LowDelayB,
}

const RA_KAPPA: [f64; 5] = [5.4082, 2.3958, 1.5933, 1.1566, 1.0];

// Rows are bpp buckets (0, 0.05], (0.05, 0.1], (0.1, 0.15], (0.15, 0.2];
// columns are positions 4I-3, 4I-2, 4I-1, 4I.
const LDB_KAPPA: [[f64; 4]; 4] = [
    [1.587, 1.7802, 1.3781, 5.1715],
    [1.4499, 1.6675, 1.3631, 3.6495],
    [1.2432, 1.409, 1.1175, 3.3994],
    [1.3633, 1.5461, 1.3363, 2.6198],
];

fn ldb_bucket(bpp: f64) -> usize {
    if bpp <= 0.05 {
        0
    } else if bpp <= 0.1 {
        1
    } else if bpp <= 0.15 {
        2
    } else {
        3
    }
}

/// Tabulated influence factor.
///
/// `level` is the temporal level (1 to 5) for random access. For low delay
/// `position_in_gop` is the 1-based POC position within the 4-frame GOP and
/// `bpp` selects the row; rates above 0.2 use the last row. Out-of-range
/// levels or positions are clamped to the nearest table entry.
pub fn influence_factor(config: GopConfig, level: u8, bpp: f64, position_in_gop: usize) -> f64 {
    match config {
        GopConfig::RandomAccess => RA_KAPPA[(level.clamp(1, 5) - 1) as usize],
        GopConfig::LowDelayB => {
            let col = (position_in_gop.clamp(1, 4)) - 1;
            LDB_KAPPA[ldb_bucket(bpp)][col]
        }
    }
}
