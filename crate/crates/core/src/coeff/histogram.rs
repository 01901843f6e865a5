use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::{Error, Result};

/// Exact multiplicities of integer coefficient levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientHistogram {
    counts: BTreeMap<i64, u64>,
    total: u64,
}

/// Counts every level in `levels`.
pub fn build_histogram(levels: &[i64]) -> Result<CoefficientHistogram> {
    CoefficientHistogram::from_levels(levels.iter().copied())
}

impl CoefficientHistogram {
    pub fn from_levels(levels: impl IntoIterator<Item = i64>) -> Result<Self> {
        let mut counts = BTreeMap::new();
        let mut total = 0u64;
        for level in levels {
            *counts.entry(level).or_insert(0) += 1;
            total += 1;
        }
        if total == 0 {
            return Err(Error::NoCoefficients);
        }
        Ok(Self { counts, total })
    }

    /// Builds a histogram from `(level, count)` pairs. Zero counts are dropped
    /// and repeated levels are merged.
    pub fn from_counts(pairs: impl IntoIterator<Item = (i64, u64)>) -> Result<Self> {
        let mut counts = BTreeMap::new();
        let mut total = 0u64;
        for (level, count) in pairs {
            if count == 0 {
                continue;
            }
            *counts.entry(level).or_insert(0) += count;
            total += count;
        }
        if total == 0 {
            return Err(Error::NoCoefficients);
        }
        Ok(Self { counts, total })
    }

    /// Parses a coefficient dump: one integer level per line. Blank lines are
    /// ignored.
    pub fn read_dump(reader: impl BufRead) -> Result<Self> {
        let mut levels = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let level = trimmed.parse::<i64>().map_err(|_| Error::Parse {
                line: idx + 1,
                content: trimmed.to_string(),
            })?;
            levels.push(level);
        }
        Self::from_levels(levels)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, level: i64) -> u64 {
        self.counts.get(&level).copied().unwrap_or(0)
    }

    /// Non-zero counts in ascending level order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts.iter().map(|(&l, &c)| (l, c))
    }

    pub fn distinct_levels(&self) -> usize {
        self.counts.len()
    }

    pub fn probability(&self, level: i64) -> f64 {
        self.count(level) as f64 / self.total as f64
    }

    /// Empirical pmf over the observed support.
    pub fn pmf(&self) -> BTreeMap<i64, f64> {
        let total = self.total as f64;
        self.counts
            .iter()
            .map(|(&l, &c)| (l, c as f64 / total))
            .collect()
    }

    pub fn zero_fraction(&self) -> f64 {
        self.probability(0)
    }

    pub fn nonzero_total(&self) -> u64 {
        self.total - self.count(0)
    }

    pub fn mean_abs(&self) -> f64 {
        let s: f64 = self
            .counts
            .iter()
            .map(|(&l, &c)| l.unsigned_abs() as f64 * c as f64)
            .sum();
        s / self.total as f64
    }

    /// Writes `level,count` rows with a header line.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "level,count")?;
        for (level, count) in self.iter() {
            writeln!(w, "{level},{count}")?;
        }
        Ok(())
    }

    /// Writes the dump format accepted by [`CoefficientHistogram::read_dump`].
    pub fn write_dump(&self, mut w: impl Write) -> std::io::Result<()> {
        for (level, count) in self.iter() {
            for _ in 0..count {
                writeln!(w, "{level}")?;
            }
        }
        Ok(())
    }
}
