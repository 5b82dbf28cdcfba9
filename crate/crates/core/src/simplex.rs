//! Dense indexing of the composition simplex `C_n`.
//!
//! Compositions of `n` into `m` parts are ordered lexicographically
//! decreasing, so for `m = 3, n = 2` the order is
//! `(2,0,0), (1,1,0), (1,0,1), (0,2,0), (0,1,1), (0,0,2)`.

use crate::error::{Error, Result};
use crate::polya::Composition;

/// Bijection between `C_n` (with `m` parts) and `0..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplexIndex {
    parts: usize,
    level: usize,
    size: usize,
    // counts[q][s] = number of compositions of s into q parts, q in 0..=m, s in 0..=n.
    counts: Vec<Vec<usize>>,
}

impl SimplexIndex {
    pub fn new(parts: usize, level: usize) -> Result<Self> {
        if parts == 0 {
            return Err(Error::InvalidParameter(
                "simplex needs at least one part".into(),
            ));
        }
        let mut counts = vec![vec![0usize; level + 1]; parts + 1];
        counts[0][0] = 1;
        for q in 1..=parts {
            // C(s + q - 1, q - 1) via the recurrence count(s, q) = count(s - 1, q) + count(s, q - 1).
            for s in 0..=level {
                let from_fewer = counts[q - 1][s];
                let from_smaller = if s > 0 { counts[q][s - 1] } else { 0 };
                counts[q][s] =
                    from_fewer
                        .checked_add(from_smaller)
                        .ok_or_else(|| Error::SimplexTooLarge {
                            parts,
                            level,
                            what: "size exceeds the platform integer range".into(),
                        })?;
            }
        }
        let size = counts[parts][level];
        Ok(Self {
            parts,
            level,
            size,
            counts,
        })
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// `C(n + m - 1, m - 1)`.
    pub fn size(&self) -> usize {
        self.size
    }

    fn count(&self, sum: usize, parts: usize) -> usize {
        self.counts[parts][sum]
    }

    /// Position of `x` in the enumeration order.
    pub fn rank(&self, x: &Composition) -> Result<usize> {
        if x.parts() != self.parts || x.level() != self.level {
            return Err(Error::IncompatibleComposition {
                found: x.counts().to_vec(),
                level: self.level,
                parts: self.parts,
            });
        }
        Ok(self.rank_unchecked(x.counts()))
    }

    pub(crate) fn rank_unchecked(&self, counts: &[usize]) -> usize {
        let mut remaining = self.level;
        let mut index = 0;
        for (k, &c) in counts.iter().enumerate().take(self.parts - 1) {
            // Everything with a larger entry at position k comes first; by the
            // hockey-stick identity there are count(remaining - c - 1, parts_left) of them.
            if c < remaining {
                index += self.count(remaining - c - 1, self.parts - k);
            }
            remaining -= c;
        }
        index
    }

    /// Composition at position `i`.
    pub fn unrank(&self, i: usize) -> Result<Composition> {
        if i >= self.size {
            return Err(Error::InvalidParameter(format!(
                "index {i} out of range for simplex of size {}",
                self.size
            )));
        }
        let mut counts = vec![0usize; self.parts];
        let mut remaining = self.level;
        let mut i = i;
        let (head, last) = counts.split_at_mut(self.parts - 1);
        for (k, slot) in head.iter_mut().enumerate() {
            let tail_parts = self.parts - k - 1;
            let mut v = remaining;
            loop {
                let block = self.count(remaining - v, tail_parts);
                if i < block {
                    break;
                }
                i -= block;
                v -= 1;
            }
            *slot = v;
            remaining -= v;
        }
        last[0] = remaining;
        Ok(Composition::new(counts))
    }

    /// Iterator over `C_n` in index order.
    pub fn iter(&self) -> CompositionIter {
        CompositionIter::new(self.parts, self.level)
    }
}

/// Walks `C_n` in lexicographically decreasing order without materializing it.
#[derive(Debug, Clone)]
pub struct CompositionIter {
    next: Option<Vec<usize>>,
}

impl CompositionIter {
    fn new(parts: usize, level: usize) -> Self {
        let mut first = vec![0; parts];
        first[0] = level;
        Self { next: Some(first) }
    }
}

impl Iterator for CompositionIter {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        let current = self.next.take()?;
        let m = current.len();
        // Successor: decrement the rightmost non-zero entry before the last one
        // and move everything after it (plus the unit) into the next slot.
        if let Some(k) = (0..m.saturating_sub(1)).rev().find(|&k| current[k] > 0) {
            let mut succ = current.clone();
            let tail: usize = succ[k + 1..].iter().sum();
            succ[k] -= 1;
            for v in succ[k + 1..].iter_mut() {
                *v = 0;
            }
            succ[k + 1] = tail + 1;
            self.next = Some(succ);
        }
        Some(Composition::new(current))
    }
}

/// All compositions of `level` into `parts` parts, lexicographically decreasing.
pub fn enumerate(parts: usize, level: usize) -> Result<Vec<Composition>> {
    let index = SimplexIndex::new(parts, level)?;
    index
        .size()
        .checked_mul(parts)
        .ok_or_else(|| Error::SimplexTooLarge {
            parts,
            level,
            what: "materialized enumeration exceeds addressable memory".into(),
        })?;
    Ok(index.iter().collect())
}
