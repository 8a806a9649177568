//! Uniform and partition matroids over the cells of an m×n plan.

use serde::Serialize;

use crate::error::{Result, UotError};
use crate::problem::{Index, SupportSet};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MatroidKind {
    /// At most `k` cells overall.
    Uniform { k: usize },
    /// At most `k` cells in every column block `Pⱼ = {(i, j) : i ∈ [m]}`.
    Partition { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MatroidConstraint {
    pub kind: MatroidKind,
    pub rows: usize,
    pub cols: usize,
}

impl MatroidConstraint {
    pub fn uniform(k: usize, rows: usize, cols: usize) -> Result<Self> {
        if k == 0 || k > rows * cols {
            return Err(UotError::input(format!(
                "uniform cardinality must lie in [1, {}], got {k}",
                rows * cols
            )));
        }
        Ok(MatroidConstraint {
            kind: MatroidKind::Uniform { k },
            rows,
            cols,
        })
    }

    pub fn partition(k: usize, rows: usize, cols: usize) -> Result<Self> {
        if k == 0 || k > rows {
            return Err(UotError::input(format!(
                "per-column cardinality must lie in [1, {rows}], got {k}"
            )));
        }
        Ok(MatroidConstraint {
            kind: MatroidKind::Partition { k },
            rows,
            cols,
        })
    }

    /// Size of every base: `K₁` or `n·K₂`.
    pub fn rank(&self) -> usize {
        match self.kind {
            MatroidKind::Uniform { k } => k,
            MatroidKind::Partition { k } => self.cols * k,
        }
    }

    fn in_ground(&self, (i, j): Index) -> bool {
        i < self.rows && j < self.cols
    }

    pub fn is_independent(&self, s: &SupportSet) -> bool {
        if !s.iter().all(|&u| self.in_ground(u)) {
            return false;
        }
        match self.kind {
            MatroidKind::Uniform { k } => s.len() <= k,
            MatroidKind::Partition { k } => {
                let mut counts = vec![0usize; self.cols];
                for &(_, j) in s {
                    counts[j] += 1;
                    if counts[j] > k {
                        return false;
                    }
                }
                true
            }
        }
    }

    /// Cells `u ∉ S` with `S ∪ {u}` independent, in linear-index order.
    ///
    /// These are exactly the elements of some independent set of the contraction `M/S`.
    pub fn extension_candidates(&self, s: &SupportSet) -> Vec<Index> {
        let remaining = self.remaining_capacity(s);
        let mut out = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let cap = match self.kind {
                    MatroidKind::Uniform { .. } => remaining[0],
                    MatroidKind::Partition { .. } => remaining[j],
                };
                if cap > 0 && !s.contains((i, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Slack left after `S`: one global entry for uniform, one per column for partition.
    fn remaining_capacity(&self, s: &SupportSet) -> Vec<usize> {
        match self.kind {
            MatroidKind::Uniform { k } => vec![k.saturating_sub(s.len())],
            MatroidKind::Partition { k } => (0..self.cols)
                .map(|j| k.saturating_sub(s.count_in_column(j)))
                .collect(),
        }
    }

    /// A base of the contraction `M/S` maximizing `Σ max(0, score)`.
    ///
    /// `score` is indexed by linear index `i·n + j`; entries for cells in `S` are ignored.
    /// Blocks are filled with the highest thresholded scores; ties go to the higher raw score,
    /// then the lowest linear index. Zero-score cells are still taken so the result is maximal.
    pub fn best_base_of_contraction<T: Scalar>(&self, s: &SupportSet, score: &[T]) -> Result<SupportSet> {
        if !self.is_independent(s) {
            return Err(UotError::input("contracted set is not independent"));
        }
        if score.len() != self.rows * self.cols {
            return Err(UotError::dimension(format!(
                "expected {} scores, got {}",
                self.rows * self.cols,
                score.len()
            )));
        }
        let n = self.cols;
        let remaining = self.remaining_capacity(s);
        let raw = |u: &Index| score[u.0 * n + u.1];
        let thresholded = |u: &Index| raw(u).max(T::zero());
        let desc = |a: T, b: T| b.partial_cmp(&a).unwrap_or(std::cmp::Ordering::Equal);
        let rank = |cells: &mut Vec<Index>| {
            cells.sort_by(|x, y| {
                desc(thresholded(x), thresholded(y))
                    .then(desc(raw(x), raw(y)))
                    .then((x.0 * n + x.1).cmp(&(y.0 * n + y.1)))
            });
        };
        let mut base = SupportSet::new();
        match self.kind {
            MatroidKind::Uniform { .. } => {
                let mut cells = self.extension_candidates(s);
                rank(&mut cells);
                cells.truncate(remaining[0]);
                cells.into_iter().for_each(|u| {
                    base.insert(u);
                });
            }
            MatroidKind::Partition { .. } => {
                for (j, &cap) in remaining.iter().enumerate() {
                    if cap == 0 {
                        continue;
                    }
                    let mut cells: Vec<Index> = (0..self.rows).map(|i| (i, j)).filter(|&u| !s.contains(u)).collect();
                    rank(&mut cells);
                    cells.truncate(cap);
                    cells.into_iter().for_each(|u| {
                        base.insert(u);
                    });
                }
            }
        }
        Ok(base)
    }
}
