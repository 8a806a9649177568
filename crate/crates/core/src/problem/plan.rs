use std::collections::BTreeMap;

use crate::error::{Result, UotError};
use crate::scalar::Scalar;

/// A cell `(row, column)` of the transport plan.
pub type Index = (usize, usize);

/// Set of plan cells, kept sorted so that iteration follows linear index `i·n + j`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportSet {
    elems: Vec<Index>,
}

impl SupportSet {
    pub fn new() -> Self {
        SupportSet { elems: Vec::new() }
    }

    /// Rejects duplicates.
    pub fn from_elements(mut elems: Vec<Index>) -> Result<Self> {
        elems.sort_unstable();
        if let Some(w) = elems.windows(2).find(|w| w[0] == w[1]) {
            return Err(UotError::input(format!(
                "support contains ({}, {}) twice",
                w[0].0, w[0].1
            )));
        }
        Ok(SupportSet { elems })
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, u: Index) -> bool {
        self.elems.binary_search(&u).is_ok()
    }

    pub fn position(&self, u: Index) -> Option<usize> {
        self.elems.binary_search(&u).ok()
    }

    /// Returns false when `u` was already present.
    pub fn insert(&mut self, u: Index) -> bool {
        match self.elems.binary_search(&u) {
            Ok(_) => false,
            Err(p) => {
                self.elems.insert(p, u);
                true
            }
        }
    }

    pub fn with(&self, u: Index) -> Self {
        let mut s = self.clone();
        s.insert(u);
        s
    }

    pub fn union(&self, other: &SupportSet) -> Self {
        let mut s = self.clone();
        for &u in &other.elems {
            s.insert(u);
        }
        s
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.elems.iter().all(|&u| other.contains(u))
    }

    pub fn is_disjoint(&self, other: &SupportSet) -> bool {
        self.elems.iter().all(|&u| !other.contains(u))
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Index> {
        self.elems.iter()
    }

    pub fn as_slice(&self) -> &[Index] {
        &self.elems
    }

    /// Number of elements in column `j`.
    pub fn count_in_column(&self, j: usize) -> usize {
        self.elems.iter().filter(|u| u.1 == j).count()
    }
}

impl FromIterator<Index> for SupportSet {
    /// Collects, silently dropping duplicates.
    fn from_iter<I: IntoIterator<Item = Index>>(iter: I) -> Self {
        let mut elems: Vec<Index> = iter.into_iter().collect();
        elems.sort_unstable();
        elems.dedup();
        SupportSet { elems }
    }
}

impl<'a> IntoIterator for &'a SupportSet {
    type Item = &'a Index;
    type IntoIter = std::slice::Iter<'a, Index>;

    fn into_iter(self) -> Self::IntoIter {
        self.elems.iter()
    }
}

/// Nonnegative plan whose nonzeros lie inside `support`; every other cell is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePlan<T> {
    support: SupportSet,
    values: Vec<T>,
}

impl<T: Scalar> SparsePlan<T> {
    pub fn zero() -> Self {
        SparsePlan {
            support: SupportSet::new(),
            values: Vec::new(),
        }
    }

    /// All-zero values on `support`.
    pub fn zeros_on(support: SupportSet) -> Self {
        let values = vec![T::zero(); support.len()];
        SparsePlan { support, values }
    }

    /// `values[k]` belongs to the k-th element of `support` in sorted order.
    pub fn new(support: SupportSet, values: Vec<T>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(UotError::dimension(format!(
                "support has {} elements but {} values were given",
                support.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite() || *v < T::zero()) {
            let (i, j) = support.as_slice()[k];
            return Err(UotError::input(format!(
                "plan value at ({i}, {j}) is negative or non-finite"
            )));
        }
        Ok(SparsePlan { support, values })
    }

    /// Builds from `(cell, value)` pairs in any order; duplicates are an error.
    pub fn from_entries(entries: Vec<(Index, T)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (u, v) in entries {
            if map.insert(u, v).is_some() {
                return Err(UotError::input(format!("plan lists ({}, {}) twice", u.0, u.1)));
            }
        }
        let (idx, vals): (Vec<Index>, Vec<T>) = map.into_iter().unzip();
        SparsePlan::new(SupportSet { elems: idx }, vals)
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Index, &T)> {
        self.support.iter().zip(self.values.iter())
    }

    /// Mass at `u`; zero outside the support.
    pub fn value_at(&self, u: Index) -> T {
        self.support
            .position(u)
            .map_or_else(T::zero, |p| self.values[p])
    }

    /// Cells with value strictly above `tol`.
    pub fn nonzero_support(&self, tol: T) -> SupportSet {
        self.entries()
            .filter(|(_, &v)| v > tol)
            .map(|(&u, _)| u)
            .collect()
    }

    /// Copy of the plan on `support`, keeping the values it already has there.
    pub fn restricted_to(&self, support: &SupportSet) -> Self {
        let values = support.iter().map(|&u| self.value_at(u)).collect();
        SparsePlan {
            support: support.clone(),
            values,
        }
    }

    /// Drops entries at or below `tol`.
    pub fn pruned(&self, tol: T) -> Self {
        let (idx, vals): (Vec<Index>, Vec<T>) = self
            .entries()
            .filter(|(_, &v)| v > tol)
            .map(|(&u, &v)| (u, v))
            .unzip();
        SparsePlan {
            support: SupportSet { elems: idx },
            values: vals,
        }
    }

    pub fn total_mass(&self) -> T {
        self.values.iter().copied().sum()
    }

    /// Dense row-major copy, for tests and small reports.
    pub fn to_dense(&self, rows: usize, cols: usize) -> Vec<T> {
        let mut d = vec![T::zero(); rows * cols];
        for (&(i, j), &v) in self.entries() {
            d[i * cols + j] = v;
        }
        d
    }

    /// Largest number of entries above `tol` in any column, with that column.
    pub fn max_column_count(&self, tol: T) -> Option<(usize, usize)> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for (&(_, j), &v) in self.entries() {
            if v > tol {
                *counts.entry(j).or_default() += 1;
            }
        }
        counts.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
    }
}
