use serde::{Deserialize, Serialize};

use super::DataError;

/// Sorted, duplicate-free set of row indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct RowIndexSet(Vec<usize>);

impl RowIndexSet {
    pub fn new() -> Self {
        RowIndexSet(Vec::new())
    }

    /// Sorts and deduplicates arbitrary indices.
    pub fn from_unsorted(mut rows: Vec<usize>) -> Self {
        rows.sort_unstable();
        rows.dedup();
        RowIndexSet(rows)
    }

    /// Wraps indices that are already strictly increasing.
    pub fn from_sorted(rows: Vec<usize>) -> Self {
        debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
        RowIndexSet(rows)
    }

    /// Every index in `0..n`.
    pub fn all(n: usize) -> Self {
        RowIndexSet((0..n).collect())
    }

    pub fn check_bounds(&self, n: usize) -> Result<(), DataError> {
        match self.0.last() {
            Some(&row) if row >= n => Err(DataError::RowOutOfRange { row, n }),
            _ => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, row: usize) -> bool {
        self.0.binary_search(&row).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn union(&self, other: &RowIndexSet) -> RowIndexSet {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        RowIndexSet(out)
    }

    pub fn intersection(&self, other: &RowIndexSet) -> RowIndexSet {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        RowIndexSet(out)
    }

    pub fn difference(&self, other: &RowIndexSet) -> RowIndexSet {
        RowIndexSet(
            self.0
                .iter()
                .copied()
                .filter(|r| !other.contains(*r))
                .collect(),
        )
    }
}

impl FromIterator<usize> for RowIndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        RowIndexSet::from_unsorted(iter.into_iter().collect())
    }
}

impl<'de> Deserialize<'de> for RowIndexSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<usize>::deserialize(d)?;
        if rows.windows(2).any(|w| w[0] >= w[1]) {
            return Err(serde::de::Error::custom(
                "row indices must be strictly increasing",
            ));
        }
        Ok(RowIndexSet(rows))
    }
}
