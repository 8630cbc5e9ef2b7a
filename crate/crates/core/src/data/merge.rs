use std::collections::HashSet;

use super::{Column, ColumnData, DataError, DataSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeMode {
    /// Stack rows; schemas must match exactly.
    Rows,
    /// Place columns side by side; row counts must match and names must be disjoint.
    Columns,
}

/// Merges two sources into a new one. Inputs are left untouched.
pub fn merge(a: &DataSource, b: &DataSource, mode: MergeMode) -> Result<DataSource, DataError> {
    let name = format!("{}+{}", a.name(), b.name());
    match mode {
        MergeMode::Rows => {
            if a.n_cols() != b.n_cols() {
                let column = a
                    .columns()
                    .get(b.n_cols())
                    .or_else(|| b.columns().get(a.n_cols()))
                    .map(|c| c.name.clone())
                    .unwrap_or_default();
                return Err(DataError::Merge {
                    column,
                    reason: format!("column counts differ ({} vs {})", a.n_cols(), b.n_cols()),
                });
            }
            let mut columns = Vec::with_capacity(a.n_cols());
            for (ca, cb) in a.columns().iter().zip(b.columns()) {
                if ca.name != cb.name {
                    return Err(DataError::Merge {
                        column: ca.name.clone(),
                        reason: format!("name differs from {:?}", cb.name),
                    });
                }
                if ca.ty != cb.ty {
                    return Err(DataError::Merge {
                        column: ca.name.clone(),
                        reason: format!("type {} differs from {}", ca.ty.tag(), cb.ty.tag()),
                    });
                }
                let data = match (&ca.data, &cb.data) {
                    (ColumnData::Numbers(x), ColumnData::Numbers(y)) => {
                        ColumnData::Numbers(x.iter().chain(y).copied().collect())
                    }
                    (ColumnData::Labels(x), ColumnData::Labels(y)) => {
                        ColumnData::Labels(x.iter().chain(y).cloned().collect())
                    }
                    _ => unreachable!("same type implies same storage"),
                };
                columns.push(Column {
                    name: ca.name.clone(),
                    ty: ca.ty.clone(),
                    data,
                });
            }
            DataSource::new(name, a.n_rows() + b.n_rows(), columns)
        }
        MergeMode::Columns => {
            if a.n_rows() != b.n_rows() {
                return Err(DataError::Merge {
                    column: b.columns().first().map(|c| c.name.clone()).unwrap_or_default(),
                    reason: format!("row counts differ ({} vs {})", a.n_rows(), b.n_rows()),
                });
            }
            let names: HashSet<&str> = a.columns().iter().map(|c| c.name.as_str()).collect();
            if let Some(dup) = b.columns().iter().find(|c| names.contains(c.name.as_str())) {
                return Err(DataError::Merge {
                    column: dup.name.clone(),
                    reason: "column name present in both sources".into(),
                });
            }
            let columns = a.columns().iter().chain(b.columns()).cloned().collect();
            DataSource::new(name, a.n_rows(), columns)
        }
    }
}
