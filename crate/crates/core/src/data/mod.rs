//! Typed columnar data sources.
//!
//! A [`DataSource`] is an immutable `n × p` table stored column-major. Every
//! column carries a [`ColumnType`]; quantitative columns hold finite numbers,
//! categorical columns hold labels, and either may hold missing cells.

mod csv_load;
mod infer;
mod merge;
mod rows;

use std::collections::HashSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use csv_load::{load_csv, CsvOptions};
pub use infer::{infer_column_type, is_missing_text};
pub use merge::{merge, MergeMode};
pub use rows::RowIndexSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("input is not valid UTF-8 (line {line}, byte offset {offset})")]
    Encoding { line: u64, offset: usize },
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("csv error: {0}")]
    Csv(String),
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("column {column:?} has {found} cells, expected {expected}")]
    ColumnLength {
        column: String,
        expected: usize,
        found: usize,
    },
    #[error("column {column:?}, row {row}: {reason}")]
    BadCell {
        column: String,
        row: usize,
        reason: String,
    },
    #[error("invalid category order for column {column:?}: {reason}")]
    BadOrder { column: String, reason: String },
    #[error("merge conflict at column {column:?}: {reason}")]
    Merge { column: String, reason: String },
    #[error("row index {row} out of range for {n} rows")]
    RowOutOfRange { row: usize, n: usize },
    #[error("unknown column {0}")]
    UnknownColumn(String),
}

/// Measurement level of a column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnType {
    Quantitative,
    Categorical,
    /// Categorical with an explicit, duplicate-free ordering of its labels.
    OrderedCategorical(Vec<String>),
}

impl ColumnType {
    pub fn ordered(order: Vec<String>) -> Result<Self, DataError> {
        validate_order("", &order)?;
        Ok(ColumnType::OrderedCategorical(order))
    }

    pub fn is_quantitative(&self) -> bool {
        matches!(self, ColumnType::Quantitative)
    }

    /// Wire tag for this type.
    pub fn tag(&self) -> &'static str {
        match self {
            ColumnType::Quantitative => "quantitative",
            ColumnType::Categorical => "categorical",
            ColumnType::OrderedCategorical(_) => "ordered",
        }
    }
}

fn validate_order(column: &str, order: &[String]) -> Result<(), DataError> {
    if order.is_empty() {
        return Err(DataError::BadOrder {
            column: column.to_string(),
            reason: "order list is empty".into(),
        });
    }
    let mut seen = HashSet::with_capacity(order.len());
    for label in order {
        if !seen.insert(label.as_str()) {
            return Err(DataError::BadOrder {
                column: column.to_string(),
                reason: format!("duplicate label {label:?}"),
            });
        }
    }
    Ok(())
}

/// A single cell as seen from outside the columnar storage.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Category(String),
    Missing,
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(v) => write!(f, "{v}"),
            Value::Category(s) => f.write_str(s),
            Value::Missing => Ok(()),
        }
    }
}

/// Per-column cell storage.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numbers(Vec<Option<f64>>),
    Labels(Vec<Option<String>>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numbers(v) => v.len(),
            ColumnData::Labels(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, row: usize) -> Value {
        match self {
            ColumnData::Numbers(v) => v[row].map_or(Value::Missing, Value::Number),
            ColumnData::Labels(v) => v[row].clone().map_or(Value::Missing, Value::Category),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub ty: ColumnType,
    pub data: ColumnData,
}

impl Column {
    pub fn quantitative(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        Column {
            name: name.into(),
            ty: ColumnType::Quantitative,
            data: ColumnData::Numbers(values),
        }
    }

    pub fn categorical(name: impl Into<String>, values: Vec<Option<String>>) -> Self {
        Column {
            name: name.into(),
            ty: ColumnType::Categorical,
            data: ColumnData::Labels(values),
        }
    }

    pub fn ordered(
        name: impl Into<String>,
        order: Vec<String>,
        values: Vec<Option<String>>,
    ) -> Self {
        Column {
            name: name.into(),
            ty: ColumnType::OrderedCategorical(order),
            data: ColumnData::Labels(values),
        }
    }

    /// Numeric cells, or `None` for label columns.
    pub fn numbers(&self) -> Option<&[Option<f64>]> {
        match &self.data {
            ColumnData::Numbers(v) => Some(v),
            ColumnData::Labels(_) => None,
        }
    }

    pub fn labels(&self) -> Option<&[Option<String>]> {
        match &self.data {
            ColumnData::Labels(v) => Some(v),
            ColumnData::Numbers(_) => None,
        }
    }

    /// Min and max over the non-missing numeric cells.
    pub fn numeric_range(&self) -> Option<(f64, f64)> {
        let values = self.numbers()?;
        values.iter().flatten().fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((f64::min(lo, v), f64::max(hi, v))),
        })
    }
}

/// Identity token of a data source within this process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SourceId(pub u64);

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ds{}", self.0)
    }
}

static NEXT_SOURCE_ID: AtomicU64 = AtomicU64::new(0);

fn next_source_id() -> SourceId {
    SourceId(NEXT_SOURCE_ID.fetch_add(1, Ordering::Relaxed))
}

/// An immutable, typed, column-major table.
///
/// Equality compares content (name, schema and cells) and ignores the
/// identity token, so a source and its wire round trip compare equal.
#[derive(Debug, Clone)]
pub struct DataSource {
    id: SourceId,
    name: String,
    n_rows: usize,
    columns: Vec<Column>,
}

impl PartialEq for DataSource {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.n_rows == other.n_rows && self.columns == other.columns
    }
}

impl DataSource {
    /// Builds a source from columns, checking every table invariant.
    ///
    /// `n_rows` is needed explicitly because a table with zero columns still
    /// has a row count.
    pub fn new(
        name: impl Into<String>,
        n_rows: usize,
        columns: Vec<Column>,
    ) -> Result<Self, DataError> {
        let mut names = HashSet::with_capacity(columns.len());
        for col in &columns {
            if !names.insert(col.name.as_str()) {
                return Err(DataError::DuplicateColumn(col.name.clone()));
            }
            if col.data.len() != n_rows {
                return Err(DataError::ColumnLength {
                    column: col.name.clone(),
                    expected: n_rows,
                    found: col.data.len(),
                });
            }
            match (&col.ty, &col.data) {
                (ColumnType::Quantitative, ColumnData::Numbers(values)) => {
                    if let Some(row) = values.iter().position(|v| v.is_some_and(|v| !v.is_finite()))
                    {
                        return Err(DataError::BadCell {
                            column: col.name.clone(),
                            row,
                            reason: "quantitative cells must be finite".into(),
                        });
                    }
                }
                (ColumnType::Categorical, ColumnData::Labels(_)) => {}
                (ColumnType::OrderedCategorical(order), ColumnData::Labels(values)) => {
                    validate_order(&col.name, order)?;
                    let allowed: HashSet<&str> = order.iter().map(String::as_str).collect();
                    if let Some(row) = values
                        .iter()
                        .position(|v| v.as_deref().is_some_and(|s| !allowed.contains(s)))
                    {
                        return Err(DataError::BadCell {
                            column: col.name.clone(),
                            row,
                            reason: "label not in the declared order".into(),
                        });
                    }
                }
                _ => {
                    return Err(DataError::BadCell {
                        column: col.name.clone(),
                        row: 0,
                        reason: "storage does not match the column type".into(),
                    })
                }
            }
        }
        Ok(DataSource {
            id: next_source_id(),
            name: name.into(),
            n_rows,
            columns,
        })
    }

    pub fn id(&self) -> SourceId {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn value(&self, row: usize, col: usize) -> Value {
        self.columns[col].data.value(row)
    }

    /// Returns a copy with a new name and a fresh identity.
    pub fn renamed(&self, name: impl Into<String>) -> DataSource {
        DataSource {
            id: next_source_id(),
            name: name.into(),
            n_rows: self.n_rows,
            columns: self.columns.clone(),
        }
    }

    /// Builds an all-quantitative source from row-major data.
    pub fn from_rows(
        name: impl Into<String>,
        column_names: &[&str],
        rows: &[Vec<f64>],
    ) -> Result<Self, DataError> {
        let p = column_names.len();
        let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(rows.len()); p];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(DataError::RaggedRow {
                    line: r as u64 + 1,
                    expected: p,
                    found: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                cols[c].push(if v.is_nan() { None } else { Some(v) });
            }
        }
        let columns = column_names
            .iter()
            .zip(cols)
            .map(|(n, v)| Column::quantitative(*n, v))
            .collect();
        DataSource::new(name, rows.len(), columns)
    }
}
