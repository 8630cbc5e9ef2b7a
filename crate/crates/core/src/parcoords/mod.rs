//! Parallel-coordinates geometry and selection queries.

mod correlation;
mod duality;
mod index;
mod interval_tree;
mod layout;

pub use correlation::selection_correlation;
pub use duality::{line_to_dual_point, CartesianLine, DualPoint};
pub use index::{segment_y, LiveIndex, PairIndex, ProbeStats, Snapshot};
pub use interval_tree::IntervalTree;
pub use layout::{layout, layout_all, row_to_polyline, Axis, AxisLayout, Polyline, Vertex};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ParcoordsError {
    #[error("axis spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("column {0} is not quantitative")]
    NotQuantitative(String),
    #[error("row {row} out of range for {n} rows")]
    RowOutOfRange { row: usize, n: usize },
    #[error("layout was built for a different data source")]
    SourceMismatch,
    #[error("bad interval {0}")]
    BadInterval(String),
    #[error("axis {axis} out of range for {axes} axes")]
    BadAxis { axis: usize, axes: usize },
    #[error("axis pair {pair} out of range for {pairs} pairs")]
    BadPair { pair: usize, pairs: usize },
    #[error("probe x={x} is outside the open band ({}, {})", band.0, band.1)]
    ProbeOutsideBand { x: f64, band: (f64, f64) },
    #[error("correlation needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("correlation undefined: zero variance in column {0}")]
    ZeroVariance(String),
}
