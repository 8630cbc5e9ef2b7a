use serde::Serialize;

use super::ParcoordsError;
use crate::data::{DataSource, SourceId};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    #[serde(skip)]
    pub column: usize,
    /// Normalization range; always `min < max`.
    pub min: f64,
    pub max: f64,
}

impl Axis {
    pub fn normalize(&self, v: f64) -> f64 {
        (v - self.min) / (self.max - self.min)
    }
}

/// Ordered parallel axes at `x = i * spacing`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisLayout {
    #[serde(skip)]
    pub source: SourceId,
    pub axes: Vec<Axis>,
    pub spacing: f64,
}

/// Lays out the named quantitative columns. Constant columns get the range
/// `[v - 0.5, v + 0.5]`; all-missing columns get `[0, 1]`.
pub fn layout(data: &DataSource, axes: &[&str], spacing: f64) -> Result<AxisLayout, ParcoordsError> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(ParcoordsError::BadSpacing(spacing));
    }
    let axes = axes
        .iter()
        .map(|&name| {
            let column = data
                .column_index(name)
                .ok_or_else(|| ParcoordsError::UnknownColumn(name.to_string()))?;
            let col = &data.columns()[column];
            if !col.ty.is_quantitative() {
                return Err(ParcoordsError::NotQuantitative(name.to_string()));
            }
            let (min, max) = match col.numeric_range() {
                Some((lo, hi)) if lo < hi => (lo, hi),
                Some((v, _)) => (v - 0.5, v + 0.5),
                None => (0.0, 1.0),
            };
            Ok(Axis {
                name: name.to_string(),
                column,
                min,
                max,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AxisLayout {
        source: data.id(),
        axes,
        spacing,
    })
}

/// Lays out every quantitative column in table order.
pub fn layout_all(data: &DataSource, spacing: f64) -> Result<AxisLayout, ParcoordsError> {
    let names: Vec<&str> = data
        .columns()
        .iter()
        .filter(|c| c.ty.is_quantitative())
        .map(|c| c.name.as_str())
        .collect();
    layout(data, &names, spacing)
}

impl AxisLayout {
    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    pub fn axis_x(&self, i: usize) -> f64 {
        i as f64 * self.spacing
    }

    pub(crate) fn check_source(&self, data: &DataSource) -> Result<(), ParcoordsError> {
        if data.id() != self.source {
            return Err(ParcoordsError::SourceMismatch);
        }
        Ok(())
    }

    /// Normalized value of `row` on axis `i`, `None` when missing.
    pub fn y(&self, data: &DataSource, i: usize, row: usize) -> Option<f64> {
        let axis = &self.axes[i];
        data.columns()[axis.column].numbers()?[row].map(|v| axis.normalize(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Vertex {
    pub x: f64,
    /// `None` breaks the polyline at this axis.
    pub y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polyline {
    pub row: usize,
    pub vertices: Vec<Vertex>,
}

impl Polyline {
    pub fn is_broken(&self) -> bool {
        self.vertices.iter().any(|v| v.y.is_none())
    }

    /// Maximal runs of consecutive present vertices with at least two points.
    pub fn runs(&self) -> Vec<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        for v in &self.vertices {
            match v.y {
                Some(y) => cur.push((v.x, y)),
                None => {
                    if cur.len() >= 2 {
                        out.push(std::mem::take(&mut cur));
                    }
                    cur.clear();
                }
            }
        }
        if cur.len() >= 2 {
            out.push(cur);
        }
        out
    }

    /// Segment endpoints between adjacent axes, skipping broken ones.
    pub fn segments(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        self.vertices.windows(2).filter_map(|w| match (w[0].y, w[1].y) {
            (Some(a), Some(b)) => Some(((w[0].x, a), (w[1].x, b))),
            _ => None,
        })
    }
}

pub fn row_to_polyline(
    layout: &AxisLayout,
    data: &DataSource,
    row: usize,
) -> Result<Polyline, ParcoordsError> {
    layout.check_source(data)?;
    if row >= data.n_rows() {
        return Err(ParcoordsError::RowOutOfRange {
            row,
            n: data.n_rows(),
        });
    }
    let vertices = (0..layout.len())
        .map(|i| Vertex {
            x: layout.axis_x(i),
            y: layout.y(data, i, row),
        })
        .collect();
    Ok(Polyline { row, vertices })
}
