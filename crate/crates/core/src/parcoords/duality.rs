use serde::Serialize;

use super::ParcoordsError;

/// `y = slope * x + intercept`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CartesianLine {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DualPoint {
    Point { x: f64, y: f64 },
    /// Slope 1: every induced segment is parallel to `direction` (unit length).
    Ideal { direction: (f64, f64) },
}

/// The point in parallel coordinates (axes at `x = 0` and `x = spacing`)
/// through which every segment induced by a point of `line` passes.
pub fn line_to_dual_point(line: CartesianLine, spacing: f64) -> Result<DualPoint, ParcoordsError> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(ParcoordsError::BadSpacing(spacing));
    }
    let CartesianLine { slope, intercept } = line;
    if !(slope.is_finite() && intercept.is_finite()) {
        return Err(ParcoordsError::BadInterval(format!(
            "line coefficients must be finite, got m={slope}, b={intercept}"
        )));
    }
    if slope == 1.0 {
        let norm = spacing.hypot(intercept);
        return Ok(DualPoint::Ideal {
            direction: (spacing / norm, intercept / norm),
        });
    }
    let k = 1.0 - slope;
    Ok(DualPoint::Point {
        x: spacing / k,
        y: intercept / k,
    })
}
