//! Bivariate product-kernel density estimation with the Epanechnikov kernel.

use serde::Serialize;

use super::GogError;

/// Epanechnikov kernel, `0.75 (1 - u²)` on `|u| <= 1`.
pub fn epanechnikov(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        0.75 * (1.0 - u * u)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdeSpec {
    pub bandwidth: (f64, f64),
    pub grid: (usize, usize),
}

pub const DEFAULT_GRID: usize = 64;

impl KdeSpec {
    pub fn new(bandwidth: (f64, f64), grid: (usize, usize)) -> Result<Self, GogError> {
        let spec = KdeSpec { bandwidth, grid };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), GogError> {
        let (hx, hy) = self.bandwidth;
        if !(hx > 0.0 && hy > 0.0 && hx.is_finite() && hy.is_finite()) {
            return Err(GogError::Kde(format!(
                "bandwidth must be positive, got ({hx}, {hy})"
            )));
        }
        if self.grid.0 < 2 || self.grid.1 < 2 {
            return Err(GogError::Kde(format!(
                "grid must be at least 2x2, got {}x{}",
                self.grid.0, self.grid.1
            )));
        }
        Ok(())
    }

    /// Silverman-style bandwidth per dimension on a 64×64 grid.
    pub fn for_points(points: &[(f64, f64)]) -> Result<Self, GogError> {
        if points.is_empty() {
            return Err(GogError::Kde("no points to estimate a density from".into()));
        }
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        KdeSpec::new(
            (silverman(&xs), silverman(&ys)),
            (DEFAULT_GRID, DEFAULT_GRID),
        )
    }
}

/// `1.06 σ n^(-1/5)`; a degenerate sample (n = 1 or zero spread) uses σ = 1.
pub fn silverman(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let sigma = if var > 0.0 { var.sqrt() } else { 1.0 };
    1.06 * sigma * n.powf(-0.2)
}

/// Regular grid of scalar samples. `values` is row-major by y:
/// the sample at `(xs[i], ys[j])` is `values[j * xs.len() + i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
}

impl DensityGrid {
    /// Builds a grid from rows, `rows[j][i]` being the sample at `(xs[i], ys[j])`.
    pub fn from_rows(xs: Vec<f64>, ys: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self, GogError> {
        if rows.len() != ys.len() || rows.iter().any(|r| r.len() != xs.len()) {
            return Err(GogError::Kde("grid rows do not match axis lengths".into()));
        }
        Ok(DensityGrid {
            xs,
            ys,
            values: rows.concat(),
        })
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.xs.len() + i]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// Evaluates the product-kernel density on a `gx × gy` grid spanning `domain`
/// (endpoints inclusive).
pub fn epanechnikov_kde_2d(
    points: &[(f64, f64)],
    spec: &KdeSpec,
    domain: ((f64, f64), (f64, f64)),
) -> Result<DensityGrid, GogError> {
    if points.is_empty() {
        return Err(GogError::Kde("no points to estimate a density from".into()));
    }
    spec.validate()?;
    let ((x0, x1), (y0, y1)) = domain;
    if !(x0 < x1 && y0 < y1) {
        return Err(GogError::Kde(format!(
            "empty domain [{x0}, {x1}] x [{y0}, {y1}]"
        )));
    }
    let (gx, gy) = spec.grid;
    let (hx, hy) = spec.bandwidth;
    let xs = linspace(x0, x1, gx);
    let ys = linspace(y0, y1, gy);
    let mut values = vec![0.0; gx * gy];

    // Each sample touches only the grid nodes within one bandwidth of it.
    let mut wx = Vec::with_capacity(gx);
    for &(px, py) in points {
        wx.clear();
        let (ilo, ihi) = support(&xs, px, hx);
        wx.extend((ilo..ihi).map(|i| epanechnikov((xs[i] - px) / hx)));
        let (jlo, jhi) = support(&ys, py, hy);
        for j in jlo..jhi {
            let ky = epanechnikov((ys[j] - py) / hy);
            if ky == 0.0 {
                continue;
            }
            let row = &mut values[j * gx + ilo..j * gx + ihi];
            for (cell, k) in row.iter_mut().zip(&wx) {
                *cell += k * ky;
            }
        }
    }
    let norm = 1.0 / (points.len() as f64 * hx * hy);
    for v in &mut values {
        *v *= norm;
    }
    Ok(DensityGrid { xs, ys, values })
}

/// Index range of sorted `axis` nodes within `h` of `center`.
fn support(axis: &[f64], center: f64, h: f64) -> (usize, usize) {
    let lo = axis.partition_point(|&v| v < center - h);
    let hi = axis.partition_point(|&v| v <= center + h);
    (lo, hi.max(lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_sample_peak() {
        let spec = KdeSpec::new((1.0, 1.0), (3, 3)).unwrap();
        let grid = epanechnikov_kde_2d(&[(0.0, 0.0)], &spec, ((-1.0, 1.0), (-1.0, 1.0))).unwrap();
        assert_eq!(grid.at(1, 1), 0.5625);
        // Grid corners sit exactly at |u| = 1.
        assert_eq!(grid.at(0, 0), 0.0);
    }

    #[test]
    fn zero_beyond_bandwidth() {
        let spec = KdeSpec::new((0.5, 2.0), (5, 5)).unwrap();
        let grid = epanechnikov_kde_2d(&[(0.0, 0.0)], &spec, ((-2.0, 2.0), (-2.0, 2.0))).unwrap();
        for j in 0..5 {
            assert_eq!(grid.at(0, j), 0.0);
            assert_eq!(grid.at(4, j), 0.0);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = KdeSpec::new((1.0, 1.0), (4, 4)).unwrap();
        assert!(epanechnikov_kde_2d(&[], &spec, ((0.0, 1.0), (0.0, 1.0))).is_err());
        assert!(KdeSpec::new((0.0, 1.0), (4, 4)).is_err());
        assert!(KdeSpec::new((1.0, 1.0), (1, 4)).is_err());
        assert!(KdeSpec::for_points(&[]).is_err());
    }

    #[test]
    fn silverman_degenerate() {
        assert!((silverman(&[3.0]) - 1.06).abs() < 1e-12);
        assert!(silverman(&[2.0, 2.0, 2.0]) > 0.0);
    }

    fn brute(points: &[(f64, f64)], spec: &KdeSpec, x: f64, y: f64) -> f64 {
        let (hx, hy) = spec.bandwidth;
        points
            .iter()
            .map(|&(px, py)| epanechnikov((x - px) / hx) * epanechnikov((y - py) / hy))
            .sum::<f64>()
            / (points.len() as f64 * hx * hy)
    }

    proptest! {
        #[test]
        fn matches_direct_sum(points in proptest::collection::vec((0f64..1.0, 0f64..1.0), 1..20)) {
            let spec = KdeSpec::new((0.3, 0.2), (9, 7)).unwrap();
            let grid = epanechnikov_kde_2d(&points, &spec, ((0.0, 1.0), (0.0, 1.0))).unwrap();
            for j in 0..7 {
                for i in 0..9 {
                    let expect = brute(&points, &spec, grid.xs[i], grid.ys[j]);
                    prop_assert!((grid.at(i, j) - expect).abs() < 1e-12);
                    prop_assert!(grid.at(i, j) >= 0.0);
                }
            }
        }

        #[test]
        fn permutation_and_duplication_invariant(points in proptest::collection::vec((0f64..1.0, 0f64..1.0), 1..20)) {
            let spec = KdeSpec::new((0.3, 0.3), (8, 8)).unwrap();
            let dom = ((0.0, 1.0), (0.0, 1.0));
            let base = epanechnikov_kde_2d(&points, &spec, dom).unwrap();
            let mut rev = points.clone();
            rev.reverse();
            let doubled: Vec<_> = points.iter().chain(points.iter()).copied().collect();
            for other in [epanechnikov_kde_2d(&rev, &spec, dom).unwrap(), epanechnikov_kde_2d(&doubled, &spec, dom).unwrap()] {
                for (a, b) in base.values.iter().zip(&other.values) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }
}
