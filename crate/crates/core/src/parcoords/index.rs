//! Query index over one dataset version.
//!
//! Per axis the non-missing rows are kept sorted by value, which answers
//! axis-interval brushes by binary search. Per adjacent axis pair the index
//! keeps rows sorted by slope and an [`IntervalTree`] over each row's
//! segment bounding interval `[min(y_i, y_i+1), max(y_i, y_i+1)]`; a brush
//! probe first collects rows whose bounding interval overlaps the probe and
//! then applies the exact interpolation test to those survivors only.

use std::sync::{Arc, RwLock};

use super::interval_tree::IntervalTree;
use super::layout::AxisLayout;
use super::ParcoordsError;
use crate::data::{DataSource, RowIndexSet};

#[derive(Debug, Clone)]
struct AxisEntry {
    /// (raw value, row), ascending by value.
    by_value: Vec<(f64, u32)>,
    /// Normalized y per row.
    y: Vec<Option<f64>>,
}

#[derive(Debug, Clone)]
struct PairEntry {
    /// (slope in normalized units, row), ascending.
    by_slope: Vec<(f64, u32)>,
    bounds: IntervalTree,
}

/// Candidate counts for one brush probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ProbeStats {
    /// Rows surviving the bounding-interval prefilter.
    pub candidates: usize,
    /// Rows a brute-force scan would have tested (unbroken rows on the pair).
    pub scanned: usize,
}

/// `y_i + t (y_{i+1} - y_i)`, clamped to the segment's own y-range.
pub fn segment_y(y0: f64, y1: f64, t: f64) -> f64 {
    (y0 + t * (y1 - y0)).clamp(y0.min(y1), y0.max(y1))
}

#[derive(Debug, Clone)]
pub struct PairIndex {
    layout: AxisLayout,
    n_rows: usize,
    axes: Vec<AxisEntry>,
    pairs: Vec<PairEntry>,
}

impl PairIndex {
    pub fn build(layout: &AxisLayout, data: &DataSource) -> Result<Self, ParcoordsError> {
        layout.check_source(data)?;
        let n = data.n_rows();
        let axes: Vec<AxisEntry> = layout
            .axes
            .iter()
            .map(|axis| {
                let values = data.columns()[axis.column]
                    .numbers()
                    .expect("layout axes are quantitative");
                let mut by_value: Vec<(f64, u32)> = values
                    .iter()
                    .enumerate()
                    .filter_map(|(r, v)| v.map(|v| (v, r as u32)))
                    .collect();
                by_value.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let y = values.iter().map(|v| v.map(|v| axis.normalize(v))).collect();
                AxisEntry { by_value, y }
            })
            .collect();
        let d = layout.spacing;
        let pairs = axes
            .windows(2)
            .map(|w| {
                let (left, right) = (&w[0].y, &w[1].y);
                let mut by_slope = Vec::new();
                let mut intervals = Vec::new();
                for r in 0..n {
                    if let (Some(a), Some(b)) = (left[r], right[r]) {
                        by_slope.push(((b - a) / d, r as u32));
                        intervals.push((a.min(b), a.max(b), r as u32));
                    }
                }
                by_slope.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                PairEntry {
                    by_slope,
                    bounds: IntervalTree::build(intervals),
                }
            })
            .collect();
        Ok(PairIndex {
            layout: layout.clone(),
            n_rows: n,
            axes,
            pairs,
        })
    }

    pub fn layout(&self) -> &AxisLayout {
        &self.layout
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Normalized y of `row` on `axis`.
    pub fn y(&self, axis: usize, row: usize) -> Option<f64> {
        self.axes[axis].y[row]
    }

    fn check_axis(&self, axis: usize) -> Result<(), ParcoordsError> {
        if axis >= self.axes.len() {
            return Err(ParcoordsError::BadAxis {
                axis,
                axes: self.axes.len(),
            });
        }
        Ok(())
    }

    fn check_pair(&self, pair: usize) -> Result<&PairEntry, ParcoordsError> {
        self.pairs.get(pair).ok_or(ParcoordsError::BadPair {
            pair,
            pairs: self.pairs.len(),
        })
    }

    fn check_interval(lo: f64, hi: f64) -> Result<(), ParcoordsError> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(ParcoordsError::BadInterval(format!("[{lo}, {hi}]")));
        }
        Ok(())
    }

    /// Rows with `lo <= value <= hi` on `axis`, in data units.
    pub fn axis_interval_query(
        &self,
        axis: usize,
        lo: f64,
        hi: f64,
    ) -> Result<RowIndexSet, ParcoordsError> {
        self.check_axis(axis)?;
        Self::check_interval(lo, hi)?;
        let sorted = &self.axes[axis].by_value;
        let start = sorted.partition_point(|&(v, _)| v < lo);
        let end = sorted.partition_point(|&(v, _)| v <= hi);
        let rows = sorted[start..end.max(start)]
            .iter()
            .map(|&(_, r)| r as usize)
            .collect();
        Ok(RowIndexSet::from_unsorted(rows))
    }

    /// Rows whose segment between axes `pair` and `pair + 1` crosses the
    /// vertical probe at layout x-coordinate `x` within `[ylo, yhi]`
    /// (normalized units).
    pub fn brush_segment_query(
        &self,
        pair: usize,
        x: f64,
        ylo: f64,
        yhi: f64,
    ) -> Result<RowIndexSet, ParcoordsError> {
        self.brush_segment_query_with_stats(pair, x, ylo, yhi)
            .map(|(rows, _)| rows)
    }

    pub fn brush_segment_query_with_stats(
        &self,
        pair: usize,
        x: f64,
        ylo: f64,
        yhi: f64,
    ) -> Result<(RowIndexSet, ProbeStats), ParcoordsError> {
        let entry = self.check_pair(pair)?;
        Self::check_interval(ylo, yhi)?;
        let (x0, x1) = (self.layout.axis_x(pair), self.layout.axis_x(pair + 1));
        if !(x > x0 && x < x1) {
            return Err(ParcoordsError::ProbeOutsideBand { x, band: (x0, x1) });
        }
        let t = (x - x0) / self.layout.spacing;
        let (left, right) = (&self.axes[pair].y, &self.axes[pair + 1].y);
        let mut stats = ProbeStats {
            candidates: 0,
            scanned: entry.by_slope.len(),
        };
        let mut rows = Vec::new();
        entry.bounds.overlapping(ylo, yhi, |r| {
            stats.candidates += 1;
            let r = r as usize;
            let (Some(a), Some(b)) = (left[r], right[r]) else {
                unreachable!("only unbroken rows are indexed")
            };
            let y = segment_y(a, b, t);
            if ylo <= y && y <= yhi {
                rows.push(r);
            }
        });
        Ok((RowIndexSet::from_unsorted(rows), stats))
    }

    /// Rows with `s_lo <= (y_{i+1} - y_i) / spacing <= s_hi`. Infinite bounds
    /// act as sentinels.
    pub fn slope_query(
        &self,
        pair: usize,
        s_lo: f64,
        s_hi: f64,
    ) -> Result<RowIndexSet, ParcoordsError> {
        let entry = self.check_pair(pair)?;
        Self::check_interval(s_lo, s_hi)?;
        let sorted = &entry.by_slope;
        let start = sorted.partition_point(|&(s, _)| s < s_lo);
        let end = sorted.partition_point(|&(s, _)| s <= s_hi);
        Ok(RowIndexSet::from_unsorted(
            sorted[start..end.max(start)]
                .iter()
                .map(|&(_, r)| r as usize)
                .collect(),
        ))
    }
}

/// One published dataset version with its layout and index.
#[derive(Debug)]
pub struct Snapshot {
    pub version: u64,
    pub data: Arc<DataSource>,
    pub index: PairIndex,
}

/// Holder that swaps in a freshly built index per dataset version. Readers
/// take an `Arc` to the current snapshot and keep using it across a swap.
#[derive(Debug)]
pub struct LiveIndex {
    axes: Vec<String>,
    spacing: f64,
    current: RwLock<Arc<Snapshot>>,
}

impl LiveIndex {
    pub fn new(data: Arc<DataSource>, axes: &[&str], spacing: f64) -> Result<Self, ParcoordsError> {
        let layout = super::layout(&data, axes, spacing)?;
        let index = PairIndex::build(&layout, &data)?;
        Ok(LiveIndex {
            axes: axes.iter().map(|s| s.to_string()).collect(),
            spacing,
            current: RwLock::new(Arc::new(Snapshot {
                version: 0,
                data,
                index,
            })),
        })
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().expect("index lock poisoned").clone()
    }

    /// Builds the index for `data` off-lock, then publishes it.
    pub fn swap(&self, data: Arc<DataSource>) -> Result<Arc<Snapshot>, ParcoordsError> {
        let axes: Vec<&str> = self.axes.iter().map(String::as_str).collect();
        let layout = super::layout(&data, &axes, self.spacing)?;
        let index = PairIndex::build(&layout, &data)?;
        let mut guard = self.current.write().expect("index lock poisoned");
        let next = Arc::new(Snapshot {
            version: guard.version + 1,
            data,
            index,
        });
        *guard = next.clone();
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parcoords::layout;
    use rand::{Rng, SeedableRng};

    fn random_table(rng: &mut impl Rng, n: usize, p: usize, missing: f64) -> DataSource {
        let names: Vec<String> = (0..p).map(|i| format!("c{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..p)
                    .map(|_| {
                        if rng.gen::<f64>() < missing {
                            f64::NAN
                        } else {
                            // Coarse values so ties and exact endpoints occur.
                            (rng.gen_range(0..40) as f64) * 0.25
                        }
                    })
                    .collect()
            })
            .collect();
        DataSource::from_rows("r", &refs, &rows).unwrap()
    }

    fn all_axes(data: &DataSource) -> Vec<&str> {
        data.columns().iter().map(|c| c.name.as_str()).collect()
    }

    fn brute_axis(l: &AxisLayout, data: &DataSource, axis: usize, lo: f64, hi: f64) -> Vec<usize> {
        let col = data.columns()[l.axes[axis].column].numbers().unwrap();
        (0..data.n_rows())
            .filter(|&r| col[r].is_some_and(|v| lo <= v && v <= hi))
            .collect()
    }

    fn brute_segment(l: &AxisLayout, data: &DataSource, pair: usize, x: f64, ylo: f64, yhi: f64) -> Vec<usize> {
        let t = (x - pair as f64 * l.spacing) / l.spacing;
        (0..data.n_rows())
            .filter(|&r| match (l.y(data, pair, r), l.y(data, pair + 1, r)) {
                (Some(a), Some(b)) => {
                    let y = (a + t * (b - a)).clamp(a.min(b), a.max(b));
                    ylo <= y && y <= yhi
                }
                _ => false,
            })
            .collect()
    }

    fn brute_slope(l: &AxisLayout, data: &DataSource, pair: usize, lo: f64, hi: f64) -> Vec<usize> {
        (0..data.n_rows())
            .filter(|&r| match (l.y(data, pair, r), l.y(data, pair + 1, r)) {
                (Some(a), Some(b)) => {
                    let s = (b - a) / l.spacing;
                    lo <= s && s <= hi
                }
                _ => false,
            })
            .collect()
    }

    #[test]
    fn queries_match_brute_force() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let data = random_table(&mut rng, 1000, 4, 0.03);
        let l = layout(&data, &all_axes(&data), 1.5).unwrap();
        let idx = PairIndex::build(&l, &data).unwrap();
        for _ in 0..200 {
            let axis = rng.gen_range(0..4);
            let a = rng.gen_range(-1.0..11.0f64);
            let b = rng.gen_range(-1.0..11.0f64);
            let (lo, hi) = (a.min(b), a.max(b));
            assert_eq!(idx.axis_interval_query(axis, lo, hi).unwrap().into_vec(), brute_axis(&l, &data, axis, lo, hi));

            let pair = rng.gen_range(0..3);
            let x = l.axis_x(pair) + rng.gen_range(0.01..0.99) * l.spacing;
            let (ya, yb) = (rng.gen::<f64>(), rng.gen::<f64>());
            let (ylo, yhi) = (ya.min(yb), ya.max(yb));
            assert_eq!(idx.brush_segment_query(pair, x, ylo, yhi).unwrap().into_vec(), brute_segment(&l, &data, pair, x, ylo, yhi));

            let (sa, sb) = (rng.gen_range(-1.0..1.0f64), rng.gen_range(-1.0..1.0f64));
            let (slo, shi) = (sa.min(sb), sa.max(sb));
            assert_eq!(idx.slope_query(pair, slo, shi).unwrap().into_vec(), brute_slope(&l, &data, pair, slo, shi));
        }
    }

    #[test]
    fn full_ranges_and_empty_results() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let data = random_table(&mut rng, 200, 3, 0.05);
        let l = layout(&data, &all_axes(&data), 1.0).unwrap();
        let idx = PairIndex::build(&l, &data).unwrap();
        let (min, max) = (l.axes[0].min, l.axes[0].max);
        let non_missing = brute_axis(&l, &data, 0, f64::NEG_INFINITY, f64::INFINITY);
        assert_eq!(idx.axis_interval_query(0, min, max).unwrap().into_vec(), non_missing);
        assert!(idx.axis_interval_query(0, min - 2.0, min - 1.0).unwrap().is_empty());
        let unbroken = brute_slope(&l, &data, 1, f64::NEG_INFINITY, f64::INFINITY);
        assert_eq!(idx.brush_segment_query(1, 1.5, 0.0, 1.0).unwrap().into_vec(), unbroken);
        assert_eq!(idx.slope_query(1, f64::NEG_INFINITY, f64::INFINITY).unwrap().into_vec(), unbroken);
    }

    #[test]
    fn crossing_pair_at_midpoint() {
        // Row 0 goes 0 -> 1, row 1 goes 1 -> 0; they cross at t = 0.5, y = 0.5.
        let data = DataSource::from_rows("x", &["a", "b"], &[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let l = layout(&data, &["a", "b"], 2.0).unwrap();
        let idx = PairIndex::build(&l, &data).unwrap();
        assert_eq!(idx.brush_segment_query(0, 1.0, 0.5, 0.5).unwrap().into_vec(), vec![2, 3]);
    }

    #[test]
    fn zero_slope_included() {
        let data = DataSource::from_rows("z", &["a", "b"], &[vec![1.0, 5.0], vec![3.0, 7.0], vec![2.0, 9.0]]).unwrap();
        let l = layout(&data, &["a", "b"], 1.0).unwrap();
        let idx = PairIndex::build(&l, &data).unwrap();
        // Row 0 normalizes to (0, 0) and row 1 to (1, 0.5).
        assert_eq!(idx.slope_query(0, 0.0, 0.0).unwrap().into_vec(), vec![0]);
    }

    #[test]
    fn argument_errors() {
        let data = DataSource::from_rows("e", &["a", "b"], &[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let l = layout(&data, &["a", "b"], 1.0).unwrap();
        let idx = PairIndex::build(&l, &data).unwrap();
        assert!(matches!(idx.axis_interval_query(2, 0.0, 1.0), Err(ParcoordsError::BadAxis { .. })));
        assert!(matches!(idx.axis_interval_query(0, 1.0, 0.0), Err(ParcoordsError::BadInterval(_))));
        assert!(matches!(idx.slope_query(1, 0.0, 1.0), Err(ParcoordsError::BadPair { .. })));
        for x in [0.0, 1.0, -0.5, 1.5] {
            assert!(matches!(idx.brush_segment_query(0, x, 0.0, 1.0), Err(ParcoordsError::ProbeOutsideBand { .. })));
        }
        let other = data.renamed("e2");
        assert!(matches!(PairIndex::build(&l, &other), Err(ParcoordsError::SourceMismatch)));
    }

    #[test]
    fn live_index_matches_fresh_build_after_swaps() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let first = Arc::new(random_table(&mut rng, 300, 3, 0.02));
        let axes = ["c0", "c1", "c2"];
        let live = LiveIndex::new(first, &axes, 1.0).unwrap();
        let held = live.snapshot();
        for version in 1..=5 {
            let n = rng.gen_range(0..400);
            let data = Arc::new(random_table(&mut rng, n, 3, 0.02));
            live.swap(data.clone()).unwrap();
            let snap = live.snapshot();
            assert_eq!(snap.version, version);
            let fresh = PairIndex::build(&layout(&data, &axes, 1.0).unwrap(), &data).unwrap();
            for _ in 0..20 {
                let pair = rng.gen_range(0..2);
                let x = pair as f64 + rng.gen_range(0.05..0.95);
                let (a, b) = (rng.gen::<f64>(), rng.gen::<f64>());
                assert_eq!(
                    snap.index.brush_segment_query(pair, x, a.min(b), a.max(b)).unwrap(),
                    fresh.brush_segment_query(pair, x, a.min(b), a.max(b)).unwrap()
                );
                assert_eq!(
                    snap.index.axis_interval_query(pair, a * 10.0, a * 10.0 + b).unwrap(),
                    fresh.axis_interval_query(pair, a * 10.0, a * 10.0 + b).unwrap()
                );
                assert_eq!(snap.index.slope_query(pair, -a, b).unwrap(), fresh.slope_query(pair, -a, b).unwrap());
            }
        }
        // A reader holding the first snapshot still sees version 0.
        assert_eq!(held.version, 0);
        assert_eq!(held.index.n_rows(), 300);
    }
}
