//! Static interval tree over closed intervals.
//!
//! Intervals are sorted by lower bound and viewed as an implicit balanced
//! binary tree (the middle of each range is its root). Every node records the
//! largest upper bound in its subtree, which lets overlap queries skip whole
//! subtrees that end before the query starts.

#[derive(Debug, Clone, Default)]
pub struct IntervalTree {
    lo: Vec<f64>,
    hi: Vec<f64>,
    id: Vec<u32>,
    max_hi: Vec<f64>,
}

impl IntervalTree {
    pub fn build(mut intervals: Vec<(f64, f64, u32)>) -> Self {
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
        let n = intervals.len();
        let mut tree = IntervalTree {
            lo: Vec::with_capacity(n),
            hi: Vec::with_capacity(n),
            id: Vec::with_capacity(n),
            max_hi: vec![f64::NEG_INFINITY; n],
        };
        for (lo, hi, id) in intervals {
            debug_assert!(lo <= hi);
            tree.lo.push(lo);
            tree.hi.push(hi);
            tree.id.push(id);
        }
        tree.fill_max(0, n);
        tree
    }

    fn fill_max(&mut self, l: usize, r: usize) -> f64 {
        if l >= r {
            return f64::NEG_INFINITY;
        }
        let mid = l + (r - l) / 2;
        let m = self.hi[mid]
            .max(self.fill_max(l, mid))
            .max(self.fill_max(mid + 1, r));
        self.max_hi[mid] = m;
        m
    }

    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    /// Calls `emit` with the id of every interval overlapping `[qlo, qhi]`.
    pub fn overlapping(&self, qlo: f64, qhi: f64, mut emit: impl FnMut(u32)) {
        self.visit(0, self.len(), qlo, qhi, &mut emit);
    }

    fn visit(&self, l: usize, r: usize, qlo: f64, qhi: f64, emit: &mut impl FnMut(u32)) {
        if l >= r {
            return;
        }
        let mid = l + (r - l) / 2;
        if self.max_hi[mid] < qlo {
            return;
        }
        self.visit(l, mid, qlo, qhi, emit);
        if self.lo[mid] <= qhi {
            if self.hi[mid] >= qlo {
                emit(self.id[mid]);
            }
            self.visit(mid + 1, r, qlo, qhi, emit);
        }
    }
}
