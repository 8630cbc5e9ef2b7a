//! Marching-squares isolines over a [`DensityGrid`].

use std::collections::HashMap;

use serde::Serialize;

use super::kde::DensityGrid;
use super::GogError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourLevel {
    pub level: f64,
    /// Closed polylines repeat their first vertex at the end.
    pub polylines: Vec<Vec<(f64, f64)>>,
}

/// Grid edge identified by its lower-left node: `H` runs to `(i+1, j)`, `V` to `(i, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

struct Marcher<'a> {
    grid: &'a DensityGrid,
    level: f64,
}

impl Marcher<'_> {
    fn above(&self, i: usize, j: usize) -> bool {
        self.grid.at(i, j) > self.level
    }

    fn crossing(&self, edge: Edge) -> (f64, f64) {
        let g = self.grid;
        let ((i0, j0), (i1, j1)) = match edge {
            Edge::H(i, j) => ((i, j), (i + 1, j)),
            Edge::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (va, vb) = (g.at(i0, j0), g.at(i1, j1));
        let t = (self.level - va) / (vb - va);
        (
            g.xs[i0] + t * (g.xs[i1] - g.xs[i0]),
            g.ys[j0] + t * (g.ys[j1] - g.ys[j0]),
        )
    }

    fn segments(&self) -> Vec<(Edge, Edge)> {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut out = Vec::new();
        for j in 0..ny.saturating_sub(1) {
            for i in 0..nx.saturating_sub(1) {
                let a00 = self.above(i, j);
                let a10 = self.above(i + 1, j);
                let a11 = self.above(i + 1, j + 1);
                let a01 = self.above(i, j + 1);
                let bottom = Edge::H(i, j);
                let right = Edge::V(i + 1, j);
                let top = Edge::H(i, j + 1);
                let left = Edge::V(i, j);
                let mut crossed = Vec::with_capacity(4);
                if a00 != a10 {
                    crossed.push(bottom);
                }
                if a10 != a11 {
                    crossed.push(right);
                }
                if a11 != a01 {
                    crossed.push(top);
                }
                if a01 != a00 {
                    crossed.push(left);
                }
                match crossed.len() {
                    0 => {}
                    2 => out.push((crossed[0], crossed[1])),
                    4 => {
                        // Saddle: the cell-centre average decides which diagonal connects.
                        let centre = (self.grid.at(i, j)
                            + self.grid.at(i + 1, j)
                            + self.grid.at(i + 1, j + 1)
                            + self.grid.at(i, j + 1))
                            / 4.0;
                        let centre_above = centre > self.level;
                        if a00 == centre_above {
                            // Corners (i+1, j) and (i, j+1) are cut off.
                            out.push((bottom, right));
                            out.push((top, left));
                        } else {
                            out.push((left, bottom));
                            out.push((right, top));
                        }
                    }
                    _ => unreachable!("a cell boundary crosses a level an even number of times"),
                }
            }
        }
        out
    }
}

fn chain(segments: Vec<(Edge, Edge)>) -> Vec<Vec<Edge>> {
    let mut adjacency: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(*a).or_default().push(k);
        adjacency.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut chains = Vec::new();

    let walk = |start_seg: usize, start_edge: Edge, used: &mut Vec<bool>| {
        let mut path = vec![start_edge];
        let mut seg = start_seg;
        let mut at = start_edge;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            path.push(next);
            at = next;
            match adjacency[&at].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => break,
            }
        }
        path
    };

    // Open chains start at an edge used by a single segment (the grid border).
    let mut starts: Vec<(Edge, usize)> = adjacency
        .iter()
        .filter(|(_, segs)| segs.len() == 1)
        .map(|(e, segs)| (*e, segs[0]))
        .collect();
    starts.sort_by_key(|&(_, s)| s);
    for (edge, seg) in starts {
        if !used[seg] {
            chains.push(walk(seg, edge, &mut used));
        }
    }
    for seg in 0..segments.len() {
        if !used[seg] {
            chains.push(walk(seg, segments[seg].0, &mut used));
        }
    }
    chains
}

/// Isolines of `grid` at each level, with vertices linearly interpolated on
/// cell edges. Levels outside the grid's value range yield no polylines.
pub fn extract_contours(grid: &DensityGrid, levels: &[f64]) -> Result<Vec<ContourLevel>, GogError> {
    if grid.values.iter().any(|v| !v.is_finite()) {
        return Err(GogError::Kde("grid contains non-finite values".into()));
    }
    if levels.iter().any(|l| !l.is_finite()) || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(GogError::Kde("contour levels must be finite and strictly increasing".into()));
    }
    Ok(levels
        .iter()
        .map(|&level| {
            let marcher = Marcher { grid, level };
            let polylines = chain(marcher.segments())
                .into_iter()
                .map(|edges| edges.into_iter().map(|e| marcher.crossing(e)).collect())
                .collect();
            ContourLevel { level, polylines }
        })
        .collect())
}

/// Five levels evenly spaced from 10% to 90% of the grid maximum.
pub fn default_levels(grid: &DensityGrid) -> Vec<f64> {
    let max = grid.max();
    if max.is_nan() || max <= 0.0 {
        return Vec::new();
    }
    (0..5).map(|k| max * (0.1 + 0.2 * k as f64)).collect()
}
