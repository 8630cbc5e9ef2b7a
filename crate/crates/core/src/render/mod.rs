//! Deterministic SVG 1.1 export.

mod parcoords;
mod scene;
mod svg;

pub use parcoords::render_parcoords;
pub use scene::render_scene;

/// Margin around the plot area in px.
pub const MARGIN: f64 = 40.0;
/// Stroke/fill for rows that belong to no group.
pub const NEUTRAL_GRAY: &str = "#a0a0a0";

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RenderError {
    #[error("canvas size must be positive, got {0}x{1}")]
    ZeroSize(u32, u32),
    #[error("layout was built for a different data source")]
    SourceMismatch,
}

fn check_size((w, h): (u32, u32)) -> Result<(f64, f64), RenderError> {
    if w == 0 || h == 0 {
        return Err(RenderError::ZeroSize(w, h));
    }
    Ok((w as f64, h as f64))
}

/// For each row, the index in `groups` of the topmost group containing it.
fn topmost_group(n_rows: usize, groups: &[&crate::selection::SelectionGroup]) -> Vec<Option<usize>> {
    let mut owner = vec![None; n_rows];
    for (k, g) in groups.iter().enumerate() {
        for r in g.rows.iter().filter(|&r| r < n_rows) {
            owner[r] = Some(k);
        }
    }
    owner
}

/// Rows in draw order: ungrouped rows first, then each group's rows in
/// z-order, each in ascending row order.
fn draw_order(owner: &[Option<usize>], n_groups: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..owner.len()).filter(|&r| owner[r].is_none()).collect();
    for k in 0..n_groups {
        order.extend((0..owner.len()).filter(|&r| owner[r] == Some(k)));
    }
    order
}
