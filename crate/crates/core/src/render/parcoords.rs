use super::svg::{num, Doc};
use super::{check_size, draw_order, topmost_group, RenderError, MARGIN, NEUTRAL_GRAY};
use crate::data::DataSource;
use crate::parcoords::{row_to_polyline, AxisLayout};
use crate::selection::SelectionGroup;

/// Renders every row of `data` over vertical axes. Unbroken rows become one
/// `polyline.row` each; rows with missing values are drawn as their
/// contiguous runs (`polyline.row-part`).
pub fn render_parcoords(
    layout: &AxisLayout,
    data: &DataSource,
    groups: &[SelectionGroup],
    size: (u32, u32),
) -> Result<String, RenderError> {
    let (w, h) = check_size(size)?;
    if layout.source != data.id() {
        return Err(RenderError::SourceMismatch);
    }
    let (left, top) = (MARGIN, MARGIN);
    let width = (w - 2.0 * MARGIN).max(1.0);
    let height = (h - 2.0 * MARGIN).max(1.0);
    let p = layout.len();
    let span = layout.axis_x(p.saturating_sub(1));
    let px = |x: f64| {
        if span > 0.0 {
            left + x / span * width
        } else {
            left + width / 2.0
        }
    };
    let py = |y: f64| top + height - y * height;

    let mut doc = Doc::new(w, h);
    let groups: Vec<&SelectionGroup> = groups.iter().filter(|g| g.source == data.id()).collect();
    let owner = topmost_group(data.n_rows(), &groups);
    doc.raw("<g class=\"rows\">");
    for row in draw_order(&owner, groups.len()) {
        let line = row_to_polyline(layout, data, row).map_err(|_| RenderError::SourceMismatch)?;
        let (style, group) = match owner[row] {
            Some(k) => (
                format!("fill:none;stroke:{};stroke-opacity:{};stroke-width:1", groups[k].color, groups[k].alpha),
                format!(" data-group=\"{}\"", groups[k].id),
            ),
            None => (
                format!("fill:none;stroke:{NEUTRAL_GRAY};stroke-opacity:0.6;stroke-width:1"),
                String::new(),
            ),
        };
        if !line.is_broken() {
            let points = Doc::points(line.vertices.iter().map(|v| (px(v.x), py(v.y.expect("unbroken")))));
            doc.raw(&format!(
                "<polyline class=\"row\" data-row=\"{row}\"{group} points=\"{points}\" style=\"{style}\"/>"
            ));
        } else {
            for run in line.runs() {
                let points = Doc::points(run.iter().map(|&(x, y)| (px(x), py(y))));
                doc.raw(&format!(
                    "<polyline class=\"row-part\" data-row=\"{row}\"{group} points=\"{points}\" style=\"{style}\"/>"
                ));
            }
        }
    }
    doc.raw("</g>");
    for (i, axis) in layout.axes.iter().enumerate() {
        let x = px(layout.axis_x(i));
        doc.line("axis", (x, top), (x, top + height), "stroke:#000000;stroke-width:1");
        doc.text("axis-label", (x, top + height + 16.0), "middle", "", &axis.name);
        doc.text("tick-label", (x + 3.0, top + height - 2.0), "start", "", &num(axis.min));
        doc.text("tick-label", (x + 3.0, top + 10.0), "start", "", &num(axis.max));
    }
    Ok(doc.finish())
}
