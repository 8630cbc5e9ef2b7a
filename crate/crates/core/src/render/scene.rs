use super::svg::{hue_color, num, Doc};
use super::{check_size, draw_order, topmost_group, RenderError, MARGIN, NEUTRAL_GRAY};
use crate::gog::{Computed, Guide, SceneGraph};
use crate::selection::SelectionGroup;

struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (
            self.left + (x - self.x.0) / (self.x.1 - self.x.0) * self.width,
            self.top + self.height - (y - self.y.0) / (self.y.1 - self.y.0) * self.height,
        )
    }

    fn bottom(&self) -> f64 {
        self.top + self.height
    }

    fn right(&self) -> f64 {
        self.left + self.width
    }
}

fn widen(domain: Option<(f64, f64)>, fallback: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = domain.unwrap_or_else(|| {
        fallback.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    });
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

/// Renders a compiled scene. Marks whose row belongs to a group on the
/// scene's source take the topmost group's colour and alpha.
pub fn render_scene(
    scene: &SceneGraph,
    size: (u32, u32),
    groups: &[SelectionGroup],
) -> Result<String, RenderError> {
    let (w, h) = check_size(size)?;
    let lines: Vec<((f64, f64), (f64, f64))> = scene
        .guides
        .iter()
        .filter_map(|g| match g {
            Guide::FormLine { from, to, .. } => Some((*from, *to)),
            _ => None,
        })
        .collect();
    let frame = Frame {
        left: MARGIN,
        top: MARGIN,
        width: (w - 2.0 * MARGIN).max(1.0),
        height: (h - 2.0 * MARGIN).max(1.0),
        x: widen(scene.x_domain, lines.iter().flat_map(|(a, b)| [a.0, b.0])),
        y: widen(scene.y_domain, lines.iter().flat_map(|(a, b)| [a.1, b.1])),
    };
    let mut doc = Doc::new(w, h);
    doc.clip_rect("plot-area", frame.left, frame.top, frame.width, frame.height);
    doc.raw("<g clip-path=\"url(#plot-area)\">");

    let groups: Vec<&SelectionGroup> = groups.iter().filter(|g| g.source == scene.data_ref).collect();
    let mut labels = Vec::new();
    for element in &scene.elements {
        match &element.computed {
            Computed::Contours { levels, .. } => {
                for band in levels {
                    let stroke = band.hue.map(hue_color).unwrap_or_else(|| "#333333".into());
                    for line in &band.contour.polylines {
                        let mut d = String::new();
                        for (k, &p) in line.iter().enumerate() {
                            let (x, y) = frame.px(p);
                            d.push_str(if k == 0 { "M" } else { " L" });
                            d.push_str(&format!("{},{}", num(x), num(y)));
                        }
                        doc.raw(&format!(
                            "<path class=\"contour\" data-level=\"{}\" d=\"{d}\" style=\"fill:none;stroke:{stroke};stroke-width:1\"/>",
                            band.contour.level
                        ));
                    }
                }
            }
            Computed::Path { points } => {
                doc.raw(&format!(
                    "<polyline class=\"path\" points=\"{}\" style=\"fill:none;stroke:#333333;stroke-width:1.5\"/>",
                    Doc::points(points.iter().map(|&p| frame.px(p)))
                ));
            }
            Computed::Marks { marks } => {
                let n = marks.iter().map(|m| m.row + 1).max().unwrap_or(0);
                let owner = topmost_group(n, &groups);
                let by_row: std::collections::BTreeMap<usize, &crate::gog::Mark> =
                    marks.iter().map(|m| (m.row, m)).collect();
                for row in draw_order(&owner, groups.len()) {
                    let Some(mark) = by_row.get(&row) else { continue };
                    let Some(pos) = mark.position else { continue };
                    let (x, y) = frame.px(pos);
                    let (fill, alpha, group) = match owner[row] {
                        Some(k) => (groups[k].color.to_string(), groups[k].alpha, format!(" data-group=\"{}\"", groups[k].id)),
                        None => (
                            mark.hue.map(hue_color).unwrap_or_else(|| NEUTRAL_GRAY.into()),
                            1.0,
                            String::new(),
                        ),
                    };
                    doc.raw(&format!(
                        "<circle class=\"mark\" data-row=\"{row}\"{group} cx=\"{}\" cy=\"{}\" r=\"{}\" style=\"fill:{fill};fill-opacity:{alpha}\"/>",
                        num(x),
                        num(y),
                        num(mark.radius)
                    ));
                    if let Some(label) = &mark.label {
                        labels.push(((x + mark.radius + 2.0, y - 2.0), label.clone()));
                    }
                }
            }
        }
    }
    for &(a, b) in &lines {
        doc.line("guide-line", frame.px(a), frame.px(b), "stroke:#555555;stroke-width:1;stroke-dasharray:4,3");
    }
    doc.raw("</g>");

    for ((x, y), label) in labels {
        doc.text("mark-label", (x, y), "start", "", &label);
    }
    for guide in &scene.guides {
        match guide {
            Guide::Axis { dim: 1, label } => {
                doc.line("axis", (frame.left, frame.bottom()), (frame.right(), frame.bottom()), "stroke:#000000;stroke-width:1");
                doc.text("tick-label", (frame.left, frame.bottom() + 14.0), "start", "", &num(frame.x.0));
                doc.text("tick-label", (frame.right(), frame.bottom() + 14.0), "end", "", &num(frame.x.1));
                if let Some(l) = label {
                    doc.text("axis-label", (frame.left + frame.width / 2.0, frame.bottom() + 30.0), "middle", "", l);
                }
            }
            Guide::Axis { label, .. } => {
                doc.line("axis", (frame.left, frame.top), (frame.left, frame.bottom()), "stroke:#000000;stroke-width:1");
                doc.text("tick-label", (frame.left - 4.0, frame.bottom()), "end", "", &num(frame.y.0));
                doc.text("tick-label", (frame.left - 4.0, frame.top + 10.0), "end", "", &num(frame.y.1));
                if let Some(l) = label {
                    let (x, y) = (14.0, frame.top + frame.height / 2.0);
                    let rotate = format!(" transform=\"rotate(-90 {} {})\"", num(x), num(y));
                    doc.text("axis-label", (x, y), "middle", &rotate, l);
                }
            }
            Guide::FormLine { from, to, label: Some(l) } => {
                // Anchor the label at the midpoint of the visible part of the line.
                let (a, b) = (frame.px(*from), frame.px(*to));
                let clamp = |(x, y): (f64, f64)| {
                    (x.clamp(frame.left, frame.right()), y.clamp(frame.top, frame.bottom()))
                };
                let (ca, cb) = (clamp(a), clamp(b));
                doc.text("guide-label", ((ca.0 + cb.0) / 2.0, (ca.1 + cb.1) / 2.0 - 4.0), "middle", "", l);
            }
            Guide::FormLine { label: None, .. } => {}
        }
    }
    Ok(doc.finish())
}
