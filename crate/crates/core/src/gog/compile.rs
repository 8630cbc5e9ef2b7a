use std::collections::BTreeMap;

use super::ast::{CallExpr, Expr, GogStatement, StatementKind};
use super::contour::{default_levels, extract_contours};
use super::kde::{epanechnikov_kde_2d, KdeSpec};
use super::scene::*;
use super::GogError;
use crate::data::{Column, DataSource};

const BUILTINS: &[&str] = &["zero", "dim", "hue"];
const JOINT_EPANECHNIKOV: &str = "smooth.density.kernel.epanechnikov.joint";
const SIZE_RANGE: (f64, f64) = (2.0, 8.0);

struct Compiler<'a> {
    data: &'a DataSource,
    dims: Option<(String, String)>,
}

fn is_builtin(name: &str) -> bool {
    BUILTINS.contains(&name)
}

impl<'a> Compiler<'a> {
    fn column(&self, name: &str) -> Result<&'a Column, GogError> {
        self.data
            .column(name)
            .ok_or_else(|| GogError::UnknownColumn(name.to_string()))
    }

    fn quantitative(&self, name: &str, role: &str) -> Result<&'a [Option<f64>], GogError> {
        let col = self.column(name)?;
        col.numbers().ok_or_else(|| GogError::Type {
            column: name.to_string(),
            message: format!("categorical column cannot be bound to {role}"),
        })
    }

    fn bind_dims(&mut self, x: &str, y: &str) -> Result<(), GogError> {
        match &self.dims {
            None => {
                self.dims = Some((x.to_string(), y.to_string()));
                Ok(())
            }
            Some((bx, by)) if bx == x && by == y => Ok(()),
            Some((bx, by)) => Err(GogError::Invalid(format!(
                "position {x}*{y} conflicts with earlier binding {bx}*{by}"
            ))),
        }
    }

    fn cross_operands(expr: &Expr) -> Option<(&str, &str)> {
        match expr {
            Expr::Cross(a, b) => match (a.as_ref(), b.as_ref()) {
                (Expr::Ident(x), Expr::Ident(y)) => Some((x, y)),
                _ => None,
            },
            _ => None,
        }
    }

    fn single_arg(call: &CallExpr) -> Result<&Expr, GogError> {
        match call.args.as_slice() {
            [arg] => Ok(arg),
            _ => Err(GogError::Invalid(format!(
                "{}(...) takes exactly one argument",
                call.dotted()
            ))),
        }
    }

    fn element(&mut self, call: &CallExpr) -> Result<GeomElement, GogError> {
        let geom = match call.dotted().as_str() {
            "point" => Geom::Point,
            "contour" => Geom::Contour,
            "line" | "polyline" => Geom::Polyline,
            other => return Err(GogError::UnknownPath(other.to_string())),
        };
        let mut aesthetics: Vec<(Aesthetic, Binding)> = Vec::new();
        for arg in &call.args {
            let Expr::Call(aes) = arg else {
                return Err(GogError::Invalid(format!(
                    "element arguments must be aesthetics, found {arg}"
                )));
            };
            let (kind, binding) = self.aesthetic(geom, aes)?;
            if aesthetics.iter().any(|(k, _)| *k == kind) {
                return Err(GogError::Invalid(format!("aesthetic {} bound twice", aes.dotted())));
            }
            aesthetics.push((kind, binding));
        }
        let computed = match aesthetics.iter().find(|(k, _)| *k == Aesthetic::Position) {
            None => {
                return Err(GogError::Invalid(format!(
                    "{} element needs a position binding",
                    call.dotted()
                )))
            }
            Some((_, position)) => self.compute(geom, position, &aesthetics)?,
        };
        Ok(GeomElement {
            geom,
            aesthetics,
            computed,
        })
    }

    fn aesthetic(&mut self, geom: Geom, aes: &CallExpr) -> Result<(Aesthetic, Binding), GogError> {
        match aes.dotted().as_str() {
            "position" => {
                let arg = Self::single_arg(aes)?;
                if let Some((x, y)) = Self::cross_operands(arg) {
                    if geom == Geom::Contour {
                        return Err(GogError::Invalid(
                            "contour position must be a density estimate".into(),
                        ));
                    }
                    self.check_position(x, y)?;
                    return Ok((
                        Aesthetic::Position,
                        Binding::Cross {
                            x: x.into(),
                            y: y.into(),
                        },
                    ));
                }
                match arg {
                    Expr::Call(stat) if stat.is(JOINT_EPANECHNIKOV) && geom == Geom::Contour => {
                        let inner = Self::single_arg(stat)?;
                        let (x, y) = Self::cross_operands(inner).ok_or_else(|| {
                            GogError::Invalid("joint density expects a column cross a*b".into())
                        })?;
                        self.check_position(x, y)?;
                        Ok((
                            Aesthetic::Position,
                            Binding::Density {
                                x: x.into(),
                                y: y.into(),
                                kernel: "epanechnikov".into(),
                            },
                        ))
                    }
                    Expr::Call(stat) => Err(GogError::UnknownPath(stat.dotted())),
                    other => Err(GogError::Invalid(format!(
                        "position expects a*b, found {other}"
                    ))),
                }
            }
            "size" => {
                let binding = match Self::single_arg(aes)? {
                    Expr::Ident(name) if name == "zero" => Binding::Zero,
                    Expr::Number(v) if *v >= 0.0 => Binding::Constant { value: *v },
                    Expr::Ident(name) if !is_builtin(name) => {
                        self.quantitative(name, "size")?;
                        Binding::Column { name: name.clone() }
                    }
                    other => return Err(GogError::Invalid(format!("invalid size {other}"))),
                };
                Ok((Aesthetic::Size, binding))
            }
            "label" => {
                let binding = match Self::single_arg(aes)? {
                    Expr::Str(s) => Binding::Text { text: s.clone() },
                    Expr::Ident(name) if !is_builtin(name) => {
                        self.column(name)?;
                        Binding::Column { name: name.clone() }
                    }
                    other => return Err(GogError::Invalid(format!("invalid label {other}"))),
                };
                Ok((Aesthetic::Label, binding))
            }
            "color.hue" => {
                let binding = match aes.args.as_slice() {
                    [] => Binding::Hue,
                    [Expr::Ident(name)] if !is_builtin(name) => {
                        self.column(name)?;
                        Binding::Column { name: name.clone() }
                    }
                    _ => return Err(GogError::Invalid("color.hue takes at most one column".into())),
                };
                Ok((Aesthetic::Color, binding))
            }
            "color" => match Self::single_arg(aes)? {
                Expr::Ident(name) if !is_builtin(name) => {
                    self.column(name)?;
                    Ok((Aesthetic::Color, Binding::Column { name: name.clone() }))
                }
                other => Err(GogError::Invalid(format!("invalid color {other}"))),
            },
            other => Err(GogError::UnknownPath(other.to_string())),
        }
    }

    fn check_position(&mut self, x: &str, y: &str) -> Result<(), GogError> {
        for name in [x, y] {
            if is_builtin(name) {
                return Err(GogError::Invalid(format!("builtin {name} cannot be a position")));
            }
            self.quantitative(name, "position")?;
        }
        self.bind_dims(x, y)
    }

    fn points(&self, x: &str, y: &str) -> Result<Vec<Option<(f64, f64)>>, GogError> {
        let xs = self.quantitative(x, "position")?;
        let ys = self.quantitative(y, "position")?;
        Ok(xs
            .iter()
            .zip(ys)
            .map(|(a, b)| Some(((*a)?, (*b)?)))
            .collect())
    }

    fn compute(
        &self,
        geom: Geom,
        position: &Binding,
        aesthetics: &[(Aesthetic, Binding)],
    ) -> Result<Computed, GogError> {
        let get = |k: Aesthetic| aesthetics.iter().find(|(a, _)| *a == k).map(|(_, b)| b);
        match (geom, position) {
            (Geom::Point, Binding::Cross { x, y }) => {
                let positions = self.points(x, y)?;
                let radii = self.radii(get(Aesthetic::Size))?;
                let labels = self.labels(get(Aesthetic::Label));
                let hues = self.hues(get(Aesthetic::Color));
                let marks = positions
                    .into_iter()
                    .enumerate()
                    .map(|(row, position)| Mark {
                        row,
                        position,
                        radius: radii[row],
                        label: labels[row].clone(),
                        hue: hues[row],
                    })
                    .collect();
                Ok(Computed::Marks { marks })
            }
            (Geom::Polyline, Binding::Cross { x, y }) => Ok(Computed::Path {
                points: self.points(x, y)?.into_iter().flatten().collect(),
            }),
            (Geom::Contour, Binding::Density { x, y, .. }) => {
                let pts: Vec<(f64, f64)> = self.points(x, y)?.into_iter().flatten().collect();
                let spec = KdeSpec::for_points(&pts)?;
                let (hx, hy) = spec.bandwidth;
                let (mut x0, mut x1, mut y0, mut y1) =
                    (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
                for &(px, py) in &pts {
                    x0 = x0.min(px);
                    x1 = x1.max(px);
                    y0 = y0.min(py);
                    y1 = y1.max(py);
                }
                let grid =
                    epanechnikov_kde_2d(&pts, &spec, ((x0 - hx, x1 + hx), (y0 - hy, y1 + hy)))?;
                let levels = extract_contours(&grid, &default_levels(&grid))?;
                let hued = matches!(get(Aesthetic::Color), Some(Binding::Hue));
                let count = levels.len();
                let levels = levels
                    .into_iter()
                    .enumerate()
                    .map(|(k, contour)| ContourBand {
                        contour,
                        hue: hued.then(|| 360.0 * k as f64 / count as f64),
                    })
                    .collect();
                Ok(Computed::Contours {
                    bandwidth: spec.bandwidth,
                    grid: spec.grid,
                    levels,
                })
            }
            _ => unreachable!("aesthetic() validates geom/position pairs"),
        }
    }

    fn radii(&self, size: Option<&Binding>) -> Result<Vec<f64>, GogError> {
        let n = self.data.n_rows();
        Ok(match size {
            None => vec![DEFAULT_MARK_RADIUS; n],
            Some(Binding::Zero) => vec![MIN_MARK_RADIUS; n],
            Some(Binding::Constant { value }) => vec![value.max(MIN_MARK_RADIUS); n],
            Some(Binding::Column { name }) => {
                let values = self.quantitative(name, "size")?;
                let col = self.column(name)?;
                let (lo, hi) = col.numeric_range().unwrap_or((0.0, 1.0));
                let span = if hi > lo { hi - lo } else { 1.0 };
                values
                    .iter()
                    .map(|v| match v {
                        Some(v) => SIZE_RANGE.0 + (v - lo) / span * (SIZE_RANGE.1 - SIZE_RANGE.0),
                        None => MIN_MARK_RADIUS,
                    })
                    .collect()
            }
            Some(_) => unreachable!(),
        })
    }

    fn labels(&self, label: Option<&Binding>) -> Vec<Option<String>> {
        let n = self.data.n_rows();
        match label {
            Some(Binding::Column { name }) => {
                let col = self.data.column(name).expect("validated");
                (0..n)
                    .map(|r| {
                        let v = col.data.value(r);
                        (!v.is_missing()).then(|| v.to_string())
                    })
                    .collect()
            }
            _ => vec![None; n],
        }
    }

    /// Evenly spaced hues over the sorted distinct labels of the bound column.
    fn hues(&self, color: Option<&Binding>) -> Vec<Option<f64>> {
        let n = self.data.n_rows();
        let Some(Binding::Column { name }) = color else {
            return vec![None; n];
        };
        let col = self.data.column(name).expect("validated");
        let keys: Vec<Option<String>> = (0..n)
            .map(|r| {
                let v = col.data.value(r);
                (!v.is_missing()).then(|| v.to_string())
            })
            .collect();
        let distinct: BTreeMap<&str, usize> = keys
            .iter()
            .flatten()
            .map(|s| (s.as_str(), 0))
            .collect::<BTreeMap<_, _>>()
            .into_keys()
            .enumerate()
            .map(|(i, k)| (k, i))
            .collect();
        let count = distinct.len().max(1) as f64;
        keys.iter()
            .map(|k| k.as_deref().map(|k| 360.0 * distinct[k] as f64 / count))
            .collect()
    }

    fn guide(&self, call: &CallExpr) -> Result<Guide, GogError> {
        let label = match call.arg_call("label") {
            None => None,
            Some(l) => match Self::single_arg(l)? {
                Expr::Str(s) => Some(s.clone()),
                other => {
                    return Err(GogError::Invalid(format!(
                        "guide label must be a string, found {other}"
                    )))
                }
            },
        };
        for arg in &call.args {
            match arg {
                Expr::Call(c) if c.is("label") || c.is("dim") || c.is("position") => {}
                other => {
                    return Err(GogError::Invalid(format!(
                        "unexpected guide argument {other}"
                    )))
                }
            }
        }
        match call.dotted().as_str() {
            "axis" => {
                let dim = call
                    .arg_call("dim")
                    .ok_or_else(|| GogError::Invalid("axis needs dim(1) or dim(2)".into()))?;
                match Self::single_arg(dim)? {
                    Expr::Number(d) if *d == 1.0 || *d == 2.0 => Ok(Guide::Axis {
                        dim: *d as u8,
                        label,
                    }),
                    other => Err(GogError::Invalid(format!("axis dim must be 1 or 2, found {other}"))),
                }
            }
            "form.line" => {
                let pos = call.arg_call("position").ok_or_else(|| {
                    GogError::Invalid("form.line needs position((x0,y0),(x1,y1))".into())
                })?;
                match pos.args.as_slice() {
                    [Expr::Tuple(a, b), Expr::Tuple(c, d)] => Ok(Guide::FormLine {
                        from: (*a, *b),
                        to: (*c, *d),
                        label,
                    }),
                    _ => Err(GogError::Invalid(
                        "form.line position takes two (x,y) tuples".into(),
                    )),
                }
            }
            other => Err(GogError::UnknownPath(other.to_string())),
        }
    }
}

/// Binds statements to a data source and evaluates every statistic.
pub fn compile(statements: &[GogStatement], data: &DataSource) -> Result<SceneGraph, GogError> {
    let mut c = Compiler { data, dims: None };
    let mut elements = Vec::new();
    let mut guides = Vec::new();
    for stmt in statements {
        match stmt.kind {
            StatementKind::Element => elements.push(c.element(&stmt.call)?),
            StatementKind::Guide => guides.push(c.guide(&stmt.call)?),
        }
    }
    let domain = |name: &str| data.column(name).and_then(Column::numeric_range);
    let (x_dim, y_dim) = match c.dims {
        Some((x, y)) => (Some(x), Some(y)),
        None => (None, None),
    };
    Ok(SceneGraph {
        data_ref: data.id(),
        x_domain: x_dim.as_deref().and_then(domain),
        y_domain: y_dim.as_deref().and_then(domain),
        x_dim,
        y_dim,
        elements,
        guides,
    })
}
