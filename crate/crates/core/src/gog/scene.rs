use serde::Serialize;

use super::contour::ContourLevel;
use crate::data::SourceId;

/// Marks drawn with `size(zero)` use this radius (px) so they stay visible.
pub const MIN_MARK_RADIUS: f64 = 1.0;
pub const DEFAULT_MARK_RADIUS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneGraph {
    pub data_ref: SourceId,
    pub x_dim: Option<String>,
    pub y_dim: Option<String>,
    pub x_domain: Option<(f64, f64)>,
    pub y_domain: Option<(f64, f64)>,
    pub elements: Vec<GeomElement>,
    pub guides: Vec<Guide>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Geom {
    Point,
    Contour,
    Polyline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Aesthetic {
    Position,
    Size,
    Label,
    Color,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Binding {
    /// `x*y` over two data columns.
    Cross { x: String, y: String },
    /// Joint density of `x*y` with the named kernel.
    Density { x: String, y: String, kernel: String },
    Column { name: String },
    Constant { value: f64 },
    Zero,
    Text { text: String },
    Hue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mark {
    pub row: usize,
    /// `None` when either coordinate is missing; the mark is kept but not drawn.
    pub position: Option<(f64, f64)>,
    pub radius: f64,
    pub label: Option<String>,
    /// Hue angle in degrees when colour is bound.
    pub hue: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourBand {
    #[serde(flatten)]
    pub contour: ContourLevel,
    pub hue: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Computed {
    Marks { marks: Vec<Mark> },
    Contours {
        bandwidth: (f64, f64),
        grid: (usize, usize),
        levels: Vec<ContourBand>,
    },
    Path { points: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeomElement {
    pub geom: Geom,
    pub aesthetics: Vec<(Aesthetic, Binding)>,
    pub computed: Computed,
}

impl GeomElement {
    pub fn binding(&self, aes: Aesthetic) -> Option<&Binding> {
        self.aesthetics.iter().find(|(a, _)| *a == aes).map(|(_, b)| b)
    }

    pub fn marks(&self) -> &[Mark] {
        match &self.computed {
            Computed::Marks { marks } => marks,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "guide", rename_all = "snake_case")]
pub enum Guide {
    /// `dim` is 1 (horizontal) or 2 (vertical).
    Axis { dim: u8, label: Option<String> },
    #[serde(rename = "form.line")]
    FormLine {
        from: (f64, f64),
        to: (f64, f64),
        label: Option<String>,
    },
}

impl Guide {
    pub fn label(&self) -> Option<&str> {
        match self {
            Guide::Axis { label, .. } | Guide::FormLine { label, .. } => label.as_deref(),
        }
    }
}
