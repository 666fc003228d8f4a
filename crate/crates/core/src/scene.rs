//! Scene graph: a flat list of geometric mark items, each tagged with the layer
//! it belongs to.

use serde::Serialize;

use crate::spec::{MarkKind, Rect};
use crate::value::approx_eq;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Static,
    Virtual,
}

impl Layer {
    pub fn name(self) -> &'static str {
        match self {
            Layer::Static => "static",
            Layer::Virtual => "virtual",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Geometry {
    Rect {
        x: f64,
        y: f64,
        width: f64,
        height: f64,
    },
    Circle {
        cx: f64,
        cy: f64,
        r: f64,
    },
    /// Polyline for `line`; start, two control points and end for `path`.
    Points { points: Vec<(f64, f64)> },
    /// Angles in radians, clockwise from twelve o'clock.
    Arc {
        cx: f64,
        cy: f64,
        inner: f64,
        outer: f64,
        start: f64,
        end: f64,
    },
}

impl Geometry {
    fn numbers(&self) -> Vec<f64> {
        match self {
            Geometry::Rect { x, y, width, height } => vec![*x, *y, *width, *height],
            Geometry::Circle { cx, cy, r } => vec![*cx, *cy, *r],
            Geometry::Points { points } => points.iter().flat_map(|(x, y)| [*x, *y]).collect(),
            Geometry::Arc {
                cx,
                cy,
                inner,
                outer,
                start,
                end,
            } => vec![*cx, *cy, *inner, *outer, *start, *end],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.numbers().iter().all(|v| v.is_finite())
    }

    pub fn approx_eq(&self, other: &Geometry) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other) && {
            let (a, b) = (self.numbers(), other.numbers());
            a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| approx_eq(*x, *y))
        }
    }

    /// Largest coordinate change between two geometries of the same shape.
    pub fn displacement(&self, other: &Geometry) -> f64 {
        if std::mem::discriminant(self) != std::mem::discriminant(other) {
            return f64::INFINITY;
        }
        let (a, b) = (self.numbers(), other.numbers());
        if a.len() != b.len() {
            return f64::INFINITY;
        }
        a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    /// Axis-aligned bounding box. Arcs are boxed by their full outer circle.
    pub fn bbox(&self) -> Rect {
        match self {
            Geometry::Rect { x, y, width, height } => Rect::new(*x, *y, *width, *height),
            Geometry::Circle { cx, cy, r } => Rect::new(cx - r, cy - r, 2.0 * r, 2.0 * r),
            Geometry::Points { points } => {
                let (mut x0, mut y0, mut x1, mut y1) =
                    (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
                for (x, y) in points {
                    x0 = x0.min(*x);
                    y0 = y0.min(*y);
                    x1 = x1.max(*x);
                    y1 = y1.max(*y);
                }
                if points.is_empty() {
                    Rect::new(0.0, 0.0, 0.0, 0.0)
                } else {
                    Rect::new(x0, y0, x1 - x0, y1 - y0)
                }
            }
            Geometry::Arc { cx, cy, outer, .. } => {
                Rect::new(cx - outer, cy - outer, 2.0 * outer, 2.0 * outer)
            }
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Geometry {
        match self {
            Geometry::Rect { x, y, width, height } => Geometry::Rect {
                x: x + dx,
                y: y + dy,
                width: *width,
                height: *height,
            },
            Geometry::Circle { cx, cy, r } => Geometry::Circle {
                cx: cx + dx,
                cy: cy + dy,
                r: *r,
            },
            Geometry::Points { points } => Geometry::Points {
                points: points.iter().map(|(x, y)| (x + dx, y + dy)).collect(),
            },
            Geometry::Arc {
                cx,
                cy,
                inner,
                outer,
                start,
                end,
            } => Geometry::Arc {
                cx: cx + dx,
                cy: cy + dy,
                inner: *inner,
                outer: *outer,
                start: *start,
                end: *end,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkItem {
    #[serde(serialize_with = "ser_kind")]
    pub kind: MarkKind,
    pub geometry: Geometry,
    /// Fill colour, or stroke colour for line and path marks.
    pub style: String,
    pub text: Option<String>,
    pub layer: Layer,
    pub pid: u64,
    pub dataset: String,
    /// Index of the mark declaration that produced this item.
    pub mark: usize,
}

fn ser_kind<S: serde::Serializer>(k: &MarkKind, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(k.name())
}

impl MarkItem {
    pub fn bbox(&self) -> Rect {
        self.geometry.bbox()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneGraph {
    pub items: Vec<MarkItem>,
    /// Region the scene was laid out in (the spec canvas for a single unit).
    pub frame: Rect,
}

impl SceneGraph {
    pub fn empty(frame: Rect) -> Self {
        SceneGraph {
            items: Vec::new(),
            frame,
        }
    }

    pub fn layer(&self, layer: Layer) -> impl Iterator<Item = &MarkItem> {
        self.items.iter().filter(move |i| i.layer == layer)
    }

    /// Sub-scene holding only the items of one layer.
    pub fn filter_layer(&self, layer: Layer) -> SceneGraph {
        SceneGraph {
            items: self.layer(layer).cloned().collect(),
            frame: self.frame,
        }
    }

    pub fn with_layer(mut self, layer: Layer) -> SceneGraph {
        for item in &mut self.items {
            item.layer = layer;
        }
        self
    }

    /// Union of the frame and every item's bounding box.
    pub fn extent(&self) -> Rect {
        self.items.iter().fold(self.frame, |acc, i| acc.union(&i.bbox()))
    }

    pub fn translate(&self, dx: f64, dy: f64) -> SceneGraph {
        SceneGraph {
            items: self
                .items
                .iter()
                .map(|i| MarkItem {
                    geometry: i.geometry.translate(dx, dy),
                    ..i.clone()
                })
                .collect(),
            frame: self.frame.translate(dx, dy),
        }
    }
}
