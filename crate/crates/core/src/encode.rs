//! Mark encoding: one scene item per final-stage row per mark declaration.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dataflow::{DataRow, DataflowTrace, SourceTag};
use crate::scale::{ResolvedScale, ScaleSet, PALETTE};
use crate::scene::{Geometry, Layer, MarkItem, SceneGraph};
use crate::spec::{ChannelDecl, MarkDecl, MarkKind, ScaleKind, Spec};
use crate::value::Value;

pub const DEFAULT_STROKE: &str = "#333333";
pub const DEFAULT_SYMBOL_SIZE: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodeError {
    #[error("mark `{mark}` reads unknown dataset `{dataset}`")]
    MissingDataset { mark: String, dataset: String },
    #[error("mark `{mark}` channel `{channel}` uses unknown scale `{scale}`")]
    MissingScale {
        mark: String,
        channel: String,
        scale: String,
    },
    #[error("mark `{mark}` channel `{channel}` cannot use {kind} scale `{scale}`")]
    ChannelScaleMismatch {
        mark: String,
        channel: String,
        scale: String,
        kind: &'static str,
    },
    #[error("mark `{mark}` channel `{channel}` is not numeric for row {pid}")]
    NonNumeric { mark: String, channel: String, pid: u64 },
    #[error("mark `{mark}` channel `{channel}`: value {value} is outside the domain of scale `{scale}`")]
    Unmapped {
        mark: String,
        channel: String,
        scale: String,
        value: String,
    },
}

/// How items get their layer tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerPolicy {
    All(Layer),
    /// Rows tagged `augment` go to the virtual layer, the rest to the static one.
    BySource,
}

const COLOR_CHANNELS: [&str; 2] = ["fill", "stroke"];

struct MarkCtx<'a> {
    label: String,
    decl: &'a MarkDecl,
    scales: &'a ScaleSet,
}

impl MarkCtx<'_> {
    fn scale(&self, channel: &str, c: &ChannelDecl) -> Result<Option<&ResolvedScale>, EncodeError> {
        let Some(name) = &c.scale else { return Ok(None) };
        let scale = self.scales.get(name).ok_or_else(|| EncodeError::MissingScale {
            mark: self.label.clone(),
            channel: channel.to_string(),
            scale: name.clone(),
        })?;
        let colour = COLOR_CHANNELS.contains(&channel);
        let fits = match scale.kind {
            ScaleKind::Ordinal => colour,
            _ => !colour && channel != "text",
        };
        if !fits {
            return Err(EncodeError::ChannelScaleMismatch {
                mark: self.label.clone(),
                channel: channel.to_string(),
                scale: name.clone(),
                kind: scale.kind.name(),
            });
        }
        Ok(Some(scale))
    }

    fn raw<'r>(&self, c: &'r ChannelDecl, row: &'r DataRow) -> Option<&'r Value> {
        match (&c.field, &c.value) {
            (Some(f), _) => Some(row.get(f)),
            (None, Some(v)) => Some(v),
            (None, None) => None,
        }
    }

    fn unmapped(&self, channel: &str, scale: &ResolvedScale, v: &Value) -> EncodeError {
        EncodeError::Unmapped {
            mark: self.label.clone(),
            channel: channel.to_string(),
            scale: scale.name.clone(),
            value: v.to_string(),
        }
    }

    fn number(&self, channel: &str, row: &DataRow) -> Result<Option<f64>, EncodeError> {
        let Some(c) = self.decl.encode.get(channel) else { return Ok(None) };
        let scale = self.scale(channel, c)?;
        let raw = self.raw(c, row);
        let base = match (scale, raw) {
            (Some(s), Some(v)) => match s.kind {
                ScaleKind::Band | ScaleKind::Point => {
                    let p = s.map(v).ok_or_else(|| self.unmapped(channel, s, v))?;
                    p + s.direction() * c.band.unwrap_or(0.0) * s.bandwidth()
                }
                _ => s.map(v).ok_or_else(|| EncodeError::NonNumeric {
                    mark: self.label.clone(),
                    channel: channel.to_string(),
                    pid: row.pid,
                })?,
            },
            (Some(s), None) => s.direction() * c.band.unwrap_or(0.0) * s.bandwidth(),
            (None, Some(v)) => v.as_f64().ok_or_else(|| EncodeError::NonNumeric {
                mark: self.label.clone(),
                channel: channel.to_string(),
                pid: row.pid,
            })?,
            (None, None) => 0.0,
        };
        Ok(Some(base + c.offset.unwrap_or(0.0)))
    }

    /// Signed default extent along a band-scaled position channel.
    fn band_extent(&self, channel: &str) -> f64 {
        self.decl
            .encode
            .get(channel)
            .and_then(|c| c.scale.as_ref())
            .and_then(|name| self.scales.get(name))
            .map(|s| s.direction() * s.bandwidth())
            .unwrap_or(0.0)
    }

    fn colour(&self, channel: &str, row: &DataRow, default: &str) -> Result<String, EncodeError> {
        let Some(c) = self.decl.encode.get(channel) else { return Ok(default.to_string()) };
        let scale = self.scale(channel, c)?;
        match (scale, self.raw(c, row)) {
            (Some(s), Some(v)) => s.color(v).ok_or_else(|| self.unmapped(channel, s, v)),
            (None, Some(v)) if !v.is_null() => Ok(v.to_string()),
            _ => Ok(default.to_string()),
        }
    }

    fn text(&self, row: &DataRow) -> Result<Option<String>, EncodeError> {
        let Some(c) = self.decl.encode.get("text") else { return Ok(Some(String::new())) };
        self.scale("text", c)?;
        Ok(Some(self.raw(c, row).map(|v| v.to_string()).unwrap_or_default()))
    }

    /// Interval along one axis from a start channel plus an end or size channel.
    fn span(&self, start: &str, end: &str, size: &str, row: &DataRow) -> Result<(f64, f64), EncodeError> {
        let a = self.number(start, row)?.unwrap_or(0.0);
        let extent = if let Some(b) = self.number(end, row)? {
            b - a
        } else if let Some(w) = self.number(size, row)? {
            w
        } else {
            self.band_extent(start)
        };
        Ok(if extent < 0.0 { (a + extent, -extent) } else { (a, extent) })
    }

    fn item(&self, row: &DataRow, canvas_radius: f64) -> Result<(Geometry, String, Option<String>), EncodeError> {
        let n = |ch: &str| self.number(ch, row);
        Ok(match self.decl.kind {
            MarkKind::Rect | MarkKind::Text => {
                let (x, width) = self.span("x", "x2", "width", row)?;
                let (y, height) = self.span("y", "y2", "height", row)?;
                let text = if self.decl.kind == MarkKind::Text { self.text(row)? } else { None };
                (
                    Geometry::Rect { x, y, width, height },
                    self.colour("fill", row, PALETTE[0])?,
                    text,
                )
            }
            MarkKind::Symbol => (
                Geometry::Circle {
                    cx: n("x")?.unwrap_or(0.0),
                    cy: n("y")?.unwrap_or(0.0),
                    r: n("size")?.unwrap_or(DEFAULT_SYMBOL_SIZE).abs(),
                },
                self.colour("fill", row, PALETTE[0])?,
                None,
            ),
            MarkKind::Line | MarkKind::Path => {
                let (x, y) = (n("x")?.unwrap_or(0.0), n("y")?.unwrap_or(0.0));
                let (x2, y2) = (n("x2")?.unwrap_or(x), n("y2")?.unwrap_or(y));
                let points = if self.decl.kind == MarkKind::Line {
                    vec![(x, y), (x2, y2)]
                } else {
                    let my = (y + y2) / 2.0;
                    vec![(x, y), (x, my), (x2, my), (x2, y2)]
                };
                (
                    Geometry::Points { points },
                    self.colour("stroke", row, DEFAULT_STROKE)?,
                    None,
                )
            }
            MarkKind::Arc => (
                Geometry::Arc {
                    cx: n("x")?.unwrap_or(0.0),
                    cy: n("y")?.unwrap_or(0.0),
                    inner: n("innerRadius")?.unwrap_or(0.0),
                    outer: n("outerRadius")?.unwrap_or(canvas_radius),
                    start: n("startAngle")?.unwrap_or(0.0),
                    end: n("endAngle")?.unwrap_or(0.0),
                },
                self.colour("fill", row, PALETTE[0])?,
                None,
            ),
        })
    }
}

/// Encode every mark of `spec` over the final stage of its dataset.
pub fn encode_marks(
    spec: &Spec,
    traces: &BTreeMap<String, DataflowTrace>,
    scales: &ScaleSet,
    policy: LayerPolicy,
) -> Result<SceneGraph, EncodeError> {
    let canvas = spec.canvas();
    let canvas_radius = canvas.width.min(canvas.height) / 2.0;
    let mut items = Vec::new();
    for (index, decl) in spec.marks.iter().enumerate() {
        let ctx = MarkCtx {
            label: decl.name.clone().unwrap_or_else(|| format!("marks[{index}]")),
            decl,
            scales,
        };
        let trace = traces.get(&decl.from).ok_or_else(|| EncodeError::MissingDataset {
            mark: ctx.label.clone(),
            dataset: decl.from.clone(),
        })?;
        for row in &trace.output().rows {
            let (geometry, style, text) = ctx.item(row, canvas_radius)?;
            if !geometry.is_finite() {
                let channel = decl.encode.keys().next().cloned().unwrap_or_default();
                return Err(EncodeError::NonNumeric {
                    mark: ctx.label.clone(),
                    channel,
                    pid: row.pid,
                });
            }
            let layer = match policy {
                LayerPolicy::All(l) => l,
                LayerPolicy::BySource if row.tag == SourceTag::Augment => Layer::Virtual,
                LayerPolicy::BySource => Layer::Static,
            };
            items.push(MarkItem {
                kind: decl.kind,
                geometry,
                style,
                text,
                layer,
                pid: row.pid,
                dataset: decl.from.clone(),
                mark: index,
            });
        }
    }
    Ok(SceneGraph { items, frame: canvas })
}
