//! Deterministic SVG output.

use std::f64::consts::{PI, TAU};
use std::fmt::Write;

use crate::scene::{Geometry, Layer, MarkItem, SceneGraph};
use crate::spec::{MarkKind, Rect};

pub const STATIC_BORDER: &str = "#FF8C00";
pub const VIRTUAL_BORDER: &str = "#1E90FF";
const SVG_NS: &str = "http://www.w3.org/2000/svg";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SvgOptions {
    pub border_boxes: bool,
}

/// Up to six decimals, trailing zeros trimmed, no negative zero.
pub fn fmt_num(v: f64) -> String {
    let mut s = format!("{v:.6}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn polar(cx: f64, cy: f64, r: f64, a: f64) -> String {
    format!("{} {}", fmt_num(cx + r * a.sin()), fmt_num(cy - r * a.cos()))
}

fn arc_path(cx: f64, cy: f64, inner: f64, outer: f64, start: f64, end: f64) -> String {
    let (a0, a1) = if end < start { (end, start) } else { (start, end) };
    let sweep = a1 - a0;
    // A single SVG arc command cannot draw a full circle, so split it.
    let stops: Vec<f64> = if sweep >= TAU - 1e-9 {
        vec![a0, a0 + sweep / 2.0, a1]
    } else {
        vec![a0, a1]
    };
    let large = |from: f64, to: f64| if to - from > PI { 1 } else { 0 };
    let r = fmt_num(outer);
    let mut d = format!("M{}", polar(cx, cy, outer, stops[0]));
    for w in stops.windows(2) {
        let _ = write!(d, " A{r} {r} 0 {} 1 {}", large(w[0], w[1]), polar(cx, cy, outer, w[1]));
    }
    if inner > 0.0 {
        let r = fmt_num(inner);
        let _ = write!(d, " L{}", polar(cx, cy, inner, a1));
        for w in stops.windows(2).rev() {
            let _ = write!(d, " A{r} {r} 0 {} 0 {}", large(w[0], w[1]), polar(cx, cy, inner, w[0]));
        }
    } else {
        let _ = write!(d, " L{} {}", fmt_num(cx), fmt_num(cy));
    }
    d.push_str(" Z");
    d
}

fn write_item(out: &mut String, item: &MarkItem) {
    let ids = format!("data-pid=\"{}\" data-mark=\"{}\"", item.pid, item.mark);
    let style = escape(&item.style);
    match &item.geometry {
        Geometry::Rect { x, y, width, height } if item.kind == MarkKind::Text => {
            let size = if *height > 0.0 { *height } else { 10.0 };
            let _ = writeln!(
                out,
                "<text {ids} x=\"{}\" y=\"{}\" font-size=\"{}\" data-box=\"{} {} {} {}\" fill=\"{style}\">{}</text>",
                fmt_num(*x),
                fmt_num(y + height),
                fmt_num(size),
                fmt_num(*x),
                fmt_num(*y),
                fmt_num(*width),
                fmt_num(*height),
                escape(item.text.as_deref().unwrap_or("")),
            );
        }
        Geometry::Rect { x, y, width, height } => {
            let _ = writeln!(
                out,
                "<rect {ids} x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{style}\"/>",
                fmt_num(*x),
                fmt_num(*y),
                fmt_num(*width),
                fmt_num(*height)
            );
        }
        Geometry::Circle { cx, cy, r } => {
            let _ = writeln!(
                out,
                "<circle {ids} cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{style}\"/>",
                fmt_num(*cx),
                fmt_num(*cy),
                fmt_num(*r)
            );
        }
        Geometry::Points { points } => {
            let mut d = String::new();
            for (i, (x, y)) in points.iter().enumerate() {
                let cmd = match (i, item.kind) {
                    (0, _) => "M",
                    (1, MarkKind::Path) => " C",
                    (_, MarkKind::Path) => " ",
                    _ => " L",
                };
                let _ = write!(d, "{cmd}{} {}", fmt_num(*x), fmt_num(*y));
            }
            let _ = writeln!(out, "<path {ids} d=\"{d}\" fill=\"none\" stroke=\"{style}\"/>");
        }
        Geometry::Arc {
            cx,
            cy,
            inner,
            outer,
            start,
            end,
        } => {
            let d = arc_path(*cx, *cy, *inner, *outer, *start, *end);
            let _ = writeln!(out, "<path {ids} d=\"{d}\" fill=\"{style}\"/>");
        }
    }
}

fn open_root(out: &mut String, view_box: &Rect) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"{SVG_NS}\" version=\"1.1\" viewBox=\"{} {} {} {}\" width=\"{}\" height=\"{}\">",
        fmt_num(view_box.x),
        fmt_num(view_box.y),
        fmt_num(view_box.width),
        fmt_num(view_box.height),
        fmt_num(view_box.width),
        fmt_num(view_box.height)
    );
}

fn layer_group<'a>(
    out: &mut String,
    layer: Layer,
    items: impl Iterator<Item = &'a MarkItem>,
    transform: Option<(f64, f64)>,
) -> bool {
    let mut items = items.peekable();
    if items.peek().is_none() {
        return false;
    }
    match transform {
        Some((dx, dy)) => {
            let _ = writeln!(
                out,
                "<g data-layer=\"{}\" transform=\"translate({} {})\">",
                layer.name(),
                fmt_num(dx),
                fmt_num(dy)
            );
        }
        None => {
            let _ = writeln!(out, "<g data-layer=\"{}\">", layer.name());
        }
    }
    for item in items {
        write_item(out, item);
    }
    out.push_str("</g>\n");
    true
}

fn border(out: &mut String, layer: Layer, r: &Rect) {
    let colour = match layer {
        Layer::Static => STATIC_BORDER,
        Layer::Virtual => VIRTUAL_BORDER,
    };
    let _ = writeln!(
        out,
        "<rect data-border=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\"/>",
        layer.name(),
        fmt_num(r.x),
        fmt_num(r.y),
        fmt_num(r.width),
        fmt_num(r.height)
    );
}

fn scene_body(out: &mut String, scene: &SceneGraph, opts: SvgOptions) {
    for layer in [Layer::Static, Layer::Virtual] {
        if layer_group(out, layer, scene.layer(layer), None) && opts.border_boxes {
            border(out, layer, &scene.frame);
        }
    }
}

/// Emit one scene. Items are grouped by layer (static first), scene order
/// within a group.
pub fn emit_svg(scene: &SceneGraph, view_box: Rect, opts: SvgOptions) -> String {
    let mut out = String::new();
    open_root(&mut out, &view_box);
    scene_body(&mut out, scene, opts);
    out.push_str("</svg>\n");
    out
}

/// Emit a static scene with a virtual scene drawn at `offset`.
pub fn emit_composed(
    static_scene: &SceneGraph,
    virtual_scene: &SceneGraph,
    offset: (f64, f64),
    view_box: Rect,
    opts: SvgOptions,
) -> String {
    let mut out = String::new();
    open_root(&mut out, &view_box);
    scene_body(&mut out, static_scene, opts);
    if layer_group(&mut out, Layer::Virtual, virtual_scene.items.iter(), Some(offset)) && opts.border_boxes {
        border(&mut out, Layer::Virtual, &virtual_scene.frame.translate(offset.0, offset.1));
    }
    out.push_str("</svg>\n");
    out
}

/// Static render for print: the static layer plus the anchor glyph carrying
/// its payload as an attribute.
pub fn emit_reference(scene: &SceneGraph, anchor: Rect, payload: &str) -> String {
    let mut out = String::new();
    open_root(&mut out, &scene.frame);
    scene_body(&mut out, scene, SvgOptions::default());
    let _ = writeln!(out, "<g data-anchor=\"{}\">", escape(payload));
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#ffffff\" stroke=\"#000000\"/>",
        fmt_num(anchor.x),
        fmt_num(anchor.y),
        fmt_num(anchor.width),
        fmt_num(anchor.height)
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"{}\" text-anchor=\"middle\" fill=\"#000000\">AR</text>",
        fmt_num(anchor.x + anchor.width / 2.0),
        fmt_num(anchor.y + anchor.height * 0.65),
        fmt_num(anchor.height * 0.4)
    );
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect_item(pid: u64, layer: Layer) -> MarkItem {
        MarkItem {
            kind: MarkKind::Rect,
            geometry: Geometry::Rect {
                x: 2.5,
                y: 1.0 / 3.0,
                width: 45.0,
                height: -0.0,
            },
            style: "#4c78a8".into(),
            text: None,
            layer,
            pid,
            dataset: "t".into(),
            mark: 0,
        }
    }

    #[test]
    fn numbers_are_trimmed() {
        assert_eq!(fmt_num(50.0), "50");
        assert_eq!(fmt_num(2.5), "2.5");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(-1e-9), "0");
    }

    #[test]
    fn empty_scene_is_just_the_root() {
        let svg = emit_svg(
            &SceneGraph::empty(Rect::new(0.0, 0.0, 300.0, 200.0)),
            Rect::new(0.0, 0.0, 300.0, 200.0),
            SvgOptions { border_boxes: true },
        );
        assert_eq!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 300 200\" width=\"300\" height=\"200\">\n</svg>\n"
        );
    }

    #[test]
    fn composed_with_empty_virtual_equals_static() {
        let frame = Rect::new(0.0, 0.0, 100.0, 100.0);
        let scene = SceneGraph {
            items: vec![rect_item(1, Layer::Static)],
            frame,
        };
        let opts = SvgOptions { border_boxes: true };
        assert_eq!(
            emit_composed(&scene, &SceneGraph::empty(frame), (110.0, 0.0), frame, opts),
            emit_svg(&scene, frame, opts)
        );
    }

    #[test]
    fn borders_use_layer_colours() {
        let frame = Rect::new(0.0, 0.0, 100.0, 100.0);
        let scene = SceneGraph {
            items: vec![rect_item(1, Layer::Static)],
            frame,
        };
        let virt = SceneGraph {
            items: vec![rect_item(1 << 32, Layer::Virtual)],
            frame,
        };
        let svg = emit_composed(
            &scene,
            &virt,
            (110.0, 0.0),
            Rect::new(0.0, 0.0, 210.0, 100.0),
            SvgOptions { border_boxes: true },
        );
        assert!(svg.contains("stroke=\"#FF8C00\""));
        assert!(svg.contains("data-border=\"virtual\" x=\"110\""));
        assert!(svg.contains("<g data-layer=\"virtual\" transform=\"translate(110 0)\">"));
    }

    #[test]
    fn half_pie_arc_path() {
        assert_eq!(arc_path(50.0, 50.0, 0.0, 10.0, 0.0, PI), "M50 40 A10 10 0 0 1 50 60 L50 50 Z");
    }
}
