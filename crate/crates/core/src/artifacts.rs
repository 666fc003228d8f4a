//! The rendered files a spec produces. The CLI and the hub both go through
//! these functions so their outputs agree byte for byte.

use crate::anchor::{spec_id, AnchorPayload};
use crate::augment::Compiled;
use crate::spec::{canonicalize, AnchorConfig, Spec};
use crate::svg::{emit_composed, emit_reference, emit_svg, SvgOptions};

/// Hub address used when neither a flag nor the environment names one.
pub const DEFAULT_HUB: &str = "http://127.0.0.1:7070";

pub fn anchor_config(spec: &Spec) -> AnchorConfig {
    spec.ar
        .as_ref()
        .map(|ar| ar.anchor)
        .unwrap_or_else(|| AnchorConfig::default_for(spec.width, spec.height))
}

pub fn anchor_payload(spec: &Spec, id: &str, version: u64, hub: &str) -> AnchorPayload {
    AnchorPayload {
        id: id.to_string(),
        version,
        hub: hub.to_string(),
        rect: anchor_config(spec).rect(),
    }
}

/// Id a spec gets when it is first published.
pub fn local_id(spec: &Spec) -> String {
    spec_id(canonicalize(spec).as_bytes())
}

/// The printable static layer with the anchor box inscribed.
pub fn render_reference(c: &Compiled, payload: &AnchorPayload) -> String {
    emit_reference(c.static_scene(), payload.rect, &payload.to_canonical())
}

/// The virtual layer alone, in its own coordinates. `None` without an `ar` block.
pub fn render_virtual(c: &Compiled) -> Option<String> {
    if !c.has_virtual() {
        return None;
    }
    let v = &c.composed.virtual_scene;
    Some(emit_svg(v, v.extent(), SvgOptions::default()))
}

/// Both layers composed, with the orange and blue border boxes.
pub fn render_preview(c: &Compiled) -> String {
    let s = &c.composed;
    emit_composed(
        &s.static_scene,
        &s.virtual_scene,
        s.offset,
        s.view_box,
        SvgOptions { border_boxes: true },
    )
}
