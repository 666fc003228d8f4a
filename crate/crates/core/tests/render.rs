use std::collections::BTreeMap;

use augvis_core::augment::{compile, compose_preview, expand_placeholders, placeholder_rows};
use augvis_core::dataflow::run_spec;
use augvis_core::encode::{encode_marks, EncodeError, LayerPolicy};
use augvis_core::scale::{resolve_scale, ScaleSet};
use augvis_core::scene::{Geometry, Layer, SceneGraph};
use augvis_core::spec::{parse_spec, AppendSource, DomainDecl, Placement, RangeDecl, Rect, ScaleDecl, ScaleKind, Spec};
use augvis_core::svg::{emit_composed, emit_svg, SvgOptions};
use augvis_core::validator::{check_scales, detect_occlusion, scene_oracle};
use augvis_core::value::Value;
use augvis_testkit::{gen, rng};
use proptest::prelude::*;
use serde_json::json;

fn spec(doc: serde_json::Value) -> Spec {
    parse_spec(&doc.to_string()).unwrap()
}

fn scales_of(spec: &Spec) -> (BTreeMap<String, augvis_core::dataflow::DataflowTrace>, ScaleSet) {
    let traces = run_spec(spec).unwrap();
    let scales = spec
        .scales
        .iter()
        .map(|d| (d.name.clone(), resolve_scale(d, &traces).unwrap()))
        .collect();
    (traces, scales)
}

fn bars(values: serde_json::Value) -> Spec {
    spec(json!({
        "width": 100, "height": 100,
        "data": [{"name": "t", "fields": ["c", "v"], "values": values,
                  "transform": [{"type": "aggregate", "groupby": ["c"], "ops": ["sum"], "fields": ["v"], "as": ["s"]}]}],
        "scales": [
            {"name": "x", "type": "band", "domain": {"data": "t", "field": "c"}, "range": [0, 100]},
            {"name": "y", "type": "linear", "domain": [0, 3], "range": [100, 0]}
        ],
        "marks": [{"type": "rect", "from": {"data": "t"}, "encode": {
            "x": {"scale": "x", "field": "c"}, "y": {"scale": "y", "field": "s"}, "y2": {"scale": "y", "value": 0}
        }}]
    }))
}

#[test]
fn rects_over_an_aggregate_use_the_band() {
    let s = bars(json!([{"c": "A", "v": 3}, {"c": "B", "v": 3}]));
    let (traces, scales) = scales_of(&s);
    let scene = encode_marks(&s, &traces, &scales, LayerPolicy::All(Layer::Static)).unwrap();
    assert_eq!(scene.items.len(), 2);
    // step 100 / (2 - 0.1 + 2 * 0.05) = 50; x(A) = 0.05 * 50; bandwidth 0.9 * 50
    assert_eq!(
        scene.items[0].geometry,
        Geometry::Rect { x: 2.5, y: 0.0, width: 45.0, height: 100.0 }
    );
    assert_eq!(scene.items[1].geometry, Geometry::Rect { x: 52.5, y: 0.0, width: 45.0, height: 100.0 });
}

#[test]
fn zero_rows_give_an_empty_scene() {
    let mut s = bars(json!([]));
    s.scales[0].domain = DomainDecl::Values(vec![Value::from("A")]);
    let (traces, scales) = scales_of(&s);
    let scene = encode_marks(&s, &traces, &scales, LayerPolicy::All(Layer::Static)).unwrap();
    assert!(scene.items.is_empty());
}

#[test]
fn arcs_carry_pie_angles() {
    let s = spec(json!({
        "width": 100, "height": 100,
        "data": [{"name": "t", "values": [{"v": 1}, {"v": 1}, {"v": 2}], "transform": [{"type": "pie", "field": "v"}]}],
        "marks": [{"type": "arc", "from": {"data": "t"}, "encode": {
            "startAngle": {"field": "startAngle"}, "endAngle": {"field": "endAngle"}
        }}]
    }));
    let (traces, scales) = scales_of(&s);
    let scene = encode_marks(&s, &traces, &scales, LayerPolicy::All(Layer::Static)).unwrap();
    let angles: Vec<(f64, f64)> = scene
        .items
        .iter()
        .map(|i| match i.geometry {
            Geometry::Arc { start, end, .. } => (start, end),
            _ => unreachable!(),
        })
        .collect();
    let q = std::f64::consts::FRAC_PI_2;
    assert_eq!(angles, vec![(0.0, q), (q, 2.0 * q), (2.0 * q, 4.0 * q)]);
}

#[test]
fn ordinal_scale_on_a_position_channel_is_rejected() {
    let mut s = bars(json!([{"c": "A", "v": 1}]));
    s.scales[0].kind = ScaleKind::Ordinal;
    s.scales[0].range = RangeDecl::Category;
    let (traces, scales) = scales_of(&s);
    let err = encode_marks(&s, &traces, &scales, LayerPolicy::All(Layer::Static)).unwrap_err();
    assert!(matches!(err, EncodeError::ChannelScaleMismatch { .. }), "{err:?}");
}

fn band(domain: &[&str]) -> augvis_core::scale::ResolvedScale {
    let decl = ScaleDecl::new(
        "x",
        ScaleKind::Band,
        DomainDecl::Values(domain.iter().map(|d| Value::from(*d)).collect()),
        RangeDecl::Pixels(0.0, 50.0 * domain.len() as f64),
    );
    resolve_scale(&decl, &BTreeMap::new()).unwrap()
}

fn linear(hi: f64) -> augvis_core::scale::ResolvedScale {
    let decl = ScaleDecl::new(
        "y",
        ScaleKind::Linear,
        DomainDecl::Values(vec![Value::Number(0.0), Value::Number(hi)]),
        RangeDecl::Pixels(0.0, 100.0),
    );
    resolve_scale(&decl, &BTreeMap::new()).unwrap()
}

#[test]
fn scale_checks() {
    let set = |s: augvis_core::scale::ResolvedScale| ScaleSet::from([(s.name.clone(), s)]);
    // Fixed step: [A,B] over 100 px and [A,B,C] over 150 px.
    assert!(check_scales(&set(band(&["A", "B"])), &set(band(&["A", "B", "C"]))).is_empty());
    assert_eq!(check_scales(&set(band(&["A", "B"])), &set(band(&["A", "C", "B"]))).len(), 1);
    let d = check_scales(&set(linear(10.0)), &set(linear(20.0)));
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].base["slope"], json!(10.0));
    assert_eq!(d[0].aug["slope"], json!(5.0));
}

fn rect_scene(layer: Layer, rects: &[(f64, f64, f64, f64)]) -> SceneGraph {
    let s = spec(json!({
        "width": 100, "height": 100,
        "data": [{"name": "t", "values": rects.iter().map(|(x, y, w, h)| json!({"x": x, "y": y, "w": w, "h": h})).collect::<Vec<_>>()}],
        "marks": [{"type": "rect", "from": {"data": "t"}, "encode": {
            "x": {"field": "x"}, "y": {"field": "y"}, "width": {"field": "w"}, "height": {"field": "h"}
        }}]
    }));
    let (traces, scales) = scales_of(&s);
    encode_marks(&s, &traces, &scales, LayerPolicy::All(layer)).unwrap()
}

#[test]
fn occlusion_uses_box_overlap() {
    let stat = rect_scene(Layer::Static, &[(0.0, 0.0, 10.0, 10.0)]);
    let virt = rect_scene(Layer::Virtual, &[(5.0, 5.0, 10.0, 10.0)]);
    let found = detect_occlusion(&virt, &stat, &[], None);
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].overlap_area, 25.0);

    let label = detect_occlusion(&virt, &SceneGraph::empty(stat.frame), &[Rect::new(0.0, 0.0, 8.0, 8.0)], None);
    assert_eq!(label.len(), 1);

    let mut p = Placement::default_for(augvis_core::spec::ArMode::MultipleView);
    p.gap = 10.0;
    let composed = compose_preview(&stat, &virt, &p);
    assert!(detect_occlusion(&composed.placed_virtual(), &stat, &[], None).is_empty());
}

#[test]
fn scene_oracle_tolerance() {
    let a = rect_scene(Layer::Static, &[(0.0, 0.0, 10.0, 10.0)]);
    assert!(scene_oracle(&a, &a).valid);
    let b = rect_scene(Layer::Static, &[(0.0, 0.0, 10.0, 10.001)]);
    let v = scene_oracle(&a, &b);
    assert!(!v.valid);
    assert!((v.max_displacement - 0.001).abs() < 1e-12);
}

#[test]
fn overlay_translates_every_virtual_item() {
    let stat = rect_scene(Layer::Static, &[(0.0, 0.0, 10.0, 10.0)]);
    let virt = rect_scene(Layer::Virtual, &[(1.0, 2.0, 3.0, 4.0), (0.0, 0.0, 1.0, 1.0)]);
    let mut p = Placement::default_for(augvis_core::spec::ArMode::Composite);
    p.dx = 50.0;
    p.dy = 60.0;
    let placed = compose_preview(&stat, &virt, &p).placed_virtual();
    for (a, b) in virt.items.iter().zip(&placed.items) {
        assert_eq!(b.bbox(), a.bbox().translate(50.0, 60.0));
    }
}

#[test]
fn placeholder_expansion_replaces_sources() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/timeline_placeholder.pv.json")).unwrap();
    let spec = parse_spec(&text).unwrap();
    let ar = spec.ar.as_ref().unwrap();
    let expanded = expand_placeholders(ar);
    let AppendSource::Values(rows) = &expanded.appends[0].source else { panic!() };
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["label"], Value::from("Event-3"));
    assert_eq!(expand_placeholders(ar), expanded);
}

fn static_group(svg: &str) -> &str {
    let start = svg.find("<g data-layer=\"static\">").unwrap();
    let end = start + svg[start..].find("</g>\n").unwrap() + 5;
    &svg[start..end]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn composition_never_touches_static_items(seed in any::<u64>(), mode in 0..3usize) {
        let mut r = rng(seed);
        let (_, spec) = match mode {
            0 => gen::extend_spec(&mut r),
            1 => gen::nested_spec(&mut r, "composite"),
            _ => gen::nested_spec(&mut r, "multipleView"),
        };
        let c = compile(&spec).unwrap();
        let opts = SvgOptions { border_boxes: true };
        let alone = emit_svg(&c.base.scene, c.base.scene.frame, opts);
        let composed = emit_composed(&c.composed.static_scene, &c.composed.virtual_scene, c.composed.offset, c.composed.view_box, opts);
        prop_assert_eq!(static_group(&alone), static_group(&composed));
        prop_assert_eq!(emit_svg(&c.base.scene, c.base.scene.frame, opts), alone);
        prop_assert!(c.composed.view_box.contains(&c.base.scene.frame));
    }

    #[test]
    fn encode_is_total(seed in any::<u64>()) {
        let (_, spec) = gen::extend_spec(&mut rng(seed));
        let c = compile(&spec).unwrap();
        let expected: usize = spec.marks.iter().map(|m| c.base.traces[&m.from].output().len()).sum();
        prop_assert_eq!(c.base.scene.items.len(), expected);
        prop_assert!(c.base.scene.items.iter().all(|i| i.geometry.is_finite()));
    }

    #[test]
    fn linear_scales_are_strictly_monotone(lo in -1e3..1e3f64, span in 1e-3..1e3f64, r0 in -500.0..500.0f64, r1 in -500.0..500.0f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        prop_assume!((r1 - r0).abs() > 1e-6 && (a - b).abs() > 1e-9);
        let decl = ScaleDecl::new("s", ScaleKind::Linear,
            DomainDecl::Values(vec![Value::Number(lo), Value::Number(lo + span)]), RangeDecl::Pixels(r0, r1));
        let s = resolve_scale(&decl, &BTreeMap::new()).unwrap();
        let (x, y) = (lo + a * span, lo + b * span);
        let (fx, fy) = (s.map(&Value::Number(x)).unwrap(), s.map(&Value::Number(y)).unwrap());
        prop_assert_eq!((fx - fy).signum() * (x - y).signum(), (r1 - r0).signum());
    }

    #[test]
    fn band_positions_increase_with_index(n in 1..40usize, width in 1.0..2000.0f64, pi in 0.0..0.9f64, po in 0.0..2.0f64) {
        let mut decl = ScaleDecl::new("b", ScaleKind::Band,
            DomainDecl::Values((0..n).map(|i| Value::Number(i as f64)).collect()), RangeDecl::Pixels(0.0, width));
        decl.padding_inner = pi;
        decl.padding_outer = po;
        let s = resolve_scale(&decl, &BTreeMap::new()).unwrap();
        let xs: Vec<f64> = (0..n).map(|i| s.map(&Value::Number(i as f64)).unwrap()).collect();
        prop_assert!(xs.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(xs[n - 1] + s.bandwidth() <= width + 1e-9);
    }

    #[test]
    fn placeholders_are_deterministic(seed in any::<u64>(), count in 0..50u64, lo in -100.0..100.0f64, span in 0.0..100.0f64) {
        let p = augvis_core::spec::PlaceholderSpec {
            count,
            seed,
            fields: vec![augvis_core::spec::PlaceholderField {
                name: "q".into(),
                kind: augvis_core::spec::FieldKind::Quantitative,
                pattern: None,
                range: Some((lo, lo + span)),
                span: None,
                options: None,
            }],
        };
        let rows = placeholder_rows(&p);
        prop_assert_eq!(rows.len() as u64, count);
        prop_assert_eq!(&rows, &placeholder_rows(&p));
        for r in &rows {
            let v = r["q"].as_f64().unwrap();
            prop_assert!(v >= lo && v <= lo + span);
        }
    }
}
