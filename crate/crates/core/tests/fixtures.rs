use std::f64::consts::PI;
use std::path::PathBuf;

use augvis_core::augment::{compile, Compiled};
use augvis_core::spec::{parse_spec, validate_schema, Spec};
use augvis_core::svg::{emit_svg, SvgOptions};
use augvis_core::validator::{oracle_for, validate_compiled, ValidationReport, Verdict};
use augvis_core::value::Value;

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn load(name: &str) -> Spec {
    let text = std::fs::read_to_string(fixture_path(&format!("{name}.pv.json"))).unwrap();
    let spec = parse_spec(&text).unwrap();
    assert!(validate_schema(&spec).is_empty(), "{name}");
    spec
}

fn run(name: &str) -> (Compiled, ValidationReport) {
    let spec = load(name);
    let c = compile(&spec).unwrap();
    let r = validate_compiled(&spec, &c).unwrap();
    (c, r)
}

#[test]
fn bar_extend_is_valid() {
    let (c, r) = run("bar_extend");
    assert_eq!(r.verdict, Verdict::Valid);
    assert!(oracle_for(&c).unwrap().valid);
}

#[test]
fn bar_extend_grows_the_band_axis_by_one_step() {
    let (c, _) = run("bar_extend");
    let base = &c.base.scales["x"];
    let aug = &c.augmented[0].scales["x"];
    assert_eq!(aug.domain_values().unwrap(), &[Value::from("A"), Value::from("B"), Value::from("C")]);
    let end = |s: &augvis_core::scale::ResolvedScale| match s.mapping {
        augvis_core::scale::ScaleMapping::Band { end, step, .. } => (end, step),
        _ => unreachable!(),
    };
    let (b_end, step) = end(base);
    let (a_end, a_step) = end(aug);
    assert_eq!(step, a_step);
    assert!((a_end - b_end - step).abs() < 1e-9);
}

#[test]
fn pie_extend_fails_at_the_pie_stage() {
    let (c, r) = run("pie_extend");
    assert_eq!(r.verdict, Verdict::Invalid);
    let first = &r.stage_diffs[0];
    assert_eq!((first.stage_index, first.transform_kind), (0, "pie"));
    let out = |t: &augvis_core::dataflow::DataflowTrace| t.output().rows[0].get("endAngle").as_f64().unwrap();
    assert!((out(&c.base.traces["share"]) - PI / 2.0).abs() < 1e-12);
    assert!((out(&c.augmented[0].traces["share"]) - PI / 4.0).abs() < 1e-12);
    let oracle = oracle_for(&c).unwrap();
    assert!(!oracle.valid);
    assert_eq!(oracle.flagged.len(), c.base.scene.items.len());
}

#[test]
fn cluster_tree_is_invalid_and_tidy_fixes_it() {
    let (c, r) = run("tree_cluster");
    assert_eq!(r.verdict, Verdict::Invalid);
    let first = &r.stage_diffs[0];
    assert_eq!(first.transform_kind, "treelayout");
    assert!(first.hint.text.contains("from 'cluster' to 'tidy'"));
    assert!(!oracle_for(&c).unwrap().valid);

    let (c, r) = run("tree_tidy");
    assert_eq!(r.verdict, Verdict::Valid, "{}", r.to_text());
    assert!(oracle_for(&c).unwrap().valid);
}

#[test]
fn tidy_fixture_differs_from_cluster_only_in_method() {
    let a = std::fs::read_to_string(fixture_path("tree_cluster.pv.json")).unwrap();
    let b = std::fs::read_to_string(fixture_path("tree_tidy.pv.json")).unwrap();
    assert_eq!(a.replace("\"cluster\"", "\"tidy\""), b);
}

#[test]
fn treemap_hint_is_verbatim() {
    let (_, r) = run("treemap_internal");
    assert_eq!(r.verdict, Verdict::Invalid);
    assert_eq!(
        r.first_hint().unwrap().text,
        "avoid 'treemap' when new nodes are added to the internal nodes"
    );
}

#[test]
fn bin_mismatch_is_below_one_pixel() {
    let (c, r) = run("bin_unnoticeable");
    assert_eq!(r.verdict, Verdict::Invalid);
    assert_eq!(r.stage_diffs[0].transform_kind, "bin");
    let oracle = oracle_for(&c).unwrap();
    assert!(!oracle.valid);
    // Base extent starts at 0.3, the appended 0.0 moves every edge by 0.3
    // units on a 3 px/unit axis.
    assert!((oracle.max_displacement - 0.9).abs() < 1e-9, "{}", oracle.max_displacement);
}

#[test]
fn other_modes() {
    let (_, r) = run("composite");
    assert!(r.stage_diffs.is_empty());
    assert_eq!(r.verdict, Verdict::Warnings);
    assert!(!r.occlusions.is_empty());

    let (_, r) = run("multiple_view");
    assert_eq!(r.verdict, Verdict::Valid);

    let (c, r) = run("small_multiple");
    assert_eq!(c.augmented.len(), 2);
    assert_eq!(r.verdict, Verdict::Warnings);
    assert!(r.warnings.iter().all(|w| w.kind == "scalability"));

    let (_, r) = run("timeline_placeholder");
    assert_eq!(r.verdict, Verdict::Valid);
}

#[test]
fn static_svg_matches_golden() {
    let (c, _) = run("bar_extend");
    let svg = emit_svg(&c.base.scene, c.base.scene.frame, SvgOptions::default());
    let golden = std::fs::read_to_string(fixture_path("golden/bar_extend.static.svg")).unwrap();
    assert_eq!(svg, golden);
}
