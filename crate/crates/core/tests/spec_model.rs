use augvis_core::spec::{canonicalize, parse_spec, validate_schema, ArMode, IssueKind, ParseError};
use augvis_testkit::{gen, rng};
use proptest::prelude::*;

const MINIMAL: &str = r#"{
  "width": 100, "height": 80,
  "data": [{"name": "t", "values": [{"c": "A", "v": 1}, {"c": "B", "v": 2}]}],
  "scales": [
    {"name": "x", "type": "band", "domain": {"data": "t", "field": "c"}, "range": "width"},
    {"name": "y", "type": "linear", "domain": {"data": "t", "field": "v"}, "range": "height"}
  ],
  "marks": [{"type": "rect", "from": {"data": "t"}, "encode": {
    "x": {"scale": "x", "field": "c"}, "y": {"scale": "y", "field": "v"}, "y2": {"scale": "y", "value": 0}
  }}]
}"#;

fn with_ar(ar: &str) -> String {
    format!("{},\n  \"ar\": {ar}\n}}", MINIMAL.trim_end().trim_end_matches('}'))
}

#[test]
fn minimal_document_has_no_ar() {
    let spec = parse_spec(MINIMAL).unwrap();
    assert!(spec.ar.is_none());
    assert_eq!((spec.width, spec.height), (100, 80));
    assert!(validate_schema(&spec).is_empty());
}

#[test]
fn ar_block_is_parsed() {
    let spec = parse_spec(&with_ar(r#"{"mode": "extend", "appends": [{"dataset": "t", "values": [{"c": "C", "v": 3}]}]}"#)).unwrap();
    assert_eq!(spec.ar.unwrap().mode, ArMode::Extend);
}

#[test]
fn extend_with_nested_spec_is_rejected() {
    let err = parse_spec(&with_ar(&format!(
        r#"{{"mode": "extend", "appends": [{{"dataset": "t", "values": []}}], "nested": {MINIMAL}}}"#
    )))
    .unwrap_err();
    assert!(matches!(err, ParseError::ModeConflict { .. } | ParseError::UnknownField(_)), "{err:?}");
}

#[test]
fn syntax_errors_carry_positions() {
    match parse_spec("{\n  \"width\": 10,\n  oops\n}") {
        Err(ParseError::Syntax { line, column, .. }) => assert_eq!((line, column), (3, 3)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_keys_and_bad_types_are_rejected() {
    let unknown = MINIMAL.replacen("\"width\": 100", "\"width\": 100, \"colour\": 1", 1);
    assert!(matches!(parse_spec(&unknown), Err(ParseError::UnknownField(p)) if p == "colour"));
    let bad = MINIMAL.replacen("\"width\": 100", "\"width\": \"wide\"", 1);
    assert!(matches!(parse_spec(&bad), Err(ParseError::TypeMismatch { .. })));
}

#[test]
fn schema_reports_paths() {
    let spec = parse_spec(&MINIMAL.replace("\"field\": \"v\"}, \"range\"", "\"field\": \"nope\"}, \"range\"")).unwrap();
    let issues = validate_schema(&spec);
    assert_eq!(issues.len(), 1, "{issues:?}");
    assert_eq!(issues[0].kind, IssueKind::MissingField("nope".into()));
    assert!(issues[0].path.starts_with("scales[1]"), "{}", issues[0].path);
}

#[test]
fn anchor_outside_the_canvas_is_an_issue() {
    let spec = parse_spec(&with_ar(
        r#"{"mode": "extend", "appends": [{"dataset": "t", "values": [{"c": "C", "v": 3}]}], "anchor": {"x": 90, "y": 0, "size": 48}}"#,
    ))
    .unwrap();
    assert!(validate_schema(&spec).iter().any(|i| i.kind == IssueKind::AnchorOutOfBounds));
}

#[test]
fn canonical_form_writes_defaults() {
    let canon = canonicalize(&parse_spec(MINIMAL).unwrap());
    assert!(canon.contains("\"paddingInner\":0.1"), "{canon}");
    assert!(!canon.contains(' '));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_is_a_fixed_point(seed in any::<u64>()) {
        let (_, spec) = gen::extend_spec(&mut rng(seed));
        let once = canonicalize(&spec);
        let reparsed = parse_spec(&once).unwrap();
        prop_assert_eq!(&reparsed, &spec);
        prop_assert_eq!(canonicalize(&reparsed), once);
    }

    #[test]
    fn nested_specs_round_trip(seed in any::<u64>()) {
        let (_, spec) = gen::nested_spec(&mut rng(seed), "composite");
        let once = canonicalize(&spec);
        prop_assert_eq!(canonicalize(&parse_spec(&once).unwrap()), once);
    }
}
