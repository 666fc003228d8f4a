//! Seeded generators for random tables and augmented specs.
//!
//! Extend-mode specs keep every derived column on a visual channel and put
//! the only value-producing transform last, so a change in any stage is
//! visible in the scene.

use augvis_core::dataflow::{ingest, DataTable, SourceTag};
use augvis_core::spec::{parse_spec, DatasetDecl, Spec};
use augvis_core::value::{Row, Value};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value as Json};

pub const MAX_ROWS: usize = 30;

fn cat(rng: &mut impl Rng, pool: usize) -> String {
    format!("C{}", rng.gen_range(0..pool))
}

fn grp(rng: &mut impl Rng) -> String {
    format!("G{}", rng.gen_range(0..3))
}

/// Rows with `cat`, `grp`, an integer `v` in 0..=20 and a float `w`.
pub fn rows(rng: &mut impl Rng, count: std::ops::RangeInclusive<usize>, cat_pool: usize) -> Vec<Json> {
    let n = rng.gen_range(count);
    (0..n)
        .map(|_| {
            json!({
                "cat": cat(rng, cat_pool),
                "grp": grp(rng),
                "v": rng.gen_range(0..=20),
                "w": (rng.gen_range(-1000..1000) as f64) / 8.0,
            })
        })
        .collect()
}

/// Random table for the transform oracles, as both raw columns and an ingested table.
pub struct RandomTable {
    pub cats: Vec<Value>,
    pub ints: Vec<i64>,
    pub floats: Vec<f64>,
    pub table: DataTable,
}

pub fn table(rng: &mut impl Rng, min_rows: usize) -> RandomTable {
    let n = rng.gen_range(min_rows..=MAX_ROWS);
    let mut cats = Vec::new();
    let mut ints = Vec::new();
    let mut floats = Vec::new();
    let mut values = Vec::new();
    for _ in 0..n {
        let c = Value::String(cat(rng, 5));
        let i = rng.gen_range(-50..=150i64);
        let f = rng.gen_range(-100.0..100.0f64);
        let mut r = Row::new();
        r.insert("cat".into(), c.clone());
        r.insert("i".into(), Value::Number(i as f64));
        r.insert("f".into(), Value::Number(f));
        values.push(r);
        cats.push(c);
        ints.push(i);
        floats.push(f);
    }
    let mut decl = DatasetDecl::new("t", values);
    decl.fields = Some(vec!["cat".into(), "i".into(), "f".into()]);
    let table = ingest(&decl, &decl.values, SourceTag::Base).expect("homogeneous rows");
    RandomTable {
        cats,
        ints,
        floats,
        table,
    }
}

fn band(name: &str, data: &str, field: &str, range: &str) -> Json {
    json!({"name": name, "type": "band", "domain": {"data": data, "field": field}, "range": range})
}

fn linear(name: &str, data: &str, fields: &[&str], range: &str, zero: bool) -> Json {
    json!({"name": name, "type": "linear", "domain": {"data": data, "fields": fields}, "range": range, "zero": zero})
}

fn ordinal(name: &str, data: &str, field: &str) -> Json {
    json!({"name": name, "type": "ordinal", "domain": {"data": data, "field": field}, "range": "category"})
}

/// Row-level prefix: filters that keep every base row, formulas and sorts.
/// Returns the transforms and the name of the value column to use afterwards.
fn row_level_prefix(rng: &mut impl Rng, base: &[Json], max: usize) -> (Vec<Json>, &'static str) {
    let mut out = Vec::new();
    let mut value = "v";
    for _ in 0..rng.gen_range(0..=max) {
        match rng.gen_range(0..3) {
            0 => {
                let mut min = base.iter().filter_map(|r| r["v"].as_f64()).fold(f64::INFINITY, f64::min);
                if value == "v2" {
                    min = min * 2.0 + 1.0;
                }
                out.push(json!({"type": "filter", "expr": format!("datum.{value} >= {min}")}));
            }
            1 if value == "v" => {
                out.push(json!({"type": "formula", "expr": "datum.v * 2 + 1", "as": "v2"}));
                value = "v2";
            }
            _ => {
                let field = *["v", "cat", "grp"].choose(rng).unwrap();
                let order = *["ascending", "descending"].choose(rng).unwrap();
                out.push(json!({"type": "sort", "field": field, "order": order}));
            }
        }
    }
    (out, value)
}

/// Unit spec (no `ar`) over dataset `name`: a row-level prefix followed by
/// at most one value-producing transform, every derived column encoded.
pub fn unit(rng: &mut impl Rng, name: &str, base_rows: &[Json], width: u32, height: u32) -> Json {
    let terminal = rng.gen_range(0..5);
    let (mut transform, value) = row_level_prefix(rng, base_rows, if terminal == 0 { 3 } else { 2 });
    let (scales, marks) = match terminal {
        1 => {
            let op = *["sum", "count", "mean", "min", "max"].choose(rng).unwrap();
            let two_keys = rng.gen_bool(0.3);
            let groupby: Vec<&str> = if two_keys { vec!["cat", "grp"] } else { vec!["cat"] };
            let field = if op == "count" { Json::Null } else { json!(value) };
            transform.push(json!({"type": "aggregate", "groupby": groupby, "ops": [op], "fields": [field], "as": ["agg"]}));
            let mut encode = json!({
                "x": {"scale": "x", "field": "cat"},
                "y": {"scale": "y", "field": "agg"},
                "y2": {"scale": "y", "value": 0}
            });
            let mut scales = vec![band("x", name, "cat", "width"), linear("y", name, &["agg"], "height", true)];
            if two_keys {
                encode["fill"] = json!({"scale": "color", "field": "grp"});
                scales.push(ordinal("color", name, "grp"));
            }
            (scales, vec![json!({"type": "rect", "from": {"data": name}, "encode": encode})])
        }
        2 => {
            let mut t = json!({"type": "stack", "groupby": ["cat"], "field": value});
            if rng.gen_bool(0.5) {
                t["sortField"] = json!("w");
            }
            transform.push(t);
            (
                vec![band("x", name, "cat", "width"), linear("y", name, &["y1"], "height", true)],
                vec![json!({"type": "rect", "from": {"data": name}, "encode": {
                    "x": {"scale": "x", "field": "cat"},
                    "y": {"scale": "y", "field": "y1"},
                    "y2": {"scale": "y", "field": "y0"}
                }})],
            )
        }
        3 => {
            transform.push(json!({"type": "pie", "field": value}));
            let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
            (
                vec![ordinal("color", name, "cat")],
                vec![json!({"type": "arc", "from": {"data": name}, "encode": {
                    "x": {"value": cx},
                    "y": {"value": cy},
                    "innerRadius": {"value": 10},
                    "outerRadius": {"value": cx.min(cy) - 5.0},
                    "startAngle": {"field": "startAngle"},
                    "endAngle": {"field": "endAngle"},
                    "fill": {"scale": "color", "field": "cat"}
                }})],
            )
        }
        4 => {
            let extent = if rng.gen_bool(0.7) {
                json!("auto")
            } else {
                let hi = if value == "v" { 20 } else { 41 };
                json!([0, hi + rng.gen_range(0..10)])
            };
            transform.push(json!({"type": "bin", "field": value, "extent": extent, "maxbins": rng.gen_range(3..=12)}));
            (
                vec![
                    linear("x", name, &["bin0", "bin1"], "width", false),
                    linear("y", name, &[value], "height", true),
                ],
                vec![json!({"type": "rect", "from": {"data": name}, "encode": {
                    "x": {"scale": "x", "field": "bin0"},
                    "x2": {"scale": "x", "field": "bin1"},
                    "y": {"scale": "y", "field": value},
                    "height": {"value": 3}
                }})],
            )
        }
        _ => {
            let point = rng.gen_bool(0.5);
            let x = if point {
                json!({"name": "x", "type": "point", "domain": {"data": name, "field": "cat"}, "range": "width"})
            } else {
                band("x", name, "cat", "width")
            };
            (
                vec![x, linear("y", name, &[value], "height", true), ordinal("color", name, "grp")],
                vec![json!({"type": "symbol", "from": {"data": name}, "encode": {
                    "x": {"scale": "x", "field": "cat", "band": 0.5},
                    "y": {"scale": "y", "field": value},
                    "size": {"value": 3},
                    "fill": {"scale": "color", "field": "grp"}
                }})],
            )
        }
    };
    json!({
        "width": width,
        "height": height,
        "data": [{"name": name, "fields": ["cat", "grp", "v", "w"], "values": base_rows, "transform": transform}],
        "scales": scales,
        "marks": marks,
    })
}

fn parse(doc: &Json) -> Spec {
    parse_spec(&doc.to_string()).unwrap_or_else(|e| panic!("generated spec does not parse: {e}\n{doc:#}"))
}

/// Random Extended View spec: 1..=30 base rows, 1..=5 appended rows that may
/// reuse or introduce categories and fall outside the base value range.
pub fn extend_spec(rng: &mut impl Rng) -> (Json, Spec) {
    let base = rows(rng, 1..=MAX_ROWS, 4);
    let mut doc = unit(rng, "t", &base, 300, 200);
    let appended: Vec<Json> = rows(rng, 1..=5, 7)
        .into_iter()
        .map(|mut r| {
            if rng.gen_bool(0.3) {
                r["v"] = json!(rng.gen_range(21..=40));
            }
            r
        })
        .collect();
    doc["ar"] = json!({"mode": "extend", "appends": [{"dataset": "t", "values": appended}]});
    let spec = parse(&doc);
    (doc, spec)
}

fn placement(rng: &mut impl Rng, allow_overlay: bool) -> Json {
    let dirs: &[&str] = if allow_overlay {
        &["right", "left", "top", "bottom", "overlay"]
    } else {
        &["right", "left", "top", "bottom"]
    };
    json!({
        "direction": *dirs.choose(rng).unwrap(),
        "dx": rng.gen_range(-40..=40),
        "dy": rng.gen_range(-40..=40),
        "gap": rng.gen_range(0..=40),
    })
}

/// Random spec whose `ar` block nests an independent unit (composite or multipleView).
pub fn nested_spec(rng: &mut impl Rng, mode: &str) -> (Json, Spec) {
    let base = rows(rng, 1..=MAX_ROWS, 4);
    let mut doc = unit(rng, "t", &base, 300, 200);
    let inner_rows = rows(rng, 1..=MAX_ROWS, 4);
    let (w, h) = (rng.gen_range(100..=300), rng.gen_range(100..=200));
    let nested = unit(rng, "u", &inner_rows, w, h);
    let appends = if rng.gen_bool(0.5) {
        json!([{"dataset": "u", "values": rows(rng, 1..=5, 7)}])
    } else {
        json!([])
    };
    doc["ar"] = json!({
        "mode": mode,
        "appends": appends,
        "nested": nested,
        "placement": placement(rng, mode == "composite"),
    });
    if rng.gen_bool(0.5) {
        doc["protected"] = json!([{"x": 0, "y": 0, "width": 120, "height": 16}]);
    }
    let spec = parse(&doc);
    (doc, spec)
}
