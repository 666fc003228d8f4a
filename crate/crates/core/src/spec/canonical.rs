//! Canonical serialization: sorted keys, shortest round-trip numbers, no
//! insignificant whitespace. Every default is written out, so two documents
//! that parse to the same [`Spec`] produce the same bytes.

use serde_json::{json, Map, Value as Json};

use super::model::*;
use crate::value::{Row, Value};

/// Canonical UTF-8 bytes of a spec.
pub fn canonicalize(spec: &Spec) -> String {
    let mut out = String::new();
    write_canonical(&spec_to_json(spec), &mut out);
    out
}

/// Write any JSON value in canonical form.
pub fn write_canonical(v: &Json, out: &mut String) {
    match v {
        Json::Null => out.push_str("null"),
        Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Json::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&format_number(n.as_f64().unwrap_or(0.0)));
            }
        }
        Json::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Json::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Json::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("string serializes"));
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
    }
}

/// Canonical JSON string of an arbitrary value.
pub fn to_canonical_string(v: &Json) -> String {
    let mut out = String::new();
    write_canonical(v, &mut out);
    out
}

/// Shortest round-trip decimal; integral values print without a fraction.
pub fn format_number(n: f64) -> String {
    if n == 0.0 {
        return "0".to_string();
    }
    if n.fract() == 0.0 && n.abs() < 1e15 {
        return format!("{}", n as i64);
    }
    format!("{n}")
}

fn num(n: f64) -> Json {
    serde_json::Number::from_f64(n)
        .map(Json::Number)
        .unwrap_or(Json::Null)
}

fn rows_json(rows: &[Row]) -> Json {
    Json::Array(
        rows.iter()
            .map(|r| Json::Object(r.iter().map(|(k, v)| (k.clone(), v.to_json())).collect()))
            .collect(),
    )
}

fn strs(v: &[String]) -> Json {
    Json::Array(v.iter().map(|s| Json::String(s.clone())).collect())
}

pub fn spec_to_json(spec: &Spec) -> Json {
    let mut o = Map::new();
    o.insert("width".into(), json!(spec.width));
    o.insert("height".into(), json!(spec.height));
    o.insert("data".into(), Json::Array(spec.data.iter().map(dataset_json).collect()));
    o.insert("scales".into(), Json::Array(spec.scales.iter().map(scale_json).collect()));
    o.insert("marks".into(), Json::Array(spec.marks.iter().map(mark_json).collect()));
    o.insert(
        "protected".into(),
        Json::Array(spec.protected.iter().map(rect_json).collect()),
    );
    if let Some(ar) = &spec.ar {
        o.insert("ar".into(), ar_json(ar));
    }
    Json::Object(o)
}

fn rect_json(r: &Rect) -> Json {
    json!({"x": num(r.x), "y": num(r.y), "width": num(r.width), "height": num(r.height)})
}

fn dataset_json(d: &DatasetDecl) -> Json {
    let mut o = Map::new();
    o.insert("name".into(), Json::String(d.name.clone()));
    if let Some(f) = &d.fields {
        o.insert("fields".into(), strs(f));
    }
    if !d.parse.is_empty() {
        o.insert(
            "parse".into(),
            Json::Object(
                d.parse
                    .iter()
                    .map(|(k, v)| {
                        let kind = match v {
                            ParseKind::Date => "date",
                            ParseKind::Number => "number",
                        };
                        (k.clone(), Json::String(kind.into()))
                    })
                    .collect(),
            ),
        );
    }
    o.insert("values".into(), rows_json(&d.values));
    o.insert(
        "transform".into(),
        Json::Array(d.transform.iter().map(transform_json).collect()),
    );
    Json::Object(o)
}

pub fn transform_json(t: &TransformDecl) -> Json {
    let mut o = match t {
        TransformDecl::Filter { expr } => json!({ "expr": expr }),
        TransformDecl::Formula { expr, as_ } => json!({ "expr": expr, "as": as_ }),
        TransformDecl::Aggregate {
            groupby,
            ops,
            fields,
            as_,
        } => json!({
            "groupby": strs(groupby),
            "ops": ops.iter().map(|o| o.name()).collect::<Vec<_>>(),
            "fields": fields,
            "as": strs(as_),
        }),
        TransformDecl::Sort { field, order } => json!({
            "field": field,
            "order": match order { SortOrder::Ascending => "ascending", SortOrder::Descending => "descending" },
        }),
        TransformDecl::Stack {
            groupby,
            field,
            sort_field,
        } => {
            let mut v = json!({ "groupby": strs(groupby), "field": field });
            if let Some(s) = sort_field {
                v["sortField"] = Json::String(s.clone());
            }
            v
        }
        TransformDecl::Pie { field, start_angle } => {
            json!({ "field": field, "startAngle": num(*start_angle) })
        }
        TransformDecl::Bin {
            field,
            extent,
            maxbins,
        } => json!({
            "field": field,
            "extent": match extent {
                BinExtent::Auto => Json::String("auto".into()),
                BinExtent::Fixed(lo, hi) => json!([num(*lo), num(*hi)]),
            },
            "maxbins": maxbins,
        }),
        TransformDecl::Hierarchy {
            id_field,
            parent_field,
        } => json!({ "idField": id_field, "parentField": parent_field }),
        TransformDecl::TreeLayout {
            method,
            id_field,
            parent_field,
            size,
            level_gap,
            leaf_step,
        } => json!({
            "method": method.name(),
            "idField": id_field,
            "parentField": parent_field,
            "size": [num(size.0), num(size.1)],
            "levelGap": num(*level_gap),
            "leafStep": num(*leaf_step),
        }),
        TransformDecl::Treemap {
            field,
            id_field,
            parent_field,
            size,
        } => json!({
            "field": field,
            "idField": id_field,
            "parentField": parent_field,
            "size": [num(size.0), num(size.1)],
            "method": "slice-dice",
        }),
    };
    o["type"] = Json::String(t.kind().name().into());
    o
}

fn scale_json(s: &ScaleDecl) -> Json {
    let mut o = Map::new();
    o.insert("name".into(), Json::String(s.name.clone()));
    o.insert("type".into(), Json::String(s.kind.name().into()));
    o.insert(
        "domain".into(),
        match &s.domain {
            DomainDecl::Values(v) => Json::Array(v.iter().map(Value::to_json).collect()),
            DomainDecl::Data { data, fields } => json!({ "data": data, "fields": strs(fields) }),
        },
    );
    o.insert(
        "range".into(),
        match &s.range {
            RangeDecl::Pixels(a, b) => json!([num(*a), num(*b)]),
            RangeDecl::Category => Json::String("category".into()),
            RangeDecl::Colors(c) => strs(c),
        },
    );
    match s.kind {
        ScaleKind::Band => {
            o.insert("paddingInner".into(), num(s.padding_inner));
            o.insert("paddingOuter".into(), num(s.padding_outer));
        }
        ScaleKind::Point => {
            o.insert("paddingOuter".into(), num(s.padding_outer));
        }
        ScaleKind::Linear => {
            o.insert("zero".into(), Json::Bool(s.zero));
        }
        ScaleKind::Ordinal => {}
    }
    Json::Object(o)
}

fn mark_json(m: &MarkDecl) -> Json {
    let mut o = Map::new();
    o.insert("type".into(), Json::String(m.kind.name().into()));
    if let Some(n) = &m.name {
        o.insert("name".into(), Json::String(n.clone()));
    }
    o.insert("from".into(), json!({ "data": m.from }));
    let mut enc = Map::new();
    for (channel, c) in &m.encode {
        let mut co = Map::new();
        if let Some(s) = &c.scale {
            co.insert("scale".into(), Json::String(s.clone()));
        }
        if let Some(f) = &c.field {
            co.insert("field".into(), Json::String(f.clone()));
        }
        if let Some(v) = &c.value {
            co.insert("value".into(), v.to_json());
        }
        if let Some(b) = c.band {
            co.insert("band".into(), num(b));
        }
        if let Some(off) = c.offset {
            co.insert("offset".into(), num(off));
        }
        enc.insert(channel.clone(), Json::Object(co));
    }
    o.insert("encode".into(), Json::Object(enc));
    Json::Object(o)
}

fn ar_json(ar: &ArBlock) -> Json {
    let mut o = Map::new();
    o.insert("mode".into(), Json::String(ar.mode.name().into()));
    o.insert(
        "appends".into(),
        Json::Array(ar.appends.iter().map(append_json).collect()),
    );
    if let Some(n) = &ar.nested {
        o.insert("nested".into(), spec_to_json(n));
    }
    let p = &ar.placement;
    let mut po = Map::new();
    po.insert("direction".into(), Json::String(p.direction.name().into()));
    po.insert("dx".into(), num(p.dx));
    po.insert("dy".into(), num(p.dy));
    po.insert("gap".into(), num(p.gap));
    if let Some(w) = p.width_hint {
        po.insert("widthHint".into(), num(w));
    }
    if let Some(h) = p.height_hint {
        po.insert("heightHint".into(), num(h));
    }
    o.insert("placement".into(), Json::Object(po));
    o.insert(
        "anchor".into(),
        json!({ "x": num(ar.anchor.x), "y": num(ar.anchor.y), "size": num(ar.anchor.size) }),
    );
    Json::Object(o)
}

fn append_json(a: &AppendDecl) -> Json {
    let mut o = Map::new();
    o.insert("dataset".into(), Json::String(a.dataset.clone()));
    match &a.source {
        AppendSource::Values(rows) => {
            o.insert("values".into(), rows_json(rows));
        }
        AppendSource::Placeholder(p) => {
            let fields = p
                .fields
                .iter()
                .map(|f| {
                    let mut fo = Map::new();
                    fo.insert("name".into(), Json::String(f.name.clone()));
                    fo.insert("kind".into(), Json::String(f.kind.name().into()));
                    if let Some(pat) = &f.pattern {
                        fo.insert("pattern".into(), Json::String(pat.clone()));
                    }
                    if let Some((lo, hi)) = f.range {
                        fo.insert("range".into(), json!([num(lo), num(hi)]));
                    }
                    if let Some(s) = &f.span {
                        fo.insert("span".into(), json!([s.start, s.end, s.step_seconds]));
                    }
                    if let Some(opts) = &f.options {
                        fo.insert(
                            "options".into(),
                            Json::Array(opts.iter().map(Value::to_json).collect()),
                        );
                    }
                    Json::Object(fo)
                })
                .collect();
            o.insert(
                "placeholder".into(),
                json!({ "count": p.count, "seed": p.seed, "fields": Json::Array(fields) }),
            );
        }
    }
    Json::Object(o)
}
