//! JSON document to [`Spec`], with path-attributed errors.

use std::collections::BTreeMap;

use serde_json::{Map, Value as Json};
use thiserror::Error;

use super::model::*;
use crate::value::{Row, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("type mismatch at `{path}`: expected {expected}")]
    TypeMismatch { path: String, expected: String },
    #[error("ar block at `{path}` conflicts with its mode: {message}")]
    ModeConflict { path: String, message: String },
}

impl ParseError {
    fn mismatch(path: &str, expected: impl Into<String>) -> ParseError {
        ParseError::TypeMismatch {
            path: path.to_string(),
            expected: expected.into(),
        }
    }
}

type Result<T> = std::result::Result<T, ParseError>;

/// Parse a spec document.
pub fn parse_spec(text: &str) -> Result<Spec> {
    let json: Json = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    spec_from_json(&json, "")
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn index(path: &str, i: usize) -> String {
    format!("{path}[{i}]")
}

/// Object reader that tracks which keys were consumed.
struct Obj<'a> {
    path: String,
    map: &'a Map<String, Json>,
    allowed: Vec<&'static str>,
}

impl<'a> Obj<'a> {
    fn new(v: &'a Json, path: &str) -> Result<Obj<'a>> {
        match v {
            Json::Object(map) => Ok(Obj {
                path: path.to_string(),
                map,
                allowed: Vec::new(),
            }),
            _ => Err(ParseError::mismatch(path, "object")),
        }
    }

    fn at(&self, key: &str) -> String {
        join(&self.path, key)
    }

    fn opt(&mut self, key: &'static str) -> Option<&'a Json> {
        self.allowed.push(key);
        self.map.get(key).filter(|v| !v.is_null())
    }

    fn req(&mut self, key: &'static str) -> Result<&'a Json> {
        self.opt(key)
            .ok_or_else(|| ParseError::MissingField(join(&self.path, key)))
    }

    fn has(&self, key: &str) -> bool {
        self.map.get(key).is_some_and(|v| !v.is_null())
    }

    fn req_str(&mut self, key: &'static str) -> Result<String> {
        let v = self.req(key)?;
        as_str(v, &self.at(key))
    }

    fn opt_str(&mut self, key: &'static str) -> Result<Option<String>> {
        let path = self.at(key);
        self.opt(key).map(|v| as_str(v, &path)).transpose()
    }

    fn str_or(&mut self, key: &'static str, default: &str) -> Result<String> {
        Ok(self.opt_str(key)?.unwrap_or_else(|| default.to_string()))
    }

    fn req_f64(&mut self, key: &'static str) -> Result<f64> {
        let v = self.req(key)?;
        as_f64(v, &self.at(key))
    }

    fn opt_f64(&mut self, key: &'static str) -> Result<Option<f64>> {
        let path = self.at(key);
        self.opt(key).map(|v| as_f64(v, &path)).transpose()
    }

    fn f64_or(&mut self, key: &'static str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    fn opt_array(&mut self, key: &'static str) -> Result<Option<&'a Vec<Json>>> {
        let path = self.at(key);
        self.opt(key).map(|v| as_array(v, &path)).transpose()
    }

    fn array_or_empty(&mut self, key: &'static str) -> Result<&'a [Json]> {
        Ok(self.opt_array(key)?.map(|v| v.as_slice()).unwrap_or(&[]))
    }

    fn str_list(&mut self, key: &'static str) -> Result<Vec<String>> {
        let path = self.at(key);
        self.array_or_empty(key)?
            .iter()
            .enumerate()
            .map(|(i, v)| as_str(v, &index(&path, i)))
            .collect()
    }

    fn pair(&mut self, key: &'static str) -> Result<(f64, f64)> {
        let path = self.at(key);
        pair(self.req(key)?, &path)
    }

    fn finish(self) -> Result<()> {
        for key in self.map.keys() {
            if !self.allowed.iter().any(|k| k == key) {
                return Err(ParseError::UnknownField(join(&self.path, key)));
            }
        }
        Ok(())
    }
}

fn as_str(v: &Json, path: &str) -> Result<String> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| ParseError::mismatch(path, "string"))
}

fn as_f64(v: &Json, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| ParseError::mismatch(path, "number"))
}

fn as_u64(v: &Json, path: &str) -> Result<u64> {
    match v.as_f64() {
        Some(n) if n >= 0.0 && n.fract() == 0.0 && n <= u64::MAX as f64 => {
            Ok(v.as_u64().unwrap_or(n as u64))
        }
        _ => Err(ParseError::mismatch(path, "non-negative integer")),
    }
}

fn as_array<'a>(v: &'a Json, path: &str) -> Result<&'a Vec<Json>> {
    v.as_array().ok_or_else(|| ParseError::mismatch(path, "array"))
}

fn pair(v: &Json, path: &str) -> Result<(f64, f64)> {
    match v.as_array().map(|a| a.as_slice()) {
        Some([a, b]) => Ok((as_f64(a, &index(path, 0))?, as_f64(b, &index(path, 1))?)),
        _ => Err(ParseError::mismatch(path, "array of two numbers")),
    }
}

fn scalar(v: &Json, path: &str) -> Result<Value> {
    Value::from_json(v).ok_or_else(|| ParseError::mismatch(path, "scalar (number, string, boolean or null)"))
}

fn rows(v: &[Json], path: &str) -> Result<Vec<Row>> {
    v.iter()
        .enumerate()
        .map(|(i, row)| {
            let p = index(path, i);
            let obj = row
                .as_object()
                .ok_or_else(|| ParseError::mismatch(&p, "object"))?;
            obj.iter()
                .map(|(k, v)| Ok((k.clone(), scalar(v, &join(&p, k))?)))
                .collect()
        })
        .collect()
}

fn u32_dim(v: &Json, path: &str) -> Result<u32> {
    let n = as_u64(v, path)?;
    u32::try_from(n).map_err(|_| ParseError::mismatch(path, "32-bit pixel size"))
}

pub(crate) fn spec_from_json(json: &Json, path: &str) -> Result<Spec> {
    let mut o = Obj::new(json, path)?;
    let width = u32_dim(o.req("width")?, &o.at("width"))?;
    let height = u32_dim(o.req("height")?, &o.at("height"))?;

    let data_path = o.at("data");
    let data = o
        .array_or_empty("data")?
        .iter()
        .enumerate()
        .map(|(i, d)| dataset(d, &index(&data_path, i)))
        .collect::<Result<Vec<_>>>()?;

    let scales_path = o.at("scales");
    let scales = o
        .array_or_empty("scales")?
        .iter()
        .enumerate()
        .map(|(i, s)| scale(s, &index(&scales_path, i), width, height))
        .collect::<Result<Vec<_>>>()?;

    let marks_path = o.at("marks");
    let marks = o
        .array_or_empty("marks")?
        .iter()
        .enumerate()
        .map(|(i, m)| mark(m, &index(&marks_path, i)))
        .collect::<Result<Vec<_>>>()?;

    let prot_path = o.at("protected");
    let protected = o
        .array_or_empty("protected")?
        .iter()
        .enumerate()
        .map(|(i, r)| rect(r, &index(&prot_path, i)))
        .collect::<Result<Vec<_>>>()?;

    let ar_path = o.at("ar");
    let ar = o
        .opt("ar")
        .map(|a| ar_block(a, &ar_path, width, height))
        .transpose()?;
    o.finish()?;
    Ok(Spec {
        width,
        height,
        data,
        scales,
        marks,
        protected,
        ar,
    })
}

fn rect(v: &Json, path: &str) -> Result<Rect> {
    let mut o = Obj::new(v, path)?;
    let r = Rect::new(
        o.req_f64("x")?,
        o.req_f64("y")?,
        o.req_f64("width")?,
        o.req_f64("height")?,
    );
    o.finish()?;
    Ok(r)
}

fn dataset(v: &Json, path: &str) -> Result<DatasetDecl> {
    let mut o = Obj::new(v, path)?;
    let name = o.req_str("name")?;
    let fields = if o.has("fields") {
        Some(o.str_list("fields")?)
    } else {
        o.opt("fields");
        None
    };
    let mut parse = BTreeMap::new();
    let parse_path = o.at("parse");
    if let Some(p) = o.opt("parse") {
        let map = p
            .as_object()
            .ok_or_else(|| ParseError::mismatch(&parse_path, "object"))?;
        for (field, kind) in map {
            let kp = join(&parse_path, field);
            let kind = match kind.as_str() {
                Some("date") => ParseKind::Date,
                Some("number") => ParseKind::Number,
                _ => return Err(ParseError::mismatch(&kp, "\"date\" or \"number\"")),
            };
            parse.insert(field.clone(), kind);
        }
    }
    let values_path = o.at("values");
    let values = rows(o.array_or_empty("values")?, &values_path)?;
    let tr_path = o.at("transform");
    let transform = o
        .array_or_empty("transform")?
        .iter()
        .enumerate()
        .map(|(i, t)| transform(t, &index(&tr_path, i)))
        .collect::<Result<Vec<_>>>()?;
    o.finish()?;
    Ok(DatasetDecl {
        name,
        fields,
        parse,
        values,
        transform,
        appended: Vec::new(),
    })
}

fn transform(v: &Json, path: &str) -> Result<TransformDecl> {
    let mut o = Obj::new(v, path)?;
    let kind_name = o.req_str("type")?;
    let kind = TransformKind::parse(&kind_name)
        .ok_or_else(|| ParseError::mismatch(&o.at("type"), "transform type"))?;
    let t = match kind {
        TransformKind::Filter => TransformDecl::Filter {
            expr: o.req_str("expr")?,
        },
        TransformKind::Formula => TransformDecl::Formula {
            expr: o.req_str("expr")?,
            as_: o.req_str("as")?,
        },
        TransformKind::Aggregate => {
            let groupby = o.str_list("groupby")?;
            let ops_path = o.at("ops");
            let ops = as_array(o.req("ops")?, &ops_path)?
                .iter()
                .enumerate()
                .map(|(i, op)| {
                    let p = index(&ops_path, i);
                    as_str(op, &p).and_then(|s| {
                        AggOp::parse(&s).ok_or_else(|| ParseError::mismatch(&p, "sum|count|mean|min|max"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let fields_path = o.at("fields");
            let fields = match o.opt("fields") {
                Some(f) => as_array(f, &fields_path)?
                    .iter()
                    .enumerate()
                    .map(|(i, f)| match f {
                        Json::Null => Ok(None),
                        f => as_str(f, &index(&fields_path, i)).map(Some),
                    })
                    .collect::<Result<Vec<_>>>()?,
                None => vec![None; ops.len()],
            };
            if fields.len() != ops.len() {
                return Err(ParseError::mismatch(&fields_path, format!("{} entries", ops.len())));
            }
            let as_ = if o.has("as") {
                let a = o.str_list("as")?;
                if a.len() != ops.len() {
                    return Err(ParseError::mismatch(&o.at("as"), format!("{} entries", ops.len())));
                }
                a
            } else {
                o.opt("as");
                ops.iter()
                    .zip(&fields)
                    .map(|(op, f)| match f {
                        Some(f) => format!("{}_{f}", op.name()),
                        None => op.name().to_string(),
                    })
                    .collect()
            };
            TransformDecl::Aggregate {
                groupby,
                ops,
                fields,
                as_,
            }
        }
        TransformKind::Sort => {
            let field = o.req_str("field")?;
            let order = match o.str_or("order", "ascending")?.as_str() {
                "ascending" => SortOrder::Ascending,
                "descending" => SortOrder::Descending,
                _ => return Err(ParseError::mismatch(&o.at("order"), "\"ascending\" or \"descending\"")),
            };
            TransformDecl::Sort { field, order }
        }
        TransformKind::Stack => TransformDecl::Stack {
            groupby: o.str_list("groupby")?,
            field: o.req_str("field")?,
            sort_field: o.opt_str("sortField")?,
        },
        TransformKind::Pie => TransformDecl::Pie {
            field: o.req_str("field")?,
            start_angle: o.f64_or("startAngle", 0.0)?,
        },
        TransformKind::Bin => {
            let field = o.req_str("field")?;
            let extent_path = o.at("extent");
            let extent = match o.opt("extent") {
                None => BinExtent::Auto,
                Some(Json::String(s)) if s == "auto" => BinExtent::Auto,
                Some(v) => {
                    let (lo, hi) = pair(v, &extent_path)
                        .map_err(|_| ParseError::mismatch(&extent_path, "\"auto\" or [lo, hi]"))?;
                    BinExtent::Fixed(lo, hi)
                }
            };
            let mb_path = o.at("maxbins");
            let maxbins = match o.opt("maxbins") {
                Some(v) => u32::try_from(as_u64(v, &mb_path)?)
                    .map_err(|_| ParseError::mismatch(&mb_path, "32-bit integer"))?,
                None => 10,
            };
            TransformDecl::Bin {
                field,
                extent,
                maxbins,
            }
        }
        TransformKind::Hierarchy => TransformDecl::Hierarchy {
            id_field: o.str_or("idField", "id")?,
            parent_field: o.str_or("parentField", "parent")?,
        },
        TransformKind::TreeLayout => {
            let method = match o.str_or("method", "tidy")?.as_str() {
                "tidy" => TreeMethod::Tidy,
                "cluster" => TreeMethod::Cluster,
                _ => return Err(ParseError::mismatch(&o.at("method"), "\"tidy\" or \"cluster\"")),
            };
            TransformDecl::TreeLayout {
                method,
                id_field: o.str_or("idField", "id")?,
                parent_field: o.str_or("parentField", "parent")?,
                size: o.pair("size")?,
                level_gap: o.f64_or("levelGap", 40.0)?,
                leaf_step: o.f64_or("leafStep", 24.0)?,
            }
        }
        TransformKind::Treemap => {
            if o.str_or("method", "slice-dice")? != "slice-dice" {
                return Err(ParseError::mismatch(&o.at("method"), "\"slice-dice\""));
            }
            TransformDecl::Treemap {
                field: o.req_str("field")?,
                id_field: o.str_or("idField", "id")?,
                parent_field: o.str_or("parentField", "parent")?,
                size: o.pair("size")?,
            }
        }
    };
    o.finish()?;
    Ok(t)
}

fn scale(v: &Json, path: &str, width: u32, height: u32) -> Result<ScaleDecl> {
    let mut o = Obj::new(v, path)?;
    let name = o.req_str("name")?;
    let kind = match o.req_str("type")?.as_str() {
        "linear" => ScaleKind::Linear,
        "band" => ScaleKind::Band,
        "point" => ScaleKind::Point,
        "ordinal" => ScaleKind::Ordinal,
        _ => return Err(ParseError::mismatch(&o.at("type"), "linear|band|point|ordinal")),
    };
    let domain_path = o.at("domain");
    let domain = match o.req("domain")? {
        Json::Array(vals) => DomainDecl::Values(
            vals.iter()
                .enumerate()
                .map(|(i, v)| scalar(v, &index(&domain_path, i)))
                .collect::<Result<_>>()?,
        ),
        d @ Json::Object(_) => {
            let mut d = Obj::new(d, &domain_path)?;
            let data = d.req_str("data")?;
            let fields = if d.has("fields") {
                d.str_list("fields")?
            } else {
                d.opt("fields");
                vec![d.req_str("field")?]
            };
            d.opt("field");
            d.finish()?;
            DomainDecl::Data { data, fields }
        }
        _ => return Err(ParseError::mismatch(&domain_path, "array or {data, field}")),
    };
    let range_path = o.at("range");
    let range = match o.req("range")? {
        Json::String(s) if s == "width" => RangeDecl::Pixels(0.0, width as f64),
        Json::String(s) if s == "height" => RangeDecl::Pixels(height as f64, 0.0),
        Json::String(s) if s == "category" => RangeDecl::Category,
        Json::Array(a) if a.iter().all(Json::is_string) && !a.is_empty() => {
            RangeDecl::Colors(a.iter().map(|c| c.as_str().unwrap().to_string()).collect())
        }
        r => {
            let (lo, hi) = pair(r, &range_path).map_err(|_| {
                ParseError::mismatch(&range_path, "[lo, hi], \"width\", \"height\", \"category\" or color list")
            })?;
            RangeDecl::Pixels(lo, hi)
        }
    };
    let mut decl = ScaleDecl::new(name, kind, domain, range);
    match kind {
        ScaleKind::Band => {
            decl.padding_inner = o.f64_or("paddingInner", ScaleDecl::BAND_PADDING_INNER)?;
            decl.padding_outer = o.f64_or("paddingOuter", ScaleDecl::BAND_PADDING_OUTER)?;
        }
        ScaleKind::Point => {
            decl.padding_outer = o.f64_or("paddingOuter", ScaleDecl::POINT_PADDING_OUTER)?;
        }
        ScaleKind::Linear => {
            let zpath = o.at("zero");
            decl.zero = match o.opt("zero") {
                Some(Json::Bool(b)) => *b,
                Some(_) => return Err(ParseError::mismatch(&zpath, "boolean")),
                None => false,
            };
        }
        ScaleKind::Ordinal => {}
    }
    o.finish()?;
    Ok(decl)
}

fn mark(v: &Json, path: &str) -> Result<MarkDecl> {
    let mut o = Obj::new(v, path)?;
    let kind = MarkKind::parse(&o.req_str("type")?)
        .ok_or_else(|| ParseError::mismatch(&o.at("type"), "rect|symbol|line|arc|path|text"))?;
    let name = o.opt_str("name")?;
    let from_path = o.at("from");
    let mut from = Obj::new(o.req("from")?, &from_path)?;
    let from_data = from.req_str("data")?;
    from.finish()?;
    let mut encode = BTreeMap::new();
    let enc_path = o.at("encode");
    if let Some(enc) = o.opt("encode") {
        let map = enc
            .as_object()
            .ok_or_else(|| ParseError::mismatch(&enc_path, "object"))?;
        for (channel, decl) in map {
            let cp = join(&enc_path, channel);
            if !kind.channels().contains(&channel.as_str()) {
                return Err(ParseError::UnknownField(cp));
            }
            encode.insert(channel.clone(), channel_decl(decl, &cp)?);
        }
    }
    o.finish()?;
    Ok(MarkDecl {
        kind,
        name,
        from: from_data,
        encode,
    })
}

fn channel_decl(v: &Json, path: &str) -> Result<ChannelDecl> {
    let mut o = Obj::new(v, path)?;
    let value_path = o.at("value");
    let c = ChannelDecl {
        scale: o.opt_str("scale")?,
        field: o.opt_str("field")?,
        value: o.opt("value").map(|v| scalar(v, &value_path)).transpose()?,
        band: o.opt_f64("band")?,
        offset: o.opt_f64("offset")?,
    };
    o.finish()?;
    Ok(c)
}

fn ar_block(v: &Json, path: &str, width: u32, height: u32) -> Result<ArBlock> {
    let mut o = Obj::new(v, path)?;
    let mode_name = o.req_str("mode")?;
    let mode = ArMode::parse(&mode_name)
        .ok_or_else(|| ParseError::mismatch(&o.at("mode"), "extend|composite|smallMultiple|multipleView"))?;
    let appends_path = o.at("appends");
    let appends = o
        .array_or_empty("appends")?
        .iter()
        .enumerate()
        .map(|(i, a)| append(a, &index(&appends_path, i)))
        .collect::<Result<Vec<_>>>()?;
    let nested_path = o.at("nested");
    if o.has("nested") && !mode.needs_nested() {
        return Err(ParseError::ModeConflict {
            path: nested_path,
            message: format!("mode `{}` does not take a nested spec", mode.name()),
        });
    }
    let nested = o
        .opt("nested")
        .map(|n| spec_from_json(n, &nested_path).map(Box::new))
        .transpose()?;
    let placement_path = o.at("placement");
    let placement = match o.opt("placement") {
        Some(p) => placement(p, &placement_path, mode)?,
        None => Placement::default_for(mode),
    };
    let anchor_path = o.at("anchor");
    let default_anchor = AnchorConfig::default_for(width, height);
    let anchor = match o.opt("anchor") {
        Some(a) => {
            let mut a = Obj::new(a, &anchor_path)?;
            let size = a.f64_or("size", default_anchor.size)?;
            // position defaults follow the size so the box stays in the corner
            let fallback_x = (width as f64 - size - AnchorConfig::DEFAULT_MARGIN).max(0.0);
            let fallback_y = (height as f64 - size - AnchorConfig::DEFAULT_MARGIN).max(0.0);
            let cfg = AnchorConfig {
                x: a.f64_or("x", fallback_x)?,
                y: a.f64_or("y", fallback_y)?,
                size,
            };
            a.finish()?;
            cfg
        }
        None => default_anchor,
    };
    o.finish()?;
    Ok(ArBlock {
        mode,
        appends,
        nested,
        placement,
        anchor,
    })
}

fn append(v: &Json, path: &str) -> Result<AppendDecl> {
    let mut o = Obj::new(v, path)?;
    let dataset = o.req_str("dataset")?;
    let source = match (o.has("values"), o.has("placeholder")) {
        (true, false) => {
            let p = o.at("values");
            AppendSource::Values(rows(o.array_or_empty("values")?, &p)?)
        }
        (false, true) => {
            let p = o.at("placeholder");
            AppendSource::Placeholder(placeholder(o.req("placeholder")?, &p)?)
        }
        _ => {
            return Err(ParseError::mismatch(
                path,
                "exactly one of `values` or `placeholder`",
            ))
        }
    };
    o.finish()?;
    Ok(AppendDecl { dataset, source })
}

fn placeholder(v: &Json, path: &str) -> Result<PlaceholderSpec> {
    let mut o = Obj::new(v, path)?;
    let count_path = o.at("count");
    let count = as_u64(o.req("count")?, &count_path)?;
    let seed_path = o.at("seed");
    let seed = o
        .opt("seed")
        .map(|s| as_u64(s, &seed_path))
        .transpose()?
        .unwrap_or(PlaceholderSpec::DEFAULT_SEED);
    let fields_path = o.at("fields");
    let fields = o
        .array_or_empty("fields")?
        .iter()
        .enumerate()
        .map(|(i, f)| placeholder_field(f, &index(&fields_path, i)))
        .collect::<Result<Vec<_>>>()?;
    o.finish()?;
    Ok(PlaceholderSpec { count, fields, seed })
}

fn placeholder_field(v: &Json, path: &str) -> Result<PlaceholderField> {
    let mut o = Obj::new(v, path)?;
    let name = o.req_str("name")?;
    let kind = match o.req_str("kind")?.as_str() {
        "categorical" => FieldKind::Categorical,
        "quantitative" => FieldKind::Quantitative,
        "temporal" => FieldKind::Temporal,
        _ => return Err(ParseError::mismatch(&o.at("kind"), "categorical|quantitative|temporal")),
    };
    let pattern = o.opt_str("pattern")?;
    let range_path = o.at("range");
    let range = o.opt("range").map(|r| pair(r, &range_path)).transpose()?;
    let span_path = o.at("span");
    let span = match o.opt("span") {
        Some(Json::Array(a)) if a.len() == 3 => Some(TemporalSpan {
            start: as_str(&a[0], &index(&span_path, 0))?,
            end: as_str(&a[1], &index(&span_path, 1))?,
            step_seconds: as_u64(&a[2], &index(&span_path, 2))?,
        }),
        Some(_) => return Err(ParseError::mismatch(&span_path, "[startISO, endISO, stepSeconds]")),
        None => None,
    };
    let options_path = o.at("options");
    let options = o
        .opt_array("options")?
        .map(|a| {
            a.iter()
                .enumerate()
                .map(|(i, v)| scalar(v, &index(&options_path, i)))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    o.finish()?;
    Ok(PlaceholderField {
        name,
        kind,
        pattern,
        range,
        span,
        options,
    })
}

fn placement(v: &Json, path: &str, mode: ArMode) -> Result<Placement> {
    let mut o = Obj::new(v, path)?;
    let default = Placement::default_for(mode);
    let direction = match o.opt_str("direction")? {
        Some(d) => Direction::parse(&d)
            .ok_or_else(|| ParseError::mismatch(&o.at("direction"), "right|left|top|bottom|overlay"))?,
        None => default.direction,
    };
    let p = Placement {
        direction,
        dx: o.f64_or("dx", 0.0)?,
        dy: o.f64_or("dy", 0.0)?,
        gap: o.f64_or("gap", default.gap)?,
        width_hint: o.opt_f64("widthHint")?,
        height_hint: o.opt_f64("heightHint")?,
    };
    o.finish()?;
    Ok(p)
}
