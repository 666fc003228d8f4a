//! Invariant checks over a parsed [`Spec`]. Problems are returned as data.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use super::model::*;
use crate::dataflow::{output_columns, DataflowError};
use crate::value::{parse_timestamp, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum IssueKind {
    NonPositiveSize,
    DuplicateDataset(String),
    DuplicateScale(String),
    MissingDataset(String),
    MissingScale(String),
    MissingField(String),
    HeterogeneousRows(usize),
    BadExpr(String),
    BadParameter(String),
    BadDomain(String),
    BadRange(String),
    EmptyChannel,
    EmptyAppends,
    MissingNested,
    ModeConflict(String),
    AppendSchemaMismatch { dataset: String, field: String },
    BadPattern,
    MissingRange,
    BadSpan(String),
    NegativeGap,
    AnchorOutOfBounds,
    BadRect,
}

impl IssueKind {
    pub fn code(&self) -> &'static str {
        match self {
            IssueKind::NonPositiveSize => "NonPositiveSize",
            IssueKind::DuplicateDataset(_) => "DuplicateDataset",
            IssueKind::DuplicateScale(_) => "DuplicateScale",
            IssueKind::MissingDataset(_) => "MissingDataset",
            IssueKind::MissingScale(_) => "MissingScale",
            IssueKind::MissingField(_) => "MissingField",
            IssueKind::HeterogeneousRows(_) => "HeterogeneousRows",
            IssueKind::BadExpr(_) => "BadExpr",
            IssueKind::BadParameter(_) => "BadParameter",
            IssueKind::BadDomain(_) => "BadDomain",
            IssueKind::BadRange(_) => "BadRange",
            IssueKind::EmptyChannel => "EmptyChannel",
            IssueKind::EmptyAppends => "EmptyAppends",
            IssueKind::MissingNested => "MissingNested",
            IssueKind::ModeConflict(_) => "ModeConflict",
            IssueKind::AppendSchemaMismatch { .. } => "AppendSchemaMismatch",
            IssueKind::BadPattern => "BadPattern",
            IssueKind::MissingRange => "MissingRange",
            IssueKind::BadSpan(_) => "BadSpan",
            IssueKind::NegativeGap => "NegativeGap",
            IssueKind::AnchorOutOfBounds => "AnchorOutOfBounds",
            IssueKind::BadRect => "BadRect",
        }
    }
}

impl fmt::Display for IssueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IssueKind::NonPositiveSize => f.write_str("size must be positive"),
            IssueKind::DuplicateDataset(n) => write!(f, "dataset `{n}` is declared twice"),
            IssueKind::DuplicateScale(n) => write!(f, "scale `{n}` is declared twice"),
            IssueKind::MissingDataset(n) => write!(f, "unknown dataset `{n}`"),
            IssueKind::MissingScale(n) => write!(f, "unknown scale `{n}`"),
            IssueKind::MissingField(n) => write!(f, "unknown field `{n}`"),
            IssueKind::HeterogeneousRows(i) => write!(f, "row {i} does not match the dataset's columns"),
            IssueKind::BadExpr(m) => write!(f, "bad expression: {m}"),
            IssueKind::BadParameter(m) => write!(f, "bad parameter: {m}"),
            IssueKind::BadDomain(m) => write!(f, "bad domain: {m}"),
            IssueKind::BadRange(m) => write!(f, "bad range: {m}"),
            IssueKind::EmptyChannel => f.write_str("channel needs a field, a value or a band"),
            IssueKind::EmptyAppends => f.write_str("extend mode needs at least one append"),
            IssueKind::MissingNested => f.write_str("this mode needs a nested spec"),
            IssueKind::ModeConflict(m) => write!(f, "block shape conflicts with its mode: {m}"),
            IssueKind::AppendSchemaMismatch { dataset, field } => {
                write!(f, "appended rows for `{dataset}` disagree with its columns at `{field}`")
            }
            IssueKind::BadPattern => f.write_str("pattern must contain exactly one `*`"),
            IssueKind::MissingRange => f.write_str("quantitative placeholder needs a range or options"),
            IssueKind::BadSpan(m) => write!(f, "bad temporal span: {m}"),
            IssueKind::NegativeGap => f.write_str("gap must be non-negative"),
            IssueKind::AnchorOutOfBounds => f.write_str("anchor box must lie inside the canvas"),
            IssueKind::BadRect => f.write_str("rectangle size must be non-negative"),
        }
    }
}

/// One failed invariant, located by a dotted path into the document.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaIssue {
    pub path: String,
    pub kind: IssueKind,
}

impl SchemaIssue {
    fn new(path: impl Into<String>, kind: IssueKind) -> Self {
        SchemaIssue {
            path: path.into(),
            kind,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "code": self.kind.code(),
            "path": self.path,
            "message": self.kind.to_string(),
        })
    }
}

impl fmt::Display for SchemaIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.kind)
    }
}

impl serde::Serialize for SchemaIssue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Check every spec and `ar` invariant; an empty list means the spec is valid.
pub fn validate_schema(spec: &Spec) -> Vec<SchemaIssue> {
    let mut issues = Vec::new();
    check_spec(spec, "", &mut issues);
    issues
}

fn p(prefix: &str, rest: &str) -> String {
    if prefix.is_empty() {
        rest.to_string()
    } else {
        format!("{prefix}.{rest}")
    }
}

/// Final columns of each dataset, or `None` when its pipeline is broken.
pub(crate) fn final_columns(spec: &Spec) -> BTreeMap<String, Option<Vec<String>>> {
    spec.data
        .iter()
        .map(|d| {
            let cols = d
                .transform
                .iter()
                .try_fold(d.columns(), |cols, t| output_columns(t, &cols).ok());
            (d.name.clone(), cols)
        })
        .collect()
}

fn check_spec(spec: &Spec, prefix: &str, issues: &mut Vec<SchemaIssue>) {
    if spec.width == 0 {
        issues.push(SchemaIssue::new(p(prefix, "width"), IssueKind::NonPositiveSize));
    }
    if spec.height == 0 {
        issues.push(SchemaIssue::new(p(prefix, "height"), IssueKind::NonPositiveSize));
    }

    let mut seen = HashSet::new();
    for (i, d) in spec.data.iter().enumerate() {
        let dp = p(prefix, &format!("data[{i}]"));
        if !seen.insert(d.name.as_str()) {
            issues.push(SchemaIssue::new(format!("{dp}.name"), IssueKind::DuplicateDataset(d.name.clone())));
        }
        check_dataset(d, &dp, issues);
    }
    let columns = final_columns(spec);

    let mut scale_names = HashSet::new();
    for (i, s) in spec.scales.iter().enumerate() {
        let sp = p(prefix, &format!("scales[{i}]"));
        if !scale_names.insert(s.name.as_str()) {
            issues.push(SchemaIssue::new(format!("{sp}.name"), IssueKind::DuplicateScale(s.name.clone())));
        }
        check_scale(s, &sp, &columns, issues);
    }

    for (i, m) in spec.marks.iter().enumerate() {
        let mp = p(prefix, &format!("marks[{i}]"));
        let cols = match columns.get(&m.from) {
            None => {
                issues.push(SchemaIssue::new(format!("{mp}.from.data"), IssueKind::MissingDataset(m.from.clone())));
                None
            }
            Some(c) => c.as_ref(),
        };
        for (channel, c) in &m.encode {
            let cp = format!("{mp}.encode.{channel}");
            let scale = match &c.scale {
                Some(name) => match spec.scale(name) {
                    Some(s) => Some(s),
                    None => {
                        issues.push(SchemaIssue::new(format!("{cp}.scale"), IssueKind::MissingScale(name.clone())));
                        None
                    }
                },
                None => None,
            };
            if let (Some(f), Some(cols)) = (&c.field, cols) {
                if !cols.contains(f) {
                    issues.push(SchemaIssue::new(format!("{cp}.field"), IssueKind::MissingField(f.clone())));
                }
            }
            if c.field.is_none() && c.value.is_none() && c.band.is_none() {
                issues.push(SchemaIssue::new(cp.clone(), IssueKind::EmptyChannel));
            }
            if c.band.is_some() && !scale.is_some_and(|s| s.kind == ScaleKind::Band) {
                issues.push(SchemaIssue::new(
                    format!("{cp}.band"),
                    IssueKind::BadParameter("`band` needs a band scale".into()),
                ));
            }
        }
    }

    for (i, r) in spec.protected.iter().enumerate() {
        if !(r.width >= 0.0 && r.height >= 0.0) {
            issues.push(SchemaIssue::new(p(prefix, &format!("protected[{i}]")), IssueKind::BadRect));
        }
    }

    if let Some(ar) = &spec.ar {
        check_ar(spec, ar, &p(prefix, "ar"), issues);
    }
}

fn check_dataset(d: &DatasetDecl, dp: &str, issues: &mut Vec<SchemaIssue>) {
    let cols = d.columns();
    for (r, row) in d.values.iter().enumerate() {
        if row.len() != cols.len() || !cols.iter().all(|c| row.contains_key(c)) {
            issues.push(SchemaIssue::new(format!("{dp}.values[{r}]"), IssueKind::HeterogeneousRows(r)));
        }
    }
    let mut cols = Some(cols);
    for (i, t) in d.transform.iter().enumerate() {
        let tp = format!("{dp}.transform[{i}]");
        check_transform_params(t, &tp, issues);
        if let Some(c) = cols.take() {
            match output_columns(t, &c) {
                Ok(next) => cols = Some(next),
                Err(DataflowError::MissingField(f)) => {
                    issues.push(SchemaIssue::new(tp, IssueKind::MissingField(f)));
                }
                Err(DataflowError::Expr(e)) => {
                    issues.push(SchemaIssue::new(format!("{tp}.expr"), IssueKind::BadExpr(e.to_string())));
                }
                Err(e) => issues.push(SchemaIssue::new(tp, IssueKind::BadParameter(e.to_string()))),
            }
        }
    }
}

fn check_transform_params(t: &TransformDecl, tp: &str, issues: &mut Vec<SchemaIssue>) {
    let mut bad = |field: &str, msg: &str| {
        issues.push(SchemaIssue::new(format!("{tp}.{field}"), IssueKind::BadParameter(msg.to_string())));
    };
    match t {
        TransformDecl::Aggregate { ops, fields, .. } => {
            if ops.is_empty() {
                bad("ops", "at least one operation");
            }
            for (i, (op, f)) in ops.iter().zip(fields).enumerate() {
                if f.is_none() && *op != AggOp::Count {
                    bad(&format!("fields[{i}]"), "only `count` may omit its field");
                }
            }
        }
        TransformDecl::Bin { extent, maxbins, .. } => {
            if *maxbins == 0 {
                bad("maxbins", "must be at least 1");
            }
            if let BinExtent::Fixed(lo, hi) = extent {
                if !(lo < hi) {
                    bad("extent", "lo must be below hi");
                }
            }
        }
        TransformDecl::TreeLayout {
            size, leaf_step, level_gap, ..
        } => {
            if !(size.0 > 0.0 && size.1 > 0.0) {
                bad("size", "must be positive");
            }
            if !(*leaf_step > 0.0) {
                bad("leafStep", "must be positive");
            }
            if !(*level_gap >= 0.0) {
                bad("levelGap", "must be non-negative");
            }
        }
        TransformDecl::Treemap { size, .. } => {
            if !(size.0 > 0.0 && size.1 > 0.0) {
                bad("size", "must be positive");
            }
        }
        _ => {}
    }
}

fn check_scale(
    s: &ScaleDecl,
    sp: &str,
    columns: &BTreeMap<String, Option<Vec<String>>>,
    issues: &mut Vec<SchemaIssue>,
) {
    match &s.domain {
        DomainDecl::Data { data, fields } => match columns.get(data) {
            None => issues.push(SchemaIssue::new(format!("{sp}.domain.data"), IssueKind::MissingDataset(data.clone()))),
            Some(Some(cols)) => {
                for f in fields {
                    if !cols.contains(f) {
                        issues.push(SchemaIssue::new(format!("{sp}.domain.fields"), IssueKind::MissingField(f.clone())));
                    }
                }
            }
            Some(None) => {}
        },
        DomainDecl::Values(vals) => match s.kind {
            ScaleKind::Linear => {
                let ok = matches!(vals.as_slice(), [a, b] if matches!((a.as_f64(), b.as_f64()), (Some(x), Some(y)) if x < y));
                if !ok {
                    issues.push(SchemaIssue::new(
                        format!("{sp}.domain"),
                        IssueKind::BadDomain("linear domain is [lo, hi] with lo < hi".into()),
                    ));
                }
            }
            _ => {
                let mut seen: Vec<&Value> = Vec::new();
                for v in vals {
                    if seen.contains(&v) {
                        issues.push(SchemaIssue::new(
                            format!("{sp}.domain"),
                            IssueKind::BadDomain(format!("duplicate value `{v}`")),
                        ));
                    }
                    seen.push(v);
                }
            }
        },
    }
    let range_ok = match (s.kind, &s.range) {
        (ScaleKind::Ordinal, RangeDecl::Category | RangeDecl::Colors(_)) => true,
        (ScaleKind::Ordinal, _) => false,
        (_, RangeDecl::Pixels(a, b)) => a.is_finite() && b.is_finite(),
        _ => false,
    };
    if !range_ok {
        issues.push(SchemaIssue::new(
            format!("{sp}.range"),
            IssueKind::BadRange(format!("not a valid range for a {} scale", s.kind.name())),
        ));
    }
    if matches!(s.kind, ScaleKind::Band | ScaleKind::Point)
        && !(0.0..=1.0).contains(&s.padding_inner)
    {
        issues.push(SchemaIssue::new(
            format!("{sp}.paddingInner"),
            IssueKind::BadParameter("padding must lie in [0, 1]".into()),
        ));
    }
    if matches!(s.kind, ScaleKind::Band | ScaleKind::Point) && !(s.padding_outer >= 0.0) {
        issues.push(SchemaIssue::new(
            format!("{sp}.paddingOuter"),
            IssueKind::BadParameter("padding must be non-negative".into()),
        ));
    }
}

fn check_ar(spec: &Spec, ar: &ArBlock, ap: &str, issues: &mut Vec<SchemaIssue>) {
    match ar.mode {
        ArMode::Extend if ar.appends.is_empty() => {
            issues.push(SchemaIssue::new(format!("{ap}.appends"), IssueKind::EmptyAppends));
        }
        ArMode::SmallMultiple if ar.appends.is_empty() => {
            issues.push(SchemaIssue::new(format!("{ap}.appends"), IssueKind::EmptyAppends));
        }
        _ => {}
    }
    if ar.mode.needs_nested() && ar.nested.is_none() {
        issues.push(SchemaIssue::new(format!("{ap}.nested"), IssueKind::MissingNested));
    }
    if !ar.mode.needs_nested() && ar.nested.is_some() {
        issues.push(SchemaIssue::new(
            format!("{ap}.nested"),
            IssueKind::ModeConflict(format!("mode `{}` takes no nested spec", ar.mode.name())),
        ));
    }
    if let Some(n) = &ar.nested {
        if n.ar.is_some() {
            issues.push(SchemaIssue::new(
                format!("{ap}.nested.ar"),
                IssueKind::ModeConflict("a nested spec cannot carry its own ar block".into()),
            ));
        }
        check_spec(n, &format!("{ap}.nested"), issues);
    }

    // appends target the base spec in extend/smallMultiple, the nested spec otherwise
    let target = if ar.mode.needs_nested() {
        ar.nested.as_deref()
    } else {
        Some(spec)
    };
    for (i, a) in ar.appends.iter().enumerate() {
        let app = format!("{ap}.appends[{i}]");
        let Some(target) = target else { continue };
        let Some(decl) = target.dataset(&a.dataset) else {
            issues.push(SchemaIssue::new(format!("{app}.dataset"), IssueKind::MissingDataset(a.dataset.clone())));
            continue;
        };
        let cols = decl.columns();
        match &a.source {
            AppendSource::Values(rows) => {
                for (r, row) in rows.iter().enumerate() {
                    if let Some(field) = schema_mismatch(&cols, row.keys().map(String::as_str)) {
                        issues.push(SchemaIssue::new(
                            format!("{app}.values[{r}]"),
                            IssueKind::AppendSchemaMismatch {
                                dataset: a.dataset.clone(),
                                field,
                            },
                        ));
                    }
                }
            }
            AppendSource::Placeholder(ph) => {
                if let Some(field) = schema_mismatch(&cols, ph.fields.iter().map(|f| f.name.as_str())) {
                    issues.push(SchemaIssue::new(
                        format!("{app}.placeholder.fields"),
                        IssueKind::AppendSchemaMismatch {
                            dataset: a.dataset.clone(),
                            field,
                        },
                    ));
                }
                for (j, f) in ph.fields.iter().enumerate() {
                    check_placeholder_field(f, &format!("{app}.placeholder.fields[{j}]"), issues);
                }
            }
        }
    }

    if !(ar.placement.gap >= 0.0) {
        issues.push(SchemaIssue::new(format!("{ap}.placement.gap"), IssueKind::NegativeGap));
    }
    let anchor = ar.anchor.rect();
    if !(ar.anchor.size > 0.0) || !spec.canvas().contains(&anchor) {
        issues.push(SchemaIssue::new(format!("{ap}.anchor"), IssueKind::AnchorOutOfBounds));
    }
}

/// First column present on one side only.
fn schema_mismatch<'a>(cols: &[String], keys: impl Iterator<Item = &'a str>) -> Option<String> {
    let keys: Vec<&str> = keys.collect();
    cols.iter()
        .find(|c| !keys.contains(&c.as_str()))
        .cloned()
        .or_else(|| keys.iter().find(|k| !cols.iter().any(|c| c == *k)).map(|k| k.to_string()))
}

fn check_placeholder_field(f: &PlaceholderField, fp: &str, issues: &mut Vec<SchemaIssue>) {
    if let Some(pattern) = &f.pattern {
        if pattern.matches('*').count() != 1 {
            issues.push(SchemaIssue::new(format!("{fp}.pattern"), IssueKind::BadPattern));
        }
    }
    if let Some(opts) = &f.options {
        if opts.is_empty() {
            issues.push(SchemaIssue::new(
                format!("{fp}.options"),
                IssueKind::BadParameter("options must not be empty".into()),
            ));
        }
    }
    let has_options = f.options.as_ref().is_some_and(|o| !o.is_empty());
    match f.kind {
        FieldKind::Categorical => {
            if f.pattern.is_none() && !has_options {
                issues.push(SchemaIssue::new(format!("{fp}.pattern"), IssueKind::BadPattern));
            }
        }
        FieldKind::Quantitative => match f.range {
            Some((lo, hi)) if !(lo <= hi) => {
                issues.push(SchemaIssue::new(format!("{fp}.range"), IssueKind::BadRange("lo must not exceed hi".into())));
            }
            None if !has_options => issues.push(SchemaIssue::new(format!("{fp}.range"), IssueKind::MissingRange)),
            _ => {}
        },
        FieldKind::Temporal => match &f.span {
            Some(span) => {
                let start = parse_timestamp(&span.start);
                let end = parse_timestamp(&span.end);
                let msg = match (start, end) {
                    (None, _) => Some(format!("cannot read start `{}`", span.start)),
                    (_, None) => Some(format!("cannot read end `{}`", span.end)),
                    (Some(s), Some(e)) if s > e => Some("start is after end".to_string()),
                    _ if span.step_seconds == 0 => Some("step must be positive".to_string()),
                    _ => None,
                };
                if let Some(m) = msg {
                    issues.push(SchemaIssue::new(format!("{fp}.span"), IssueKind::BadSpan(m)));
                }
            }
            None if !has_options => {
                issues.push(SchemaIssue::new(format!("{fp}.span"), IssueKind::BadSpan("missing".into())));
            }
            None => {}
        },
    }
}
