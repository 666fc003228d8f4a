use std::collections::HashMap;
use std::f64::consts::PI;

use sha2::{Digest, Sha256};

use super::{tree, DataRow, DataTable, DataflowError, SourceTag};
use crate::expr::Expr;
use crate::spec::{AggOp, BinExtent, SortOrder, TransformDecl};
use crate::value::{Row, Value};

/// Provenance id of an aggregate group: the first 64 bits of SHA-256 over the
/// encoded key tuple.
pub fn group_pid(key: &[Value]) -> u64 {
    let mut bytes = Vec::new();
    for v in key {
        v.key_bytes(&mut bytes);
    }
    let digest = Sha256::digest(&bytes);
    u64::from_be_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

fn require(table_cols: &[String], field: &str) -> Result<(), DataflowError> {
    if table_cols.iter().any(|c| c == field) {
        Ok(())
    } else {
        Err(DataflowError::MissingField(field.to_string()))
    }
}

fn push_col(cols: &mut Vec<String>, name: &str) {
    if !cols.iter().any(|c| c == name) {
        cols.push(name.to_string());
    }
}

/// Output columns of a transform given its input columns, checking that every
/// field the transform reads exists.
pub fn output_columns(t: &TransformDecl, input: &[String]) -> Result<Vec<String>, DataflowError> {
    let mut cols = input.to_vec();
    match t {
        TransformDecl::Filter { expr } => {
            for f in Expr::parse(expr)?.fields() {
                require(input, &f)?;
            }
        }
        TransformDecl::Formula { expr, as_ } => {
            for f in Expr::parse(expr)?.fields() {
                require(input, &f)?;
            }
            push_col(&mut cols, as_);
        }
        TransformDecl::Aggregate {
            groupby,
            fields,
            as_,
            ..
        } => {
            for g in groupby {
                require(input, g)?;
            }
            for f in fields.iter().flatten() {
                require(input, f)?;
            }
            cols = groupby.clone();
            for a in as_ {
                push_col(&mut cols, a);
            }
        }
        TransformDecl::Sort { field, .. } => require(input, field)?,
        TransformDecl::Stack {
            groupby,
            field,
            sort_field,
        } => {
            for g in groupby {
                require(input, g)?;
            }
            require(input, field)?;
            if let Some(s) = sort_field {
                require(input, s)?;
            }
            push_col(&mut cols, "y0");
            push_col(&mut cols, "y1");
        }
        TransformDecl::Pie { field, .. } => {
            require(input, field)?;
            push_col(&mut cols, "startAngle");
            push_col(&mut cols, "endAngle");
        }
        TransformDecl::Bin { field, .. } => {
            require(input, field)?;
            push_col(&mut cols, "bin0");
            push_col(&mut cols, "bin1");
        }
        TransformDecl::Hierarchy {
            id_field,
            parent_field,
        } => {
            require(input, id_field)?;
            require(input, parent_field)?;
            push_col(&mut cols, "depth");
            push_col(&mut cols, "childCount");
        }
        TransformDecl::TreeLayout {
            id_field,
            parent_field,
            ..
        } => {
            require(input, id_field)?;
            require(input, parent_field)?;
            for c in ["x", "y", "parentX", "parentY"] {
                push_col(&mut cols, c);
            }
        }
        TransformDecl::Treemap {
            field,
            id_field,
            parent_field,
            ..
        } => {
            require(input, field)?;
            require(input, id_field)?;
            require(input, parent_field)?;
            for c in ["x0", "y0", "x1", "y1"] {
                push_col(&mut cols, c);
            }
        }
    }
    Ok(cols)
}

/// Run one transform. The input is never modified.
pub fn apply_transform(t: &TransformDecl, input: &DataTable) -> Result<DataTable, DataflowError> {
    let columns = output_columns(t, &input.columns)?;
    let mut out = DataTable {
        name: input.name.clone(),
        columns,
        rows: Vec::new(),
    };
    match t {
        TransformDecl::Filter { expr } => {
            let e = Expr::parse(expr)?;
            for row in &input.rows {
                if e.eval(&row.cells)?.truthy() {
                    out.rows.push(row.clone());
                }
            }
        }
        TransformDecl::Formula { expr, as_ } => {
            let e = Expr::parse(expr)?;
            for row in &input.rows {
                let mut r = row.clone();
                let v = e.eval(&row.cells)?;
                r.cells.insert(as_.clone(), v);
                out.rows.push(r);
            }
        }
        TransformDecl::Aggregate {
            groupby,
            ops,
            fields,
            as_,
        } => out.rows = aggregate(input, groupby, ops, fields, as_),
        TransformDecl::Sort { field, order } => {
            out.rows = input.rows.clone();
            out.rows.sort_by(|a, b| {
                let o = a.get(field).total_cmp(b.get(field));
                match order {
                    SortOrder::Ascending => o,
                    SortOrder::Descending => o.reverse(),
                }
            });
        }
        TransformDecl::Stack {
            groupby,
            field,
            sort_field,
        } => out.rows = stack(input, groupby, field, sort_field.as_deref()),
        TransformDecl::Pie { field, start_angle } => out.rows = pie(input, field, *start_angle),
        TransformDecl::Bin {
            field,
            extent,
            maxbins,
        } => out.rows = bin(input, field, *extent, *maxbins),
        TransformDecl::Hierarchy { .. } | TransformDecl::TreeLayout { .. } | TransformDecl::Treemap { .. } => {
            out.rows = tree::apply_layout(t, input)?;
        }
    }
    Ok(out)
}

fn key_of(row: &DataRow, fields: &[String]) -> Vec<Value> {
    fields.iter().map(|f| row.get(f).clone()).collect()
}

fn key_bytes(key: &[Value]) -> Vec<u8> {
    let mut b = Vec::new();
    for v in key {
        v.key_bytes(&mut b);
    }
    b
}

/// Groups in order of first appearance: (key, member row indices).
fn groups(input: &DataTable, by: &[String]) -> Vec<(Vec<Value>, Vec<usize>)> {
    let mut index: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut out: Vec<(Vec<Value>, Vec<usize>)> = Vec::new();
    for (i, row) in input.rows.iter().enumerate() {
        let key = key_of(row, by);
        let slot = *index.entry(key_bytes(&key)).or_insert_with(|| {
            out.push((key.clone(), Vec::new()));
            out.len() - 1
        });
        out[slot].1.push(i);
    }
    out
}

fn aggregate(
    input: &DataTable,
    groupby: &[String],
    ops: &[AggOp],
    fields: &[Option<String>],
    as_: &[String],
) -> Vec<DataRow> {
    groups(input, groupby)
        .into_iter()
        .map(|(key, members)| {
            let mut cells = Row::new();
            for (g, v) in groupby.iter().zip(&key) {
                cells.insert(g.clone(), v.clone());
            }
            for ((op, field), name) in ops.iter().zip(fields).zip(as_) {
                let values: Vec<&Value> = match field {
                    Some(f) => members.iter().map(|&i| input.rows[i].get(f)).collect(),
                    None => Vec::new(),
                };
                let nums: Vec<f64> = values.iter().filter_map(|v| v.as_f64()).collect();
                let v = match op {
                    AggOp::Count => match field {
                        None => Value::Number(members.len() as f64),
                        Some(_) => Value::Number(values.iter().filter(|v| !v.is_null()).count() as f64),
                    },
                    AggOp::Sum => Value::Number(nums.iter().sum()),
                    AggOp::Mean if nums.is_empty() => Value::Null,
                    AggOp::Mean => Value::Number(nums.iter().sum::<f64>() / nums.len() as f64),
                    AggOp::Min => nums.iter().copied().reduce(f64::min).map(Value::Number).unwrap_or(Value::Null),
                    AggOp::Max => nums.iter().copied().reduce(f64::max).map(Value::Number).unwrap_or(Value::Null),
                };
                cells.insert(name.clone(), v);
            }
            let tag = if members.iter().all(|&i| input.rows[i].tag == SourceTag::Base) {
                SourceTag::Base
            } else {
                SourceTag::Augment
            };
            DataRow {
                pid: group_pid(&key),
                tag,
                cells,
            }
        })
        .collect()
}

fn stack(input: &DataTable, groupby: &[String], field: &str, sort_field: Option<&str>) -> Vec<DataRow> {
    let mut rows = input.rows.clone();
    for (_, mut members) in groups(input, groupby) {
        if let Some(s) = sort_field {
            members.sort_by(|&a, &b| input.rows[a].get(s).total_cmp(input.rows[b].get(s)));
        }
        let mut prefix = 0.0;
        for i in members {
            let v = input.rows[i].get(field).as_f64().unwrap_or(0.0);
            let cells = &mut rows[i].cells;
            cells.insert("y0".into(), Value::Number(prefix));
            prefix += v;
            cells.insert("y1".into(), Value::Number(prefix));
        }
    }
    rows
}

fn pie(input: &DataTable, field: &str, start: f64) -> Vec<DataRow> {
    let value = |r: &DataRow| r.get(field).as_f64().filter(|v| *v > 0.0).unwrap_or(0.0);
    let total: f64 = input.rows.iter().map(value).sum();
    let mut prefix = 0.0;
    input
        .rows
        .iter()
        .map(|r| {
            let v = value(r);
            let (a0, a1) = if total > 0.0 {
                (start + 2.0 * PI * prefix / total, start + 2.0 * PI * (prefix + v) / total)
            } else {
                (start, start)
            };
            prefix += v;
            let mut r = r.clone();
            r.cells.insert("startAngle".into(), Value::Number(a0));
            r.cells.insert("endAngle".into(), Value::Number(a1));
            r
        })
        .collect()
}

/// Smallest step of the form {1, 2, 5} x 10^k that covers `span` in at most `maxbins` bins.
pub(crate) fn nice_step(span: f64, maxbins: u32) -> f64 {
    let maxbins = maxbins.max(1) as f64;
    if span <= 0.0 || !span.is_finite() {
        return 1.0;
    }
    let raw = span / maxbins;
    let mut k = raw.log10().floor() as i32 - 1;
    loop {
        for m in [1.0, 2.0, 5.0] {
            let step = if k < 0 { m / 10f64.powi(-k) } else { m * 10f64.powi(k) };
            if bin_count(span, step) as f64 <= maxbins {
                return step;
            }
        }
        k += 1;
    }
}

pub(crate) fn bin_count(span: f64, step: f64) -> u64 {
    ((span / step) - 1e-9).ceil().max(1.0) as u64
}

fn bin(input: &DataTable, field: &str, extent: BinExtent, maxbins: u32) -> Vec<DataRow> {
    let (lo, hi) = match extent {
        BinExtent::Fixed(lo, hi) => (lo, hi),
        BinExtent::Auto => {
            let nums = input.rows.iter().filter_map(|r| r.get(field).as_f64());
            nums.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        }
    };
    let span = hi - lo;
    let step = nice_step(span, maxbins);
    let count = bin_count(span, step) as f64;
    input
        .rows
        .iter()
        .map(|r| {
            let mut r = r.clone();
            let (b0, b1) = match r.get(field).as_f64() {
                Some(v) if lo.is_finite() => {
                    let mut idx = ((v - lo) / step).floor();
                    if idx >= count && v <= hi {
                        idx = count - 1.0;
                    }
                    let b0 = lo + idx * step;
                    (Value::Number(b0), Value::Number(b0 + step))
                }
                _ => (Value::Null, Value::Null),
            };
            r.cells.insert("bin0".into(), b0);
            r.cells.insert("bin1".into(), b1);
            r
        })
        .collect()
}
