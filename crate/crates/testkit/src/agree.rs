//! Run the engine and the reference implementations side by side.

use augvis_core::dataflow::{apply_transform, DataTable, DataflowTrace, SourceTag};
use augvis_core::spec::{AggOp, BinExtent, TransformDecl};
use augvis_core::value::Value;

use crate::gen::RandomTable;
use crate::oracle;

/// Largest absolute difference, or a description of the first structural mismatch.
pub type Agreement = Result<f64, String>;

fn num(v: &Value) -> Option<f64> {
    v.as_f64()
}

fn diff(a: f64, b: f64) -> f64 {
    (a - b).abs()
}

pub fn aggregate(t: &RandomTable, op: AggOp) -> Agreement {
    let field = (op != AggOp::Count).then(|| "f".to_string());
    let decl = TransformDecl::Aggregate {
        groupby: vec!["cat".into()],
        ops: vec![op],
        fields: vec![field],
        as_: vec!["a".into()],
    };
    let out = apply_transform(&decl, &t.table).map_err(|e| e.to_string())?;
    let values: Vec<Option<f64>> = t.floats.iter().map(|f| Some(*f)).collect();
    let expected = oracle::aggregate(&t.cats, &values, op.name());
    if out.rows.len() != expected.len() {
        return Err(format!("{} groups, expected {}", out.rows.len(), expected.len()));
    }
    let mut worst: f64 = 0.0;
    for (row, (key, agg)) in out.rows.iter().zip(&expected) {
        if row.get("cat") != key {
            return Err(format!("group {:?} where {key:?} was expected", row.get("cat")));
        }
        match (num(row.get("a")), agg) {
            (Some(a), Some(b)) => worst = worst.max(diff(a, *b)),
            (None, None) => {}
            (a, b) => return Err(format!("group {key}: {a:?} vs {b:?}")),
        }
    }
    Ok(worst)
}

pub fn stack(t: &RandomTable, sorted: bool) -> Agreement {
    let decl = TransformDecl::Stack {
        groupby: vec!["cat".into()],
        field: "f".into(),
        sort_field: sorted.then(|| "i".to_string()),
    };
    let out = apply_transform(&decl, &t.table).map_err(|e| e.to_string())?;
    let sort: Vec<f64> = t.ints.iter().map(|i| *i as f64).collect();
    let expected = oracle::stack(&t.cats, &t.floats, sorted.then_some(&sort[..]));
    pairs(&out, "y0", "y1", &expected)
}

pub fn pie(t: &RandomTable, start: f64) -> Agreement {
    let decl = TransformDecl::Pie {
        field: "f".into(),
        start_angle: start,
    };
    let out = apply_transform(&decl, &t.table).map_err(|e| e.to_string())?;
    pairs(&out, "startAngle", "endAngle", &oracle::pie(&t.floats, start))
}

pub fn bin(t: &RandomTable, maxbins: u32) -> Agreement {
    let decl = TransformDecl::Bin {
        field: "i".into(),
        extent: BinExtent::Auto,
        maxbins,
    };
    let out = apply_transform(&decl, &t.table).map_err(|e| e.to_string())?;
    pairs(&out, "bin0", "bin1", &oracle::bin_auto(&t.ints, maxbins))
}

fn pairs(out: &DataTable, a: &str, b: &str, expected: &[(f64, f64)]) -> Agreement {
    if out.rows.len() != expected.len() {
        return Err(format!("{} rows, expected {}", out.rows.len(), expected.len()));
    }
    let mut worst: f64 = 0.0;
    for (i, (row, (ea, eb))) in out.rows.iter().zip(expected).enumerate() {
        let (Some(x), Some(y)) = (num(row.get(a)), num(row.get(b))) else {
            return Err(format!("row {i}: non-numeric {a}/{b}"));
        };
        worst = worst.max(diff(x, *ea)).max(diff(y, *eb));
    }
    Ok(worst)
}

fn close(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let d = (x - y).abs();
            d <= 1e-12 || d <= 1e-9 * x.abs().max(y.abs())
        }
        _ => a == b,
    }
}

/// First stage whose base-provenance rows differ between two traces, found by
/// linear scans over both tables.
pub fn first_differing_stage(base: &DataflowTrace, aug: &DataflowTrace) -> Option<usize> {
    (0..base.stages.len()).find(|&i| {
        let (b, a) = (&base.stages[i].output, &aug.stages[i].output);
        let missing_or_changed = b.rows.iter().any(|br| match a.rows.iter().find(|ar| ar.pid == br.pid) {
            None => true,
            Some(ar) => b.columns.iter().any(|c| !close(br.get(c), ar.get(c))),
        });
        let unexpected = a
            .rows
            .iter()
            .any(|ar| ar.tag == SourceTag::Base && !b.rows.iter().any(|br| br.pid == ar.pid));
        missing_or_changed || unexpected
    })
}
