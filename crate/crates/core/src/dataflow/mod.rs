//! Transform pipelines over provenance-tagged tables.
//!
//! Every row carries a provenance id (`pid`) and a source tag. Base rows get
//! pids `1, 2, ...`; appended rows start at `2^32`. Row-level transforms keep
//! the pid of the row they came from, aggregates hash their group key, and
//! layout transforms annotate rows in place.

mod pipeline;
mod transform;
mod tree;

use thiserror::Error;

use crate::expr::ExprError;
use crate::spec::{DatasetDecl, ParseKind};
use crate::value::{parse_timestamp, Row, Value};

pub use pipeline::{run_pipeline, run_spec, DataflowTrace, Stage};
pub use transform::{apply_transform, group_pid, output_columns};

/// First provenance id handed to appended rows.
pub const AUGMENT_PID_BASE: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceTag {
    Base,
    Augment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataRow {
    pub pid: u64,
    pub tag: SourceTag,
    pub cells: Row,
}

impl DataRow {
    pub fn get(&self, field: &str) -> &Value {
        self.cells.get(field).unwrap_or(&Value::Null)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<DataRow>,
}

impl DataTable {
    pub fn empty(name: impl Into<String>, columns: Vec<String>) -> Self {
        DataTable {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_column(&self, field: &str) -> bool {
        self.columns.iter().any(|c| c == field)
    }

    pub fn row_by_pid(&self, pid: u64) -> Option<&DataRow> {
        self.rows.iter().find(|r| r.pid == pid)
    }

    /// Append another table's rows; both must share the same columns.
    pub fn append(&mut self, other: DataTable) {
        self.rows.extend(other.rows);
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataflowError {
    #[error("dataset `{dataset}`: row {row} does not have the table's columns")]
    HeterogeneousRows { dataset: String, row: usize },
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("cyclic hierarchy through node `{0}`")]
    CyclicHierarchy(String),
    #[error("duplicate node id `{0}`")]
    DuplicateNodeId(String),
    #[error("node `{node}` references unknown parent `{parent}`")]
    UnknownParent { node: String, parent: String },
    #[error("unknown dataset `{0}`")]
    MissingDataset(String),
    #[error("dataset `{dataset}`, stage {stage_index} ({kind}): {source}")]
    Stage {
        dataset: String,
        stage_index: usize,
        kind: &'static str,
        source: Box<DataflowError>,
    },
}

impl DataflowError {
    /// Stage index of a pipeline failure.
    pub fn stage_index(&self) -> Option<usize> {
        match self {
            DataflowError::Stage { stage_index, .. } => Some(*stage_index),
            _ => None,
        }
    }
}

/// Build a table from inline rows. Pids are sequential from 1 (base) or from
/// `2^32` (augment); row order is kept.
pub fn ingest(decl: &DatasetDecl, rows: &[Row], tag: SourceTag) -> Result<DataTable, DataflowError> {
    let columns = decl.columns();
    let first_pid = match tag {
        SourceTag::Base => 1,
        SourceTag::Augment => AUGMENT_PID_BASE,
    };
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != columns.len() || !columns.iter().all(|c| row.contains_key(c)) {
            return Err(DataflowError::HeterogeneousRows {
                dataset: decl.name.clone(),
                row: i,
            });
        }
        let mut cells = row.clone();
        for (field, kind) in &decl.parse {
            if let Some(v) = cells.get_mut(field) {
                *v = parse_cell(v, *kind);
            }
        }
        out.push(DataRow {
            pid: first_pid + i as u64,
            tag,
            cells,
        });
    }
    Ok(DataTable {
        name: decl.name.clone(),
        columns,
        rows: out,
    })
}

/// Ingest a dataset's base values followed by its appended rows.
pub fn ingest_dataset(decl: &DatasetDecl) -> Result<DataTable, DataflowError> {
    let mut table = ingest(decl, &decl.values, SourceTag::Base)?;
    if !decl.appended.is_empty() {
        table.append(ingest(decl, &decl.appended, SourceTag::Augment)?);
    }
    Ok(table)
}

fn parse_cell(v: &Value, kind: ParseKind) -> Value {
    match (kind, v) {
        (ParseKind::Date, Value::String(s)) => parse_timestamp(s).map(Value::Timestamp).unwrap_or(Value::Null),
        (ParseKind::Date, Value::Number(n)) => Value::Timestamp(*n as i64),
        (ParseKind::Number, Value::String(s)) => s.trim().parse::<f64>().map(Value::Number).unwrap_or(Value::Null),
        (_, v) => v.clone(),
    }
}
