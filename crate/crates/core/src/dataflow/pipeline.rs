use std::collections::BTreeMap;

use super::{apply_transform, DataTable, DataflowError};
use crate::spec::{Spec, TransformDecl};

/// One executed transform and a snapshot of its output.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub transform: TransformDecl,
    pub output: DataTable,
}

/// All intermediate states of one dataset's pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct DataflowTrace {
    pub dataset: String,
    pub input: DataTable,
    pub stages: Vec<Stage>,
}

impl DataflowTrace {
    /// Output of the last stage, or the input for an empty pipeline.
    pub fn output(&self) -> &DataTable {
        self.stages.last().map(|s| &s.output).unwrap_or(&self.input)
    }

    /// Input of stage `i`.
    pub fn stage_input(&self, i: usize) -> &DataTable {
        if i == 0 {
            &self.input
        } else {
            &self.stages[i - 1].output
        }
    }
}

/// Run every dataset's pipeline over the given input tables.
pub fn run_pipeline(
    spec: &Spec,
    tables: &BTreeMap<String, DataTable>,
) -> Result<BTreeMap<String, DataflowTrace>, DataflowError> {
    let mut traces = BTreeMap::new();
    for decl in &spec.data {
        let input = tables
            .get(&decl.name)
            .ok_or_else(|| DataflowError::MissingDataset(decl.name.clone()))?;
        let mut stages: Vec<Stage> = Vec::with_capacity(decl.transform.len());
        for (i, t) in decl.transform.iter().enumerate() {
            let prev = stages.last().map(|s| &s.output).unwrap_or(input);
            let output = apply_transform(t, prev).map_err(|e| DataflowError::Stage {
                dataset: decl.name.clone(),
                stage_index: i,
                kind: t.kind().name(),
                source: Box::new(e),
            })?;
            stages.push(Stage {
                transform: t.clone(),
                output,
            });
        }
        traces.insert(
            decl.name.clone(),
            DataflowTrace {
                dataset: decl.name.clone(),
                input: input.clone(),
                stages,
            },
        );
    }
    Ok(traces)
}

/// Ingest every dataset of `spec` (appended rows included) and run its pipeline.
pub fn run_spec(spec: &Spec) -> Result<BTreeMap<String, DataflowTrace>, DataflowError> {
    let mut tables = BTreeMap::new();
    for decl in &spec.data {
        tables.insert(decl.name.clone(), super::ingest_dataset(decl)?);
    }
    run_pipeline(spec, &tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::ingest_dataset;
    use crate::spec::{AggOp, DatasetDecl};
    use crate::value::{Row, Value};

    fn spec_with(transform: Vec<TransformDecl>) -> (Spec, BTreeMap<String, DataTable>) {
        let values = [("A", 1.0), ("A", 20.0), ("B", 30.0)]
            .iter()
            .map(|(c, v)| {
                let mut r = Row::new();
                r.insert("cat".into(), Value::from(*c));
                r.insert("v".into(), Value::Number(*v));
                r
            })
            .collect();
        let mut decl = DatasetDecl::new("t", values);
        decl.transform = transform;
        let table = ingest_dataset(&decl).unwrap();
        let spec = Spec {
            width: 100,
            height: 100,
            data: vec![decl],
            scales: vec![],
            marks: vec![],
            protected: vec![],
            ar: None,
        };
        (spec, BTreeMap::from([("t".to_string(), table)]))
    }

    #[test]
    fn empty_pipeline_echoes_input() {
        let (spec, tables) = spec_with(vec![]);
        let traces = run_pipeline(&spec, &tables).unwrap();
        let tr = &traces["t"];
        assert!(tr.stages.is_empty());
        assert_eq!(tr.output(), &tables["t"]);
    }

    #[test]
    fn filter_then_aggregate_snapshots_each_stage() {
        let (spec, tables) = spec_with(vec![
            TransformDecl::Filter {
                expr: "datum.v > 10".into(),
            },
            TransformDecl::Aggregate {
                groupby: vec!["cat".into()],
                ops: vec![AggOp::Sum],
                fields: vec![Some("v".into())],
                as_: vec!["sum_v".into()],
            },
        ]);
        let tr = &run_pipeline(&spec, &tables).unwrap()["t"];
        assert_eq!(tr.stages.len(), 2);
        assert_eq!(tr.stages[0].output.rows.iter().map(|r| r.pid).collect::<Vec<_>>(), vec![2, 3]);
        let sums: Vec<f64> = tr.stages[1].output.rows.iter().map(|r| r.get("sum_v").as_f64().unwrap()).collect();
        assert_eq!(sums, vec![20.0, 30.0]);
        assert_eq!(tr.stage_input(1), &tr.stages[0].output);
    }

    #[test]
    fn errors_carry_the_stage_index() {
        let (spec, tables) = spec_with(vec![
            TransformDecl::Formula {
                expr: "datum.v * 2".into(),
                as_: "w".into(),
            },
            TransformDecl::Filter {
                expr: "datum.w > 0".into(),
            },
            TransformDecl::Pie {
                field: "missing".into(),
                start_angle: 0.0,
            },
        ]);
        let err = run_pipeline(&spec, &tables).unwrap_err();
        assert_eq!(err.stage_index(), Some(2));
    }

    #[test]
    fn reruns_are_identical() {
        let (spec, tables) = spec_with(vec![TransformDecl::Pie {
            field: "v".into(),
            start_angle: 0.0,
        }]);
        assert_eq!(run_pipeline(&spec, &tables).unwrap(), run_pipeline(&spec, &tables).unwrap());
    }
}
