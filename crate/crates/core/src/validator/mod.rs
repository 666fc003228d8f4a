//! Validity checks for an augmentation: dataflow diffing, scale checks,
//! occlusion and scalability warnings, and the scene-level oracle.

mod hints;

use std::collections::HashMap;
use std::fmt::Write;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::augment::{compile, AugmentationClass, CompileError, Compiled};
use crate::dataflow::{DataflowTrace, SourceTag};
use crate::scale::{ResolvedScale, ScaleMapping, ScaleSet};
use crate::scene::{Layer, SceneGraph};
use crate::spec::{ArMode, Rect, Spec, TransformDecl};
use crate::value::{approx_eq, Value};

pub use hints::{hint, hint_for, hint_id, ids_for_kind, Hint, HINTS};

/// Share of a static item's box a virtual item may cover before it is reported.
pub const OCCLUSION_SHARE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum RowKey {
    ProvenanceId(u64),
    GroupKey(Vec<Value>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Mismatch {
    #[serde(flatten)]
    pub key: RowKey,
    /// `*` when the whole row is missing or unexpected.
    pub field: String,
    pub base_value: Value,
    pub aug_value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StageDiff {
    pub dataset: String,
    pub stage_index: usize,
    pub transform_kind: &'static str,
    pub mismatches: Vec<Mismatch>,
    pub hint: &'static Hint,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("dataset `{dataset}`: pipelines differ at stage {stage_index}")]
pub struct PipelineShapeMismatch {
    pub dataset: String,
    pub stage_index: usize,
}

fn row_key(t: &TransformDecl, pid: u64, cells: &crate::value::Row) -> RowKey {
    match t {
        TransformDecl::Aggregate { groupby, .. } => RowKey::GroupKey(
            groupby
                .iter()
                .map(|g| cells.get(g).cloned().unwrap_or(Value::Null))
                .collect(),
        ),
        _ => RowKey::ProvenanceId(pid),
    }
}

/// Compare each stage of the augmented run, restricted to base provenance,
/// with the same stage of the base run. Returns one entry per differing
/// stage, in pipeline order.
pub fn diff_traces(base: &DataflowTrace, aug: &DataflowTrace) -> Result<Vec<StageDiff>, PipelineShapeMismatch> {
    let shape_err = |i| PipelineShapeMismatch {
        dataset: base.dataset.clone(),
        stage_index: i,
    };
    if base.stages.len() != aug.stages.len() {
        return Err(shape_err(base.stages.len().min(aug.stages.len())));
    }
    let mut diffs = Vec::new();
    for (i, (b, a)) in base.stages.iter().zip(&aug.stages).enumerate() {
        if b.transform != a.transform {
            return Err(shape_err(i));
        }
        let by_pid: HashMap<u64, &crate::dataflow::DataRow> =
            a.output.rows.iter().map(|r| (r.pid, r)).collect();
        let mut mismatches = Vec::new();
        for row in &b.output.rows {
            let key = || row_key(&b.transform, row.pid, &row.cells);
            let Some(other) = by_pid.get(&row.pid) else {
                mismatches.push(Mismatch {
                    key: key(),
                    field: "*".into(),
                    base_value: Value::Bool(true),
                    aug_value: Value::Null,
                });
                continue;
            };
            for col in &b.output.columns {
                let (bv, av) = (row.get(col), other.get(col));
                if !bv.approx_eq(av) {
                    mismatches.push(Mismatch {
                        key: key(),
                        field: col.clone(),
                        base_value: bv.clone(),
                        aug_value: av.clone(),
                    });
                }
            }
        }
        let base_pids: std::collections::HashSet<u64> = b.output.rows.iter().map(|r| r.pid).collect();
        for row in a.output.rows.iter().filter(|r| r.tag == SourceTag::Base) {
            if !base_pids.contains(&row.pid) {
                mismatches.push(Mismatch {
                    key: row_key(&b.transform, row.pid, &row.cells),
                    field: "*".into(),
                    base_value: Value::Null,
                    aug_value: Value::Bool(true),
                });
            }
        }
        if !mismatches.is_empty() {
            diffs.push(StageDiff {
                dataset: base.dataset.clone(),
                stage_index: i,
                transform_kind: b.transform.kind().name(),
                mismatches,
                hint: hint_for(&b.transform),
            });
        }
    }
    Ok(diffs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleDiff {
    pub scale: String,
    pub kind: &'static str,
    pub reason: String,
    pub base: serde_json::Value,
    pub aug: serde_json::Value,
}

fn mapping_json(s: &ResolvedScale) -> serde_json::Value {
    match &s.mapping {
        ScaleMapping::Linear {
            domain,
            range,
            slope,
            intercept,
        } => json!({"domain": [domain.0, domain.1], "range": [range.0, range.1], "slope": slope, "intercept": intercept}),
        ScaleMapping::Band {
            domain,
            start,
            end,
            step,
            padding_inner,
            padding_outer,
        } => json!({"domain": domain, "range": [start, end], "step": step,
                    "paddingInner": padding_inner, "paddingOuter": padding_outer}),
        ScaleMapping::Ordinal { domain, palette } => json!({"domain": domain, "range": palette}),
    }
}

fn compare_scale(b: &ResolvedScale, a: &ResolvedScale) -> Option<String> {
    if b.kind != a.kind {
        return Some("scale kind changed".into());
    }
    match (&b.mapping, &a.mapping) {
        (
            ScaleMapping::Linear {
                slope: s0,
                intercept: i0,
                ..
            },
            ScaleMapping::Linear {
                slope: s1,
                intercept: i1,
                ..
            },
        ) => (!approx_eq(*s0, *s1) || !approx_eq(*i0, *i1)).then(|| "linear mapping changed".into()),
        (
            ScaleMapping::Band {
                domain: d0,
                start: r0,
                step: s0,
                padding_inner: pi0,
                padding_outer: po0,
                ..
            },
            ScaleMapping::Band {
                domain: d1,
                start: r1,
                step: s1,
                padding_inner: pi1,
                padding_outer: po1,
                ..
            },
        ) => {
            if d0.len() > d1.len() || d0.iter().zip(d1).any(|(x, y)| x != y) {
                Some("base domain is not a prefix of the augmented domain".into())
            } else if !approx_eq(*s0, *s1) || !approx_eq(*r0, *r1) || pi0 != pi1 || po0 != po1 {
                Some("step, start or padding changed".into())
            } else {
                None
            }
        }
        (ScaleMapping::Ordinal { domain, .. }, ScaleMapping::Ordinal { .. }) => domain
            .iter()
            .any(|v| b.color(v) != a.color(v))
            .then(|| "colour assignment of base categories changed".into()),
        _ => Some("scale kind changed".into()),
    }
}

/// Scale mappings of the base layer must survive in the augmented layer.
pub fn check_scales(base: &ScaleSet, aug: &ScaleSet) -> Vec<ScaleDiff> {
    let mut diffs = Vec::new();
    for (name, b) in base {
        let reason = match aug.get(name) {
            None => Some("scale missing from augmented spec".to_string()),
            Some(a) => compare_scale(b, a),
        };
        if let Some(reason) = reason {
            diffs.push(ScaleDiff {
                scale: name.clone(),
                kind: b.kind.name(),
                reason,
                base: mapping_json(b),
                aug: aug.get(name).map(mapping_json).unwrap_or(serde_json::Value::Null),
            });
        }
    }
    diffs
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemRef {
    pub mark: usize,
    pub pid: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum OcclusionTarget {
    ProtectedRegion { index: usize },
    Anchor,
    StaticItem { mark: usize, pid: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Occlusion {
    pub virtual_item: ItemRef,
    pub target: OcclusionTarget,
    pub overlap_area: f64,
}

/// Bounding-box overlaps of placed virtual items with protected regions, the
/// anchor box and static items.
pub fn detect_occlusion(
    virtual_placed: &SceneGraph,
    static_scene: &SceneGraph,
    protected: &[Rect],
    anchor: Option<&Rect>,
) -> Vec<Occlusion> {
    let mut out = Vec::new();
    for v in &virtual_placed.items {
        let vb = v.bbox();
        let item = || ItemRef { mark: v.mark, pid: v.pid };
        for (index, region) in protected.iter().enumerate() {
            let area = vb.overlap_area(region);
            if area > 0.0 {
                out.push(Occlusion {
                    virtual_item: item(),
                    target: OcclusionTarget::ProtectedRegion { index },
                    overlap_area: area,
                });
            }
        }
        if let Some(a) = anchor {
            let area = vb.overlap_area(a);
            if area > 0.0 {
                out.push(Occlusion {
                    virtual_item: item(),
                    target: OcclusionTarget::Anchor,
                    overlap_area: area,
                });
            }
        }
        for s in static_scene.layer(Layer::Static) {
            let sb = s.bbox();
            let area = vb.overlap_area(&sb);
            if area > 0.0 && area > OCCLUSION_SHARE * sb.area() {
                out.push(Occlusion {
                    virtual_item: item(),
                    target: OcclusionTarget::StaticItem { mark: s.mark, pid: s.pid },
                    overlap_area: area,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleVerdict {
    pub valid: bool,
    /// Base items that moved, restyled or disappeared, and unexpected static items.
    pub flagged: Vec<ItemRef>,
    /// Largest coordinate change over base items present in both scenes.
    pub max_displacement: f64,
}

/// Geometric invariance of base marks between the base and augmented scenes.
pub fn scene_oracle(base: &SceneGraph, aug: &SceneGraph) -> OracleVerdict {
    let index: HashMap<(usize, u64), &crate::scene::MarkItem> =
        aug.items.iter().map(|i| ((i.mark, i.pid), i)).collect();
    let mut flagged = Vec::new();
    let mut max_displacement: f64 = 0.0;
    for b in &base.items {
        match index.get(&(b.mark, b.pid)) {
            Some(a) => {
                max_displacement = max_displacement.max(b.geometry.displacement(&a.geometry));
                if !b.geometry.approx_eq(&a.geometry) || b.style != a.style || b.text != a.text {
                    flagged.push(ItemRef { mark: b.mark, pid: b.pid });
                }
            }
            None => flagged.push(ItemRef { mark: b.mark, pid: b.pid }),
        }
    }
    let known: std::collections::HashSet<(usize, u64)> = base.items.iter().map(|i| (i.mark, i.pid)).collect();
    for a in aug.layer(Layer::Static) {
        if !known.contains(&(a.mark, a.pid)) {
            flagged.push(ItemRef { mark: a.mark, pid: a.pid });
        }
    }
    OracleVerdict {
        valid: flagged.is_empty(),
        flagged,
        max_displacement,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Valid,
    Invalid,
    Warnings,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Valid => "valid",
            Verdict::Invalid => "invalid",
            Verdict::Warnings => "warnings",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Warning {
    pub kind: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub verdict: Verdict,
    pub mode: Option<AugmentationClass>,
    pub stage_diffs: Vec<StageDiff>,
    pub scale_diffs: Vec<ScaleDiff>,
    pub occlusions: Vec<Occlusion>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    fn new(
        mode: Option<AugmentationClass>,
        stage_diffs: Vec<StageDiff>,
        scale_diffs: Vec<ScaleDiff>,
        occlusions: Vec<Occlusion>,
        warnings: Vec<Warning>,
    ) -> Self {
        let verdict = if !stage_diffs.is_empty() || !scale_diffs.is_empty() {
            Verdict::Invalid
        } else if !occlusions.is_empty() || !warnings.is_empty() {
            Verdict::Warnings
        } else {
            Verdict::Valid
        };
        ValidationReport {
            verdict,
            mode,
            stage_diffs,
            scale_diffs,
            occlusions,
            warnings,
        }
    }

    /// Hint of the first differing stage.
    pub fn first_hint(&self) -> Option<&'static Hint> {
        self.stage_diffs.first().map(|d| d.hint)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// Human-readable summary: verdict line, then one line per finding.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.verdict.name());
        for d in &self.stage_diffs {
            let _ = writeln!(
                out,
                "  dataset `{}` stage {} ({}): {} mismatched value(s)\n    hint: {}",
                d.dataset,
                d.stage_index,
                d.transform_kind,
                d.mismatches.len(),
                d.hint.text
            );
        }
        for d in &self.scale_diffs {
            let _ = writeln!(out, "  scale `{}` ({}): {}", d.scale, d.kind, d.reason);
        }
        for o in &self.occlusions {
            let target = match &o.target {
                OcclusionTarget::ProtectedRegion { index } => format!("protected region {index}"),
                OcclusionTarget::Anchor => "anchor box".to_string(),
                OcclusionTarget::StaticItem { mark, pid } => format!("static item {mark}/{pid}"),
            };
            let _ = writeln!(
                out,
                "  occlusion: virtual item {}/{} covers {} ({} px²)",
                o.virtual_item.mark,
                o.virtual_item.pid,
                target,
                crate::svg::fmt_num(o.overlap_area)
            );
        }
        for w in &self.warnings {
            let _ = writeln!(out, "  {}: {}", w.kind, w.message);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidateError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Shape(#[from] PipelineShapeMismatch),
}

fn scalability(base: &ScaleSet, multiple: &ScaleSet, k: usize) -> Vec<Warning> {
    let mut out = Vec::new();
    for (name, b) in base {
        let Some(m) = multiple.get(name) else { continue };
        let outside = match (&b.mapping, &m.mapping) {
            (ScaleMapping::Linear { domain: d0, .. }, ScaleMapping::Linear { domain: d1, .. }) => {
                d1.0 < d0.0 || d1.1 > d0.1
            }
            _ => match (b.domain_values(), m.domain_values()) {
                (Some(d0), Some(d1)) => d1.iter().any(|v| !d0.contains(v)),
                _ => false,
            },
        };
        if outside {
            out.push(Warning {
                kind: "scalability",
                message: format!("multiple {k}: values of scale `{name}` fall outside the base domain"),
            });
        }
    }
    out
}

/// Validate a compiled spec.
pub fn validate_compiled(spec: &Spec, c: &Compiled) -> Result<ValidationReport, PipelineShapeMismatch> {
    let Some(class) = c.class else {
        return Ok(ValidationReport::new(None, vec![], vec![], vec![], vec![]));
    };
    let ar = spec.ar.as_ref().expect("class implies ar");
    let anchor = ar.anchor.rect();
    let placed = c.composed.placed_virtual();
    let occlusions = || detect_occlusion(&placed, &c.base.scene, &spec.protected, Some(&anchor));
    Ok(match class.mode {
        ArMode::Extend => {
            let aug = &c.augmented[0];
            let mut stage_diffs = Vec::new();
            for (name, base_trace) in &c.base.traces {
                if let Some(aug_trace) = aug.traces.get(name) {
                    stage_diffs.extend(diff_traces(base_trace, aug_trace)?);
                }
            }
            let scale_diffs = check_scales(&c.base.scales, &aug.scales);
            ValidationReport::new(Some(class), stage_diffs, scale_diffs, occlusions(), vec![])
        }
        ArMode::Composite => ValidationReport::new(Some(class), vec![], vec![], occlusions(), vec![]),
        ArMode::SmallMultiple => {
            let warnings = c
                .augmented
                .iter()
                .enumerate()
                .flat_map(|(k, u)| scalability(&c.base.scales, &u.scales, k))
                .collect();
            ValidationReport::new(Some(class), vec![], vec![], occlusions(), warnings)
        }
        ArMode::MultipleView => {
            let mut warnings = Vec::new();
            let frame = c.composed.virtual_scene.frame.translate(c.composed.offset.0, c.composed.offset.1);
            if frame.overlap_area(&c.base.scene.frame) > 0.0 {
                warnings.push(Warning {
                    kind: "placement",
                    message: "the virtual view overlaps the static canvas".into(),
                });
            }
            ValidationReport::new(Some(class), vec![], vec![], vec![], warnings)
        }
    })
}

/// Compile and validate.
pub fn validate(spec: &Spec) -> Result<ValidationReport, ValidateError> {
    let compiled = compile(spec)?;
    Ok(validate_compiled(spec, &compiled)?)
}

/// Scene oracle over a compiled extend-mode spec: base scene against the
/// full augmented scene. `None` for other modes.
pub fn oracle_for(c: &Compiled) -> Option<OracleVerdict> {
    match c.class {
        Some(AugmentationClass {
            mode: ArMode::Extend, ..
        }) => Some(scene_oracle(&c.base.scene, &c.augmented[0].scene)),
        _ => None,
    }
}
