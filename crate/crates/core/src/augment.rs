//! Semantics of the `ar` block: classification, placeholder expansion,
//! construction of the augmented spec and composition of the two layers.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::dataflow::{run_spec, DataflowError, DataflowTrace};
use crate::encode::{encode_marks, EncodeError, LayerPolicy};
use crate::scale::{resolve_scale, resolve_scale_extended, ScaleError, ScaleSet};
use crate::scene::{Layer, SceneGraph};
use crate::spec::{
    AppendSource, ArBlock, ArMode, Direction, FieldKind, PlaceholderSpec, Placement, Rect, Spec,
};
use crate::value::{parse_timestamp, Row, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Encodings {
    Same,
    Different,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Composition {
    Integrated,
    Separate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AugmentationClass {
    pub mode: ArMode,
    pub encodings: Encodings,
    pub composition: Composition,
}

impl Serialize for AugmentationClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("AugmentationClass", 3)?;
        st.serialize_field("mode", self.mode.name())?;
        st.serialize_field("encodings", &self.encodings)?;
        st.serialize_field("composition", &self.composition)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AugmentError {
    #[error("spec has no ar block")]
    NoArBlock,
    #[error("{path}: block shape contradicts mode")]
    ModeShapeConflict { path: String },
    #[error("append to unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("append rows for `{dataset}` do not match its columns at field `{field}`")]
    AppendSchemaMismatch { dataset: String, field: String },
}

pub fn classify_augmentation(spec: &Spec) -> Result<AugmentationClass, AugmentError> {
    let ar = spec.ar.as_ref().ok_or(AugmentError::NoArBlock)?;
    if ar.mode.needs_nested() != ar.nested.is_some() {
        return Err(AugmentError::ModeShapeConflict {
            path: "ar.nested".into(),
        });
    }
    if ar.mode == ArMode::Extend && ar.appends.is_empty() {
        return Err(AugmentError::ModeShapeConflict {
            path: "ar.appends".into(),
        });
    }
    let (encodings, composition) = match ar.mode {
        ArMode::Extend => (Encodings::Same, Composition::Integrated),
        ArMode::Composite => (Encodings::Different, Composition::Integrated),
        ArMode::SmallMultiple => (Encodings::Same, Composition::Separate),
        ArMode::MultipleView => (Encodings::Different, Composition::Separate),
    };
    Ok(AugmentationClass {
        mode: ar.mode,
        encodings,
        composition,
    })
}

/// 64-bit LCG used for mock data.
#[derive(Debug, Clone)]
pub struct Lcg(u64);

impl Lcg {
    pub const MUL: u64 = 6364136223846793005;
    pub const INC: u64 = 1442695040888963407;

    pub fn new(seed: u64) -> Self {
        Lcg(seed)
    }

    /// Uniform in [0, 1) from the top 53 bits of the next state.
    pub fn next_unit(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(Self::MUL).wrapping_add(Self::INC);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Concrete rows for one placeholder. One draw per cell, row-major.
pub fn placeholder_rows(p: &PlaceholderSpec) -> Vec<Row> {
    let mut rng = Lcg::new(p.seed);
    (0..p.count)
        .map(|i| {
            let mut row = Row::new();
            for f in &p.fields {
                let u = rng.next_unit();
                let v = match (&f.options, f.kind) {
                    (Some(opts), _) if !opts.is_empty() => {
                        opts[((u * opts.len() as f64) as usize).min(opts.len() - 1)].clone()
                    }
                    (_, FieldKind::Categorical) => {
                        let pattern = f.pattern.as_deref().unwrap_or("*");
                        Value::String(pattern.replacen('*', &(i + 1).to_string(), 1))
                    }
                    (_, FieldKind::Quantitative) => {
                        let (lo, hi) = f.range.unwrap_or((0.0, 1.0));
                        Value::Number(lo + u * (hi - lo))
                    }
                    (_, FieldKind::Temporal) => match &f.span {
                        Some(span) => {
                            let start = parse_timestamp(&span.start).unwrap_or(0);
                            let end = parse_timestamp(&span.end).unwrap_or(start);
                            let step = span.step_seconds.max(1) as i64;
                            let slots = ((end - start) as f64 / step as f64).max(0.0);
                            Value::Timestamp(start + (u * slots).floor() as i64 * step)
                        }
                        None => Value::Null,
                    },
                };
                row.insert(f.name.clone(), v);
            }
            row
        })
        .collect()
}

/// Replace every placeholder source with its generated rows.
pub fn expand_placeholders(ar: &ArBlock) -> ArBlock {
    let mut out = ar.clone();
    for append in &mut out.appends {
        if let AppendSource::Placeholder(p) = &append.source {
            append.source = AppendSource::Values(placeholder_rows(p));
        }
    }
    out
}

fn append_rows(source: &AppendSource) -> Vec<Row> {
    match source {
        AppendSource::Values(v) => v.clone(),
        AppendSource::Placeholder(p) => placeholder_rows(p),
    }
}

fn check_rows(target: &Spec, dataset: &str, rows: &[Row]) -> Result<(), AugmentError> {
    let decl = target
        .dataset(dataset)
        .ok_or_else(|| AugmentError::UnknownDataset(dataset.to_string()))?;
    let columns = decl.columns();
    for row in rows {
        if let Some(missing) = columns.iter().find(|c| !row.contains_key(*c)) {
            return Err(AugmentError::AppendSchemaMismatch {
                dataset: dataset.to_string(),
                field: missing.clone(),
            });
        }
        if let Some(extra) = row.keys().find(|k| !columns.contains(k)) {
            return Err(AugmentError::AppendSchemaMismatch {
                dataset: dataset.to_string(),
                field: extra.clone(),
            });
        }
    }
    Ok(())
}

/// The virtual side of an augmentation.
#[derive(Debug, Clone, PartialEq)]
pub enum AugmentedSpec {
    /// Base spec with rows appended to its datasets.
    Extend(Spec),
    /// Independent unit (composite and multipleView).
    Nested(Spec),
    /// One copy of the base spec per replacement dataset.
    Multiples(Vec<Spec>),
}

/// Split a spec with an `ar` block into the base spec and its augmentation.
pub fn build_augmented_spec(spec: &Spec) -> Result<(Spec, AugmentedSpec), AugmentError> {
    let class = classify_augmentation(spec)?;
    let ar = spec.ar.as_ref().ok_or(AugmentError::NoArBlock)?;
    let base = spec.without_ar();
    let aug = match class.mode {
        ArMode::Extend => {
            let mut aug = base.clone();
            for append in &ar.appends {
                let rows = append_rows(&append.source);
                check_rows(&aug, &append.dataset, &rows)?;
                if let Some(d) = aug.dataset_mut(&append.dataset) {
                    d.appended.extend(rows);
                }
            }
            AugmentedSpec::Extend(aug)
        }
        ArMode::Composite | ArMode::MultipleView => {
            let mut nested = ar.nested.as_deref().cloned().ok_or(AugmentError::ModeShapeConflict {
                path: "ar.nested".into(),
            })?;
            nested.ar = None;
            for append in &ar.appends {
                let rows = append_rows(&append.source);
                check_rows(&nested, &append.dataset, &rows)?;
                if let Some(d) = nested.dataset_mut(&append.dataset) {
                    d.appended.extend(rows);
                }
            }
            AugmentedSpec::Nested(nested)
        }
        ArMode::SmallMultiple => {
            let mut multiples = Vec::with_capacity(ar.appends.len());
            for append in &ar.appends {
                let rows = append_rows(&append.source);
                check_rows(&base, &append.dataset, &rows)?;
                let mut m = base.clone();
                if let Some(d) = m.dataset_mut(&append.dataset) {
                    d.values = rows;
                }
                multiples.push(m);
            }
            AugmentedSpec::Multiples(multiples)
        }
    };
    Ok((base, aug))
}

/// The static scene with the virtual scene placed next to or over it.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedScene {
    pub static_scene: SceneGraph,
    /// Virtual items in their own coordinates; `offset` places them.
    pub virtual_scene: SceneGraph,
    pub offset: (f64, f64),
    pub view_box: Rect,
}

impl ComposedScene {
    /// Virtual items in final (composed) coordinates.
    pub fn placed_virtual(&self) -> SceneGraph {
        self.virtual_scene.translate(self.offset.0, self.offset.1)
    }
}

pub fn placement_offset(static_frame: &Rect, virtual_frame: &Rect, placement: &Placement) -> (f64, f64) {
    let vw = placement.width_hint.unwrap_or(virtual_frame.width);
    let vh = placement.height_hint.unwrap_or(virtual_frame.height);
    match placement.direction {
        Direction::Overlay => (placement.dx, placement.dy),
        Direction::Right => (static_frame.right() + placement.gap, placement.dy),
        Direction::Left => (static_frame.x - vw - placement.gap, placement.dy),
        Direction::Top => (placement.dx, static_frame.y - vh - placement.gap),
        Direction::Bottom => (placement.dx, static_frame.bottom() + placement.gap),
    }
}

pub fn compose_preview(static_scene: &SceneGraph, virtual_scene: &SceneGraph, placement: &Placement) -> ComposedScene {
    let offset = placement_offset(&static_scene.frame, &virtual_scene.frame, placement);
    let view_box = if virtual_scene.items.is_empty() {
        static_scene.frame
    } else {
        static_scene
            .frame
            .union(&virtual_scene.extent().translate(offset.0, offset.1))
    };
    ComposedScene {
        static_scene: static_scene.clone(),
        virtual_scene: virtual_scene.clone(),
        offset,
        view_box,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("dataflow: {0}")]
    Dataflow(#[from] DataflowError),
    #[error("scale: {0}")]
    Scale(#[from] ScaleError),
    #[error("encode: {0}")]
    Encode(#[from] EncodeError),
    #[error("augment: {0}")]
    Augment(#[from] AugmentError),
}

/// Everything one compiled unit produces.
#[derive(Debug, Clone)]
pub struct Unit {
    pub spec: Spec,
    pub traces: BTreeMap<String, DataflowTrace>,
    pub scales: ScaleSet,
    pub scene: SceneGraph,
}

fn resolve_all(spec: &Spec, traces: &BTreeMap<String, DataflowTrace>) -> Result<ScaleSet, ScaleError> {
    spec.scales
        .iter()
        .map(|d| Ok((d.name.clone(), resolve_scale(d, traces)?)))
        .collect()
}

pub fn compile_unit(spec: &Spec, policy: LayerPolicy) -> Result<Unit, CompileError> {
    let traces = run_spec(spec)?;
    let scales = resolve_all(spec, &traces)?;
    let scene = encode_marks(spec, &traces, &scales, policy)?;
    Ok(Unit {
        spec: spec.clone(),
        traces,
        scales,
        scene,
    })
}

/// Extend mode: scales anchored to the base unit, rows tagged by source.
pub fn compile_extended(aug: &Spec, base: &Unit) -> Result<Unit, CompileError> {
    let traces = run_spec(aug)?;
    let mut scales = ScaleSet::new();
    for d in &aug.scales {
        let s = match base.scales.get(&d.name) {
            Some(b) => resolve_scale_extended(d, &traces, b)?,
            None => resolve_scale(d, &traces)?,
        };
        scales.insert(d.name.clone(), s);
    }
    let scene = encode_marks(aug, &traces, &scales, LayerPolicy::BySource)?;
    Ok(Unit {
        spec: aug.clone(),
        traces,
        scales,
        scene,
    })
}

/// Lay multiples out along `direction`, each in a canvas-sized cell.
fn tile(units: &[Unit], frame: Rect, placement: &Placement) -> SceneGraph {
    let vertical = matches!(placement.direction, Direction::Top | Direction::Bottom);
    let mut items = Vec::new();
    let mut extent: Option<Rect> = None;
    for (k, unit) in units.iter().enumerate() {
        let shift = k as f64 * (if vertical { frame.height } else { frame.width } + placement.gap);
        let (dx, dy) = if vertical { (0.0, shift) } else { (shift, 0.0) };
        let placed = unit.scene.translate(dx, dy);
        extent = Some(extent.map_or(placed.frame, |e| e.union(&placed.frame)));
        items.extend(placed.items);
    }
    SceneGraph {
        items,
        frame: extent.unwrap_or(frame),
    }
}

/// A compiled spec: the static layer and, when an `ar` block is present, the
/// virtual layer and their composition.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub base: Unit,
    pub class: Option<AugmentationClass>,
    /// Extend: the augmented unit with both layers. Composite/multipleView:
    /// the nested unit. SmallMultiple: one unit per multiple.
    pub augmented: Vec<Unit>,
    pub virtual_scene: SceneGraph,
    pub composed: ComposedScene,
}

impl Compiled {
    pub fn static_scene(&self) -> &SceneGraph {
        &self.base.scene
    }

    pub fn has_virtual(&self) -> bool {
        self.class.is_some()
    }
}

pub fn compile(spec: &Spec) -> Result<Compiled, CompileError> {
    let Some(ar) = &spec.ar else {
        let base = compile_unit(spec, LayerPolicy::All(Layer::Static))?;
        let empty = SceneGraph::empty(base.scene.frame);
        let composed = compose_preview(&base.scene, &empty, &Placement::default_for(ArMode::Extend));
        return Ok(Compiled {
            base,
            class: None,
            augmented: Vec::new(),
            virtual_scene: empty,
            composed,
        });
    };
    let class = classify_augmentation(spec)?;
    let (base_spec, aug) = build_augmented_spec(spec)?;
    let base = compile_unit(&base_spec, LayerPolicy::All(Layer::Static))?;
    let (augmented, virtual_scene) = match aug {
        AugmentedSpec::Extend(aug) => {
            let unit = compile_extended(&aug, &base)?;
            let v = unit.scene.filter_layer(Layer::Virtual);
            (vec![unit], v)
        }
        AugmentedSpec::Nested(nested) => {
            let unit = compile_unit(&nested, LayerPolicy::All(Layer::Virtual))?;
            let v = unit.scene.clone();
            (vec![unit], v)
        }
        AugmentedSpec::Multiples(specs) => {
            let units = specs
                .iter()
                .map(|s| compile_unit(s, LayerPolicy::All(Layer::Virtual)))
                .collect::<Result<Vec<_>, _>>()?;
            let v = tile(&units, base.scene.frame, &ar.placement);
            (units, v)
        }
    };
    let composed = compose_preview(&base.scene, &virtual_scene, &ar.placement);
    Ok(Compiled {
        base,
        class: Some(class),
        augmented,
        virtual_scene,
        composed,
    })
}
