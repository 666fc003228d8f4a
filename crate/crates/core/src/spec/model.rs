use std::collections::BTreeMap;

use crate::value::{Row, Value};

/// A fully resolved declarative document.
#[derive(Debug, Clone, PartialEq)]
pub struct Spec {
    pub width: u32,
    pub height: u32,
    pub data: Vec<DatasetDecl>,
    pub scales: Vec<ScaleDecl>,
    pub marks: Vec<MarkDecl>,
    /// Reserved content regions (titles, captions) that virtual content must not cover.
    pub protected: Vec<Rect>,
    pub ar: Option<ArBlock>,
}

impl Spec {
    pub fn dataset(&self, name: &str) -> Option<&DatasetDecl> {
        self.data.iter().find(|d| d.name == name)
    }

    pub fn dataset_mut(&mut self, name: &str) -> Option<&mut DatasetDecl> {
        self.data.iter_mut().find(|d| d.name == name)
    }

    pub fn scale(&self, name: &str) -> Option<&ScaleDecl> {
        self.scales.iter().find(|s| s.name == name)
    }

    pub fn canvas(&self) -> Rect {
        Rect::new(0.0, 0.0, self.width as f64, self.height as f64)
    }

    /// Copy of the spec with the `ar` block removed.
    pub fn without_ar(&self) -> Spec {
        Spec { ar: None, ..self.clone() }
    }

    /// Override the seed of every placeholder in the `ar` block (nested specs included).
    pub fn set_placeholder_seed(&mut self, seed: u64) {
        if let Some(ar) = &mut self.ar {
            for append in &mut ar.appends {
                if let AppendSource::Placeholder(p) = &mut append.source {
                    p.seed = seed;
                }
            }
            if let Some(nested) = &mut ar.nested {
                nested.set_placeholder_seed(seed);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub const fn new(x: f64, y: f64, width: f64, height: f64) -> Self {
        Rect { x, y, width, height }
    }

    pub fn right(&self) -> f64 {
        self.x + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.height
    }

    pub fn area(&self) -> f64 {
        self.width.max(0.0) * self.height.max(0.0)
    }

    /// Area of the intersection, zero when the boxes only touch or are disjoint.
    pub fn overlap_area(&self, other: &Rect) -> f64 {
        let w = self.right().min(other.right()) - self.x.max(other.x);
        let h = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    pub fn union(&self, other: &Rect) -> Rect {
        let x = self.x.min(other.x);
        let y = self.y.min(other.y);
        Rect::new(
            x,
            y,
            self.right().max(other.right()) - x,
            self.bottom().max(other.bottom()) - y,
        )
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Rect {
        Rect::new(self.x + dx, self.y + dy, self.width, self.height)
    }

    pub fn contains(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }
}

/// How string cells of a dataset are reinterpreted at ingest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseKind {
    Date,
    Number,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetDecl {
    pub name: String,
    /// Declared column order; derived from the first row when absent.
    pub fields: Option<Vec<String>>,
    pub parse: BTreeMap<String, ParseKind>,
    pub values: Vec<Row>,
    pub transform: Vec<TransformDecl>,
    /// Rows appended by an extend-mode augmentation. Never part of the document.
    pub appended: Vec<Row>,
}

impl DatasetDecl {
    pub fn new(name: impl Into<String>, values: Vec<Row>) -> Self {
        DatasetDecl {
            name: name.into(),
            fields: None,
            parse: BTreeMap::new(),
            values,
            transform: Vec::new(),
            appended: Vec::new(),
        }
    }

    /// Columns of the ingested table.
    pub fn columns(&self) -> Vec<String> {
        match &self.fields {
            Some(f) => f.clone(),
            None => self
                .values
                .first()
                .map(|r| r.keys().cloned().collect())
                .unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggOp {
    Sum,
    Count,
    Mean,
    Min,
    Max,
}

impl AggOp {
    pub fn name(self) -> &'static str {
        match self {
            AggOp::Sum => "sum",
            AggOp::Count => "count",
            AggOp::Mean => "mean",
            AggOp::Min => "min",
            AggOp::Max => "max",
        }
    }

    pub fn parse(s: &str) -> Option<AggOp> {
        Some(match s {
            "sum" => AggOp::Sum,
            "count" => AggOp::Count,
            "mean" => AggOp::Mean,
            "min" => AggOp::Min,
            "max" => AggOp::Max,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortOrder {
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinExtent {
    Auto,
    Fixed(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeMethod {
    Tidy,
    Cluster,
}

impl TreeMethod {
    pub fn name(self) -> &'static str {
        match self {
            TreeMethod::Tidy => "tidy",
            TreeMethod::Cluster => "cluster",
        }
    }
}

/// One step of a dataset's transform pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformDecl {
    Filter {
        expr: String,
    },
    Formula {
        expr: String,
        as_: String,
    },
    Aggregate {
        groupby: Vec<String>,
        ops: Vec<AggOp>,
        fields: Vec<Option<String>>,
        as_: Vec<String>,
    },
    Sort {
        field: String,
        order: SortOrder,
    },
    Stack {
        groupby: Vec<String>,
        field: String,
        sort_field: Option<String>,
    },
    Pie {
        field: String,
        start_angle: f64,
    },
    Bin {
        field: String,
        extent: BinExtent,
        maxbins: u32,
    },
    Hierarchy {
        id_field: String,
        parent_field: String,
    },
    TreeLayout {
        method: TreeMethod,
        id_field: String,
        parent_field: String,
        size: (f64, f64),
        level_gap: f64,
        leaf_step: f64,
    },
    Treemap {
        field: String,
        id_field: String,
        parent_field: String,
        size: (f64, f64),
    },
}

/// Transform kinds, in the order used by the hint table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransformKind {
    Filter,
    Formula,
    Aggregate,
    Sort,
    Stack,
    Pie,
    Bin,
    Hierarchy,
    TreeLayout,
    Treemap,
}

impl TransformKind {
    pub const ALL: [TransformKind; 10] = [
        TransformKind::Filter,
        TransformKind::Formula,
        TransformKind::Aggregate,
        TransformKind::Sort,
        TransformKind::Stack,
        TransformKind::Pie,
        TransformKind::Bin,
        TransformKind::Hierarchy,
        TransformKind::TreeLayout,
        TransformKind::Treemap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Filter => "filter",
            TransformKind::Formula => "formula",
            TransformKind::Aggregate => "aggregate",
            TransformKind::Sort => "sort",
            TransformKind::Stack => "stack",
            TransformKind::Pie => "pie",
            TransformKind::Bin => "bin",
            TransformKind::Hierarchy => "hierarchy",
            TransformKind::TreeLayout => "treelayout",
            TransformKind::Treemap => "treemap",
        }
    }

    pub fn parse(s: &str) -> Option<TransformKind> {
        TransformKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Row-level kinds keep one output row per surviving input row.
    pub fn is_row_level(self) -> bool {
        !matches!(
            self,
            TransformKind::Aggregate
                | TransformKind::Hierarchy
                | TransformKind::TreeLayout
                | TransformKind::Treemap
        )
    }

    /// Layout kinds annotate rows in place.
    pub fn is_layout(self) -> bool {
        matches!(
            self,
            TransformKind::Hierarchy | TransformKind::TreeLayout | TransformKind::Treemap
        )
    }
}

impl TransformDecl {
    pub fn kind(&self) -> TransformKind {
        match self {
            TransformDecl::Filter { .. } => TransformKind::Filter,
            TransformDecl::Formula { .. } => TransformKind::Formula,
            TransformDecl::Aggregate { .. } => TransformKind::Aggregate,
            TransformDecl::Sort { .. } => TransformKind::Sort,
            TransformDecl::Stack { .. } => TransformKind::Stack,
            TransformDecl::Pie { .. } => TransformKind::Pie,
            TransformDecl::Bin { .. } => TransformKind::Bin,
            TransformDecl::Hierarchy { .. } => TransformKind::Hierarchy,
            TransformDecl::TreeLayout { .. } => TransformKind::TreeLayout,
            TransformDecl::Treemap { .. } => TransformKind::Treemap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleKind {
    Linear,
    Band,
    Point,
    Ordinal,
}

impl ScaleKind {
    pub fn name(self) -> &'static str {
        match self {
            ScaleKind::Linear => "linear",
            ScaleKind::Band => "band",
            ScaleKind::Point => "point",
            ScaleKind::Ordinal => "ordinal",
        }
    }

    pub fn is_discrete(self) -> bool {
        !matches!(self, ScaleKind::Linear)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainDecl {
    Values(Vec<Value>),
    Data { data: String, fields: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum RangeDecl {
    Pixels(f64, f64),
    /// The committed 10-color palette.
    Category,
    Colors(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleDecl {
    pub name: String,
    pub kind: ScaleKind,
    pub domain: DomainDecl,
    pub range: RangeDecl,
    /// Band/point only.
    pub padding_inner: f64,
    /// Band/point only.
    pub padding_outer: f64,
    /// Linear only: extend the data-driven domain to include zero.
    pub zero: bool,
}

impl ScaleDecl {
    pub const BAND_PADDING_INNER: f64 = 0.1;
    pub const BAND_PADDING_OUTER: f64 = 0.05;
    pub const POINT_PADDING_OUTER: f64 = 0.5;

    pub fn new(name: impl Into<String>, kind: ScaleKind, domain: DomainDecl, range: RangeDecl) -> Self {
        let (padding_inner, padding_outer) = match kind {
            ScaleKind::Band => (Self::BAND_PADDING_INNER, Self::BAND_PADDING_OUTER),
            ScaleKind::Point => (1.0, Self::POINT_PADDING_OUTER),
            _ => (0.0, 0.0),
        };
        ScaleDecl {
            name: name.into(),
            kind,
            domain,
            range,
            padding_inner,
            padding_outer,
            zero: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkKind {
    Rect,
    Symbol,
    Line,
    Arc,
    Path,
    Text,
}

impl MarkKind {
    pub fn name(self) -> &'static str {
        match self {
            MarkKind::Rect => "rect",
            MarkKind::Symbol => "symbol",
            MarkKind::Line => "line",
            MarkKind::Arc => "arc",
            MarkKind::Path => "path",
            MarkKind::Text => "text",
        }
    }

    pub fn parse(s: &str) -> Option<MarkKind> {
        Some(match s {
            "rect" => MarkKind::Rect,
            "symbol" => MarkKind::Symbol,
            "line" => MarkKind::Line,
            "arc" => MarkKind::Arc,
            "path" => MarkKind::Path,
            "text" => MarkKind::Text,
            _ => return None,
        })
    }

    /// Encoding channels accepted by this mark kind.
    pub fn channels(self) -> &'static [&'static str] {
        match self {
            MarkKind::Rect => &["x", "x2", "width", "y", "y2", "height", "fill"],
            MarkKind::Symbol => &["x", "y", "size", "fill"],
            MarkKind::Line | MarkKind::Path => &["x", "y", "x2", "y2", "stroke"],
            MarkKind::Arc => &[
                "x",
                "y",
                "startAngle",
                "endAngle",
                "innerRadius",
                "outerRadius",
                "fill",
            ],
            MarkKind::Text => &["x", "y", "width", "height", "text", "fill"],
        }
    }
}

/// A single channel encoding: `scale(field | value) + band * bandwidth + offset`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelDecl {
    pub scale: Option<String>,
    pub field: Option<String>,
    pub value: Option<Value>,
    pub band: Option<f64>,
    pub offset: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkDecl {
    pub kind: MarkKind,
    pub name: Option<String>,
    pub from: String,
    pub encode: BTreeMap<String, ChannelDecl>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArMode {
    Extend,
    Composite,
    SmallMultiple,
    MultipleView,
}

impl ArMode {
    pub fn name(self) -> &'static str {
        match self {
            ArMode::Extend => "extend",
            ArMode::Composite => "composite",
            ArMode::SmallMultiple => "smallMultiple",
            ArMode::MultipleView => "multipleView",
        }
    }

    pub fn parse(s: &str) -> Option<ArMode> {
        Some(match s {
            "extend" => ArMode::Extend,
            "composite" => ArMode::Composite,
            "smallMultiple" => ArMode::SmallMultiple,
            "multipleView" => ArMode::MultipleView,
            _ => return None,
        })
    }

    pub fn needs_nested(self) -> bool {
        matches!(self, ArMode::Composite | ArMode::MultipleView)
    }
}

/// The augmentation block: what the virtual layer shows and where.
#[derive(Debug, Clone, PartialEq)]
pub struct ArBlock {
    pub mode: ArMode,
    pub appends: Vec<AppendDecl>,
    pub nested: Option<Box<Spec>>,
    pub placement: Placement,
    pub anchor: AnchorConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppendDecl {
    pub dataset: String,
    pub source: AppendSource,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AppendSource {
    Values(Vec<Row>),
    Placeholder(PlaceholderSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Categorical,
    Quantitative,
    Temporal,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Categorical => "categorical",
            FieldKind::Quantitative => "quantitative",
            FieldKind::Temporal => "temporal",
        }
    }
}

/// `[start, end, stepSeconds]` of a temporal placeholder column.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalSpan {
    pub start: String,
    pub end: String,
    pub step_seconds: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaceholderField {
    pub name: String,
    pub kind: FieldKind,
    pub pattern: Option<String>,
    pub range: Option<(f64, f64)>,
    pub span: Option<TemporalSpan>,
    pub options: Option<Vec<Value>>,
}

/// Mock data generated from wildcard patterns, ranges and option lists.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaceholderSpec {
    pub count: u64,
    pub fields: Vec<PlaceholderField>,
    pub seed: u64,
}

impl PlaceholderSpec {
    pub const DEFAULT_SEED: u64 = 1;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Right,
    Left,
    Top,
    Bottom,
    Overlay,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Right => "right",
            Direction::Left => "left",
            Direction::Top => "top",
            Direction::Bottom => "bottom",
            Direction::Overlay => "overlay",
        }
    }

    pub fn parse(s: &str) -> Option<Direction> {
        Some(match s {
            "right" => Direction::Right,
            "left" => Direction::Left,
            "top" => Direction::Top,
            "bottom" => Direction::Bottom,
            "overlay" => Direction::Overlay,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub direction: Direction,
    pub dx: f64,
    pub dy: f64,
    pub gap: f64,
    pub width_hint: Option<f64>,
    pub height_hint: Option<f64>,
}

impl Placement {
    pub const DEFAULT_GAP: f64 = 20.0;

    /// Integrated modes overlay the static canvas; separate modes sit to its right.
    pub fn default_for(mode: ArMode) -> Placement {
        let direction = match mode {
            ArMode::Extend | ArMode::Composite => Direction::Overlay,
            ArMode::SmallMultiple | ArMode::MultipleView => Direction::Right,
        };
        Placement {
            direction,
            dx: 0.0,
            dy: 0.0,
            gap: Self::DEFAULT_GAP,
            width_hint: None,
            height_hint: None,
        }
    }
}

/// Position and size of the square box reserved for the anchor tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorConfig {
    pub x: f64,
    pub y: f64,
    pub size: f64,
}

impl AnchorConfig {
    pub const DEFAULT_SIZE: f64 = 48.0;
    pub const DEFAULT_MARGIN: f64 = 8.0;

    /// Bottom-right corner of the canvas.
    pub fn default_for(width: u32, height: u32) -> AnchorConfig {
        let size = Self::DEFAULT_SIZE;
        AnchorConfig {
            x: (width as f64 - size - Self::DEFAULT_MARGIN).max(0.0),
            y: (height as f64 - size - Self::DEFAULT_MARGIN).max(0.0),
            size,
        }
    }

    pub fn rect(&self) -> Rect {
        Rect::new(self.x, self.y, self.size, self.size)
    }
}
