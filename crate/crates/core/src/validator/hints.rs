//! Designer-facing fix messages, one per transform kind.

use serde::Serialize;

use crate::spec::{TransformDecl, TransformKind, TreeMethod};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hint {
    pub id: &'static str,
    pub text: &'static str,
}

pub const HINTS: &[Hint] = &[
    Hint {
        id: "filter",
        text: "the filter predicate selects different existing rows once data is appended; make it depend on each row only",
    },
    Hint {
        id: "formula",
        text: "the formula gives existing rows new values once data is appended; compute it from each row only",
    },
    Hint {
        id: "aggregate",
        text: "appended rows fall into existing groups and change their aggregates; append only rows with new group keys",
    },
    Hint {
        id: "sort",
        text: "sorting changed the values of existing rows; sort after the transforms that derive them",
    },
    Hint {
        id: "stack",
        text: "appended rows change the stacking offsets of existing rows; stack them on top of existing groups or in new groups",
    },
    Hint {
        id: "pie",
        text: "avoid 'pie' when new data is appended: every existing angle depends on the total",
    },
    Hint {
        id: "bin",
        text: "the bin extent follows the data; set an explicit 'extent' that also covers the appended values",
    },
    Hint {
        id: "hierarchy",
        text: "appended nodes change the depth or child count of existing nodes; attach them as new leaves only",
    },
    Hint {
        id: "treelayout.cluster",
        text: "'cluster' aligns all leaves at the deepest level, so deeper new nodes move existing ones; switch the method from 'cluster' to 'tidy'",
    },
    Hint {
        id: "treelayout.tidy",
        text: "appended nodes shift the positions of existing nodes; add new nodes after the existing siblings",
    },
    Hint {
        id: "treemap",
        text: "avoid 'treemap' when new nodes are added to the internal nodes",
    },
];

pub fn hint(id: &str) -> Option<&'static Hint> {
    HINTS.iter().find(|h| h.id == id)
}

/// Hint id for a transform; tree layouts are keyed by method.
pub fn hint_id(t: &TransformDecl) -> &'static str {
    match t {
        TransformDecl::TreeLayout {
            method: TreeMethod::Cluster,
            ..
        } => "treelayout.cluster",
        TransformDecl::TreeLayout { .. } => "treelayout.tidy",
        other => other.kind().name(),
    }
}

pub fn hint_for(t: &TransformDecl) -> &'static Hint {
    hint(hint_id(t)).expect("hint table covers every transform")
}

/// Hint ids a transform kind can produce.
pub fn ids_for_kind(kind: TransformKind) -> &'static [&'static str] {
    match kind {
        TransformKind::TreeLayout => &["treelayout.cluster", "treelayout.tidy"],
        TransformKind::Filter => &["filter"],
        TransformKind::Formula => &["formula"],
        TransformKind::Aggregate => &["aggregate"],
        TransformKind::Sort => &["sort"],
        TransformKind::Stack => &["stack"],
        TransformKind::Pie => &["pie"],
        TransformKind::Bin => &["bin"],
        TransformKind::Hierarchy => &["hierarchy"],
        TransformKind::Treemap => &["treemap"],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_has_a_hint() {
        for kind in TransformKind::ALL {
            for id in ids_for_kind(kind) {
                assert!(hint(id).is_some(), "{id}");
            }
        }
    }
}
