//! Hierarchy construction plus the tidy/cluster node-link layout and the
//! slice-dice treemap. Children are ordered by input row order; roots are
//! rows whose parent is null.

use std::collections::HashMap;

use super::{DataRow, DataTable, DataflowError};
use crate::spec::{TransformDecl, TreeMethod};
use crate::value::Value;

struct Tree {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    roots: Vec<usize>,
    depth: Vec<usize>,
}

fn node_key(v: &Value) -> Vec<u8> {
    let mut b = Vec::new();
    // numbers and timestamps with equal value name the same node
    match v.as_f64() {
        Some(n) => Value::Number(n).key_bytes(&mut b),
        None => v.key_bytes(&mut b),
    }
    b
}

fn build(rows: &[DataRow], id_field: &str, parent_field: &str) -> Result<Tree, DataflowError> {
    let mut index: HashMap<Vec<u8>, usize> = HashMap::new();
    for (i, r) in rows.iter().enumerate() {
        let id = r.get(id_field);
        if index.insert(node_key(id), i).is_some() {
            return Err(DataflowError::DuplicateNodeId(id.to_string()));
        }
    }
    let n = rows.len();
    let mut parent = vec![None; n];
    let mut children = vec![Vec::new(); n];
    let mut roots = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let p = r.get(parent_field);
        if p.is_null() {
            roots.push(i);
            continue;
        }
        let Some(&pi) = index.get(&node_key(p)) else {
            return Err(DataflowError::UnknownParent {
                node: r.get(id_field).to_string(),
                parent: p.to_string(),
            });
        };
        parent[i] = Some(pi);
        children[pi].push(i);
    }
    // every node must reach a root; anything left over sits on a cycle
    let mut depth = vec![usize::MAX; n];
    let mut stack: Vec<(usize, usize)> = roots.iter().rev().map(|&r| (r, 0)).collect();
    while let Some((node, d)) = stack.pop() {
        depth[node] = d;
        for &c in children[node].iter().rev() {
            stack.push((c, d + 1));
        }
    }
    if let Some(i) = depth.iter().position(|&d| d == usize::MAX) {
        return Err(DataflowError::CyclicHierarchy(rows[i].get(id_field).to_string()));
    }
    Ok(Tree {
        parent,
        children,
        roots,
        depth,
    })
}

pub(super) fn apply_layout(t: &TransformDecl, input: &DataTable) -> Result<Vec<DataRow>, DataflowError> {
    let mut rows = input.rows.clone();
    match t {
        TransformDecl::Hierarchy {
            id_field,
            parent_field,
        } => {
            let tree = build(&rows, id_field, parent_field)?;
            for (i, r) in rows.iter_mut().enumerate() {
                r.cells.insert("depth".into(), Value::Number(tree.depth[i] as f64));
                r.cells
                    .insert("childCount".into(), Value::Number(tree.children[i].len() as f64));
            }
        }
        TransformDecl::TreeLayout {
            method,
            id_field,
            parent_field,
            size,
            level_gap,
            leaf_step,
        } => {
            let tree = build(&rows, id_field, parent_field)?;
            let xs = node_x(&tree, *leaf_step);
            let max_depth = tree.depth.iter().copied().max().unwrap_or(0);
            let y = |i: usize| match method {
                TreeMethod::Tidy => tree.depth[i] as f64 * level_gap,
                TreeMethod::Cluster if max_depth == 0 => 0.0,
                TreeMethod::Cluster => tree.depth[i] as f64 / max_depth as f64 * size.1,
            };
            for i in 0..rows.len() {
                let p = tree.parent[i].unwrap_or(i);
                let cells = &mut rows[i].cells;
                cells.insert("x".into(), Value::Number(xs[i]));
                cells.insert("y".into(), Value::Number(y(i)));
                cells.insert("parentX".into(), Value::Number(xs[p]));
                cells.insert("parentY".into(), Value::Number(y(p)));
            }
        }
        TransformDecl::Treemap {
            field,
            id_field,
            parent_field,
            size,
        } => {
            let tree = build(&rows, id_field, parent_field)?;
            let own: Vec<f64> = rows
                .iter()
                .map(|r| r.get(field).as_f64().filter(|v| *v > 0.0).unwrap_or(0.0))
                .collect();
            let rects = slice_dice(&tree, &own, *size);
            for (r, [x0, y0, x1, y1]) in rows.iter_mut().zip(rects) {
                r.cells.insert("x0".into(), Value::Number(x0));
                r.cells.insert("y0".into(), Value::Number(y0));
                r.cells.insert("x1".into(), Value::Number(x1));
                r.cells.insert("y1".into(), Value::Number(y1));
            }
        }
        _ => unreachable!("not a layout transform"),
    }
    Ok(rows)
}

/// Depth-first pre-order over the forest.
fn preorder(tree: &Tree) -> Vec<usize> {
    let mut order = Vec::with_capacity(tree.parent.len());
    let mut stack: Vec<usize> = tree.roots.iter().rev().copied().collect();
    while let Some(node) = stack.pop() {
        order.push(node);
        stack.extend(tree.children[node].iter().rev());
    }
    order
}

/// Leaves sit at `leafIndex * leafStep` in depth-first order; an internal
/// node sits at the mean of its children.
fn node_x(tree: &Tree, leaf_step: f64) -> Vec<f64> {
    let order = preorder(tree);
    let mut x = vec![0.0; order.len()];
    let mut leaf = 0usize;
    for &node in &order {
        if tree.children[node].is_empty() {
            x[node] = leaf as f64 * leaf_step;
            leaf += 1;
        }
    }
    for &node in order.iter().rev() {
        let kids = &tree.children[node];
        if !kids.is_empty() {
            x[node] = kids.iter().map(|&c| x[c]).sum::<f64>() / kids.len() as f64;
        }
    }
    x
}

/// Alternating-axis slice-dice: nodes at even depth split their parent along
/// x, odd depth along y. Internal nodes weigh the sum of their children.
fn slice_dice(tree: &Tree, own: &[f64], size: (f64, f64)) -> Vec<[f64; 4]> {
    let order = preorder(tree);
    let mut weight = own.to_vec();
    for &node in order.iter().rev() {
        let kids = &tree.children[node];
        if !kids.is_empty() {
            weight[node] = kids.iter().map(|&c| weight[c]).sum();
        }
    }
    let mut rects = vec![[0.0; 4]; own.len()];
    let split = |nodes: &[usize], area: [f64; 4], depth: usize, rects: &mut Vec<[f64; 4]>| {
        let total: f64 = nodes.iter().map(|&n| weight[n]).sum();
        let along_x = depth % 2 == 0;
        let (start, extent) = if along_x {
            (area[0], area[2] - area[0])
        } else {
            (area[1], area[3] - area[1])
        };
        let mut acc = 0.0;
        for &n in nodes {
            let a = if total > 0.0 { start + extent * acc / total } else { start };
            acc += weight[n];
            let b = if total > 0.0 { start + extent * acc / total } else { start };
            rects[n] = if along_x {
                [a, area[1], b, area[3]]
            } else {
                [area[0], a, area[2], b]
            };
        }
    };
    split(&tree.roots, [0.0, 0.0, size.0, size.1], 0, &mut rects);
    for &node in &order {
        let kids = &tree.children[node];
        if !kids.is_empty() {
            split(kids, rects[node], tree.depth[node] + 1, &mut rects);
        }
    }
    rects
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::{apply_transform, ingest, SourceTag};
    use crate::spec::DatasetDecl;
    use crate::value::Row;

    fn tree_table(nodes: &[(&str, Option<&str>, f64)]) -> DataTable {
        let values = nodes
            .iter()
            .map(|(id, parent, v)| {
                let mut r = Row::new();
                r.insert("id".into(), Value::from(*id));
                r.insert("parent".into(), parent.map(Value::from).unwrap_or(Value::Null));
                r.insert("v".into(), Value::Number(*v));
                r
            })
            .collect();
        let decl = DatasetDecl::new("tree", values);
        ingest(&decl, &decl.values, SourceTag::Base).unwrap()
    }

    fn layout(method: TreeMethod) -> TransformDecl {
        TransformDecl::TreeLayout {
            method,
            id_field: "id".into(),
            parent_field: "parent".into(),
            size: (200.0, 100.0),
            level_gap: 40.0,
            leaf_step: 24.0,
        }
    }

    fn col(t: &DataTable, f: &str) -> Vec<f64> {
        t.rows.iter().map(|r| r.get(f).as_f64().unwrap()).collect()
    }

    #[test]
    fn hierarchy_depth_and_child_count() {
        let t = tree_table(&[("r", None, 0.0), ("a", Some("r"), 1.0), ("b", Some("r"), 1.0), ("a1", Some("a"), 1.0)]);
        let out = apply_transform(
            &TransformDecl::Hierarchy {
                id_field: "id".into(),
                parent_field: "parent".into(),
            },
            &t,
        )
        .unwrap();
        assert_eq!(col(&out, "depth"), vec![0.0, 1.0, 1.0, 2.0]);
        assert_eq!(col(&out, "childCount"), vec![2.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn tidy_places_leaves_on_fixed_steps() {
        let t = tree_table(&[("r", None, 0.0), ("a", Some("r"), 1.0), ("b", Some("r"), 1.0), ("a1", Some("a"), 1.0)]);
        let out = apply_transform(&layout(TreeMethod::Tidy), &t).unwrap();
        // leaves in DFS order: a1 (0), b (1)
        assert_eq!(col(&out, "x"), vec![12.0, 0.0, 24.0, 0.0]);
        assert_eq!(col(&out, "y"), vec![0.0, 40.0, 40.0, 80.0]);
        assert_eq!(col(&out, "parentX"), vec![12.0, 12.0, 12.0, 0.0]);
        assert_eq!(col(&out, "parentY"), vec![0.0, 0.0, 0.0, 40.0]);
    }

    #[test]
    fn cluster_scales_depth_by_tree_height() {
        let t = tree_table(&[("r", None, 0.0), ("a", Some("r"), 1.0), ("a1", Some("a"), 1.0)]);
        let out = apply_transform(&layout(TreeMethod::Cluster), &t).unwrap();
        assert_eq!(col(&out, "y"), vec![0.0, 50.0, 100.0]);
    }

    #[test]
    fn slice_dice_alternates_axes() {
        let t = tree_table(&[("r", None, 0.0), ("a", Some("r"), 0.0), ("b", Some("r"), 2.0), ("a1", Some("a"), 1.0), ("a2", Some("a"), 1.0)]);
        let out = apply_transform(
            &TransformDecl::Treemap {
                field: "v".into(),
                id_field: "id".into(),
                parent_field: "parent".into(),
                size: (100.0, 50.0),
            },
            &t,
        )
        .unwrap();
        let rect = |i: usize| -> Vec<f64> { ["x0", "y0", "x1", "y1"].iter().map(|f| out.rows[i].get(f).as_f64().unwrap()).collect() };
        assert_eq!(rect(0), vec![0.0, 0.0, 100.0, 50.0]);
        // children of the root split along y
        assert_eq!(rect(1), vec![0.0, 0.0, 100.0, 25.0]);
        assert_eq!(rect(2), vec![0.0, 25.0, 100.0, 50.0]);
        // grandchildren split along x
        assert_eq!(rect(3), vec![0.0, 0.0, 50.0, 25.0]);
        assert_eq!(rect(4), vec![50.0, 0.0, 100.0, 25.0]);
    }

    #[test]
    fn cycles_and_duplicates_are_errors() {
        let cyc = tree_table(&[("a", Some("b"), 0.0), ("b", Some("a"), 0.0)]);
        assert!(matches!(
            apply_transform(&layout(TreeMethod::Tidy), &cyc),
            Err(DataflowError::CyclicHierarchy(_))
        ));
        let dup = tree_table(&[("a", None, 0.0), ("a", None, 0.0)]);
        assert_eq!(
            apply_transform(&layout(TreeMethod::Tidy), &dup),
            Err(DataflowError::DuplicateNodeId("a".into()))
        );
        let orphan = tree_table(&[("a", Some("zz"), 0.0)]);
        assert!(matches!(
            apply_transform(&layout(TreeMethod::Tidy), &orphan),
            Err(DataflowError::UnknownParent { .. })
        ));
    }
}
