use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Aadd, CondIndex, Condition, Context, Leaf, Node};

/// One vertex of a serialized diagram. Ids are assigned depth-first from
/// the root, `hi` before `lo`, so equal diagrams dump identically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum NodeRecord {
    Leaf { id: usize, value: Leaf },
    Branch { id: usize, cond: CondIndex, hi: usize, lo: usize },
}

/// Flat, serializable view of a diagram and the conditions it refers to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramDump {
    pub root: usize,
    pub nodes: Vec<NodeRecord>,
    pub conditions: Vec<(CondIndex, Condition)>,
}

impl DiagramDump {
    pub fn new(x: &Aadd, ctx: &Context) -> Self {
        let mut ids = HashMap::new();
        let mut nodes = Vec::new();
        let root = number(x, &mut ids, &mut nodes);
        let mut used: Vec<CondIndex> = nodes
            .iter()
            .filter_map(|n| match n {
                NodeRecord::Branch { cond, .. } => Some(*cond),
                NodeRecord::Leaf { .. } => None,
            })
            .collect();
        used.sort_unstable();
        used.dedup();
        let conditions = used
            .into_iter()
            .filter_map(|i| ctx.conditions().get(i).map(|c| (i, c)))
            .collect();
        DiagramDump {
            root,
            nodes,
            conditions,
        }
    }

    /// Graphviz text; solid edges are `hi`, dashed edges `lo`.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph aadd {\n");
        for n in &self.nodes {
            match n {
                NodeRecord::Leaf { id, value } => {
                    let _ = writeln!(s, "  n{id} [shape=box, label=\"{value}\"];");
                }
                NodeRecord::Branch { id, cond, hi, lo } => {
                    let label = self
                        .conditions
                        .iter()
                        .find(|(i, _)| i == cond)
                        .map(|(_, c)| describe(c))
                        .unwrap_or_default();
                    let _ = writeln!(s, "  n{id} [label=\"c{cond}: {label}\"];");
                    let _ = writeln!(s, "  n{id} -> n{hi};");
                    let _ = writeln!(s, "  n{id} -> n{lo} [style=dashed];");
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

fn describe(c: &Condition) -> String {
    match c {
        Condition::FreeBool { name } => name.clone(),
        Condition::Compare { form, sense } => format!("{form} {} 0", sense.symbol()),
    }
}

fn number(x: &Aadd, ids: &mut HashMap<usize, usize>, nodes: &mut Vec<NodeRecord>) -> usize {
    if let Some(&id) = ids.get(&x.ptr()) {
        return id;
    }
    let id = nodes.len();
    ids.insert(x.ptr(), id);
    match x.node() {
        Node::Leaf(l) => nodes.push(NodeRecord::Leaf {
            id,
            value: l.clone(),
        }),
        Node::Branch { index, hi, lo, .. } => {
            // reserve the slot so ids stay in visiting order
            nodes.push(NodeRecord::Branch {
                id,
                cond: *index,
                hi: 0,
                lo: 0,
            });
            let h = number(hi, ids, nodes);
            let l = number(lo, ids, nodes);
            nodes[id] = NodeRecord::Branch {
                id,
                cond: *index,
                hi: h,
                lo: l,
            };
        }
    }
    id
}
