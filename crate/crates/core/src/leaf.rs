//! Leaf-type hyper-node synthesis.
//!
//! Each kept father node `i` collects its leaf neighbours `N_i` into one
//! hyper-node with the mean member feature and an edge to `i`. Every other
//! kept father adjacent to a member gets a reverse edge to the hyper-node,
//! so two fathers that shared a leaf stay two hops apart. While there are
//! more hyper-nodes than the budget allows, the one with the fewest father
//! edges is merged into the hyper-node it shares the most fathers with.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::HeteroGraph;
use crate::hierarchy::{Role, TypeHierarchy};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NodeRef {
    #[serde(rename = "type")]
    pub ty: String,
    pub id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperNode {
    pub leaf_type: String,
    /// Source leaf ids, ascending.
    pub members: Vec<usize>,
    /// Father nodes whose neighbourhoods formed this node.
    pub anchors: Vec<NodeRef>,
    /// Other kept fathers adjacent to some member.
    pub reverse: Vec<NodeRef>,
    /// Mean member feature, when the leaf type has features.
    pub feature: Option<Vec<f64>>,
}

impl HyperNode {
    /// A hyper-node over `members` with its mean feature and no reverse
    /// edges.
    pub fn from_members(
        graph: &HeteroGraph,
        leaf_type: &str,
        mut members: Vec<usize>,
        anchors: Vec<NodeRef>,
    ) -> Self {
        members.sort_unstable();
        members.dedup();
        let feature = graph.features.get(leaf_type).map(|f| f.mean_of(&members));
        HyperNode {
            leaf_type: leaf_type.to_string(),
            members,
            anchors,
            reverse: Vec::new(),
            feature,
        }
    }

    /// All father nodes this hyper-node is joined to.
    pub fn fathers(&self) -> impl Iterator<Item = &NodeRef> {
        self.anchors.iter().chain(&self.reverse)
    }

    pub fn degree(&self) -> usize {
        self.anchors.len() + self.reverse.len()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MergeEvent {
    /// Anchors of the absorbed hyper-node.
    pub absorbed: Vec<NodeRef>,
    /// Anchors of the receiving hyper-node before the merge.
    pub into: Vec<NodeRef>,
    pub shared_fathers: usize,
    pub members_after: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafSynthesis {
    pub leaf_type: String,
    pub budget: usize,
    /// Kept fathers with at least one leaf neighbour.
    pub groups: usize,
    pub hyper: Vec<HyperNode>,
    pub merges: Vec<MergeEvent>,
    pub warning: Option<String>,
}

struct Working {
    members: BTreeSet<usize>,
    anchors: BTreeSet<NodeRef>,
    fathers: BTreeSet<NodeRef>,
}

/// Synthesizes at most `budget` hyper-nodes for `leaf_type` from the leaf
/// neighbourhoods of the kept father nodes.
pub fn synthesize_leaf(
    graph: &HeteroGraph,
    hierarchy: &TypeHierarchy,
    leaf_type: &str,
    kept_fathers: &BTreeMap<String, Vec<usize>>,
    budget: usize,
) -> Result<LeafSynthesis> {
    if hierarchy.role(leaf_type) != Some(Role::Leaf) {
        return Err(Error::contract(format!("{leaf_type} is not a leaf type")));
    }
    if budget == 0 {
        return Err(Error::contract("leaf budget must be at least 1"));
    }
    let n_leaf = graph.node_count(leaf_type).unwrap_or(0);

    // kept father -> leaf neighbours, leaf -> kept fathers
    let mut father_leaves: BTreeMap<NodeRef, BTreeSet<usize>> = BTreeMap::new();
    let mut leaf_fathers: Vec<BTreeSet<NodeRef>> = vec![BTreeSet::new(); n_leaf];
    for father_type in hierarchy.fathers() {
        let Some(kept) = kept_fathers.get(&father_type) else {
            continue;
        };
        let mut is_kept = vec![false; graph.node_count(&father_type).unwrap_or(0)];
        for &i in kept {
            is_kept[i] = true;
        }
        for rel in &graph.relations {
            let edges: Box<dyn Iterator<Item = (usize, usize)>> =
                if rel.src_type == father_type && rel.dst_type == leaf_type {
                    Box::new(rel.adjacency.pairs())
                } else if rel.src_type == leaf_type && rel.dst_type == father_type {
                    Box::new(rel.adjacency.pairs().map(|(l, f)| (f, l)))
                } else {
                    continue;
                };
            for (f, l) in edges.filter(|&(f, _)| is_kept[f]) {
                let r = NodeRef {
                    ty: father_type.clone(),
                    id: f,
                };
                father_leaves.entry(r.clone()).or_default().insert(l);
                leaf_fathers[l].insert(r);
            }
        }
    }

    // one group per kept father, in hierarchy then kept order
    let mut slots: Vec<Option<Working>> = Vec::new();
    for father_type in hierarchy.fathers() {
        for &i in kept_fathers
            .get(&father_type)
            .map_or(&[][..], Vec::as_slice)
        {
            let anchor = NodeRef {
                ty: father_type.clone(),
                id: i,
            };
            let Some(members) = father_leaves.get(&anchor) else {
                continue;
            };
            let fathers = members
                .iter()
                .flat_map(|&l| leaf_fathers[l].iter().cloned())
                .collect();
            slots.push(Some(Working {
                members: members.clone(),
                anchors: BTreeSet::from([anchor]),
                fathers,
            }));
        }
    }
    let groups = slots.len();
    let warning = (groups == 0).then(|| format!("no kept father node touches {leaf_type}"));

    let mut by_father: BTreeMap<NodeRef, BTreeSet<usize>> = BTreeMap::new();
    for (k, w) in slots.iter().enumerate() {
        for f in &w.as_ref().unwrap().fathers {
            by_father.entry(f.clone()).or_default().insert(k);
        }
    }
    // (degree, members, slot) of every live slot
    let mut lowest: BTreeSet<(usize, usize, usize)> = slots
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let w = w.as_ref().unwrap();
            (w.fathers.len(), w.members.len(), k)
        })
        .collect();

    let mut merges = Vec::new();
    while lowest.len() > budget {
        let (_, _, a) = lowest.pop_first().unwrap();
        let wa = slots[a].take().unwrap();
        for f in &wa.fathers {
            by_father.get_mut(f).unwrap().remove(&a);
        }

        let mut shared: BTreeMap<usize, usize> = BTreeMap::new();
        for f in &wa.fathers {
            for &b in &by_father[f] {
                *shared.entry(b).or_insert(0) += 1;
            }
        }
        let union_size = |b: usize| {
            let wb = slots[b].as_ref().unwrap();
            wb.members.len()
                + wa.members
                    .iter()
                    .filter(|m| !wb.members.contains(m))
                    .count()
        };
        let partner = if shared.is_empty() {
            lowest
                .iter()
                .map(|&(_, _, b)| b)
                .min_by_key(|&b| (union_size(b), b))
        } else {
            shared
                .iter()
                .map(|(&b, &s)| (b, s))
                .max_by(|&(b1, s1), &(b2, s2)| {
                    s1.cmp(&s2)
                        .then(union_size(b2).cmp(&union_size(b1)))
                        .then(b2.cmp(&b1))
                })
                .map(|(b, _)| b)
        }
        .expect("more live hyper-nodes than the budget");

        let wb = slots[partner].as_mut().unwrap();
        lowest.remove(&(wb.fathers.len(), wb.members.len(), partner));
        merges.push(MergeEvent {
            absorbed: wa.anchors.iter().cloned().collect(),
            into: wb.anchors.iter().cloned().collect(),
            shared_fathers: shared.get(&partner).copied().unwrap_or(0),
            members_after: 0,
        });
        wb.members.extend(wa.members);
        wb.anchors.extend(wa.anchors);
        for f in wa.fathers {
            by_father.get_mut(&f).unwrap().insert(partner);
            wb.fathers.insert(f);
        }
        merges.last_mut().unwrap().members_after = wb.members.len();
        lowest.insert((wb.fathers.len(), wb.members.len(), partner));
    }

    let hyper = slots
        .into_iter()
        .flatten()
        .map(|w| {
            let mut h = HyperNode::from_members(
                graph,
                leaf_type,
                w.members.into_iter().collect(),
                w.anchors.iter().cloned().collect(),
            );
            h.reverse = w.fathers.difference(&w.anchors).cloned().collect();
            h
        })
        .collect();

    Ok(LeafSynthesis {
        leaf_type: leaf_type.to_string(),
        budget,
        groups,
        hyper,
        merges,
        warning,
    })
}
