//! Materializes a condensed graph from per-type kept nodes and synthesized
//! hyper-nodes.
//!
//! Every node of the output stands for a set of source nodes: a kept node
//! for itself, a hyper-node for its members. Two output nodes are joined
//! under a relation iff some pair of their source nodes is. For kept nodes
//! this is the induced subgraph; for a hyper-node it yields an edge to every
//! kept neighbour of any member, which is exactly the anchor edge plus the
//! reverse edges of the leaf synthesis.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{FeatureMatrix, HeteroGraph, NodeType, Origin, Provenance, Relation, Splits};
use crate::leaf::HyperNode;
use crate::sparse::SparseAdjacency;

/// Builds the condensed graph. `kept[ty]` lists source ids in output order;
/// types synthesized from hyper-nodes must not appear in `kept`.
pub fn induce_subgraph(
    graph: &HeteroGraph,
    kept: &BTreeMap<String, Vec<usize>>,
    hyper: &[HyperNode],
) -> Result<HeteroGraph> {
    let mut hyper_by_type: BTreeMap<&str, Vec<&HyperNode>> = BTreeMap::new();
    for h in hyper {
        hyper_by_type
            .entry(h.leaf_type.as_str())
            .or_default()
            .push(h);
    }

    let mut origins: Provenance = BTreeMap::new();
    for t in &graph.node_types {
        let name = t.name.as_str();
        let list: Vec<Origin> = match (kept.get(name), hyper_by_type.get(name)) {
            (Some(_), Some(_)) => {
                return Err(Error::contract(format!(
                    "type {name} has both kept nodes and hyper-nodes"
                )))
            }
            (None, None) => {
                return Err(Error::contract(format!(
                    "type {name} is neither kept nor synthesized"
                )))
            }
            (Some(ids), None) => {
                let mut seen = BTreeSet::new();
                for &id in ids {
                    if id >= t.count || !seen.insert(id) {
                        return Err(Error::contract(format!(
                            "kept id {id} of type {name} is out of range or repeated"
                        )));
                    }
                }
                ids.iter().copied().map(Origin::Kept).collect()
            }
            (None, Some(hs)) => {
                if name == graph.target_type {
                    return Err(Error::contract("the target type cannot be synthesized"));
                }
                for h in hs {
                    if h.members.is_empty() || h.members.iter().any(|&m| m >= t.count) {
                        return Err(Error::contract(format!(
                            "hyper-node of type {name} has empty or out-of-range members"
                        )));
                    }
                }
                hs.iter()
                    .map(|h| Origin::Hyper(h.members.clone()))
                    .collect()
            }
        };
        origins.insert(t.name.clone(), list);
    }
    for ty in kept
        .keys()
        .map(String::as_str)
        .chain(hyper_by_type.keys().copied())
    {
        if !graph.has_type(ty) {
            return Err(Error::contract(format!("unknown node type {ty}")));
        }
    }

    let node_types: Vec<NodeType> = graph
        .node_types
        .iter()
        .map(|t| NodeType {
            name: t.name.clone(),
            count: origins[&t.name].len(),
        })
        .collect();

    // source id -> output ids, per type
    let inverse: BTreeMap<&str, Vec<Vec<u32>>> = graph
        .node_types
        .iter()
        .map(|t| {
            let mut inv = vec![Vec::new(); t.count];
            for (new_id, origin) in origins[&t.name].iter().enumerate() {
                for &m in origin.members() {
                    inv[m].push(new_id as u32);
                }
            }
            (t.name.as_str(), inv)
        })
        .collect();

    let mut relations = Vec::with_capacity(graph.relations.len());
    for rel in &graph.relations {
        let src = &origins[&rel.src_type];
        let dst_inv = &inverse[rel.dst_type.as_str()];
        let mut pairs = Vec::new();
        let mut row: Vec<u32> = Vec::new();
        for (u, origin) in src.iter().enumerate() {
            for &a in origin.members() {
                for &b in rel.adjacency.row(a) {
                    row.extend_from_slice(&dst_inv[b as usize]);
                }
            }
            row.sort_unstable();
            row.dedup();
            pairs.extend(row.drain(..).map(|v| (u, v as usize)));
        }
        relations.push(Relation {
            name: rel.name.clone(),
            src_type: rel.src_type.clone(),
            dst_type: rel.dst_type.clone(),
            adjacency: SparseAdjacency::from_pairs(
                src.len(),
                origins[&rel.dst_type].len(),
                &pairs,
            )?,
        });
    }

    let mut features = BTreeMap::new();
    for (ty, feats) in &graph.features {
        let hs = hyper_by_type.get(ty.as_str());
        let mut data = Vec::new();
        for (k, origin) in origins[ty].iter().enumerate() {
            match origin {
                Origin::Kept(id) => data.extend_from_slice(feats.row(*id)),
                Origin::Hyper(members) => match hs.and_then(|hs| hs[k].feature.as_ref()) {
                    Some(f) if f.len() == feats.n_cols() => data.extend_from_slice(f),
                    Some(_) => {
                        return Err(Error::contract(format!(
                            "hyper-node feature width differs from type {ty}"
                        )))
                    }
                    None => data.extend(feats.mean_of(members)),
                },
            }
        }
        features.insert(
            ty.clone(),
            FeatureMatrix::new(origins[ty].len(), feats.n_cols(), data)?,
        );
    }

    let target_origins = &origins[&graph.target_type];
    let labels = target_origins
        .iter()
        .map(|o| graph.labels[o.members()[0]])
        .collect();
    let target_inv = &inverse[graph.target_type.as_str()];
    let remap_split = |ids: &[usize]| -> Vec<usize> {
        ids.iter()
            .filter_map(|&v| {
                target_inv
                    .get(v)
                    .and_then(|n| n.first())
                    .map(|&n| n as usize)
            })
            .collect()
    };
    let splits = Splits {
        train: remap_split(&graph.splits.train),
        valid: remap_split(&graph.splits.valid),
        test: remap_split(&graph.splits.test),
    };

    Ok(HeteroGraph {
        node_types,
        relations,
        features,
        labels,
        splits,
        target_type: graph.target_type.clone(),
        provenance: Some(origins),
    })
}
