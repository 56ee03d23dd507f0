//! Condensation of every non-target type once the targets are chosen.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::type_budget;
use crate::error::{Error, Result};
use crate::father::{select_father, Importance};
use crate::graph::HeteroGraph;
use crate::hierarchy::{Role, TypeHierarchy};
use crate::leaf::{synthesize_leaf, HyperNode, MergeEvent};
use crate::metapath::{compose_with, enumerate_metapaths, Normalization};
use crate::sparse::ProductOptions;

#[derive(Debug, Clone)]
pub struct OtherTypesConfig {
    pub ratio: f64,
    pub max_hops: usize,
    pub importance: Importance,
    pub product: ProductOptions,
}

/// What happened to one node type.
#[derive(Debug, Clone, Serialize)]
pub struct TypeOutcome {
    #[serde(rename = "type")]
    pub ty: String,
    pub role: Role,
    pub original: usize,
    pub budget: usize,
    pub condensed: usize,
    /// Set when a leaf type had fewer non-empty groups than its budget.
    pub capped_by_groups: bool,
    pub anchor_type: Option<String>,
    pub paths: Vec<String>,
    pub top_influence: Vec<(usize, f64)>,
    pub merges: Vec<MergeEvent>,
    pub warning: Option<String>,
}

#[derive(Debug, Clone)]
pub struct OtherTypesPlan {
    /// Kept ids (ascending) of every father type and of leaf types kept
    /// as they are.
    pub kept: BTreeMap<String, Vec<usize>>,
    pub hyper: Vec<HyperNode>,
    pub outcomes: Vec<TypeOutcome>,
}

/// Selects father-type nodes root-outward, then synthesizes hyper-nodes for
/// every leaf type. A type whose budget covers all its nodes is kept whole.
pub fn condense_other_types(
    graph: &HeteroGraph,
    hierarchy: &TypeHierarchy,
    kept_targets: &[usize],
    cfg: &OtherTypesConfig,
) -> Result<OtherTypesPlan> {
    if kept_targets.is_empty() {
        return Err(Error::contract("no target nodes were kept"));
    }
    let mut kept: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut sorted_targets = kept_targets.to_vec();
    sorted_targets.sort_unstable();
    kept.insert(graph.target_type.clone(), sorted_targets);
    let mut anchors_in_order = vec![graph.target_type.clone()];
    let mut outcomes = Vec::new();

    for ty in hierarchy.fathers() {
        let n = graph.node_count(&ty).unwrap_or(0);
        let budget = type_budget(cfg.ratio, n);
        let mut outcome = TypeOutcome {
            ty: ty.clone(),
            role: Role::Father,
            original: n,
            budget,
            condensed: budget,
            capped_by_groups: false,
            anchor_type: None,
            paths: Vec::new(),
            top_influence: Vec::new(),
            merges: Vec::new(),
            warning: None,
        };
        if budget >= n {
            kept.insert(ty.clone(), (0..n).collect());
        } else {
            // nearest already condensed type reachable within the hop bound
            let mut paths = Vec::new();
            for anchor in &anchors_in_order {
                let found: Vec<_> = enumerate_metapaths(graph, anchor, cfg.max_hops)?
                    .into_iter()
                    .filter(|p| p.src_type() == ty)
                    .collect();
                if !found.is_empty() {
                    paths = found;
                    break;
                }
            }
            let composed = paths
                .par_iter()
                .map(|p| compose_with(graph, p, Normalization::None, &cfg.product))
                .collect::<Result<Vec<_>>>()?;
            let anchor_kept = composed
                .first()
                .map_or(&[][..], |p| kept[p.metapath.dst_type()].as_slice());
            let importance = if composed.is_empty() {
                outcome.warning = Some(format!(
                    "no meta-path of at most {} hops reaches {ty}; ranked by degree",
                    cfg.max_hops
                ));
                Importance::Degree
            } else {
                cfg.importance
            };
            let sel = select_father(graph, &ty, &composed, anchor_kept, budget, &importance)?;
            outcome.anchor_type = (!composed.is_empty()).then(|| sel.anchor_type.clone());
            outcome.paths = sel.paths.clone();
            outcome.top_influence = sel.top(10);
            let mut ids = sel.ranked;
            ids.sort_unstable();
            kept.insert(ty.clone(), ids);
        }
        anchors_in_order.push(ty);
        outcomes.push(outcome);
    }

    let leaves = hierarchy.leaves();
    let results: Vec<Result<(String, usize, usize, Option<_>)>> = leaves
        .par_iter()
        .map(|ty| {
            let n = graph.node_count(ty).unwrap_or(0);
            let budget = type_budget(cfg.ratio, n);
            if budget >= n {
                return Ok((ty.clone(), n, budget, None));
            }
            let syn = synthesize_leaf(graph, hierarchy, ty, &kept, budget.max(1))?;
            Ok((ty.clone(), n, budget, Some(syn)))
        })
        .collect();
    let mut hyper = Vec::new();
    for r in results {
        let (ty, n, budget, syn) = r?;
        let mut outcome = TypeOutcome {
            ty: ty.clone(),
            role: Role::Leaf,
            original: n,
            budget,
            condensed: budget,
            capped_by_groups: false,
            anchor_type: None,
            paths: Vec::new(),
            top_influence: Vec::new(),
            merges: Vec::new(),
            warning: None,
        };
        match syn {
            None => {
                kept.insert(ty, (0..n).collect());
            }
            Some(syn) if syn.hyper.is_empty() => {
                outcome.condensed = 0;
                outcome.capped_by_groups = true;
                outcome.warning = syn.warning;
                kept.insert(ty, Vec::new());
            }
            Some(syn) => {
                outcome.condensed = syn.hyper.len();
                outcome.capped_by_groups = syn.hyper.len() < budget;
                outcome.merges = syn.merges;
                outcome.warning = syn.warning;
                hyper.extend(syn.hyper);
            }
        }
        outcomes.push(outcome);
    }
    kept.remove(&graph.target_type);

    Ok(OtherTypesPlan {
        kept,
        hyper,
        outcomes,
    })
}
