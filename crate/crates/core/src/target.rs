//! Target-type node selection.
//!
//! For every meta-path ending at the target type and every class, a greedy
//! run maximizes
//!
//! ```text
//! F(S) = |⋃_{v∈S} RF(v)| / |R̂|  +  Σ_{v∈S} (1 − Ĵ(v))
//! ```
//!
//! where `|R̂|` is the source-type population of the path and `Ĵ(v)` is the
//! mean Jaccard similarity between `v`'s receptive field on this path and on
//! each other path sharing the same endpoint types. A node's score on a path
//! is its marginal gain when picked (zero when not picked); scores are summed
//! over paths and the top nodes per class fill the class budgets.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::SelectionBudget;
use crate::error::{Error, Result};
use crate::graph::HeteroGraph;
use crate::greedy::{greedy_maximize, GreedyMode, GreedyTrace, Objective};
use crate::metapath::{reachable_set, ComposedAdjacency};

/// Jaccard index of two sorted id lists; two empty sets count as identical.
pub fn jaccard(a: &[u32], b: &[u32]) -> f64 {
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// `Ĵ` of `node` for each path of a group: the mean Jaccard index against
/// the other paths. A single-path group has no similarity pressure and
/// yields `[0.0]`.
pub fn metapath_jaccard(group: &[&ComposedAdjacency], node: usize) -> Result<Vec<f64>> {
    if let Some(first) = group.first() {
        let (src, dst) = (first.metapath.src_type(), first.metapath.dst_type());
        if group
            .iter()
            .any(|p| p.metapath.src_type() != src || p.metapath.dst_type() != dst)
        {
            return Err(Error::contract("Jaccard group mixes endpoint types"));
        }
    }
    let sets = group
        .iter()
        .map(|p| reachable_set(p, node))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_jaccard(&sets))
}

fn mean_jaccard(sets: &[&[u32]]) -> Vec<f64> {
    let l = sets.len();
    if l < 2 {
        return vec![0.0; l];
    }
    let mut out = vec![0.0; l];
    for i in 0..l {
        for j in i + 1..l {
            let jac = jaccard(sets[i], sets[j]);
            out[i] += jac;
            out[j] += jac;
        }
    }
    out.iter_mut().for_each(|x| *x /= (l - 1) as f64);
    out
}

/// Indices of `paths` grouped by `(src_type, dst_type)`, in first-seen order.
pub fn endpoint_groups(paths: &[ComposedAdjacency]) -> Vec<Vec<usize>> {
    let mut groups: Vec<((String, String), Vec<usize>)> = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        let key = (
            p.metapath.src_type().to_string(),
            p.metapath.dst_type().to_string(),
        );
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(i),
            None => groups.push((key, vec![i])),
        }
    }
    groups.into_iter().map(|(_, m)| m).collect()
}

/// Diversity bonus `1 − Ĵ` for every (path, row).
pub fn diversity_table(paths: &[ComposedAdjacency]) -> Vec<Vec<f64>> {
    let mut table: Vec<Vec<f64>> = paths.iter().map(|p| vec![1.0; p.matrix.n_rows()]).collect();
    for group in endpoint_groups(paths) {
        if group.len() < 2 {
            continue;
        }
        let n_rows = paths[group[0]].matrix.n_rows();
        let per_node: Vec<Vec<f64>> = (0..n_rows)
            .into_par_iter()
            .map(|v| {
                let sets: Vec<&[u32]> = group.iter().map(|&i| paths[i].matrix.row(v)).collect();
                mean_jaccard(&sets)
            })
            .collect();
        for (v, jhat) in per_node.iter().enumerate() {
            for (k, &i) in group.iter().enumerate() {
                table[i][v] = 1.0 - jhat[k];
            }
        }
    }
    table
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassRun {
    pub class: u32,
    pub budget: usize,
    pub selected: Vec<usize>,
    pub gains: Vec<f64>,
    pub covered: Vec<usize>,
    pub objective: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathScores {
    pub path: String,
    pub src_type: String,
    /// `|R̂|`, the source-type population.
    pub normalizer: usize,
    pub group_size: usize,
    pub runs: Vec<ClassRun>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeScore {
    pub node: usize,
    pub class: u32,
    pub score: f64,
}

/// Everything the selection computed, for reporting.
#[derive(Debug, Clone, Serialize)]
pub struct ScoreTable {
    pub paths: Vec<PathScores>,
    /// Summed scores of every node picked on at least one path.
    pub aggregated: Vec<NodeScore>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Selection {
    /// Chosen target nodes, grouped by class, best first within a class.
    pub selected: Vec<usize>,
    pub table: ScoreTable,
}

/// Selects target nodes from `pool` meeting every class budget exactly.
pub fn unified_select(
    graph: &HeteroGraph,
    paths: &[ComposedAdjacency],
    budget: &SelectionBudget,
    pool: &[usize],
    mode: GreedyMode,
) -> Result<Selection> {
    let n_target = graph.target_count();
    for p in paths {
        if p.metapath.dst_type() != graph.target_type || p.matrix.n_rows() != n_target {
            return Err(Error::contract(format!(
                "{} does not end at the target type",
                p.metapath
            )));
        }
    }
    let classes = graph.class_members(pool);
    for (&c, &b) in &budget.per_class {
        let have = classes.get(&c).map_or(0, Vec::len);
        if b > have {
            return Err(Error::contract(format!(
                "class {c} needs {b} nodes but the pool holds {have}"
            )));
        }
    }

    let degree = graph.degrees(&graph.target_type);
    let diversity = diversity_table(paths);
    let group_size: Vec<usize> = {
        let mut g = vec![1; paths.len()];
        for group in endpoint_groups(paths) {
            for &i in &group {
                g[i] = group.len();
            }
        }
        g
    };

    let jobs: Vec<(usize, u32, usize)> = (0..paths.len())
        .flat_map(|p| {
            budget
                .per_class
                .iter()
                .filter(|(_, &b)| b > 0)
                .map(move |(&c, &b)| (p, c, b))
        })
        .collect();
    let traces: Vec<GreedyTrace> = jobs
        .par_iter()
        .map(|&(p, c, b)| {
            let m = &paths[p].matrix;
            let obj = Objective {
                rf: m,
                scale: if m.n_cols() == 0 {
                    0.0
                } else {
                    1.0 / m.n_cols() as f64
                },
                bonus: Some(&diversity[p]),
                degree: &degree,
            };
            greedy_maximize(&obj, &classes[&c], b, mode)
        })
        .collect::<Result<_>>()?;

    let mut total = vec![0.0f64; n_target];
    let mut picked = vec![false; n_target];
    let mut path_scores: Vec<PathScores> = paths
        .iter()
        .enumerate()
        .map(|(i, p)| PathScores {
            path: p.metapath.to_string(),
            src_type: p.metapath.src_type().to_string(),
            normalizer: p.matrix.n_cols(),
            group_size: group_size[i],
            runs: Vec::new(),
        })
        .collect();
    for (&(p, c, b), trace) in jobs.iter().zip(traces) {
        for (&v, &g) in trace.selected.iter().zip(&trace.gains) {
            total[v] += g;
            picked[v] = true;
        }
        path_scores[p].runs.push(ClassRun {
            class: c,
            budget: b,
            selected: trace.selected,
            gains: trace.gains,
            covered: trace.covered,
            objective: trace.objective,
        });
    }

    let mut selected = Vec::with_capacity(budget.total);
    let mut aggregated = Vec::new();
    for (&c, members) in &classes {
        let mut ranked = members.clone();
        ranked.sort_by(|&a, &b| {
            total[b]
                .total_cmp(&total[a])
                .then(degree[b].cmp(&degree[a]))
                .then(a.cmp(&b))
        });
        selected.extend_from_slice(&ranked[..budget.get(c)]);
        aggregated.extend(ranked.iter().filter(|&&v| picked[v]).map(|&v| NodeScore {
            node: v,
            class: c,
            score: total[v],
        }));
    }

    Ok(Selection {
        selected,
        table: ScoreTable {
            paths: path_scores,
            aggregated,
        },
    })
}

/// Per-class selection counts of `selected`.
pub fn class_counts(labels: &[Option<u32>], selected: &[usize]) -> BTreeMap<u32, usize> {
    let mut out = BTreeMap::new();
    for &v in selected {
        if let Some(c) = labels[v] {
            *out.entry(c).or_insert(0) += 1;
        }
    }
    out
}
