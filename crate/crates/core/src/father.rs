//! Ranking of father-type nodes by their influence on already kept nodes.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::HeteroGraph;
use crate::metapath::ComposedAdjacency;
use crate::ppr::{aggregate_influence, PprConfig};

/// Node-importance measure used to rank father-type nodes.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Importance {
    /// Personalized PageRank summed over meta-paths and kept anchor rows.
    Ppr(PprConfig),
    /// Plain node degree; ignores the meta-paths.
    Degree,
}

#[derive(Debug, Clone, Serialize)]
pub struct FatherSelection {
    pub father_type: String,
    /// Type whose kept nodes seeded the influence computation.
    pub anchor_type: String,
    pub paths: Vec<String>,
    /// Chosen nodes, best first.
    pub ranked: Vec<usize>,
    /// Score of every node of the father type.
    #[serde(skip)]
    pub scores: Vec<f64>,
}

impl FatherSelection {
    pub fn top(&self, k: usize) -> Vec<(usize, f64)> {
        self.ranked
            .iter()
            .take(k)
            .map(|&v| (v, self.scores[v]))
            .collect()
    }
}

/// Picks `budget` nodes of `father_type`.
///
/// `paths` run from `father_type` (columns) to the anchor type (rows). Each
/// node's score is `Σ_paths Σ_{t ∈ kept_anchor} N[t, node]`; ties go to the
/// higher degree, then the lower id.
pub fn select_father(
    graph: &HeteroGraph,
    father_type: &str,
    paths: &[ComposedAdjacency],
    kept_anchor: &[usize],
    budget: usize,
    importance: &Importance,
) -> Result<FatherSelection> {
    let n = graph
        .node_count(father_type)
        .ok_or_else(|| Error::contract(format!("unknown type {father_type}")))?;
    if budget > n {
        return Err(Error::contract(format!(
            "budget {budget} exceeds the {n} nodes of {father_type}"
        )));
    }
    let anchor_type = paths
        .first()
        .map_or(graph.target_type.as_str(), |p| p.metapath.dst_type())
        .to_string();
    for p in paths {
        if p.metapath.src_type() != father_type || p.metapath.dst_type() != anchor_type {
            return Err(Error::contract(format!(
                "{} does not run from {father_type} to {anchor_type}",
                p.metapath
            )));
        }
    }
    let degree = graph.degrees(father_type);
    let scores: Vec<f64> = match importance {
        Importance::Degree => degree.iter().map(|&d| d as f64).collect(),
        Importance::Ppr(cfg) => {
            let per_path: Vec<Vec<f64>> = paths
                .par_iter()
                .map(|p| aggregate_influence(p, kept_anchor, cfg))
                .collect::<Result<_>>()?;
            let mut total = vec![0.0; n];
            for v in per_path {
                for (t, x) in total.iter_mut().zip(v) {
                    *t += x;
                }
            }
            total
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then(degree[b].cmp(&degree[a]))
            .then(a.cmp(&b))
    });
    order.truncate(budget);
    Ok(FatherSelection {
        father_type: father_type.to_string(),
        anchor_type,
        paths: paths.iter().map(|p| p.metapath.to_string()).collect(),
        ranked: order,
        scores,
    })
}
