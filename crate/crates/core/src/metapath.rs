//! Meta-path enumeration over the schema and sparse composition of their
//! adjacencies.
//!
//! A meta-path is written from the end type backwards, `P <- A <- P`: its
//! composed matrix has one row per end-type node and one column per
//! source-type node.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::HeteroGraph;
use crate::sparse::{ProductOptions, SparseAdjacency};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Rows are the relation's source type.
    AsStored,
    /// Rows are the relation's destination type.
    Transposed,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Step {
    pub relation: String,
    pub orientation: Orientation,
    pub row_type: String,
    pub col_type: String,
}

impl Step {
    fn sort_key(&self) -> (&str, Orientation) {
        (&self.relation, self.orientation)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MetaPath {
    pub steps: Vec<Step>,
}

impl MetaPath {
    pub fn hops(&self) -> usize {
        self.steps.len()
    }

    /// Type on the row side (where the path ends).
    pub fn dst_type(&self) -> &str {
        &self.steps[0].row_type
    }

    /// Type on the column side (where the path starts).
    pub fn src_type(&self) -> &str {
        &self.steps[self.steps.len() - 1].col_type
    }

    /// `P<-A<-P`
    pub fn type_chain(&self) -> String {
        let mut s = self.dst_type().to_string();
        for step in &self.steps {
            s.push_str("<-");
            s.push_str(&step.col_type);
        }
        s
    }

    fn type_checks(&self) -> bool {
        !self.steps.is_empty()
            && self
                .steps
                .windows(2)
                .all(|w| w[0].col_type == w[1].row_type)
    }
}

impl fmt::Display for MetaPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [", self.type_chain())?;
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(&s.relation)?;
            if s.orientation == Orientation::Transposed {
                f.write_str("^T")?;
            }
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Path counts.
    None,
    /// Each hop row-normalized before multiplication.
    Row,
    /// `D_r^{-1/2} C D_c^{-1/2}` applied to the path-count product `C`.
    SymmetricBipartite,
}

#[derive(Debug, Clone)]
pub struct ComposedAdjacency {
    pub metapath: MetaPath,
    pub matrix: SparseAdjacency,
    pub normalization: Normalization,
}

fn steps_into(graph: &HeteroGraph, ty: &str) -> Vec<Step> {
    let mut out = Vec::new();
    for rel in &graph.relations {
        if rel.src_type == ty {
            out.push(Step {
                relation: rel.name.clone(),
                orientation: Orientation::AsStored,
                row_type: rel.src_type.clone(),
                col_type: rel.dst_type.clone(),
            });
        }
        if rel.dst_type == ty {
            out.push(Step {
                relation: rel.name.clone(),
                orientation: Orientation::Transposed,
                row_type: rel.dst_type.clone(),
                col_type: rel.src_type.clone(),
            });
        }
    }
    out
}

/// Every type-checked relation sequence of 1..=`max_hops` steps ending at
/// `end_type`, each relation usable in either orientation. Ordered by hop
/// count, then lexicographically by `(relation, orientation)` per step.
pub fn enumerate_metapaths(
    graph: &HeteroGraph,
    end_type: &str,
    max_hops: usize,
) -> Result<Vec<MetaPath>> {
    if max_hops == 0 {
        return Err(Error::contract("meta-path hop bound must be at least 1"));
    }
    if !graph.has_type(end_type) {
        return Err(Error::contract(format!("unknown node type {end_type}")));
    }
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<Step>> = vec![Vec::new()];
    for _ in 0..max_hops {
        let mut next = Vec::new();
        for prefix in &frontier {
            let from = prefix.last().map_or(end_type, |s| s.col_type.as_str());
            for step in steps_into(graph, from) {
                let mut path = prefix.clone();
                path.push(step);
                next.push(path);
            }
        }
        out.extend(next.iter().cloned().map(|steps| MetaPath { steps }));
        frontier = next;
    }
    out.sort_by(|a, b| {
        a.hops().cmp(&b.hops()).then_with(|| {
            a.steps
                .iter()
                .map(Step::sort_key)
                .cmp(b.steps.iter().map(Step::sort_key))
        })
    });
    Ok(out)
}

fn step_matrix(graph: &HeteroGraph, step: &Step) -> Result<SparseAdjacency> {
    let rel = graph
        .relation(&step.relation)
        .ok_or_else(|| Error::contract(format!("unknown relation {}", step.relation)))?;
    let (rows, cols) = match step.orientation {
        Orientation::AsStored => (&rel.src_type, &rel.dst_type),
        Orientation::Transposed => (&rel.dst_type, &rel.src_type),
    };
    if *rows != step.row_type || *cols != step.col_type {
        return Err(Error::contract(format!(
            "step {} does not connect {} to {}",
            step.relation, step.col_type, step.row_type
        )));
    }
    Ok(match step.orientation {
        Orientation::AsStored => rel.adjacency.clone(),
        Orientation::Transposed => rel.adjacency.transpose(),
    })
}

/// Chained sparse product of the per-step adjacencies, left to right.
pub fn compose(
    graph: &HeteroGraph,
    path: &MetaPath,
    normalization: Normalization,
) -> Result<ComposedAdjacency> {
    compose_with(graph, path, normalization, &ProductOptions::default())
}

pub fn compose_with(
    graph: &HeteroGraph,
    path: &MetaPath,
    normalization: Normalization,
    opts: &ProductOptions,
) -> Result<ComposedAdjacency> {
    if !path.type_checks() {
        return Err(Error::contract(format!(
            "meta-path {path} does not type-check"
        )));
    }
    let prepare = |m: SparseAdjacency| match normalization {
        Normalization::Row => m.row_normalized(),
        Normalization::None | Normalization::SymmetricBipartite => m,
    };
    let mut acc = prepare(step_matrix(graph, &path.steps[0])?);
    for step in &path.steps[1..] {
        acc = acc.matmul(&prepare(step_matrix(graph, step)?), opts)?;
    }
    if normalization == Normalization::SymmetricBipartite {
        acc = acc.symmetric_bipartite_normalized();
    }
    Ok(ComposedAdjacency {
        metapath: path.clone(),
        matrix: acc,
        normalization,
    })
}

/// Composes every path independently in parallel.
pub fn compose_all(
    graph: &HeteroGraph,
    paths: &[MetaPath],
    normalization: Normalization,
) -> Result<Vec<ComposedAdjacency>> {
    paths
        .par_iter()
        .map(|p| compose(graph, p, normalization))
        .collect()
}

/// Column ids reached by `node` along the composed path (values ignored).
pub fn reachable_set(adj: &ComposedAdjacency, node: usize) -> Result<&[u32]> {
    if node >= adj.matrix.n_rows() {
        return Err(Error::contract(format!(
            "node {node} outside the {} rows of {}",
            adj.matrix.n_rows(),
            adj.metapath
        )));
    }
    Ok(adj.matrix.row(node))
}
