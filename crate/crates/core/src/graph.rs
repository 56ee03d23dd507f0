//! Heterogeneous graph data model and structural validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sparse::SparseAdjacency;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeType {
    pub name: String,
    pub count: usize,
}

/// A directed, named relation. Rows of `adjacency` are `src_type` nodes and
/// columns are `dst_type` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub name: String,
    pub src_type: String,
    pub dst_type: String,
    pub adjacency: SparseAdjacency,
}

impl Relation {
    pub fn touches(&self, ty: &str) -> bool {
        self.src_type == ty || self.dst_type == ty
    }
}

/// Dense row-major node features of one type.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::contract(format!(
                "feature buffer of length {} cannot be {n_rows}x{n_cols}",
                data.len()
            )));
        }
        Ok(FeatureMatrix {
            n_rows,
            n_cols,
            data,
        })
    }

    pub fn from_rows(n_cols: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for row in rows {
            if row.len() != n_cols {
                return Err(Error::contract(format!(
                    "feature row of width {} in a matrix of width {n_cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        FeatureMatrix::new(rows.len(), n_cols, data)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Arithmetic mean of the given rows, summed in the order given.
    pub fn mean_of(&self, rows: &[usize]) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_cols];
        for &r in rows {
            for (a, x) in acc.iter_mut().zip(self.row(r)) {
                *a += x;
            }
        }
        let n = rows.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

/// Where a node of a condensed graph came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// A node copied from the source graph.
    Kept(usize),
    /// A synthesized node standing for several source nodes.
    Hyper(Vec<usize>),
}

impl Origin {
    pub fn members(&self) -> &[usize] {
        match self {
            Origin::Kept(id) => std::slice::from_ref(id),
            Origin::Hyper(ids) => ids,
        }
    }
}

/// Per-type mapping from new node id to its origin in the source graph.
pub type Provenance = BTreeMap<String, Vec<Origin>>;

#[derive(Debug, Clone, PartialEq)]
pub struct HeteroGraph {
    pub node_types: Vec<NodeType>,
    pub relations: Vec<Relation>,
    pub features: BTreeMap<String, FeatureMatrix>,
    /// Class of each target-type node, `None` where unlabeled.
    pub labels: Vec<Option<u32>>,
    pub splits: Splits,
    pub target_type: String,
    pub provenance: Option<Provenance>,
}

impl HeteroGraph {
    pub fn node_count(&self, ty: &str) -> Option<usize> {
        self.node_types
            .iter()
            .find(|t| t.name == ty)
            .map(|t| t.count)
    }

    pub fn has_type(&self, ty: &str) -> bool {
        self.node_count(ty).is_some()
    }

    pub fn type_names(&self) -> impl Iterator<Item = &str> {
        self.node_types.iter().map(|t| t.name.as_str())
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.name == name)
    }

    pub fn target_count(&self) -> usize {
        self.node_count(&self.target_type).unwrap_or(0)
    }

    pub fn num_edges(&self) -> usize {
        self.relations.iter().map(|r| r.adjacency.nnz()).sum()
    }

    pub fn num_classes(&self) -> usize {
        self.labels
            .iter()
            .flatten()
            .max()
            .map_or(0, |&c| c as usize + 1)
    }

    /// Number of incident edges of every node of `ty`, over all relations.
    pub fn degrees(&self, ty: &str) -> Vec<usize> {
        let mut deg = vec![0usize; self.node_count(ty).unwrap_or(0)];
        for rel in &self.relations {
            if rel.src_type == ty {
                for (r, d) in deg.iter_mut().enumerate() {
                    *d += rel.adjacency.row_len(r);
                }
            }
            if rel.dst_type == ty {
                for &c in rel.adjacency.indices() {
                    deg[c as usize] += 1;
                }
            }
        }
        deg
    }

    /// Labeled nodes of the target type, by class.
    pub fn class_members(&self, pool: &[usize]) -> BTreeMap<u32, Vec<usize>> {
        let mut out: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for &v in pool {
            if let Some(Some(c)) = self.labels.get(v) {
                out.entry(*c).or_default().push(v);
            }
        }
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();

        let mut seen = BTreeSet::new();
        for t in &self.node_types {
            if !seen.insert(t.name.as_str()) {
                report.push(
                    IssueKind::DuplicateName,
                    format!("type {}", t.name),
                    "declared twice",
                );
            }
        }
        if !self.has_type(&self.target_type) {
            report.push(
                IssueKind::Target,
                format!("target {}", self.target_type),
                "target type is not a declared node type",
            );
        } else if self.labels.len() != self.target_count() {
            report.push(
                IssueKind::DimensionMismatch,
                "labels",
                format!(
                    "{} label slots for {} target nodes",
                    self.labels.len(),
                    self.target_count()
                ),
            );
        }

        let mut rel_names = BTreeSet::new();
        for rel in &self.relations {
            let loc = format!("relation {}", rel.name);
            if !rel_names.insert(rel.name.as_str()) {
                report.push(
                    IssueKind::DuplicateName,
                    loc.clone(),
                    "relation name is not unique",
                );
            }
            let (Some(n_src), Some(n_dst)) = (
                self.node_count(&rel.src_type),
                self.node_count(&rel.dst_type),
            ) else {
                report.push(
                    IssueKind::UnknownType,
                    loc,
                    format!(
                        "endpoint types {} -> {} not both declared",
                        rel.src_type, rel.dst_type
                    ),
                );
                continue;
            };
            let adj = &rel.adjacency;
            if adj.n_rows() != n_src || adj.n_cols() != n_dst {
                report.push(
                    IssueKind::DimensionMismatch,
                    loc.clone(),
                    format!(
                        "adjacency is {}x{}, types require {n_src}x{n_dst}",
                        adj.n_rows(),
                        adj.n_cols()
                    ),
                );
            }
            for issue in adj.check() {
                let kind = if issue.contains("out of range") {
                    IssueKind::OutOfRange
                } else {
                    IssueKind::Structure
                };
                report.push(kind, loc.clone(), issue);
            }
        }

        for (ty, feats) in &self.features {
            let loc = format!("features {ty}");
            match self.node_count(ty) {
                None => report.push(
                    IssueKind::UnknownType,
                    loc,
                    "features for an undeclared type",
                ),
                Some(n) => {
                    if feats.n_rows() != n {
                        report.push(
                            IssueKind::DimensionMismatch,
                            loc.clone(),
                            format!("{} feature rows for {n} nodes", feats.n_rows()),
                        );
                    }
                    if let Some(pos) = feats.data().iter().position(|x| !x.is_finite()) {
                        report.push(
                            IssueKind::NonFinite,
                            loc,
                            format!("non-finite value at row {}", pos / feats.n_cols().max(1)),
                        );
                    }
                }
            }
        }

        let n_target = self.target_count();
        for (name, ids) in [
            ("train", &self.splits.train),
            ("valid", &self.splits.valid),
            ("test", &self.splits.test),
        ] {
            if let Some(&bad) = ids.iter().find(|&&v| v >= n_target) {
                report.push(
                    IssueKind::OutOfRange,
                    format!("split {name}"),
                    format!("node {bad} but only {n_target} target nodes"),
                );
            }
        }

        if let Some(prov) = &self.provenance {
            for (ty, origins) in prov {
                if self.node_count(ty) != Some(origins.len()) {
                    report.push(
                        IssueKind::DimensionMismatch,
                        format!("provenance {ty}"),
                        format!(
                            "{} entries for {:?} nodes",
                            origins.len(),
                            self.node_count(ty)
                        ),
                    );
                }
            }
        }
        report
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    OutOfRange,
    DimensionMismatch,
    Structure,
    UnknownType,
    DuplicateName,
    Target,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub kind: IssueKind,
    pub location: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    fn push(&mut self, kind: IssueKind, location: impl Into<String>, detail: impl Into<String>) {
        self.issues.push(Issue {
            kind,
            location: location.into(),
            detail: detail.into(),
        });
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn count(&self, kind: IssueKind) -> usize {
        self.issues.iter().filter(|i| i.kind == kind).count()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {}", issue.location, issue.detail)?;
        }
        Ok(())
    }
}
