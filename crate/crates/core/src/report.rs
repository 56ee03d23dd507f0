//! Machine-readable and text summaries of a condensation run.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::hierarchy::Role;
use crate::leaf::MergeEvent;
use crate::target::NodeScore;

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct CondensationReport {
    pub format_version: u32,
    pub method: String,
    pub parameters: BTreeMap<String, String>,
    pub types: Vec<TypeSummary>,
    pub target: TargetSummary,
    pub metapaths: Vec<MetapathInfo>,
    pub edges: EdgeSummary,
    pub warnings: Vec<String>,
    /// Wall-clock seconds per stage, in execution order.
    pub timings: Vec<StageTiming>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TypeSummary {
    #[serde(rename = "type")]
    pub ty: String,
    pub role: Role,
    pub original: usize,
    pub budget: usize,
    pub condensed: usize,
    pub capped_by_groups: bool,
    pub anchor_type: Option<String>,
    pub paths: Vec<String>,
    pub top_influence: Vec<(usize, f64)>,
    pub merges: Vec<MergeEvent>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassSummary {
    pub class: u32,
    /// Labeled target nodes of this class in the whole graph.
    pub original: usize,
    pub pool: usize,
    pub quota: f64,
    pub budget: usize,
    pub selected: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathCoverage {
    pub path: String,
    pub normalizer: usize,
    pub group_size: usize,
    /// Receptive-field columns covered by each class's picks.
    pub covered: BTreeMap<u32, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetSummary {
    pub pool_size: usize,
    pub budget: usize,
    /// True when the budget was cut down to the labeled pool size.
    pub capped_by_pool: bool,
    pub classes: Vec<ClassSummary>,
    pub coverage: Vec<PathCoverage>,
    pub top_scores: Vec<NodeScore>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetapathInfo {
    pub path: String,
    pub src_type: String,
    pub hops: usize,
    pub nnz: usize,
    pub density: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeSummary {
    pub original: usize,
    pub condensed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

impl CondensationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Condensed node count of `ty`.
    pub fn condensed(&self, ty: &str) -> Option<usize> {
        self.types.iter().find(|t| t.ty == ty).map(|t| t.condensed)
    }
}

impl fmt::Display for CondensationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "method: {}", self.method)?;
        for (k, v) in &self.parameters {
            writeln!(f, "  {k} = {v}")?;
        }
        writeln!(f, "types:")?;
        for t in &self.types {
            write!(
                f,
                "  {:<12} {:<6} {:>9} -> {:<9} (budget {})",
                t.ty, t.role, t.original, t.condensed, t.budget
            )?;
            if t.capped_by_groups {
                write!(f, " capped by groups")?;
            }
            if !t.merges.is_empty() {
                write!(f, " merges {}", t.merges.len())?;
            }
            writeln!(f)?;
        }
        writeln!(
            f,
            "target classes (pool {}, budget {}{}):",
            self.target.pool_size,
            self.target.budget,
            if self.target.capped_by_pool {
                ", capped by pool"
            } else {
                ""
            }
        )?;
        for c in &self.target.classes {
            writeln!(
                f,
                "  class {:<4} original {:>7} pool {:>7} quota {:>9.3} selected {:>6}",
                c.class, c.original, c.pool, c.quota, c.selected
            )?;
        }
        if !self.metapaths.is_empty() {
            writeln!(f, "meta-paths:")?;
            for m in &self.metapaths {
                writeln!(
                    f,
                    "  {:<28} nnz {:>10} density {:.3e}",
                    m.path, m.nnz, m.density
                )?;
            }
        }
        writeln!(
            f,
            "edges: {} -> {}",
            self.edges.original, self.edges.condensed
        )?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        for t in &self.timings {
            writeln!(f, "time {:<10} {:.3}s", t.stage, t.seconds)?;
        }
        Ok(())
    }
}
