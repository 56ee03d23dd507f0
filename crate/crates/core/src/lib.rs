//! Training-free condensation of heterogeneous graphs.
//!
//! Target-type nodes are chosen per class by greedy maximization of
//! meta-path receptive-field coverage plus a cross-path diversity bonus.
//! Father-type nodes are ranked by personalized PageRank influence on the
//! kept targets, and leaf-type nodes are folded into mean-feature
//! hyper-nodes whose edges keep fathers that shared a leaf two hops apart.
//!
//! ```no_run
//! use hetcondense::{condense, load_graph, CondenseParams};
//!
//! let graph = load_graph("data/acm").unwrap();
//! let params = CondenseParams { ratio: 0.05, ..CondenseParams::default() };
//! let out = condense(&graph, &params).unwrap();
//! println!("{}", out.report);
//! ```

pub mod budget;
pub mod error;
pub mod father;
pub mod generate;
pub mod graph;
pub mod greedy;
pub mod hierarchy;
pub mod induce;
pub mod io;
pub mod leaf;
pub mod metapath;
pub mod other_types;
pub mod pipeline;
pub mod ppr;
pub mod report;
pub mod sparse;
pub mod target;

pub use error::{Error, Result};
pub use graph::{FeatureMatrix, HeteroGraph, NodeType, Origin, Relation, Splits, ValidationReport};
pub use hierarchy::{classify_hierarchy, Role, TypeHierarchy};
pub use io::{load_graph, save_graph};
pub use metapath::{compose, enumerate_metapaths, ComposedAdjacency, MetaPath, Normalization};
pub use pipeline::{
    condense, condense_random, run, Condensation, CondenseConfig, CondenseParams, ImportanceKind,
    Method, PoolMode,
};
pub use ppr::{PprConfig, PprMode};
pub use report::CondensationReport;
pub use sparse::SparseAdjacency;
