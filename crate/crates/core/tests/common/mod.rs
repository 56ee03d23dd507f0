#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::PathBuf;

use hetcondense::metapath::Orientation;
use hetcondense::{HeteroGraph, MetaPath};
use hetcondense_oracle::{dense_compose, reach_sets, DenseBool, Instance, PathSets};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub const FIXTURES: [&str; 3] = ["toy", "shared_leaf", "chain"];

/// Dense boolean matrix of one path step, read straight from the edge
/// list.
pub fn step_dense(graph: &HeteroGraph, relation: &str, orientation: Orientation) -> DenseBool {
    let rel = graph.relation(relation).expect("relation exists");
    let (n_src, n_dst) = (
        graph.node_count(&rel.src_type).unwrap(),
        graph.node_count(&rel.dst_type).unwrap(),
    );
    let (rows, cols) = match orientation {
        Orientation::AsStored => (n_src, n_dst),
        Orientation::Transposed => (n_dst, n_src),
    };
    let mut m = vec![vec![false; cols]; rows];
    for (s, d) in rel.adjacency.pairs() {
        match orientation {
            Orientation::AsStored => m[s][d] = true,
            Orientation::Transposed => m[d][s] = true,
        }
    }
    m
}

pub fn oracle_pattern(graph: &HeteroGraph, path: &MetaPath) -> DenseBool {
    let steps: Vec<DenseBool> = path
        .steps
        .iter()
        .map(|s| step_dense(graph, &s.relation, s.orientation))
        .collect();
    dense_compose(&steps).expect("compatible chain")
}

/// Oracle selection instance over `paths`, grouped by source type.
pub fn oracle_instance(
    graph: &HeteroGraph,
    paths: &[MetaPath],
    pool: &[usize],
    per_class: BTreeMap<u32, usize>,
) -> Instance {
    let mut groups: BTreeMap<String, usize> = BTreeMap::new();
    let sets = paths
        .iter()
        .map(|p| {
            let next = groups.len();
            let group = *groups
                .entry(format!("{}>{}", p.src_type(), p.dst_type()))
                .or_insert(next);
            PathSets {
                reach: reach_sets(&oracle_pattern(graph, p)),
                n_src: graph.node_count(p.src_type()).unwrap(),
                group,
            }
        })
        .collect();
    Instance {
        paths: sets,
        pool: pool.to_vec(),
        class_of: graph.labels.clone(),
        per_class,
    }
}

/// Undirected adjacency over `(type, id)` nodes of all relations.
pub fn undirected(graph: &HeteroGraph) -> BTreeMap<(String, usize), BTreeSet<(String, usize)>> {
    let mut adj: BTreeMap<(String, usize), BTreeSet<(String, usize)>> = BTreeMap::new();
    for r in &graph.relations {
        for (s, d) in r.adjacency.pairs() {
            let a = (r.src_type.clone(), s);
            let b = (r.dst_type.clone(), d);
            adj.entry(a.clone()).or_default().insert(b.clone());
            adj.entry(b).or_default().insert(a);
        }
    }
    adj
}

/// Hop distance between two nodes, if within `limit`.
pub fn bfs_distance(
    adj: &BTreeMap<(String, usize), BTreeSet<(String, usize)>>,
    from: &(String, usize),
    to: &(String, usize),
    limit: usize,
) -> Option<usize> {
    let mut seen = BTreeSet::from([from.clone()]);
    let mut queue = VecDeque::from([(from.clone(), 0usize)]);
    while let Some((u, d)) = queue.pop_front() {
        if &u == to {
            return Some(d);
        }
        if d == limit {
            continue;
        }
        for v in adj.get(&u).into_iter().flatten() {
            if seen.insert(v.clone()) {
                queue.push_back((v.clone(), d + 1));
            }
        }
    }
    None
}

/// `⌈r·n⌉` with a little slack for products like `0.1 · 30`.
pub fn ceil_budget(ratio: f64, n: usize) -> usize {
    let x = ratio * n as f64;
    let r = x.round();
    let b = if (x - r).abs() < 1e-9 { r } else { x.ceil() };
    (b as usize).min(n)
}

/// Target-target meta-path edges (`u ≠ v`) joined through any neighbour
/// type, counted straight from the edge lists.
pub fn target_pair_edges(graph: &HeteroGraph) -> usize {
    let t = &graph.target_type;
    let mut total = 0;
    for r in &graph.relations {
        let (other, flip) = if &r.src_type == t && &r.dst_type != t {
            (&r.dst_type, false)
        } else if &r.dst_type == t && &r.src_type != t {
            (&r.src_type, true)
        } else {
            continue;
        };
        let mut by_mid: Vec<Vec<usize>> = vec![Vec::new(); graph.node_count(other).unwrap()];
        for (s, d) in r.adjacency.pairs() {
            let (tgt, mid) = if flip { (d, s) } else { (s, d) };
            by_mid[mid].push(tgt);
        }
        let mut pairs = BTreeSet::new();
        for ts in &by_mid {
            for &a in ts {
                for &b in ts {
                    if a != b {
                        pairs.insert((a, b));
                    }
                }
            }
        }
        total += pairs.len();
    }
    total
}
