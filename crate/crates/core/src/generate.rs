//! Synthetic heterogeneous graphs with planted communities.
//!
//! Schema: `paper` (target, labeled) linked to `author` and `subject`, and
//! `term` hanging off `author` only, which makes `term` a leaf type. Every
//! non-target node belongs to a community; a paper of class `c` draws each
//! neighbour from community `c` with probability `homophily`, otherwise from
//! a uniformly chosen community. Within a community, neighbours are drawn
//! with Zipf weights `1 / (rank + 1)^skew`, giving skewed degrees.

use std::collections::BTreeMap;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::graph::{FeatureMatrix, HeteroGraph, NodeType, Relation, Splits};
use crate::sparse::SparseAdjacency;

pub const TARGET: &str = "paper";

#[derive(Debug, Clone)]
pub struct PlantedConfig {
    pub papers: usize,
    pub classes: usize,
    pub authors: usize,
    pub subjects: usize,
    /// Zero drops the `term` type.
    pub terms: usize,
    /// Each paper draws `1..=max` neighbours of each kind.
    pub max_authors_per_paper: usize,
    pub max_subjects_per_paper: usize,
    pub max_terms_per_author: usize,
    pub homophily: f64,
    pub skew: f64,
    pub feature_dim: usize,
    pub train_fraction: f64,
    pub valid_fraction: f64,
}

impl PlantedConfig {
    /// A few hundred nodes; quick to condense.
    pub fn small() -> Self {
        PlantedConfig {
            papers: 240,
            classes: 3,
            authors: 120,
            subjects: 30,
            terms: 60,
            max_authors_per_paper: 4,
            max_subjects_per_paper: 2,
            max_terms_per_author: 3,
            homophily: 0.8,
            skew: 1.0,
            feature_dim: 8,
            train_fraction: 0.5,
            valid_fraction: 0.1,
        }
    }

    /// Roughly `edges` edges in total, spread over the three relations.
    pub fn with_edges(edges: usize) -> Self {
        // per paper: 3 author + 1.5 subject edges on average; per author 2 terms
        let papers = (edges as f64 / 5.5).ceil() as usize;
        PlantedConfig {
            papers,
            classes: 4,
            authors: papers / 2,
            subjects: (papers / 20).max(8),
            terms: (papers / 4).max(8),
            max_authors_per_paper: 5,
            max_subjects_per_paper: 2,
            max_terms_per_author: 3,
            homophily: 0.8,
            skew: 0.6,
            feature_dim: 16,
            train_fraction: 0.3,
            valid_fraction: 0.1,
        }
    }
}

struct Communities {
    members: Vec<Vec<usize>>,
    weights: Vec<WeightedIndex<f64>>,
}

impl Communities {
    fn new(n: usize, classes: usize, skew: f64) -> Self {
        let members: Vec<Vec<usize>> = (0..classes)
            .map(|c| (0..n).filter(|i| i % classes == c).collect())
            .collect();
        let weights = members
            .iter()
            .map(|m| {
                let w: Vec<f64> = (0..m.len().max(1))
                    .map(|r| 1.0 / ((r + 1) as f64).powf(skew))
                    .collect();
                WeightedIndex::new(w).expect("positive weights")
            })
            .collect();
        Communities { members, weights }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, class: usize, homophily: f64) -> Option<usize> {
        let classes = self.members.len();
        let c = if rng.gen::<f64>() < homophily {
            class
        } else {
            rng.gen_range(0..classes)
        };
        if self.members[c].is_empty() {
            return None;
        }
        Some(self.members[c][self.weights[c].sample(rng)])
    }
}

fn noisy_features(rng: &mut ChaCha8Rng, classes: &[usize], k: usize, dim: usize) -> FeatureMatrix {
    let mut data = Vec::with_capacity(classes.len() * dim);
    for &c in classes {
        for j in 0..dim {
            let centre = if j % k == c { 1.0 } else { 0.0 };
            let x: f64 = centre + rng.gen_range(-0.5..0.5);
            data.push((x * 1e4).round() / 1e4);
        }
    }
    FeatureMatrix::new(classes.len(), dim, data).expect("consistent shape")
}

fn relation(
    name: &str,
    src: &str,
    dst: &str,
    n_src: usize,
    n_dst: usize,
    pairs: &[(usize, usize)],
) -> Relation {
    Relation {
        name: name.to_string(),
        src_type: src.to_string(),
        dst_type: dst.to_string(),
        adjacency: SparseAdjacency::from_pairs(n_src, n_dst, pairs).expect("ids in range"),
    }
}

/// Builds a planted-community graph; equal `(cfg, seed)` give equal graphs.
pub fn planted(cfg: &PlantedConfig, seed: u64) -> HeteroGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = cfg.classes.max(1);
    let paper_class: Vec<usize> = (0..cfg.papers).map(|_| rng.gen_range(0..k)).collect();
    let authors = Communities::new(cfg.authors, k, cfg.skew);
    let subjects = Communities::new(cfg.subjects, k, cfg.skew);
    let terms = Communities::new(cfg.terms, k, cfg.skew);

    let mut pa = Vec::new();
    let mut ps = Vec::new();
    for (p, &c) in paper_class.iter().enumerate() {
        for _ in 0..rng.gen_range(1..=cfg.max_authors_per_paper.max(1)) {
            if let Some(a) = authors.draw(&mut rng, c, cfg.homophily) {
                pa.push((p, a));
            }
        }
        for _ in 0..rng.gen_range(1..=cfg.max_subjects_per_paper.max(1)) {
            if let Some(s) = subjects.draw(&mut rng, c, cfg.homophily) {
                ps.push((p, s));
            }
        }
    }
    let mut at = Vec::new();
    if cfg.terms > 0 {
        for a in 0..cfg.authors {
            for _ in 0..rng.gen_range(1..=cfg.max_terms_per_author.max(1)) {
                if let Some(t) = terms.draw(&mut rng, a % k, cfg.homophily) {
                    at.push((a, t));
                }
            }
        }
    }

    let mut node_types = vec![
        NodeType {
            name: TARGET.into(),
            count: cfg.papers,
        },
        NodeType {
            name: "author".into(),
            count: cfg.authors,
        },
        NodeType {
            name: "subject".into(),
            count: cfg.subjects,
        },
    ];
    let mut relations = vec![
        relation(
            "paper_author",
            TARGET,
            "author",
            cfg.papers,
            cfg.authors,
            &pa,
        ),
        relation(
            "paper_subject",
            TARGET,
            "subject",
            cfg.papers,
            cfg.subjects,
            &ps,
        ),
    ];
    let mut features = BTreeMap::new();
    features.insert(
        TARGET.to_string(),
        noisy_features(&mut rng, &paper_class, k, cfg.feature_dim),
    );
    let author_class: Vec<usize> = (0..cfg.authors).map(|a| a % k).collect();
    features.insert(
        "author".to_string(),
        noisy_features(&mut rng, &author_class, k, cfg.feature_dim),
    );
    if cfg.terms > 0 {
        node_types.push(NodeType {
            name: "term".into(),
            count: cfg.terms,
        });
        relations.push(relation(
            "author_term",
            "author",
            "term",
            cfg.authors,
            cfg.terms,
            &at,
        ));
        let term_class: Vec<usize> = (0..cfg.terms).map(|t| t % k).collect();
        features.insert(
            "term".to_string(),
            noisy_features(&mut rng, &term_class, k, cfg.feature_dim),
        );
    }

    let mut order: Vec<usize> = (0..cfg.papers).collect();
    order.shuffle(&mut rng);
    let n_train = ((cfg.train_fraction * cfg.papers as f64).round() as usize).min(cfg.papers);
    let n_valid =
        ((cfg.valid_fraction * cfg.papers as f64).round() as usize).min(cfg.papers - n_train);
    let take = |range: std::ops::Range<usize>| {
        let mut v = order[range].to_vec();
        v.sort_unstable();
        v
    };
    let splits = Splits {
        train: take(0..n_train),
        valid: take(n_train..n_train + n_valid),
        test: take(n_train + n_valid..cfg.papers),
    };

    HeteroGraph {
        node_types,
        relations,
        features,
        labels: paper_class.iter().map(|&c| Some(c as u32)).collect(),
        splits,
        target_type: TARGET.into(),
        provenance: None,
    }
}

/// A tiny random graph for exhaustive checks: 6 to `max_targets` papers,
/// 2 or 3 classes, every paper in the train split, and a `term` leaf type.
pub fn random_small(seed: u64, max_targets: usize) -> HeteroGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_targets = max_targets.max(6);
    let cfg = PlantedConfig {
        papers: rng.gen_range(6..=max_targets),
        classes: rng.gen_range(2..=3),
        authors: rng.gen_range(3..=10),
        subjects: rng.gen_range(2..=6),
        terms: rng.gen_range(2..=8),
        max_authors_per_paper: 3,
        max_subjects_per_paper: 2,
        max_terms_per_author: 3,
        homophily: rng.gen_range(0.3..0.9),
        skew: rng.gen_range(0.0..1.5),
        feature_dim: 3,
        train_fraction: 1.0,
        valid_fraction: 0.0,
    };
    planted(&cfg, rng.gen())
}
