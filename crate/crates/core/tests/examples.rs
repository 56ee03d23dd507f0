mod common;

use std::collections::BTreeMap;

use common::{bfs_distance, fixture, oracle_instance, undirected};
use hetcondense::budget::class_budgets;
use hetcondense::father::{select_father, Importance};
use hetcondense::greedy::{greedy_maximize, GreedyMode, Objective};
use hetcondense::hierarchy::classify_hierarchy;
use hetcondense::induce::induce_subgraph;
use hetcondense::leaf::{synthesize_leaf, HyperNode};
use hetcondense::other_types::{condense_other_types, OtherTypesConfig};
use hetcondense::sparse::ProductOptions;
use hetcondense::target::unified_select;
use hetcondense::{
    compose, enumerate_metapaths, load_graph, HeteroGraph, Normalization, PprConfig, PprMode,
};
use hetcondense_oracle::{
    brute_force, brute_force_f, coverage, dense_bipartite_influence, OracleReport,
};

fn toy() -> HeteroGraph {
    load_graph(fixture("toy")).unwrap()
}

fn path_named(graph: &HeteroGraph, k: usize, chain: &str) -> hetcondense::MetaPath {
    enumerate_metapaths(graph, &graph.target_type, k)
        .unwrap()
        .into_iter()
        .find(|p| p.type_chain() == chain)
        .unwrap()
}

#[test]
fn induced_toy_subgraph_keeps_only_surviving_edges() {
    let g = toy();
    let kept = BTreeMap::from([
        ("P".to_string(), vec![0, 1]),
        ("A".to_string(), vec![1]),
        ("S".to_string(), vec![0]),
    ]);
    let out = induce_subgraph(&g, &kept, &[]).unwrap();
    // P0-A1, P1-A1 and P0-S0, P1-S0 survive; A1 and S0 become id 0
    assert_eq!(
        out.relation("PA")
            .unwrap()
            .adjacency
            .pairs()
            .collect::<Vec<_>>(),
        vec![(0, 0), (1, 0)]
    );
    assert_eq!(
        out.relation("PS")
            .unwrap()
            .adjacency
            .pairs()
            .collect::<Vec<_>>(),
        vec![(0, 0), (1, 0)]
    );
    assert_eq!(out.labels, vec![Some(0), Some(0)]);
    assert_eq!(out.features["A"].row(0), &[3.0, 4.0]);
}

#[test]
fn greedy_coverage_on_toy_is_near_optimal() {
    let g = toy();
    let pa = path_named(&g, 1, "P<-A");
    let composed = compose(&g, &pa, Normalization::None).unwrap();
    let degree = g.degrees("P");
    let obj = Objective {
        rf: &composed.matrix,
        scale: 1.0,
        bonus: None,
        degree: &degree,
    };
    let trace = greedy_maximize(&obj, &[0, 1, 2, 3], 2, GreedyMode::Lazy).unwrap();

    let mut inst = oracle_instance(&g, &[pa], &[0, 1, 2, 3], BTreeMap::from([(0, 2)]));
    inst.class_of = vec![Some(0); 4];
    let reach = inst.paths[0].reach.clone();
    let (_, opt) = brute_force(&inst, |s| coverage(&reach, s) as f64).unwrap();
    let engine = coverage(&reach, &trace.selected) as f64;
    let report = OracleReport::maximization(
        "toy P<-A budget 2",
        opt,
        engine,
        1.0 - 1.0 / std::f64::consts::E,
    );
    assert!(report.pass, "{report}");
    assert_eq!(engine, 3.0);
}

#[test]
fn toy_two_path_selection_matches_exhaustive_search() {
    let g = toy();
    let paths = vec![path_named(&g, 2, "P<-A<-P"), path_named(&g, 2, "P<-S<-P")];
    let composed: Vec<_> = paths
        .iter()
        .map(|p| compose(&g, p, Normalization::None).unwrap())
        .collect();
    let pool = vec![0, 1, 2, 3];
    let budget = class_budgets(&g.labels, &pool, 0.5).unwrap();
    let sel = unified_select(&g, &composed, &budget, &pool, GreedyMode::Lazy).unwrap();
    let mut engine = sel.selected.clone();
    engine.sort_unstable();

    let inst = oracle_instance(&g, &paths, &pool, budget.per_class.clone());
    let (best, opt) = brute_force_f(&inst).unwrap();
    assert!(
        (inst.f_value(&engine) - opt).abs() < 1e-12,
        "engine {engine:?} oracle {best:?}"
    );
    for p in 0..paths.len() {
        assert!(
            (inst.path_value(p, &engine) - inst.path_value_by_columns(p, &engine)).abs() < 1e-12
        );
    }
}

fn dense_counts(graph: &HeteroGraph, chain: &str, k: usize) -> Vec<Vec<f64>> {
    let path = path_named(graph, k, chain);
    let pattern = common::oracle_pattern(graph, &path);
    pattern
        .iter()
        .map(|r| r.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
        .collect()
}

#[test]
fn father_ranking_matches_dense_ppr_column_sums() {
    let g = toy();
    let pa = compose(&g, &path_named(&g, 1, "P<-A"), Normalization::None).unwrap();
    for mode in [PprMode::Exact, PprMode::Push, PprMode::Power] {
        let cfg = PprConfig {
            mode,
            ..PprConfig::default()
        };
        let sel = select_father(
            &g,
            "A",
            std::slice::from_ref(&pa),
            &[0, 1],
            2,
            &Importance::Ppr(cfg),
        )
        .unwrap();

        let n = dense_bipartite_influence(&dense_counts(&g, "P<-A", 1), 0.15).unwrap();
        let score: Vec<f64> = (0..3).map(|j| n[0][j] + n[1][j]).collect();
        let degree = [1usize, 3, 2];
        let mut want: Vec<usize> = (0..3).collect();
        want.sort_by(|&a, &b| {
            score[b]
                .total_cmp(&score[a])
                .then(degree[b].cmp(&degree[a]))
                .then(a.cmp(&b))
        });
        assert_eq!(sel.ranked, want[..2].to_vec(), "{mode:?}");
        for j in 0..3 {
            assert!((sel.scores[j] - score[j]).abs() <= 1e-4);
        }
    }
}

#[test]
fn toy_half_ratio_condenses_other_types_by_oracle_ranking() {
    let g = toy();
    let h = classify_hierarchy(&g).unwrap();
    let kept_targets = [0, 2];
    let cfg = OtherTypesConfig {
        ratio: 0.5,
        max_hops: 2,
        importance: Importance::Ppr(PprConfig {
            mode: PprMode::Exact,
            ..PprConfig::default()
        }),
        product: ProductOptions::default(),
    };
    let plan = condense_other_types(&g, &h, &kept_targets, &cfg).unwrap();
    assert_eq!(plan.kept["A"].len(), 2);
    assert_eq!(plan.kept["S"].len(), 1);

    for (ty, chain, budget) in [("A", "P<-A", 2), ("S", "P<-S", 1)] {
        let n = dense_bipartite_influence(&dense_counts(&g, chain, 1), 0.15).unwrap();
        let cols = n[0].len();
        let score: Vec<f64> = (0..cols)
            .map(|j| kept_targets.iter().map(|&t| n[t][j]).sum())
            .collect();
        let degree = g.degrees(ty);
        let mut want: Vec<usize> = (0..cols).collect();
        want.sort_by(|&a, &b| {
            score[b]
                .total_cmp(&score[a])
                .then(degree[b].cmp(&degree[a]))
                .then(a.cmp(&b))
        });
        let mut want = want[..budget].to_vec();
        want.sort_unstable();
        assert_eq!(plan.kept[ty], want, "{ty}");
    }
}

#[test]
fn shared_leaf_keeps_fathers_two_hops_apart() {
    let g = load_graph(fixture("shared_leaf")).unwrap();
    let h = classify_hierarchy(&g).unwrap();
    let kept_f = BTreeMap::from([("F".to_string(), vec![0, 1])]);
    let syn = synthesize_leaf(&g, &h, "L", &kept_f, 2).unwrap();
    assert_eq!(syn.hyper.len(), 2);
    assert!(syn.hyper.iter().all(|hn| hn.reverse.len() == 1));

    let kept = BTreeMap::from([("T".to_string(), vec![0, 1]), ("F".to_string(), vec![0, 1])]);
    let out = induce_subgraph(&g, &kept, &syn.hyper).unwrap();
    let fl: Vec<_> = out.relation("FL").unwrap().adjacency.pairs().collect();
    assert_eq!(fl, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
    let adj = undirected(&out);
    assert_eq!(
        bfs_distance(&adj, &("F".into(), 0), &("F".into(), 1), 2),
        Some(2)
    );
}

#[test]
fn budget_one_merge_takes_union_mean() {
    let g = load_graph(fixture("shared_leaf")).unwrap();
    let h = classify_hierarchy(&g).unwrap();
    let kept_f = BTreeMap::from([("F".to_string(), vec![0, 1])]);
    let syn = synthesize_leaf(&g, &h, "L", &kept_f, 1).unwrap();
    assert_eq!(syn.hyper.len(), 1);
    let hn = &syn.hyper[0];
    assert_eq!(hn.members, vec![0, 1, 2]);
    let feats = &g.features["L"];
    let mean: Vec<f64> = (0..2)
        .map(|c| (feats.row(0)[c] + feats.row(1)[c] + feats.row(2)[c]) / 3.0)
        .collect();
    assert_eq!(hn.feature.as_deref(), Some(mean.as_slice()));

    let manual = HyperNode::from_members(&g, "L", vec![2, 0, 1], Vec::new());
    assert_eq!(manual.feature, hn.feature);
}
