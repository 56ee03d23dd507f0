//! End-to-end condensation: load, select targets, condense the other types,
//! induce the output graph, save.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::{apportion, type_budget, SelectionBudget};
use crate::error::{Error, InStage, Result};
use crate::father::Importance;
use crate::graph::HeteroGraph;
use crate::greedy::GreedyMode;
use crate::hierarchy::{classify_hierarchy, parse_role_overrides, Role, TypeHierarchy};
use crate::induce::induce_subgraph;
use crate::io::{load_graph, save_graph, SCHEMA_FILE};
use crate::metapath::{compose_with, enumerate_metapaths, ComposedAdjacency, Normalization};
use crate::other_types::{condense_other_types, OtherTypesConfig};
use crate::ppr::{PprConfig, PprMode};
use crate::report::{
    ClassSummary, CondensationReport, EdgeSummary, MetapathInfo, PathCoverage, StageTiming,
    TargetSummary, TypeSummary, REPORT_FORMAT_VERSION,
};
use crate::sparse::ProductOptions;
use crate::target::{class_counts, unified_select, Selection};

/// File name of the JSON report inside an output directory.
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolMode {
    /// Labeled nodes of the train split.
    Train,
    /// Every labeled target node outside the test split.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceKind {
    Ppr,
    Degree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Unified,
    Random,
}

/// Algorithm parameters of a run.
#[derive(Debug, Clone)]
pub struct CondenseParams {
    pub ratio: f64,
    pub max_hops: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub ppr_mode: PprMode,
    pub importance: ImportanceKind,
    pub pool: PoolMode,
    pub seed: u64,
    pub greedy: GreedyMode,
    pub method: Method,
    pub roles: BTreeMap<String, Role>,
    pub product: ProductOptions,
}

impl Default for CondenseParams {
    fn default() -> Self {
        let ppr = PprConfig::default();
        CondenseParams {
            ratio: 0.1,
            max_hops: 2,
            alpha: ppr.alpha,
            epsilon: ppr.epsilon,
            ppr_mode: PprMode::Power,
            importance: ImportanceKind::Ppr,
            pool: PoolMode::Train,
            seed: 0,
            greedy: GreedyMode::Lazy,
            method: Method::Unified,
            roles: BTreeMap::new(),
            product: ProductOptions::default(),
        }
    }
}

impl CondenseParams {
    pub fn check(&self) -> Result<()> {
        if !(self.ratio > 0.0 && self.ratio <= 1.0) {
            return Err(Error::Config(format!(
                "ratio {} outside (0, 1]",
                self.ratio
            )));
        }
        if self.max_hops == 0 {
            return Err(Error::Config("hop bound must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha {} outside (0, 1)",
                self.alpha
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon {} must be positive",
                self.epsilon
            )));
        }
        Ok(())
    }

    fn ppr(&self) -> PprConfig {
        PprConfig {
            alpha: self.alpha,
            epsilon: self.epsilon,
            mode: self.ppr_mode,
            ..PprConfig::default()
        }
    }

    fn describe(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("ratio".into(), self.ratio.to_string());
        m.insert("hops".into(), self.max_hops.to_string());
        m.insert("alpha".into(), self.alpha.to_string());
        m.insert("epsilon".into(), self.epsilon.to_string());
        m.insert(
            "ppr_mode".into(),
            format!("{:?}", self.ppr_mode).to_lowercase(),
        );
        m.insert(
            "importance".into(),
            format!("{:?}", self.importance).to_lowercase(),
        );
        m.insert("pool".into(), format!("{:?}", self.pool).to_lowercase());
        m.insert("seed".into(), self.seed.to_string());
        m
    }
}

/// A run from an input directory to an output directory.
#[derive(Debug, Clone)]
pub struct CondenseConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Extra copy of the JSON report; one is always written into the output
    /// directory.
    pub report: Option<PathBuf>,
    /// `type role` override file.
    pub roles: Option<PathBuf>,
    pub params: CondenseParams,
}

/// The condensed graph together with its report.
#[derive(Debug, Clone)]
pub struct Condensation {
    pub graph: HeteroGraph,
    pub report: CondensationReport,
}

struct Clock {
    last: Instant,
    stages: Vec<StageTiming>,
}

impl Clock {
    fn new() -> Self {
        Clock {
            last: Instant::now(),
            stages: Vec::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        log::debug!("{stage}: {:.3}s", (now - self.last).as_secs_f64());
        self.stages.push(StageTiming {
            stage: stage.to_string(),
            seconds: (now - self.last).as_secs_f64(),
        });
        self.last = now;
    }
}

/// Target ids eligible for selection.
pub fn selection_pool(graph: &HeteroGraph, mode: PoolMode) -> Vec<usize> {
    let mut pool: Vec<usize> = match mode {
        PoolMode::Train => graph.splits.train.clone(),
        PoolMode::All => {
            let mut test = vec![false; graph.target_count()];
            for &t in &graph.splits.test {
                test[t] = true;
            }
            (0..graph.target_count()).filter(|&v| !test[v]).collect()
        }
    };
    pool.retain(|&v| graph.labels.get(v).is_some_and(Option::is_some));
    pool.sort_unstable();
    pool.dedup();
    pool
}

/// Hierarchy with overrides applied.
pub fn hierarchy_for(graph: &HeteroGraph, roles: &BTreeMap<String, Role>) -> Result<TypeHierarchy> {
    let mut h = classify_hierarchy(graph)?;
    if !roles.is_empty() {
        h.apply_overrides(graph, roles)?;
    }
    Ok(h)
}

/// Per-class target budget: `⌈r·N_target⌉` split over the pool's classes,
/// cut to the pool size if larger. `None` when every target node is kept.
pub fn target_budget(
    graph: &HeteroGraph,
    pool: &[usize],
    ratio: f64,
) -> Result<Option<(SelectionBudget, bool)>> {
    let n = graph.target_count();
    let total = type_budget(ratio, n);
    if total >= n {
        return Ok(None);
    }
    let capped = total > pool.len();
    let b = apportion(&graph.labels, pool, ratio, total.min(pool.len()))?;
    Ok(Some((b, capped)))
}

/// Composed path-count adjacencies of every meta-path ending at the target.
pub fn target_metapaths(
    graph: &HeteroGraph,
    params: &CondenseParams,
) -> Result<Vec<ComposedAdjacency>> {
    let paths = enumerate_metapaths(graph, &graph.target_type, params.max_hops)?;
    paths
        .par_iter()
        .map(|p| compose_with(graph, p, Normalization::None, &params.product))
        .collect()
}

/// Runs the target selection alone, for inspection.
pub fn select_targets(
    graph: &HeteroGraph,
    params: &CondenseParams,
) -> Result<(Vec<ComposedAdjacency>, SelectionBudget, Selection)> {
    params.check()?;
    let pool = selection_pool(graph, params.pool);
    let n = graph.target_count();
    let b = apportion(
        &graph.labels,
        &pool,
        params.ratio,
        type_budget(params.ratio, n).min(pool.len()),
    )?;
    let composed = target_metapaths(graph, params)?;
    let sel = unified_select(graph, &composed, &b, &pool, params.greedy)?;
    Ok((composed, b, sel))
}

/// Condenses an in-memory graph.
pub fn condense(graph: &HeteroGraph, params: &CondenseParams) -> Result<Condensation> {
    params.check().in_stage("config")?;
    let mut clock = Clock::new();
    let hierarchy = hierarchy_for(graph, &params.roles).in_stage("hierarchy")?;
    let mut warnings: Vec<String> = hierarchy
        .ambiguous
        .iter()
        .map(|t| format!("leaf type {t} has no father type neighbour"))
        .collect();
    clock.lap("hierarchy");

    let pool = selection_pool(graph, params.pool);
    let budget = target_budget(graph, &pool, params.ratio).in_stage("budget")?;
    let n_target = graph.target_count();

    let mut composed = Vec::new();
    let mut selection = None;
    let kept_targets: Vec<usize> = match (&budget, params.method) {
        (None, _) => (0..n_target).collect(),
        (Some((b, _)), Method::Unified) => {
            composed = target_metapaths(graph, params).in_stage("metapaths")?;
            clock.lap("metapaths");
            let sel =
                unified_select(graph, &composed, b, &pool, params.greedy).in_stage("target")?;
            let ids = sel.selected.clone();
            selection = Some(sel);
            ids
        }
        (Some((b, _)), Method::Random) => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            let mut ids = Vec::new();
            for (c, members) in graph.class_members(&pool) {
                for i in sample(&mut rng, members.len(), b.get(c)).into_vec() {
                    ids.push(members[i]);
                }
            }
            ids
        }
    };
    clock.lap("target");

    let (kept, hyper, mut types) = match params.method {
        Method::Unified => {
            let cfg = OtherTypesConfig {
                ratio: params.ratio,
                max_hops: params.max_hops,
                importance: match params.importance {
                    ImportanceKind::Ppr => Importance::Ppr(params.ppr()),
                    ImportanceKind::Degree => Importance::Degree,
                },
                product: params.product,
            };
            let plan =
                condense_other_types(graph, &hierarchy, &kept_targets, &cfg).in_stage("others")?;
            let types: Vec<TypeSummary> = plan
                .outcomes
                .into_iter()
                .map(|o| {
                    if let Some(w) = &o.warning {
                        warnings.push(format!("{}: {w}", o.ty));
                    }
                    TypeSummary {
                        ty: o.ty,
                        role: o.role,
                        original: o.original,
                        budget: o.budget,
                        condensed: o.condensed,
                        capped_by_groups: o.capped_by_groups,
                        anchor_type: o.anchor_type,
                        paths: o.paths,
                        top_influence: o.top_influence,
                        merges: o.merges,
                    }
                })
                .collect();
            (plan.kept, plan.hyper, types)
        }
        Method::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(1));
            let mut kept = BTreeMap::new();
            let mut types = Vec::new();
            for t in &graph.node_types {
                if t.name == graph.target_type {
                    continue;
                }
                let b = type_budget(params.ratio, t.count);
                let mut ids = sample(&mut rng, t.count, b).into_vec();
                ids.sort_unstable();
                kept.insert(t.name.clone(), ids);
                types.push(TypeSummary {
                    ty: t.name.clone(),
                    role: hierarchy.role(&t.name).unwrap_or(Role::Leaf),
                    original: t.count,
                    budget: b,
                    condensed: b,
                    capped_by_groups: false,
                    anchor_type: None,
                    paths: Vec::new(),
                    top_influence: Vec::new(),
                    merges: Vec::new(),
                });
            }
            (kept, Vec::new(), types)
        }
    };
    clock.lap("others");

    let mut all_kept = kept;
    let mut sorted_targets = kept_targets.clone();
    sorted_targets.sort_unstable();
    all_kept.insert(graph.target_type.clone(), sorted_targets);
    let out = induce_subgraph(graph, &all_kept, &hyper).in_stage("induce")?;
    out.validate().into_result().in_stage("induce")?;
    clock.lap("induce");

    let target_budget_total = budget.as_ref().map_or(n_target, |(b, _)| b.total);
    types.insert(
        0,
        TypeSummary {
            ty: graph.target_type.clone(),
            role: Role::Root,
            original: n_target,
            budget: type_budget(params.ratio, n_target),
            condensed: kept_targets.len(),
            capped_by_groups: false,
            anchor_type: None,
            paths: Vec::new(),
            top_influence: Vec::new(),
            merges: Vec::new(),
        },
    );
    if let Some((_, true)) = budget {
        warnings.push(format!(
            "target budget {} cut to the {} labeled pool nodes",
            type_budget(params.ratio, n_target),
            pool.len()
        ));
    }

    let all_labeled: Vec<usize> = (0..n_target).collect();
    let original = class_counts(&graph.labels, &all_labeled);
    let selected = class_counts(&graph.labels, &kept_targets);
    let pool_counts = class_counts(&graph.labels, &pool);
    let classes = original
        .keys()
        .chain(pool_counts.keys())
        .copied()
        .collect::<std::collections::BTreeSet<u32>>()
        .into_iter()
        .map(|c| ClassSummary {
            class: c,
            original: original.get(&c).copied().unwrap_or(0),
            pool: pool_counts.get(&c).copied().unwrap_or(0),
            quota: budget
                .as_ref()
                .and_then(|(b, _)| b.quota.get(&c).copied())
                .unwrap_or(0.0),
            budget: budget.as_ref().map_or(0, |(b, _)| b.get(c)),
            selected: selected.get(&c).copied().unwrap_or(0),
        })
        .collect();

    let (coverage, top_scores) = match &selection {
        Some(sel) => (
            sel.table
                .paths
                .iter()
                .map(|p| PathCoverage {
                    path: p.path.clone(),
                    normalizer: p.normalizer,
                    group_size: p.group_size,
                    covered: p
                        .runs
                        .iter()
                        .map(|r| (r.class, r.covered.last().copied().unwrap_or(0)))
                        .collect(),
                })
                .collect(),
            {
                let mut s = sel.table.aggregated.clone();
                s.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.node.cmp(&b.node)));
                s.truncate(10);
                s
            },
        ),
        None => (Vec::new(), Vec::new()),
    };

    let metapaths = composed
        .iter()
        .map(|c| MetapathInfo {
            path: c.metapath.to_string(),
            src_type: c.metapath.src_type().to_string(),
            hops: c.metapath.hops(),
            nnz: c.matrix.nnz(),
            density: c.matrix.density(),
        })
        .collect();

    let report = CondensationReport {
        format_version: REPORT_FORMAT_VERSION,
        method: match params.method {
            Method::Unified => "unified".into(),
            Method::Random => "random".into(),
        },
        parameters: params.describe(),
        types,
        target: TargetSummary {
            pool_size: pool.len(),
            budget: target_budget_total,
            capped_by_pool: matches!(budget, Some((_, true))),
            classes,
            coverage,
            top_scores,
        },
        metapaths,
        edges: EdgeSummary {
            original: graph.num_edges(),
            condensed: out.num_edges(),
        },
        warnings,
        timings: clock.stages,
    };
    for w in &report.warnings {
        log::warn!("{w}");
    }
    Ok(Condensation { graph: out, report })
}

/// Condenses with uniform random picks under the same budgets.
pub fn condense_random(graph: &HeteroGraph, params: &CondenseParams) -> Result<Condensation> {
    condense(
        graph,
        &CondenseParams {
            method: Method::Random,
            ..params.clone()
        },
    )
}

/// Loads, condenses and saves. The output directory appears only once the
/// graph and its report are complete.
pub fn run(config: &CondenseConfig) -> Result<CondensationReport> {
    let start = Instant::now();
    let mut params = config.params.clone();
    params.check().in_stage("config")?;
    if let Some(path) = &config.roles {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::io(path, e))
            .in_stage("config")?;
        params
            .roles
            .extend(parse_role_overrides(&text).in_stage("config")?);
    }
    let graph = load_graph(&config.input).in_stage("load")?;
    let load_secs = start.elapsed().as_secs_f64();
    let mut cond = condense(&graph, &params)?;
    cond.report.timings.insert(
        0,
        StageTiming {
            stage: "load".into(),
            seconds: load_secs,
        },
    );

    let save_start = Instant::now();
    let staging = staging_dir(&config.output).in_stage("save")?;
    let json = cond.report.to_json();
    let written = (|| {
        save_graph(&cond.graph, &staging)?;
        let path = staging.join(REPORT_FILE);
        fs::write(&path, &json).map_err(|e| Error::io(&path, e))?;
        replace_dir(&staging, &config.output)
    })();
    if let Err(e) = written {
        let _ = fs::remove_dir_all(&staging);
        return Err(e).in_stage("save");
    }
    cond.report.timings.push(StageTiming {
        stage: "save".into(),
        seconds: save_start.elapsed().as_secs_f64(),
    });
    if let Some(path) = &config.report {
        fs::write(path, &json)
            .map_err(|e| Error::io(path, e))
            .in_stage("report")?;
    }
    Ok(cond.report)
}

fn staging_dir(output: &Path) -> Result<PathBuf> {
    let name = output.file_name().ok_or_else(|| {
        Error::Config(format!("output path {} has no file name", output.display()))
    })?;
    let parent = match output.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(|e| Error::io(&parent, e))?;
    let staging = parent.join(format!(
        ".{}.partial-{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    }
    Ok(staging)
}

/// Moves `staging` to `output`. An existing `output` is replaced only if it
/// is empty or holds a graph.
fn replace_dir(staging: &Path, output: &Path) -> Result<()> {
    if output.exists() {
        let empty = fs::read_dir(output)
            .map_err(|e| Error::io(output, e))?
            .next()
            .is_none();
        if !empty && !output.join(SCHEMA_FILE).is_file() {
            return Err(Error::Config(format!(
                "refusing to replace {}: it exists and is not a graph directory",
                output.display()
            )));
        }
        fs::remove_dir_all(output).map_err(|e| Error::io(output, e))?;
    }
    fs::rename(staging, output).map_err(|e| Error::io(output, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::toy;

    fn half() -> CondenseParams {
        CondenseParams {
            ratio: 0.5,
            seed: 7,
            ..CondenseParams::default()
        }
    }

    #[test]
    fn toy_half_counts() {
        let g = toy();
        let c = condense(&g, &half()).unwrap();
        assert_eq!(c.graph.node_count("P"), Some(2));
        assert_eq!(c.graph.node_count("A"), Some(2));
        assert_eq!(c.graph.node_count("S"), Some(1));
        assert_eq!(c.report.condensed("P"), Some(2));
        assert_eq!(c.report.format_version, REPORT_FORMAT_VERSION);
        assert_eq!(
            c.report
                .target
                .classes
                .iter()
                .map(|c| c.selected)
                .collect::<Vec<_>>(),
            vec![1, 1]
        );
    }

    #[test]
    fn random_baseline_shares_budgets() {
        let g = toy();
        let a = condense(&g, &half()).unwrap();
        let b = condense_random(&g, &half()).unwrap();
        for ty in ["P", "A", "S"] {
            assert_eq!(a.graph.node_count(ty), b.graph.node_count(ty));
        }
        let again = condense_random(&g, &half()).unwrap();
        assert_eq!(b.graph.provenance, again.graph.provenance);
    }

    #[test]
    fn full_ratio_is_identity() {
        let g = toy();
        let c = condense(
            &g,
            &CondenseParams {
                ratio: 1.0,
                ..half()
            },
        )
        .unwrap();
        assert_eq!(c.graph.relations, g.relations);
        assert_eq!(c.graph.features, g.features);
        assert_eq!(c.graph.labels, g.labels);
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let g = toy();
        for p in [
            CondenseParams {
                ratio: 0.0,
                ..half()
            },
            CondenseParams {
                ratio: 1.5,
                ..half()
            },
            CondenseParams {
                max_hops: 0,
                ..half()
            },
            CondenseParams {
                alpha: 1.0,
                ..half()
            },
            CondenseParams {
                epsilon: 0.0,
                ..half()
            },
        ] {
            let err = condense(&g, &p).unwrap_err();
            assert_eq!(err.stage(), Some("config"));
            assert!(matches!(err.root(), Error::Config(_)));
        }
    }

    #[test]
    fn pool_modes() {
        let mut g = toy();
        g.splits.train = vec![0, 2];
        g.splits.test = vec![3];
        assert_eq!(selection_pool(&g, PoolMode::Train), vec![0, 2]);
        assert_eq!(selection_pool(&g, PoolMode::All), vec![0, 1, 2]);
    }
}
