//! Personalized PageRank influence of source-type nodes on target-type nodes.
//!
//! A rectangular meta-path matrix `B` (targets × sources) is lifted to the
//! square bipartite adjacency `A = [[0, B], [Bᵀ, 0]]` and normalized as
//! `M = D^{-1/2} A D^{-1/2}`. The influence matrix is the targets × sources
//! block of `α (I − (1 − α) M)^{-1}`.
//!
//! Push mode runs forward push on the random-walk form: with `P = D^{-1} A`,
//! `α e_t (I − (1−α) M)^{-1} = π D^{-1/2}` where `π` is the ordinary PPR
//! vector seeded with `√d_t` mass at `t`. Pushing until every residual
//! satisfies `r_u < δ·d_u` bounds the error of `π_j` by `δ·d_j`, so
//! `δ = ε / √d_max` bounds every influence entry's error by `ε`.
//!
//! Power mode applies the same stopping rule to synchronous sweeps that
//! push every residual at once. Each sweep costs one pass over the edges
//! and shrinks `max_u r_u / d_u` by `1 − α`, which makes it the cheaper
//! choice when many seeds share one solve.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metapath::ComposedAdjacency;
use crate::sparse::SparseAdjacency;

/// Largest lifted dimension accepted by the dense exact solver.
pub const EXACT_MAX_NODES: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PprMode {
    Exact,
    Push,
    Power,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PprConfig {
    /// Teleport probability.
    pub alpha: f64,
    /// Per-entry error bound in push mode.
    pub epsilon: f64,
    pub mode: PprMode,
    pub max_pushes: usize,
}

impl Default for PprConfig {
    fn default() -> Self {
        PprConfig {
            alpha: 0.15,
            epsilon: 1e-4,
            mode: PprMode::Push,
            max_pushes: 500_000_000,
        }
    }
}

impl PprConfig {
    fn check(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha {} outside (0, 1)",
                self.alpha
            )));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::Config(format!(
                "epsilon {} must be positive",
                self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct InfluenceMatrix {
    /// Targets × sources.
    pub matrix: SparseAdjacency,
    pub alpha: f64,
    pub epsilon: f64,
    pub mode: PprMode,
}

/// The bipartite lift of a weighted target × source matrix.
struct Lift {
    n_t: usize,
    b: SparseAdjacency,
    bt: SparseAdjacency,
    degree: Vec<f64>,
}

impl Lift {
    fn new(b: &SparseAdjacency) -> Self {
        let n_t = b.n_rows();
        let mut degree: Vec<f64> = (0..n_t).map(|r| b.row_sum(r)).collect();
        degree.extend(b.col_sums());
        Lift {
            n_t,
            b: b.clone(),
            bt: b.transpose(),
            degree,
        }
    }

    fn n(&self) -> usize {
        self.degree.len()
    }

    fn for_each_neighbor(&self, u: usize, mut f: impl FnMut(usize, f64)) {
        if u < self.n_t {
            for (c, w) in self.b.row_entries(u) {
                f(self.n_t + c, w);
            }
        } else {
            for (r, w) in self.bt.row_entries(u - self.n_t) {
                f(r, w);
            }
        }
    }

    /// Source-block influence of the seed vector `seeds` (target ids, unit
    /// mass each) by forward push. Returns one value per source node.
    fn push(&self, seeds: &[usize], cfg: &PprConfig) -> Result<Vec<f64>> {
        let c = 1.0 - cfg.alpha;
        let d_max = self.degree.iter().cloned().fold(0.0, f64::max);
        if d_max == 0.0 {
            return Ok(vec![0.0; self.n() - self.n_t]);
        }
        let delta = cfg.epsilon / d_max.sqrt();
        let mut p = vec![0.0; self.n()];
        let mut r = vec![0.0; self.n()];
        let mut queued = vec![false; self.n()];
        let mut queue = VecDeque::new();
        for &t in seeds {
            r[t] += self.degree[t].sqrt();
        }
        for &t in seeds {
            if !queued[t] && self.degree[t] > 0.0 && r[t] >= delta * self.degree[t] {
                queued[t] = true;
                queue.push_back(t);
            }
        }
        let mut pushes = 0usize;
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            let ru = r[u];
            if ru < delta * self.degree[u] {
                continue;
            }
            pushes += 1;
            if pushes > cfg.max_pushes {
                return Err(Error::NotConverged {
                    pushes,
                    residual: r.iter().sum(),
                });
            }
            p[u] += cfg.alpha * ru;
            r[u] = 0.0;
            let share = c * ru / self.degree[u];
            self.for_each_neighbor(u, |v, w| {
                r[v] += share * w;
                if !queued[v] && r[v] >= delta * self.degree[v] {
                    queued[v] = true;
                    queue.push_back(v);
                }
            });
        }
        Ok((self.n_t..self.n())
            .map(|j| {
                if self.degree[j] > 0.0 {
                    p[j] / self.degree[j].sqrt()
                } else {
                    0.0
                }
            })
            .collect())
    }

    /// Same result and bound as `push`, by whole-graph sweeps.
    fn power(&self, seeds: &[usize], cfg: &PprConfig) -> Result<Vec<f64>> {
        let c = 1.0 - cfg.alpha;
        let n = self.n();
        let d_max = self.degree.iter().cloned().fold(0.0, f64::max);
        if d_max == 0.0 {
            return Ok(vec![0.0; n - self.n_t]);
        }
        let delta = cfg.epsilon / d_max.sqrt();
        let mut p = vec![0.0; n];
        let mut r = vec![0.0; n];
        for &t in seeds {
            if self.degree[t] > 0.0 {
                r[t] += self.degree[t].sqrt();
            }
        }
        let mut work = 0usize;
        loop {
            let worst = (0..n)
                .into_par_iter()
                .filter(|&u| self.degree[u] > 0.0)
                .map(|u| r[u] / self.degree[u])
                .reduce(|| 0.0, f64::max);
            if worst < delta {
                break;
            }
            work += n;
            if work > cfg.max_pushes {
                return Err(Error::NotConverged {
                    pushes: work,
                    residual: r.iter().sum(),
                });
            }
            for (pu, ru) in p.iter_mut().zip(&r) {
                *pu += cfg.alpha * ru;
            }
            let scaled: Vec<f64> = (0..n)
                .map(|u| {
                    if self.degree[u] > 0.0 {
                        c * r[u] / self.degree[u]
                    } else {
                        0.0
                    }
                })
                .collect();
            r = (0..n)
                .into_par_iter()
                .map(|v| {
                    let mut acc = 0.0;
                    self.for_each_neighbor(v, |u, w| acc += scaled[u] * w);
                    acc
                })
                .collect();
        }
        Ok((self.n_t..n)
            .map(|j| {
                if self.degree[j] > 0.0 {
                    p[j] / self.degree[j].sqrt()
                } else {
                    0.0
                }
            })
            .collect())
    }

    /// Dense `α (I − (1−α) M)^{-1}`.
    fn dense_inverse(&self, alpha: f64) -> Result<DMatrix<f64>> {
        let n = self.n();
        if n > EXACT_MAX_NODES {
            return Err(Error::Config(format!(
                "exact PPR limited to {EXACT_MAX_NODES} lifted nodes, got {n}"
            )));
        }
        let mut sys = DMatrix::<f64>::identity(n, n);
        let c = 1.0 - alpha;
        for u in 0..n {
            self.for_each_neighbor(u, |v, w| {
                sys[(u, v)] -= c * w / (self.degree[u] * self.degree[v]).sqrt();
            });
        }
        let inv = sys
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::contract("PPR system is singular"))?;
        Ok(inv * alpha)
    }
}

fn raw_weights(adj: &ComposedAdjacency) -> Result<&SparseAdjacency> {
    if adj
        .matrix
        .values()
        .is_some_and(|v| v.iter().any(|&x| !x.is_finite() || x < 0.0))
    {
        return Err(Error::contract("PPR needs non-negative finite weights"));
    }
    Ok(&adj.matrix)
}

/// Full targets × sources influence block of one meta-path. The input
/// matrix supplies the lift's edge weights (path counts or row-normalized
/// values); the symmetric normalization is applied here.
pub fn ppr_influence(adj: &ComposedAdjacency, cfg: &PprConfig) -> Result<InfluenceMatrix> {
    cfg.check()?;
    let lift = Lift::new(raw_weights(adj)?);
    let n_t = lift.n_t;
    let n_s = lift.n() - n_t;
    let rows: Vec<Vec<(usize, f64)>> = match cfg.mode {
        PprMode::Push | PprMode::Power => (0..n_t)
            .into_par_iter()
            .map(|t| {
                let v = if cfg.mode == PprMode::Push {
                    lift.push(&[t], cfg)?
                } else {
                    lift.power(&[t], cfg)?
                };
                Ok(v.into_iter()
                    .enumerate()
                    .filter(|(_, x)| *x > 0.0)
                    .collect())
            })
            .collect::<Result<_>>()?,
        PprMode::Exact => {
            let inv = lift.dense_inverse(cfg.alpha)?;
            (0..n_t)
                .map(|t| {
                    (0..n_s)
                        .map(|j| (j, inv[(t, n_t + j)]))
                        .filter(|(_, x)| *x > 0.0)
                        .collect()
                })
                .collect()
        }
    };
    let mut indptr = vec![0];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for row in rows {
        for (j, x) in row {
            indices.push(j as u32);
            values.push(x);
        }
        indptr.push(indices.len());
    }
    Ok(InfluenceMatrix {
        matrix: SparseAdjacency::from_raw_parts(n_t, n_s, indptr, indices, Some(values)),
        alpha: cfg.alpha,
        epsilon: cfg.epsilon,
        mode: cfg.mode,
    })
}

/// Column sums of the influence block over the `seeds` rows, computed
/// directly from a multi-seed solve. In push and power mode each entry is
/// within `ε` of the exact sum.
pub fn aggregate_influence(
    adj: &ComposedAdjacency,
    seeds: &[usize],
    cfg: &PprConfig,
) -> Result<Vec<f64>> {
    cfg.check()?;
    let lift = Lift::new(raw_weights(adj)?);
    if let Some(&bad) = seeds.iter().find(|&&t| t >= lift.n_t) {
        return Err(Error::contract(format!("seed {bad} is not a target row")));
    }
    match cfg.mode {
        PprMode::Push => lift.push(seeds, cfg),
        PprMode::Power => lift.power(seeds, cfg),
        PprMode::Exact => {
            let inv = lift.dense_inverse(cfg.alpha)?;
            Ok((lift.n_t..lift.n())
                .map(|j| seeds.iter().map(|&t| inv[(t, j)]).sum())
                .collect())
        }
    }
}
