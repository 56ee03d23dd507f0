//! Greedy maximization of receptive-field coverage plus a per-node modular
//! bonus.
//!
//! The objective for a seed set `S` is
//! `|⋃_{v∈S} RF(v)| · scale + Σ_{v∈S} bonus(v)` with non-negative bonuses,
//! which is monotone submodular, so the greedy result is within `1 − 1/e` of
//! the optimum. The lazy variant keeps stale marginal gains in a max-heap
//! and only re-evaluates the top; with the deterministic tie-break
//! `(gain, degree, −id)` it returns exactly the naive greedy selection.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::metapath::ComposedAdjacency;
use crate::sparse::SparseAdjacency;

/// Set of covered source nodes, as a bitset.
#[derive(Debug, Clone)]
pub struct Coverage<'a> {
    rf: &'a SparseAdjacency,
    bits: Vec<u64>,
    covered: usize,
}

impl<'a> Coverage<'a> {
    pub fn new(rf: &'a SparseAdjacency) -> Self {
        Coverage {
            rf,
            bits: vec![0; rf.n_cols().div_ceil(64)],
            covered: 0,
        }
    }

    #[inline]
    fn is_set(&self, c: u32) -> bool {
        self.bits[(c >> 6) as usize] & (1u64 << (c & 63)) != 0
    }

    /// Source nodes `v` would newly cover.
    pub fn gain(&self, v: usize) -> usize {
        self.rf.row(v).iter().filter(|&&c| !self.is_set(c)).count()
    }

    pub fn add(&mut self, v: usize) -> usize {
        let mut g = 0;
        for &c in self.rf.row(v) {
            let w = &mut self.bits[(c >> 6) as usize];
            let m = 1u64 << (c & 63);
            if *w & m == 0 {
                *w |= m;
                g += 1;
            }
        }
        self.covered += g;
        g
    }

    pub fn covered(&self) -> usize {
        self.covered
    }

    pub fn contains(&self, c: usize) -> bool {
        self.is_set(c as u32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyMode {
    Lazy,
    Naive,
}

/// Coverage-plus-bonus objective over the rows of `rf`.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    pub rf: &'a SparseAdjacency,
    /// Multiplier applied to coverage counts (`1 / |R̂|` in the unified score).
    pub scale: f64,
    /// Selection-independent bonus per row, or none.
    pub bonus: Option<&'a [f64]>,
    /// Tie-break degree per row; ties on gain prefer the larger degree.
    pub degree: &'a [usize],
}

impl Objective<'_> {
    fn gain(&self, cov: &Coverage<'_>, v: usize) -> f64 {
        cov.gain(v) as f64 * self.scale + self.bonus.map_or(0.0, |b| b[v])
    }

    /// Objective value of an arbitrary set, evaluated from scratch.
    pub fn value(&self, set: &[usize]) -> f64 {
        let mut cov = Coverage::new(self.rf);
        let mut bonus = 0.0;
        for &v in set {
            cov.add(v);
            bonus += self.bonus.map_or(0.0, |b| b[v]);
        }
        cov.covered() as f64 * self.scale + bonus
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GreedyTrace {
    pub selected: Vec<usize>,
    /// Marginal objective gain of each pick.
    pub gains: Vec<f64>,
    /// Covered-set size after each pick.
    pub covered: Vec<usize>,
    /// Objective value after each pick.
    pub objective: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    degree: usize,
    node: usize,
    round: usize,
}

impl Candidate {
    fn key(&self) -> (f64, usize, Reverse<usize>) {
        (self.gain, self.degree, Reverse(self.node))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        let (ga, da, ia) = self.key();
        let (gb, db, ib) = other.key();
        ga.total_cmp(&gb).then(da.cmp(&db)).then(ia.cmp(&ib))
    }
}

pub fn greedy_maximize(
    obj: &Objective<'_>,
    pool: &[usize],
    budget: usize,
    mode: GreedyMode,
) -> Result<GreedyTrace> {
    if budget > pool.len() {
        return Err(Error::contract(format!(
            "budget {budget} exceeds pool of {} candidates",
            pool.len()
        )));
    }
    if let Some(&bad) = pool.iter().find(|&&v| v >= obj.rf.n_rows()) {
        return Err(Error::contract(format!(
            "pool node {bad} has no receptive-field row"
        )));
    }
    let mut cov = Coverage::new(obj.rf);
    let mut trace = GreedyTrace::default();
    let mut total = 0.0;
    let mut record = |cov: &mut Coverage<'_>, trace: &mut GreedyTrace, v: usize, gain: f64| {
        cov.add(v);
        total += gain;
        trace.selected.push(v);
        trace.gains.push(gain);
        trace.covered.push(cov.covered());
        trace.objective.push(total);
    };

    match mode {
        GreedyMode::Naive => {
            let mut remaining: Vec<usize> = pool.to_vec();
            for round in 0..budget {
                let (idx, best) = remaining
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        (
                            i,
                            Candidate {
                                gain: obj.gain(&cov, v),
                                degree: obj.degree[v],
                                node: v,
                                round,
                            },
                        )
                    })
                    .max_by(|a, b| a.1.cmp(&b.1))
                    .expect("pool is non-empty while budget remains");
                remaining.swap_remove(idx);
                record(&mut cov, &mut trace, best.node, best.gain);
            }
        }
        GreedyMode::Lazy => {
            let mut heap: BinaryHeap<Candidate> = pool
                .iter()
                .map(|&v| Candidate {
                    gain: obj.gain(&cov, v),
                    degree: obj.degree[v],
                    node: v,
                    round: 0,
                })
                .collect();
            let mut round = 0;
            while round < budget {
                let mut top = heap.pop().expect("pool is non-empty while budget remains");
                if top.round == round {
                    record(&mut cov, &mut trace, top.node, top.gain);
                    round += 1;
                } else {
                    top.gain = obj.gain(&cov, top.node);
                    top.round = round;
                    heap.push(top);
                }
            }
        }
    }
    Ok(trace)
}

/// Pure receptive-field coverage along one composed meta-path: returns the
/// picks in order and the covered-set size after each pick. Ties prefer
/// larger receptive fields, then lower ids.
pub fn greedy_coverage(
    adj: &ComposedAdjacency,
    pool: &[usize],
    budget: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if pool.is_empty() && budget > 0 {
        return Err(Error::contract("empty pool with a positive budget"));
    }
    let degree: Vec<usize> = (0..adj.matrix.n_rows())
        .map(|r| adj.matrix.row_len(r))
        .collect();
    let obj = Objective {
        rf: &adj.matrix,
        scale: 1.0,
        bonus: None,
        degree: &degree,
    };
    let trace = greedy_maximize(&obj, pool, budget, GreedyMode::Lazy)?;
    Ok((trace.selected, trace.covered))
}
