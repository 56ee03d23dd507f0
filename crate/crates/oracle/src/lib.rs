//! Brute-force reference computations for testing `hetcondense`.
//!
//! Nothing here shares code with the engine: receptive fields come from
//! dense boolean products, PPR from Gauss-Jordan elimination, and the
//! selection objective from exhaustive enumeration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Largest number of subsets `brute_force_f` will enumerate.
pub const MAX_COMBINATIONS: u128 = 1_000_000;
/// Largest dense dimension accepted by the solvers.
pub const MAX_DENSE: usize = 500;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("{count} candidate subsets exceed the cap of {MAX_COMBINATIONS}")]
    TooManyCombinations { count: u128 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix of dimension {0} exceeds {MAX_DENSE}")]
    TooLarge(usize),
    #[error("singular system")]
    Singular,
    #[error("infeasible constraint: {0}")]
    Infeasible(String),
}

pub type DenseBool = Vec<Vec<bool>>;
pub type Dense = Vec<Vec<f64>>;

/// Boolean chain product `steps[0] · steps[1] · …`.
pub fn dense_compose(steps: &[DenseBool]) -> Result<DenseBool, OracleError> {
    let first = steps
        .first()
        .ok_or_else(|| OracleError::Dimension("empty chain".into()))?;
    let mut acc = first.clone();
    for m in &steps[1..] {
        let inner = acc.first().map_or(0, Vec::len);
        if inner != m.len() {
            return Err(OracleError::Dimension(format!(
                "{inner} columns against {} rows",
                m.len()
            )));
        }
        let cols = m.first().map_or(0, Vec::len);
        for d in [acc.len(), inner, cols] {
            if d > MAX_DENSE {
                return Err(OracleError::TooLarge(d));
            }
        }
        acc = acc
            .iter()
            .map(|row| {
                (0..cols)
                    .map(|j| (0..inner).any(|k| row[k] && m[k][j]))
                    .collect()
            })
            .collect();
    }
    Ok(acc)
}

/// `D^{-1/2} [[0, B], [Bᵀ, 0]] D^{-1/2}` for a rows × cols weight matrix;
/// rows come first in the lifted ordering.
pub fn dense_sym_bipartite_lift(b: &Dense) -> Dense {
    let r = b.len();
    let c = b.first().map_or(0, Vec::len);
    let n = r + c;
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..r {
        for j in 0..c {
            a[i][r + j] = b[i][j];
            a[r + j][i] = b[i][j];
        }
    }
    let deg: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    for i in 0..n {
        for j in 0..n {
            if a[i][j] != 0.0 {
                a[i][j] /= (deg[i] * deg[j]).sqrt();
            }
        }
    }
    a
}

/// `α (I − (1 − α) A)^{-1}` by Gauss-Jordan elimination with partial
/// pivoting.
pub fn dense_ppr(a: &Dense, alpha: f64) -> Result<Dense, OracleError> {
    let n = a.len();
    if n > MAX_DENSE {
        return Err(OracleError::TooLarge(n));
    }
    if a.iter().any(|row| row.len() != n) {
        return Err(OracleError::Dimension("matrix is not square".into()));
    }
    let c = 1.0 - alpha;
    // augmented [I − cA | αI]
    let mut m: Dense = (0..n)
        .map(|i| {
            let mut row = vec![0.0; 2 * n];
            for j in 0..n {
                row[j] = if i == j { 1.0 } else { 0.0 } - c * a[i][j];
            }
            row[n + i] = alpha;
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        if m[pivot][col].abs() < 1e-14 {
            return Err(OracleError::Singular);
        }
        m.swap(col, pivot);
        let p = m[col][col];
        for x in m[col].iter_mut() {
            *x /= p;
        }
        let pivot = m[col].clone();
        for (row, r) in m.iter_mut().enumerate() {
            if row != col && r[col] != 0.0 {
                let f = r[col];
                for (x, p) in r.iter_mut().zip(&pivot) {
                    *x -= f * p;
                }
            }
        }
    }
    Ok(m.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Targets × sources block of the PPR matrix of the lifted `b`.
pub fn dense_bipartite_influence(b: &Dense, alpha: f64) -> Result<Dense, OracleError> {
    let r = b.len();
    let full = dense_ppr(&dense_sym_bipartite_lift(b), alpha)?;
    Ok(full
        .into_iter()
        .take(r)
        .map(|row| row[r..].to_vec())
        .collect())
}

/// One meta-path of a selection instance.
#[derive(Debug, Clone)]
pub struct PathSets {
    /// Reachable source ids of every target node.
    pub reach: Vec<BTreeSet<usize>>,
    /// Source-type population, the coverage normalizer.
    pub n_src: usize,
    /// Paths sharing a group id share their endpoint types.
    pub group: usize,
}

/// Everything `F` depends on.
#[derive(Debug, Clone)]
pub struct Instance {
    pub paths: Vec<PathSets>,
    pub pool: Vec<usize>,
    pub class_of: Vec<Option<u32>>,
    /// Exact number of picks required from each class.
    pub per_class: BTreeMap<u32, usize>,
}

fn jaccard_sets(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        1.0
    } else {
        a.intersection(b).count() as f64 / union as f64
    }
}

impl Instance {
    /// `1 − Ĵ` of node `v` on path `p`; 1 when the path has no partner.
    pub fn diversity(&self, p: usize, v: usize) -> f64 {
        let partners: Vec<usize> = (0..self.paths.len())
            .filter(|&q| q != p && self.paths[q].group == self.paths[p].group)
            .collect();
        if partners.is_empty() {
            return 1.0;
        }
        let mean = partners
            .iter()
            .map(|&q| jaccard_sets(&self.paths[p].reach[v], &self.paths[q].reach[v]))
            .sum::<f64>()
            / partners.len() as f64;
        1.0 - mean
    }

    /// Objective of path `p`: covered fraction of its sources plus the
    /// diversity bonus of every member.
    pub fn path_value(&self, p: usize, subset: &[usize]) -> f64 {
        let path = &self.paths[p];
        let covered: BTreeSet<usize> = subset
            .iter()
            .flat_map(|&v| path.reach[v].iter().copied())
            .collect();
        let cov = if path.n_src == 0 {
            0.0
        } else {
            covered.len() as f64 / path.n_src as f64
        };
        cov + subset.iter().map(|&v| self.diversity(p, v)).sum::<f64>()
    }

    /// Sum of `path_value` over all paths.
    pub fn f_value(&self, subset: &[usize]) -> f64 {
        (0..self.paths.len())
            .map(|p| self.path_value(p, subset))
            .sum()
    }

    /// Second route to `path_value`: coverage counted column by column from
    /// an incidence table, diversity from pairwise counts.
    pub fn path_value_by_columns(&self, p: usize, subset: &[usize]) -> f64 {
        let path = &self.paths[p];
        let mut hit = 0usize;
        for col in 0..path.n_src {
            if subset.iter().any(|&v| path.reach[v].contains(&col)) {
                hit += 1;
            }
        }
        let cov = if path.n_src == 0 {
            0.0
        } else {
            hit as f64 / path.n_src as f64
        };
        let mut bonus = 0.0;
        for &v in subset {
            let mut total = 0.0;
            let mut partners = 0usize;
            for (q, other) in self.paths.iter().enumerate() {
                if q == p || other.group != path.group {
                    continue;
                }
                partners += 1;
                let mut inter = 0usize;
                let mut uni = 0usize;
                let top = path.n_src.max(other.n_src);
                for col in 0..top {
                    let a = path.reach[v].contains(&col);
                    let b = other.reach[v].contains(&col);
                    inter += usize::from(a && b);
                    uni += usize::from(a || b);
                }
                total += if uni == 0 {
                    1.0
                } else {
                    inter as f64 / uni as f64
                };
            }
            bonus += if partners == 0 {
                1.0
            } else {
                1.0 - total / partners as f64
            };
        }
        cov + bonus
    }
}

/// `n choose k`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(
        items: &[usize],
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive maximizer of `value` over subsets of the pool with exactly
/// `per_class[c]` members of each class `c`. Ties keep the first subset in
/// lexicographic order.
pub fn brute_force<F>(inst: &Instance, value: F) -> Result<(Vec<usize>, f64), OracleError>
where
    F: Fn(&[usize]) -> f64,
{
    let mut by_class: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for &v in &inst.pool {
        if let Some(c) = inst.class_of.get(v).copied().flatten() {
            by_class.entry(c).or_default().push(v);
        }
    }
    let mut count: u128 = 1;
    for (&c, &k) in &inst.per_class {
        let n = by_class.get(&c).map_or(0, Vec::len);
        if k > n {
            return Err(OracleError::Infeasible(format!(
                "class {c} needs {k} of {n}"
            )));
        }
        count = count.saturating_mul(binomial(n, k));
    }
    if count > MAX_COMBINATIONS {
        return Err(OracleError::TooManyCombinations { count });
    }
    let choices: Vec<Vec<Vec<usize>>> = inst
        .per_class
        .iter()
        .map(|(c, &k)| subsets(by_class.get(c).map_or(&[][..], Vec::as_slice), k))
        .collect();

    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut idx = vec![0usize; choices.len()];
    loop {
        let mut subset: Vec<usize> = idx
            .iter()
            .zip(&choices)
            .flat_map(|(&i, ch)| ch[i].iter().copied())
            .collect();
        subset.sort_unstable();
        let val = value(&subset);
        if best.as_ref().is_none_or(|(_, b)| val > *b) {
            best = Some((subset, val));
        }
        // odometer over the per-class choices
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(best.expect("at least one subset"));
            }
            idx[pos] += 1;
            if idx[pos] < choices[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Maximizer of the summed objective `F`.
pub fn brute_force_f(inst: &Instance) -> Result<(Vec<usize>, f64), OracleError> {
    brute_force(inst, |s| inst.f_value(s))
}

/// Covered source count of `subset` on one path.
pub fn coverage(reach: &[BTreeSet<usize>], subset: &[usize]) -> usize {
    subset
        .iter()
        .flat_map(|&v| reach[v].iter())
        .collect::<BTreeSet<_>>()
        .len()
}

/// Reachable sets from the rows of a dense boolean matrix.
pub fn reach_sets(m: &DenseBool) -> Vec<BTreeSet<usize>> {
    m.iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(j, _)| j)
                .collect()
        })
        .collect()
}

/// Engine value against oracle value, with a multiplicative bound for
/// maximization checks.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub instance: String,
    pub oracle: f64,
    pub engine: f64,
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

impl OracleReport {
    /// Passes when `engine ≥ bound · oracle` and the engine does not beat
    /// the optimum by more than rounding.
    pub fn maximization(instance: impl Into<String>, oracle: f64, engine: f64, bound: f64) -> Self {
        let ratio = if oracle == 0.0 { 1.0 } else { engine / oracle };
        let pass = engine + 1e-12 >= bound * oracle && ratio <= 1.0 + 1e-9;
        OracleReport {
            instance: instance.into(),
            oracle,
            engine,
            ratio,
            bound,
            pass,
        }
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: engine {:.6} oracle {:.6} ratio {:.4} (bound {:.4}) {}",
            self.instance,
            self.engine,
            self.oracle,
            self.ratio,
            self.bound,
            if self.pass { "ok" } else { "FAIL" }
        )
    }
}
