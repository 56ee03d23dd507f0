//! Condensation budgets: `⌈r·N⌉` per node type and a class-proportional
//! split of the target-type budget.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// `⌈ratio · n⌉`, capped at `n`. Products within 1e-9 of an integer are
/// treated as that integer so that e.g. `0.1 · 30` gives 3.
pub fn type_budget(ratio: f64, n: usize) -> usize {
    let exact = ratio * n as f64;
    let b = (exact - 1e-9 * exact.abs().max(1.0)).ceil().max(0.0) as usize;
    b.min(n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionBudget {
    pub ratio: f64,
    pub total: usize,
    /// Labeled pool members of each class.
    pub population: BTreeMap<u32, usize>,
    /// Exact proportional share `total · n_c / |pool|`.
    pub quota: BTreeMap<u32, f64>,
    pub per_class: BTreeMap<u32, usize>,
}

impl SelectionBudget {
    pub fn get(&self, class: u32) -> usize {
        self.per_class.get(&class).copied().unwrap_or(0)
    }
}

/// Per-class budgets summing to `⌈r·|pool|⌉`.
pub fn class_budgets(
    labels: &[Option<u32>],
    pool: &[usize],
    ratio: f64,
) -> Result<SelectionBudget> {
    let labeled = population(labels, pool).values().sum();
    apportion(labels, pool, ratio, type_budget(ratio, labeled))
}

fn population(labels: &[Option<u32>], pool: &[usize]) -> BTreeMap<u32, usize> {
    let mut pop = BTreeMap::new();
    for &v in pool {
        if let Some(Some(c)) = labels.get(v) {
            *pop.entry(*c).or_insert(0) += 1;
        }
    }
    pop
}

/// Splits `total` slots over the classes present in `pool`, proportionally to
/// their pool population.
///
/// Floors of the exact quotas are handed out first, the leftover slots go to
/// the largest remainders (ties: larger class, then lower class id), and a
/// class left empty while present in the pool then takes one slot from the
/// class with the largest surplus over its quota, provided that keeps the
/// donor within one slot of its quota.
pub fn apportion(
    labels: &[Option<u32>],
    pool: &[usize],
    ratio: f64,
    total: usize,
) -> Result<SelectionBudget> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::Config(format!("ratio {ratio} outside (0, 1]")));
    }
    let pop = population(labels, pool);
    let n: usize = pop.values().sum();
    if n == 0 {
        return Err(Error::contract("selection pool holds no labeled nodes"));
    }
    if total > n {
        return Err(Error::contract(format!(
            "budget {total} exceeds the {n} labeled nodes in the pool"
        )));
    }

    let quota: BTreeMap<u32, f64> = pop
        .iter()
        .map(|(&c, &k)| (c, total as f64 * k as f64 / n as f64))
        .collect();
    let mut per_class: BTreeMap<u32, usize> = quota
        .iter()
        .map(|(&c, &q)| (c, (q.floor() as usize).min(pop[&c])))
        .collect();

    let mut order: Vec<u32> = pop.keys().copied().collect();
    order.sort_by(|a, b| {
        let ra = quota[a] - quota[a].floor();
        let rb = quota[b] - quota[b].floor();
        rb.total_cmp(&ra).then(pop[b].cmp(&pop[a])).then(a.cmp(b))
    });
    let mut left = total - per_class.values().sum::<usize>();
    while left > 0 {
        let before = left;
        for c in &order {
            if left == 0 {
                break;
            }
            let slot = per_class.get_mut(c).unwrap();
            if *slot < pop[c] {
                *slot += 1;
                left -= 1;
            }
        }
        if left == before {
            break;
        }
    }

    let mut needy: Vec<u32> = per_class
        .iter()
        .filter(|(_, &b)| b == 0)
        .map(|(&c, _)| c)
        .collect();
    needy.sort_by(|a, b| pop[b].cmp(&pop[a]).then(a.cmp(b)));
    for c in needy {
        let donor = per_class
            .iter()
            .filter(|(&d, &b)| d != c && b >= 2 && b as f64 >= quota[&d])
            .max_by(|(da, ba), (db, bb)| {
                let sa = **ba as f64 - quota[*da];
                let sb = **bb as f64 - quota[*db];
                sa.total_cmp(&sb).then(db.cmp(da))
            })
            .map(|(&d, _)| d);
        if let Some(d) = donor {
            *per_class.get_mut(&d).unwrap() -= 1;
            *per_class.get_mut(&c).unwrap() += 1;
        }
    }

    Ok(SelectionBudget {
        ratio,
        total,
        population: pop,
        quota,
        per_class,
    })
}
