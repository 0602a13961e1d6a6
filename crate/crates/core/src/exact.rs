//! Exact integral oracles: exhaustive search and the min-weight-per-value table.

use crate::error::{Error, Result};
use crate::model::{Instance, Item, ItemId, Solution};
use crate::tolerance;

pub const DEFAULT_BRUTE_FORCE_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactOpt {
    pub value: f64,
    pub solution: Solution,
}

/// `opt(V)` by exhaustive search, ties broken towards the lexicographically
/// smallest id set.
pub fn brute_force_opt(instance: &Instance) -> Result<ExactOpt> {
    brute_force_opt_capped(instance, DEFAULT_BRUTE_FORCE_CAP)
}

pub fn brute_force_opt_capped(instance: &Instance, cap: usize) -> Result<ExactOpt> {
    if instance.len() > cap {
        return Err(Error::Size {
            what: "brute-force instance",
            size: instance.len(),
            cap,
        });
    }
    let items = instance.items();
    let mut suffix_value = vec![0.0; items.len() + 1];
    for j in (0..items.len()).rev() {
        suffix_value[j] = suffix_value[j + 1] + items[j].value;
    }
    let mut search = Search {
        items,
        suffix_value,
        limit: instance.weight_limit(),
        path: Vec::with_capacity(items.len()),
        best_value: 0.0,
        best: Vec::new(),
    };
    search.visit(0, 0.0, 0.0);
    Ok(ExactOpt {
        value: search.best_value,
        solution: Solution::from_ids(search.best),
    })
}

struct Search<'a> {
    items: &'a [Item],
    suffix_value: Vec<f64>,
    limit: f64,
    path: Vec<ItemId>,
    best_value: f64,
    best: Vec<ItemId>,
}

impl Search<'_> {
    fn visit(&mut self, j: usize, value: f64, weight: f64) {
        let tol = tolerance::tolerance();
        if value + self.suffix_value[j] < self.best_value - tol {
            return;
        }
        if j == self.items.len() {
            if value > self.best_value + tol
                || (value >= self.best_value - tol && self.path < self.best)
            {
                self.best_value = value;
                self.best.clone_from(&self.path);
            }
            return;
        }
        let it = self.items[j];
        if tolerance::le(weight + it.weight, self.limit) {
            self.path.push(it.id);
            self.visit(j + 1, value + it.value, weight + it.weight);
            self.path.pop();
        }
        self.visit(j + 1, value, weight);
    }
}

/// Minimum total weight for every exact value sum `0..=cap`, for instances
/// with integral values, with lexicographically smallest reconstruction.
#[derive(Debug, Clone)]
pub struct MinWeightTable {
    items: Vec<Item>,
    values: Vec<usize>,
    cap: usize,
    // suffix[j * (cap + 1) + s]: min weight over items[j..] with value exactly s.
    suffix: Vec<f64>,
}

/// Builds the table. `value_cap` defaults to the sum of all values.
pub fn integer_value_opt(instance: &Instance, value_cap: Option<usize>) -> Result<MinWeightTable> {
    let values = integral_values(instance)?;
    let cap = value_cap.unwrap_or_else(|| values.iter().sum());
    let n = values.len();
    let width = cap + 1;
    let mut suffix = vec![f64::INFINITY; (n + 1) * width];
    suffix[n * width] = 0.0;
    for j in (0..n).rev() {
        let (head, tail) = suffix.split_at_mut((j + 1) * width);
        let row = &mut head[j * width..];
        let next = &tail[..width];
        row.copy_from_slice(next);
        let (v, w) = (values[j], instance.items()[j].weight);
        for s in v..width {
            let with = next[s - v] + w;
            if with < row[s] {
                row[s] = with;
            }
        }
    }
    Ok(MinWeightTable {
        items: instance.items().to_vec(),
        values,
        cap,
        suffix,
    })
}

fn integral_values(instance: &Instance) -> Result<Vec<usize>> {
    instance
        .items()
        .iter()
        .map(|it| {
            if it.value.fract() == 0.0 && it.value >= 0.0 && it.value < 2f64.powi(52) {
                Ok(it.value as usize)
            } else {
                Err(Error::domain(format!(
                    "item {} has non-integral value {}",
                    it.id, it.value
                )))
            }
        })
        .collect()
}

impl MinWeightTable {
    pub fn cap(&self) -> usize {
        self.cap
    }

    fn row(&self, j: usize) -> &[f64] {
        let width = self.cap + 1;
        &self.suffix[j * width..(j + 1) * width]
    }

    /// `minweight[s]` for `s = 0..=cap`; infinite where unreachable.
    pub fn minweight(&self) -> &[f64] {
        self.row(0)
    }

    /// The lexicographically smallest min-weight set with value exactly `s`.
    pub fn reconstruct(&self, s: usize) -> Option<Solution> {
        if s > self.cap || !self.minweight()[s].is_finite() {
            return None;
        }
        let tol = tolerance::tolerance();
        let mut target = s;
        let mut ids = Vec::new();
        for j in 0..self.items.len() {
            if target == 0 {
                break;
            }
            let v = self.values[j];
            if v <= target {
                let with = self.row(j + 1)[target - v] + self.items[j].weight;
                if with <= self.row(j)[target] + tol {
                    ids.push(self.items[j].id);
                    target -= v;
                }
            }
        }
        debug_assert_eq!(target, 0);
        Some(Solution::from_ids(ids))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_small_cases() {
        let inst = Instance::new(
            vec![Item::new(1, 2.0, 0.6), Item::new(2, 2.0, 0.6), Item::new(3, 3.0, 1.0)],
            1.0,
        )
        .unwrap();
        let opt = brute_force_opt(&inst).unwrap();
        assert_eq!(opt.value, 3.0);
        assert_eq!(opt.solution, Solution::from_raw([3]));

        let empty = brute_force_opt(&Instance::empty(1.0)).unwrap();
        assert_eq!(empty.value, 0.0);
        assert!(empty.solution.is_empty());
    }

    #[test]
    fn brute_force_prefers_lex_smallest_on_ties() {
        let inst = Instance::new(
            vec![Item::new(1, 1.0, 0.6), Item::new(2, 1.0, 0.6), Item::new(3, 1.0, 0.6)],
            1.0,
        )
        .unwrap();
        assert_eq!(brute_force_opt(&inst).unwrap().solution, Solution::from_raw([1]));
    }

    #[test]
    fn brute_force_cap() {
        let items = (1..=5).map(|i| Item::new(i, 1.0, 0.1)).collect();
        let inst = Instance::new(items, 1.0).unwrap();
        assert!(matches!(brute_force_opt_capped(&inst, 4), Err(Error::Size { .. })));
    }

    #[test]
    fn min_weight_table_two_items() {
        let inst = Instance::new(vec![Item::new(1, 2.0, 0.5), Item::new(2, 3.0, 0.7)], 1.0).unwrap();
        let table = integer_value_opt(&inst, None).unwrap();
        let mw = table.minweight();
        assert_eq!(mw.len(), 6);
        assert_eq!(mw[0], 0.0);
        assert!(mw[1].is_infinite());
        assert_eq!(mw[2], 0.5);
        assert_eq!(mw[3], 0.7);
        assert!(mw[4].is_infinite());
        assert!((mw[5] - 1.2).abs() < 1e-12);
        assert_eq!(table.reconstruct(5), Some(Solution::from_raw([1, 2])));
        assert_eq!(table.reconstruct(4), None);
        assert_eq!(table.reconstruct(0), Some(Solution::empty()));
    }

    #[test]
    fn duplicate_values_pick_lighter_item() {
        let inst = Instance::new(vec![Item::new(1, 1.0, 0.2), Item::new(2, 1.0, 0.1)], 1.0).unwrap();
        let table = integer_value_opt(&inst, None).unwrap();
        assert_eq!(table.minweight()[1], 0.1);
        assert_eq!(table.reconstruct(1), Some(Solution::from_raw([2])));
    }

    #[test]
    fn empty_table_and_non_integral_values() {
        let table = integer_value_opt(&Instance::empty(1.0), Some(3)).unwrap();
        assert_eq!(table.minweight()[0], 0.0);
        assert!(table.minweight()[1..].iter().all(|w| w.is_infinite()));
        let bad = Instance::new(vec![Item::new(1, 1.5, 0.2)], 1.0).unwrap();
        assert!(matches!(integer_value_opt(&bad, None), Err(Error::Domain(_))));
    }
}
