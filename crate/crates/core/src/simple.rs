//! Deterministic algorithm for the simple knapsack (`v(i) = w(i)`).

use crate::error::{Error, Result};
use crate::greedy::check_eps;
use crate::model::{Instance, Item, ItemId, Solution};
use crate::tolerance;

pub const DEFAULT_SIMPLE_CAP: usize = 30;

/// Whether every item's value equals its weight.
pub fn is_simple(instance: &Instance) -> bool {
    instance
        .items()
        .iter()
        .all(|it| (it.value - it.weight).abs() <= tolerance::tolerance() * it.weight.max(1.0))
}

/// Heavy items (`w >= eps`) get an exact optimum over subsets of size at
/// most `1/eps`; light items are then added in ascending weight order while
/// they fit.
pub fn simple_stable(instance: &Instance, eps: f64) -> Result<Solution> {
    simple_stable_capped(instance, eps, DEFAULT_SIMPLE_CAP)
}

pub fn simple_stable_capped(instance: &Instance, eps: f64, cap: usize) -> Result<Solution> {
    check_eps(eps)?;
    if !is_simple(instance) {
        return Err(Error::domain("simple knapsack requires value == weight for every item"));
    }
    let norm = instance.normalized();
    let (heavy, mut light): (Vec<Item>, Vec<Item>) = norm
        .items()
        .iter()
        .partition(|it| tolerance::ge(it.weight, eps));
    if heavy.len() > cap {
        return Err(Error::Size {
            what: "heavy item set",
            size: heavy.len(),
            cap,
        });
    }
    let max_size = (1.0 / eps + tolerance::tolerance()).floor() as usize;
    let (chosen, used) = best_heavy_subset(&heavy, max_size);
    light.sort_by(|a, b| a.weight.total_cmp(&b.weight));
    let mut total = used;
    let mut ids = chosen;
    for it in &light {
        if !tolerance::le(total + it.weight, 1.0) {
            break;
        }
        total += it.weight;
        ids.push(it.id);
    }
    Ok(Solution::from_ids(ids))
}

/// Max-weight feasible subset of size `<= max_size`; lexicographically
/// smallest among ties.
fn best_heavy_subset(heavy: &[Item], max_size: usize) -> (Vec<ItemId>, f64) {
    struct State {
        best: Vec<ItemId>,
        best_weight: f64,
        path: Vec<ItemId>,
    }
    fn dfs(items: &[Item], j: usize, weight: f64, max_size: usize, st: &mut State) {
        let tol = tolerance::tolerance();
        if weight > st.best_weight + tol || (weight >= st.best_weight - tol && st.path < st.best) {
            st.best_weight = weight;
            st.best.clone_from(&st.path);
        }
        if st.path.len() == max_size {
            return;
        }
        for k in j..items.len() {
            let w = weight + items[k].weight;
            if tolerance::le(w, 1.0) {
                st.path.push(items[k].id);
                dfs(items, k + 1, w, max_size, st);
                st.path.pop();
            }
        }
    }
    let mut st = State {
        best: Vec::new(),
        best_weight: 0.0,
        path: Vec::new(),
    };
    dfs(heavy, 0, 0.0, max_size, &mut st);
    (st.best, st.best_weight)
}
