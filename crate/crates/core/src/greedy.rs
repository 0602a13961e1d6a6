//! Efficiency-ordered greedy algorithms: the plain greedy and the modified
//! greedy that samples its weight budget.

use crate::algorithm::Run;
use crate::draws::{DrawSource, Recorder, Stage};
use crate::error::{Error, Result};
use crate::model::{Instance, Item, ItemId, Solution};
use crate::tolerance;

/// Items sorted by non-increasing efficiency; equal efficiencies keep
/// ascending id order (the sort is stable and instances store items by id).
pub fn efficiency_sorted(items: &[Item]) -> Vec<Item> {
    let mut sorted = items.to_vec();
    sorted.sort_by(|a, b| b.efficiency().total_cmp(&a.efficiency()));
    sorted
}

/// Permutation of an instance's ids in greedy (efficiency) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyOrder(Vec<ItemId>);

impl GreedyOrder {
    pub fn new(instance: &Instance) -> Self {
        GreedyOrder(efficiency_sorted(instance.items()).iter().map(|it| it.id).collect())
    }

    pub fn ids(&self) -> &[ItemId] {
        &self.0
    }
}

/// Ids of the longest efficiency-ordered prefix whose weight stays within `budget`.
pub(crate) fn prefix_within(sorted: &[Item], budget: f64) -> Vec<ItemId> {
    let mut used = 0.0;
    let mut out = Vec::new();
    for it in sorted {
        if !tolerance::le(used + it.weight, budget) {
            break;
        }
        used += it.weight;
        out.push(it.id);
    }
    out
}

/// `S(W)`: the maximal greedy prefix of weight at most `W` times the limit.
pub fn greedy_prefix(instance: &Instance, w: f64) -> Result<Solution> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::domain(format!("budget fraction must lie in [0, 1], got {w}")));
    }
    let norm = instance.normalized();
    Ok(Solution::from_ids(prefix_within(&efficiency_sorted(norm.items()), w)))
}

/// The deterministic greedy: take the efficiency-ordered prefix that fits.
pub fn plain_greedy(instance: &Instance) -> Solution {
    greedy_prefix(instance, 1.0).expect("1.0 is a valid budget")
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("epsilon must lie in (0, 1), got {eps}")))
    }
}

/// Greedy prefix under a random budget `W * budget`, `W ~ U[1-eps, 1]`.
pub(crate) fn sampled_prefix(
    sorted: &[Item],
    budget: f64,
    eps: f64,
    rec: &mut Recorder<'_>,
) -> Result<Vec<ItemId>> {
    let w = rec.uniform(Stage::GreedyW, 1.0 - eps, 1.0)?;
    Ok(prefix_within(sorted, w * budget.max(0.0)))
}

/// Modified greedy: sample `W ~ U[1-eps, 1]` and return `S(W)`.
pub fn modified_greedy(instance: &Instance, eps: f64, source: &mut dyn DrawSource) -> Result<Run> {
    check_eps(eps)?;
    let norm = instance.normalized();
    let sorted = efficiency_sorted(norm.items());
    let mut rec = Recorder::new(source);
    let ids = sampled_prefix(&sorted, 1.0, eps, &mut rec)?;
    Ok(Run {
        solution: Solution::from_ids(ids),
        transcript: rec.transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::draws::{ReplaySource, SeededSource};
    use crate::instances::gen_prop2;

    #[test]
    fn order_is_nonincreasing_with_id_ties() {
        let inst = Instance::new(
            vec![
                Item::new(1, 1.0, 0.5),
                Item::new(2, 3.0, 0.5),
                Item::new(3, 2.0, 1.0),
                Item::new(4, 6.0, 1.0),
            ],
            1.0,
        )
        .unwrap();
        let ids: Vec<u64> = GreedyOrder::new(&inst).ids().iter().map(|i| i.0).collect();
        // efficiencies 2, 6, 2, 6
        assert_eq!(ids, vec![2, 4, 1, 3]);
    }

    #[test]
    fn plain_greedy_on_prop2() {
        let inst = gen_prop2(4).unwrap();
        assert_eq!(plain_greedy(&inst), Solution::from_raw(1..=4));
        let without = inst.delete_item(ItemId(2)).unwrap();
        let expected = Solution::from_ids(without.ids());
        assert_eq!(plain_greedy(&without), expected);
        assert!(plain_greedy(&Instance::empty(1.0)).is_empty());
    }

    #[test]
    fn prefix_edges() {
        let inst = gen_prop2(4).unwrap();
        assert!(greedy_prefix(&inst, 0.0).unwrap().is_empty());
        assert_eq!(greedy_prefix(&inst, 1.0).unwrap(), Solution::from_raw(1..=4));
        assert!(greedy_prefix(&inst, 1.1).is_err());
        assert!(greedy_prefix(&inst, -0.1).is_err());
    }

    #[test]
    fn single_small_item_always_taken() {
        let inst = Instance::new(vec![Item::new(1, 1.0, 0.5)], 1.0).unwrap();
        for seed in 0..200 {
            let run = modified_greedy(&inst, 0.1, &mut SeededSource::new(seed)).unwrap();
            assert_eq!(run.solution, Solution::from_raw([1]));
        }
        let empty = Instance::empty(1.0);
        let run = modified_greedy(&empty, 0.1, &mut SeededSource::new(0)).unwrap();
        assert!(run.solution.is_empty());
    }

    #[test]
    fn eps_out_of_range() {
        let inst = gen_prop2(2).unwrap();
        for eps in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(modified_greedy(&inst, eps, &mut SeededSource::new(0)).is_err());
        }
    }

    #[test]
    fn replay_reproduces_solution() {
        let inst = gen_prop2(6).unwrap();
        for seed in 0..50 {
            let run = modified_greedy(&inst, 0.3, &mut SeededSource::new(seed)).unwrap();
            assert_eq!(run.transcript.entries().len(), 1);
            let again = modified_greedy(&inst, 0.3, &mut ReplaySource::new(&run.transcript)).unwrap();
            assert_eq!(again.solution, run.solution);
        }
    }
}
