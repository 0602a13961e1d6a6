//! Items, instances and solutions.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

/// Stable, totally ordered item identifier. Deleting other items never
/// changes an item's id, which is what makes id order usable as a tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub u64);

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: ItemId,
    pub value: f64,
    pub weight: f64,
}

impl Item {
    pub fn new(id: u64, value: f64, weight: f64) -> Self {
        Item {
            id: ItemId(id),
            value,
            weight,
        }
    }

    #[inline]
    pub fn efficiency(&self) -> f64 {
        self.value / self.weight
    }
}

/// A knapsack instance: items stored in ascending id order plus a weight limit.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    items: Vec<Item>,
    weight_limit: f64,
}

impl Instance {
    /// Builds an instance, sorting items by id.
    ///
    /// Rejects duplicate ids, non-finite numbers, nonpositive weights,
    /// negative values and any weight above the limit.
    pub fn new(mut items: Vec<Item>, weight_limit: f64) -> Result<Self> {
        if !(weight_limit.is_finite() && weight_limit > 0.0) {
            return Err(Error::domain(format!(
                "weight limit must be positive and finite, got {weight_limit}"
            )));
        }
        items.sort_by_key(|it| it.id);
        for pair in items.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::domain(format!("duplicate item id {}", pair[0].id)));
            }
        }
        for it in &items {
            if !(it.weight.is_finite() && it.weight > 0.0) {
                return Err(Error::domain(format!(
                    "item {} has nonpositive weight {}",
                    it.id, it.weight
                )));
            }
            if !(it.value.is_finite() && it.value >= 0.0) {
                return Err(Error::domain(format!(
                    "item {} has negative or non-finite value {}",
                    it.id, it.value
                )));
            }
            if !tolerance::le(it.weight, weight_limit) {
                return Err(Error::domain(format!(
                    "item {} has weight {} above the limit {}",
                    it.id, it.weight, weight_limit
                )));
            }
        }
        Ok(Instance {
            items,
            weight_limit,
        })
    }

    pub fn empty(weight_limit: f64) -> Self {
        Instance {
            items: Vec::new(),
            weight_limit,
        }
    }

    /// Items in ascending id order.
    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn weight_limit(&self) -> f64 {
        self.weight_limit
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.items.iter().map(|it| it.id)
    }

    pub fn get(&self, id: ItemId) -> Option<&Item> {
        self.items
            .binary_search_by_key(&id, |it| it.id)
            .ok()
            .map(|pos| &self.items[pos])
    }

    pub fn contains(&self, id: ItemId) -> bool {
        self.get(id).is_some()
    }

    pub fn total_weight(&self) -> f64 {
        self.items.iter().map(|it| it.weight).sum()
    }

    pub fn total_value(&self) -> f64 {
        self.items.iter().map(|it| it.value).sum()
    }

    /// Rescales weights so the limit becomes 1. Values are untouched.
    pub fn normalized(&self) -> Instance {
        if self.weight_limit == 1.0 {
            return self.clone();
        }
        let scale = self.weight_limit;
        Instance {
            items: self
                .items
                .iter()
                .map(|it| Item {
                    weight: (it.weight / scale).min(1.0),
                    ..*it
                })
                .collect(),
            weight_limit: 1.0,
        }
    }

    /// The instance without item `id`.
    pub fn delete_item(&self, id: ItemId) -> Result<Instance> {
        let pos = self
            .items
            .binary_search_by_key(&id, |it| it.id)
            .map_err(|_| Error::domain(format!("no item with id {id}")))?;
        let mut items = self.items.clone();
        items.remove(pos);
        Ok(Instance {
            items,
            weight_limit: self.weight_limit,
        })
    }

    /// Restriction to the ids accepted by `keep`, preserving the limit.
    pub fn filter(&self, mut keep: impl FnMut(&Item) -> bool) -> Instance {
        Instance {
            items: self.items.iter().filter(|it| keep(it)).copied().collect(),
            weight_limit: self.weight_limit,
        }
    }

    /// Same ids and weights with replacement values.
    pub(crate) fn with_values(&self, values: impl IntoIterator<Item = f64>) -> Instance {
        Instance {
            items: self
                .items
                .iter()
                .zip(values)
                .map(|(it, value)| Item { value, ..*it })
                .collect(),
            weight_limit: self.weight_limit,
        }
    }

    /// Total value of `solution`, failing on ids not in this instance.
    pub fn value_of(&self, solution: &Solution) -> Result<f64> {
        self.sum_over(solution, |it| it.value)
    }

    /// Total weight of `solution`, failing on ids not in this instance.
    pub fn weight_of(&self, solution: &Solution) -> Result<f64> {
        self.sum_over(solution, |it| it.weight)
    }

    fn sum_over(&self, solution: &Solution, f: impl Fn(&Item) -> f64) -> Result<f64> {
        solution.iter().try_fold(0.0, |acc, id| {
            self.get(id)
                .map(|it| acc + f(it))
                .ok_or_else(|| Error::domain(format!("solution references unknown id {id}")))
        })
    }

    /// Whether every id exists and the weight fits the limit.
    pub fn is_feasible(&self, solution: &Solution) -> bool {
        self.weight_of(solution)
            .map(|w| tolerance::le(w, self.weight_limit))
            .unwrap_or(false)
    }
}

/// A set of item ids, stored sorted so that the derived `Ord` is the
/// lexicographic order on sorted id sequences.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Solution(Vec<ItemId>);

impl Solution {
    pub fn empty() -> Self {
        Solution(Vec::new())
    }

    pub fn from_ids(ids: impl IntoIterator<Item = ItemId>) -> Self {
        let set: BTreeSet<ItemId> = ids.into_iter().collect();
        Solution(set.into_iter().collect())
    }

    pub fn from_raw(ids: impl IntoIterator<Item = u64>) -> Self {
        Self::from_ids(ids.into_iter().map(ItemId))
    }

    pub fn ids(&self) -> &[ItemId] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: ItemId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub fn union(&self, other: &Solution) -> Solution {
        Solution::from_ids(self.iter().chain(other.iter()))
    }

    /// Size of the symmetric difference, the Hamming distance between the two
    /// sets' indicator vectors.
    pub fn hamming(&self, other: &Solution) -> usize {
        let (mut i, mut j, mut common) = (0, 0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        self.0.len() + other.0.len() - 2 * common
    }
}

impl FromIterator<ItemId> for Solution {
    fn from_iter<T: IntoIterator<Item = ItemId>>(iter: T) -> Self {
        Solution::from_ids(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_items() -> Instance {
        Instance::new(vec![Item::new(1, 1.0, 0.3), Item::new(2, 2.0, 0.3)], 1.0).unwrap()
    }

    #[test]
    fn value_and_weight_of_small_sets() {
        let inst = two_items();
        assert_eq!(inst.value_of(&Solution::empty()).unwrap(), 0.0);
        assert_eq!(inst.weight_of(&Solution::empty()).unwrap(), 0.0);
        let all = Solution::from_raw([1, 2]);
        assert_eq!(inst.value_of(&all).unwrap(), 3.0);
        assert_eq!(inst.weight_of(&Solution::from_raw([2])).unwrap(), 0.3);
    }

    #[test]
    fn unknown_id_is_a_domain_error() {
        let inst = two_items();
        let err = inst.value_of(&Solution::from_raw([7])).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
        assert!(!inst.is_feasible(&Solution::from_raw([7])));
    }

    #[test]
    fn construction_rejects_bad_items() {
        assert!(Instance::new(vec![Item::new(1, 1.0, 0.0)], 1.0).is_err());
        assert!(Instance::new(vec![Item::new(1, -1.0, 0.5)], 1.0).is_err());
        assert!(Instance::new(vec![Item::new(1, 1.0, 1.5)], 1.0).is_err());
        assert!(Instance::new(vec![Item::new(1, 1.0, 0.5), Item::new(1, 2.0, 0.5)], 1.0).is_err());
        assert!(Instance::new(vec![], 0.0).is_err());
    }

    #[test]
    fn items_are_kept_in_id_order() {
        let inst = Instance::new(vec![Item::new(5, 1.0, 0.1), Item::new(2, 1.0, 0.1)], 1.0).unwrap();
        let ids: Vec<u64> = inst.ids().map(|id| id.0).collect();
        assert_eq!(ids, vec![2, 5]);
    }

    #[test]
    fn delete_item_keeps_everything_else() {
        let inst = two_items();
        let rest = inst.delete_item(ItemId(1)).unwrap();
        assert_eq!(rest.items(), &[Item::new(2, 2.0, 0.3)]);
        let none = rest.delete_item(ItemId(2)).unwrap();
        assert!(none.is_empty());
        assert!(matches!(inst.delete_item(ItemId(9)), Err(Error::Domain(_))));
    }

    #[test]
    fn normalization_scales_weights_only() {
        let inst = Instance::new(vec![Item::new(1, 3.0, 2.0), Item::new(2, 1.0, 4.0)], 4.0).unwrap();
        let norm = inst.normalized();
        assert_eq!(norm.weight_limit(), 1.0);
        assert_eq!(norm.items()[0].weight, 0.5);
        assert_eq!(norm.items()[1].weight, 1.0);
        assert_eq!(norm.items()[0].value, 3.0);
    }

    #[test]
    fn hamming_is_symmetric_difference_size() {
        let a = Solution::from_raw([1, 2, 3]);
        let b = Solution::from_raw([3, 4]);
        assert_eq!(a.hamming(&b), 3);
        assert_eq!(b.hamming(&a), 3);
        assert_eq!(a.hamming(&a), 0);
        assert_eq!(a.hamming(&Solution::empty()), 3);
    }

    #[test]
    fn solution_order_is_lexicographic() {
        let a = Solution::from_raw([1, 5]);
        let b = Solution::from_raw([1, 3, 4]);
        let c = Solution::from_raw([1]);
        assert!(b < a);
        assert!(c < b);
    }
}
