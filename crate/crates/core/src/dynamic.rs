//! Incremental and decremental simulation with recourse accounting.
//!
//! Each step recomputes the algorithm on the current item set with a
//! [`FollowSource`] led by the previous step's transcript, so the new output
//! has the algorithm's law on the current set while reusing as many draws as
//! the maximal coupling allows. Only the previous transcript and fresh
//! randomness are consulted.

use std::io;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algorithm::{Algorithm, Run};
use crate::draws::{derive_seed, FollowSource, ReplaySource, SeededSource};
use crate::error::{Error, Result};
use crate::fractional::{fopt, fopt_sorted};
use crate::greedy::efficiency_sorted;
use crate::model::{Instance, Item, ItemId, Solution};
use crate::sensitivity::csv_error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Incremental,
    Decremental,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub hamming: usize,
    pub value: f64,
    /// `fopt` of the item set after this step.
    pub fopt_ref: f64,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecourseReport {
    pub direction: Direction,
    pub per_step: Vec<StepRecord>,
    /// `(1/n) * sum of hamming`.
    pub amortized_recourse: f64,
    /// Arrival order (incremental) or deletion order (decremental).
    pub order: Vec<ItemId>,
}

impl RecourseReport {
    fn new(direction: Direction, per_step: Vec<StepRecord>, order: Vec<ItemId>) -> Self {
        let total: usize = per_step.iter().map(|s| s.hamming).sum();
        RecourseReport {
            direction,
            amortized_recourse: total as f64 / per_step.len() as f64,
            per_step,
            order,
        }
    }

    pub fn hammings(&self) -> Vec<usize> {
        self.per_step.iter().map(|s| s.hamming).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per step: `step,hamming,value,fopt_ref,wall_time_secs`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.per_step {
            w.serialize(row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory succeeds");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Every state of a simulation: `runs[k]` is the output after `k` steps
/// together with the draws that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamLog {
    pub direction: Direction,
    pub order: Vec<ItemId>,
    pub runs: Vec<Run>,
    pub report: RecourseReport,
}

/// A uniformly random permutation of the instance's ids.
pub fn random_order(instance: &Instance, seed: u64) -> Vec<ItemId> {
    let mut ids: Vec<ItemId> = instance.ids().collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0])));
    ids
}

fn check_order(instance: &Instance, order: &[ItemId]) -> Result<()> {
    let mut sorted = order.to_vec();
    sorted.sort();
    if sorted.iter().copied().ne(instance.ids()) {
        return Err(Error::domain("order is not a permutation of the instance ids"));
    }
    Ok(())
}

/// Efficiency-sorted item list kept up to date under insertions and deletions.
struct SortedItems(Vec<Item>);

impl SortedItems {
    fn position(&self, it: &Item) -> usize {
        let key = it.efficiency();
        self.0.partition_point(|o| {
            let e = o.efficiency();
            e > key || (e == key && o.id < it.id)
        })
    }

    fn insert(&mut self, it: Item) {
        let at = self.position(&it);
        self.0.insert(at, it);
    }

    fn remove(&mut self, it: &Item) {
        let at = self.position(it);
        debug_assert_eq!(self.0[at].id, it.id);
        self.0.remove(at);
    }

    fn fopt(&self, limit: f64) -> f64 {
        fopt_sorted(&self.0, limit)
    }
}

/// Items arrive one by one in `order` (default: random from `seed`); the
/// state starts empty.
pub fn stream_simulate(
    instance: &Instance,
    algorithm: &Algorithm,
    seed: u64,
    order: Option<Vec<ItemId>>,
) -> Result<StreamLog> {
    simulate(instance, algorithm, seed, order, Direction::Incremental)
}

/// Items are deleted one by one in `order` (default: random from `seed`);
/// the state starts at a fresh run on the full instance.
pub fn decremental_simulate(
    instance: &Instance,
    algorithm: &Algorithm,
    seed: u64,
    order: Option<Vec<ItemId>>,
) -> Result<StreamLog> {
    simulate(instance, algorithm, seed, order, Direction::Decremental)
}

fn simulate(
    instance: &Instance,
    algorithm: &Algorithm,
    seed: u64,
    order: Option<Vec<ItemId>>,
    direction: Direction,
) -> Result<StreamLog> {
    if instance.is_empty() {
        return Err(Error::domain("stream needs at least one item"));
    }
    let order = order.unwrap_or_else(|| random_order(instance, seed));
    check_order(instance, &order)?;
    let n = order.len();
    let limit = instance.weight_limit();
    let item = |id: ItemId| *instance.get(id).expect("order checked");

    let mut current: Vec<Item>;
    let mut sorted;
    let mut prev = match direction {
        Direction::Incremental => {
            current = Vec::new();
            sorted = SortedItems(Vec::new());
            Run::deterministic(Solution::empty())
        }
        Direction::Decremental => {
            current = instance.items().to_vec();
            sorted = SortedItems(efficiency_sorted(instance.items()));
            let mut src = SeededSource::new(derive_seed(seed, &[1, 0]));
            algorithm.run(instance, &mut src)?
        }
    };
    let mut runs = vec![prev.clone()];
    let mut steps = Vec::with_capacity(n);
    for (k, &id) in order.iter().enumerate() {
        let it = item(id);
        match direction {
            Direction::Incremental => {
                current.push(it);
                sorted.insert(it);
            }
            Direction::Decremental => {
                current.retain(|o| o.id != id);
                sorted.remove(&it);
            }
        }
        let started = Instant::now();
        let set = Instance::new(current.clone(), limit)?;
        let mut src = FollowSource::new(&prev.transcript, derive_seed(seed, &[1, k as u64 + 1]));
        let run = algorithm.run(&set, &mut src)?;
        let wall = started.elapsed().as_secs_f64();
        steps.push(StepRecord {
            step: k + 1,
            hamming: prev.solution.hamming(&run.solution),
            value: set.value_of(&run.solution)?,
            fopt_ref: sorted.fopt(limit),
            wall_time_secs: wall,
        });
        runs.push(run.clone());
        prev = run;
    }
    let report = RecourseReport::new(direction, steps, order.clone());
    Ok(StreamLog {
        direction,
        order,
        runs,
        report,
    })
}

/// Recomputes the states of `log` from its stored transcripts and walks them
/// in `direction`: decremental replay of an incremental log visits the same
/// item sets in reverse and deletes items in reverse arrival order.
pub fn replay_log(instance: &Instance, algorithm: &Algorithm, log: &StreamLog, direction: Direction) -> Result<RecourseReport> {
    check_order(instance, &log.order)?;
    // sets[k]: the item set of state k in the log's own direction.
    let sets: Vec<Instance> = (0..=log.order.len())
        .map(|k| {
            let ids: &[ItemId] = match log.direction {
                Direction::Incremental => &log.order[..k],
                Direction::Decremental => &log.order[k..],
            };
            let mut keep = ids.to_vec();
            keep.sort();
            instance.filter(|it| keep.binary_search(&it.id).is_ok())
        })
        .collect();
    let mut states = Vec::with_capacity(sets.len());
    for (set, run) in sets.iter().zip(&log.runs) {
        let solution = algorithm.run(set, &mut ReplaySource::new(&run.transcript))?.solution;
        states.push((set, solution));
    }
    let mut order = log.order.clone();
    if direction != log.direction {
        states.reverse();
        order.reverse();
    }
    let steps = states
        .windows(2)
        .enumerate()
        .map(|(k, pair)| {
            let (set, sol) = (&pair[1].0, &pair[1].1);
            Ok(StepRecord {
                step: k + 1,
                hamming: pair[0].1.hamming(sol),
                value: set.value_of(sol)?,
                fopt_ref: fopt(set),
                wall_time_secs: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RecourseReport::new(direction, steps, order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::AlgorithmKind;
    use crate::instances::{gen_random, RandomSpec};

    fn stable() -> Algorithm {
        AlgorithmKind::Stable.with_eps(0.25).unwrap()
    }

    #[test]
    fn single_item_stream() {
        let inst = Instance::new(vec![Item::new(7, 0.5, 0.5)], 1.0).unwrap();
        for seed in 0..20 {
            let up = stream_simulate(&inst, &stable(), seed, None).unwrap();
            assert_eq!(up.report.per_step.len(), 1);
            assert_eq!(up.report.per_step[0].hamming, up.runs[1].solution.len());
            let down = decremental_simulate(&inst, &stable(), seed, None).unwrap();
            assert_eq!(down.report.per_step[0].hamming, down.runs[0].solution.len());
            assert!(down.runs[1].solution.is_empty());
        }
    }

    #[test]
    fn order_must_be_a_permutation() {
        let inst = gen_random(&RandomSpec::uniform(4), 1).unwrap();
        let bad = vec![ItemId(1), ItemId(2), ItemId(2), ItemId(4)];
        assert!(stream_simulate(&inst, &stable(), 0, Some(bad)).is_err());
        assert!(stream_simulate(&inst, &stable(), 0, Some(vec![ItemId(1)])).is_err());
        assert!(stream_simulate(&Instance::empty(1.0), &stable(), 0, None).is_err());
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let inst = gen_random(&RandomSpec::uniform(8), 2).unwrap();
        let a = stream_simulate(&inst, &stable(), 11, None).unwrap();
        let b = stream_simulate(&inst, &stable(), 11, None).unwrap();
        assert_eq!(a.order, b.order);
        assert_eq!(a.runs, b.runs);
        let mean = a.report.hammings().iter().sum::<usize>() as f64 / 8.0;
        assert_eq!(a.report.amortized_recourse, mean);
    }

    #[test]
    fn replay_reproduces_and_reverses() {
        let inst = gen_random(&RandomSpec::uniform(7), 3).unwrap();
        let log = stream_simulate(&inst, &stable(), 5, None).unwrap();
        let forward = replay_log(&inst, &stable(), &log, Direction::Incremental).unwrap();
        assert_eq!(forward.hammings(), log.report.hammings());
        let backward = replay_log(&inst, &stable(), &log, Direction::Decremental).unwrap();
        let mut reversed = log.report.hammings();
        reversed.reverse();
        assert_eq!(backward.hammings(), reversed);
        let mut order = log.order.clone();
        order.reverse();
        assert_eq!(backward.order, order);
    }

    #[test]
    fn fopt_reference_tracks_the_prefix() {
        let inst = gen_random(&RandomSpec::uniform(10), 4).unwrap();
        let log = stream_simulate(&inst, &Algorithm::Greedy, 1, None).unwrap();
        for (k, step) in log.report.per_step.iter().enumerate() {
            let prefix = inst.filter(|it| log.order[..=k].contains(&it.id));
            assert!((step.fopt_ref - fopt(&prefix)).abs() < 1e-12);
        }
    }
}
