//! Average sensitivity measurements: exact for deterministic algorithms,
//! coupled Monte Carlo upper bounds for randomized ones, and exact earth
//! mover's distance between empirical output distributions.

mod emd;

use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithm::{Algorithm, Run};
use crate::draws::{derive_seed, DrawSource, FollowSource, Law, SeededSource, Stage};
use crate::error::{Error, Result};
use crate::greedy::{check_eps, efficiency_sorted};
use crate::model::{Instance, ItemId};
use crate::tolerance;

pub use crate::coupling::{
    categorical_overlap, maximal_coupling_categorical, maximal_coupling_uniform, uniform_overlap,
};
pub use emd::{emd_exact, emd_sensitivity, empirical_distribution, EmpiricalDistribution};

/// Normal 95% quantile used for every confidence half-width.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    CoupledMc,
    ExactEmd,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::CoupledMc => "coupled_mc",
            Method::ExactEmd => "exact_emd",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeletionEstimate {
    pub id: ItemId,
    pub estimate: f64,
    /// `Z95 * stderr`; zero for exact rows, `NaN` where no interval exists.
    pub ci_halfwidth: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub per_deletion: Vec<DeletionEstimate>,
    /// Mean of the per-deletion estimates.
    pub average: f64,
    pub average_ci_halfwidth: f64,
    pub trials: usize,
    pub method: Method,
}

impl SensitivityReport {
    fn from_rows(per_deletion: Vec<DeletionEstimate>, average_ci_halfwidth: f64, trials: usize, method: Method) -> Self {
        let average =
            per_deletion.iter().map(|d| d.estimate).sum::<f64>() / per_deletion.len() as f64;
        SensitivityReport {
            per_deletion,
            average,
            average_ci_halfwidth,
            trials,
            method,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per deletion: `id,estimate,ci_halfwidth,trials`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.per_deletion {
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

pub(crate) fn csv_error(e: csv::Error) -> Error {
    Error::Io(io::Error::other(e))
}

fn require_items(instance: &Instance) -> Result<()> {
    if instance.is_empty() {
        Err(Error::domain("average sensitivity is undefined for an empty instance"))
    } else {
        Ok(())
    }
}

/// Exact average sensitivity of a deterministic algorithm:
/// the mean over deletions of `|A(V) △ A(V \ {i})|`.
pub fn deterministic_sensitivity(algorithm: &Algorithm, instance: &Instance) -> Result<SensitivityReport> {
    require_items(instance)?;
    if !algorithm.is_deterministic() {
        return Err(Error::domain(format!(
            "{} is randomized; use the coupled estimator",
            algorithm.kind()
        )));
    }
    let full = algorithm.run(instance, &mut SeededSource::new(0))?.solution;
    let rows = instance
        .ids()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|id| {
            let reduced = instance.delete_item(id)?;
            let out = algorithm.run(&reduced, &mut SeededSource::new(0))?.solution;
            Ok(DeletionEstimate {
                id,
                estimate: full.hamming(&out) as f64,
                ci_halfwidth: 0.0,
                trials: 1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SensitivityReport::from_rows(rows, 0.0, 1, Method::Exact))
}

/// Runs the algorithm on `V` and on `V \ {deleted}` with every random stage
/// of the second run coupled to the first. Each run has its usual law.
pub fn coupled_run(
    algorithm: &Algorithm,
    instance: &Instance,
    deleted: ItemId,
    seed: u64,
) -> Result<(Run, Run)> {
    let reduced = instance.delete_item(deleted)?;
    let leader = algorithm.run(instance, &mut SeededSource::new(derive_seed(seed, &[0])))?;
    let follower = run_follower(algorithm, &reduced, &leader, seed, deleted)?;
    Ok((leader, follower))
}

fn run_follower(algorithm: &Algorithm, reduced: &Instance, leader: &Run, seed: u64, deleted: ItemId) -> Result<Run> {
    let mut source = FollowSource::new(&leader.transcript, derive_seed(seed, &[1, deleted.0]));
    algorithm.run(reduced, &mut source)
}

/// Coupled Monte Carlo estimate of the average sensitivity. Any coupling
/// overpays the earth mover's distance, so this is an upper-bound estimator.
///
/// Trial `t` uses the shared seed `derive_seed(seed, [t])`, and its pair for
/// deletion `i` is exactly `coupled_run(.., i, derive_seed(seed, [t]))`.
pub fn mc_sensitivity_upper(
    algorithm: &Algorithm,
    instance: &Instance,
    trials: usize,
    seed: u64,
) -> Result<SensitivityReport> {
    require_items(instance)?;
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    if algorithm.is_deterministic() {
        let exact = deterministic_sensitivity(algorithm, instance)?;
        let rows = exact
            .per_deletion
            .into_iter()
            .map(|d| DeletionEstimate { trials, ..d })
            .collect();
        return Ok(SensitivityReport::from_rows(rows, 0.0, trials, Method::CoupledMc));
    }

    let ids: Vec<ItemId> = instance.ids().collect();
    let per_trial: Vec<Vec<u32>> = match *algorithm {
        Algorithm::ModifiedGreedy { eps } => {
            check_eps(eps)?;
            let sorted = efficiency_sorted(instance.normalized().items());
            (0..trials as u64)
                .into_par_iter()
                .map(|t| greedy_trial(&sorted, &ids, eps, derive_seed(seed, &[t])))
                .collect::<Result<_>>()?
        }
        _ => {
            let reduced: Vec<Instance> = ids
                .iter()
                .map(|&id| instance.delete_item(id))
                .collect::<Result<_>>()?;
            (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let shared = derive_seed(seed, &[t]);
                    let leader =
                        algorithm.run(instance, &mut SeededSource::new(derive_seed(shared, &[0])))?;
                    ids.iter()
                        .zip(&reduced)
                        .map(|(&id, r)| {
                            let f = run_follower(algorithm, r, &leader, shared, id)?;
                            Ok(leader.solution.hamming(&f.solution) as u32)
                        })
                        .collect()
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(summarize(&ids, &per_trial, trials))
}

/// One modified-greedy trial for every deletion at once. The budget draw
/// has the same law with or without the deleted item, so the coupled
/// follower always reuses it; deleting item `i` of the sorted order keeps
/// the partial sums before `i`, which makes this bit-identical to running
/// the follower from scratch.
fn greedy_trial(sorted: &[crate::model::Item], ids: &[ItemId], eps: f64, shared: u64) -> Result<Vec<u32>> {
    let mut source = SeededSource::new(derive_seed(shared, &[0]));
    let w = source
        .draw(Stage::GreedyW, &Law::Uniform { lo: 1.0 - eps, hi: 1.0 })?
        .real();
    let mut used = Vec::with_capacity(sorted.len() + 1);
    used.push(0.0);
    let mut end = 0;
    for it in sorted {
        let next = used[end] + it.weight;
        if !tolerance::le(next, w) {
            break;
        }
        used.push(next);
        end += 1;
    }
    let mut out = vec![0u32; ids.len()];
    // Only prefix items and the first item that did not fit matter: deleting
    // anything later leaves the prefix unchanged.
    let last = (end + 1).min(sorted.len());
    for (pos, it) in sorted[..last].iter().enumerate() {
        let taken_after = sorted[pos + 1..]
            .iter()
            .scan(used[pos], |acc, later| {
                let next = *acc + later.weight;
                tolerance::le(next, w).then(|| *acc = next)
            })
            .count();
        // The new prefix is sorted[..pos] plus sorted[pos + 1..=pos + taken_after].
        let hamming = if pos < end {
            1 + (pos + taken_after + 1 - end)
        } else {
            taken_after
        };
        let slot = ids.binary_search(&it.id).expect("sorted items come from the instance");
        out[slot] = hamming as u32;
    }
    Ok(out)
}

fn summarize(ids: &[ItemId], per_trial: &[Vec<u32>], trials: usize) -> SensitivityReport {
    let n = ids.len();
    let tf = trials as f64;
    let mut sum = vec![0.0f64; n];
    let mut sumsq = vec![0.0f64; n];
    let mut avg_sum = 0.0;
    let mut avg_sumsq = 0.0;
    for row in per_trial {
        let mut total = 0.0;
        for (k, &h) in row.iter().enumerate() {
            let h = h as f64;
            sum[k] += h;
            sumsq[k] += h * h;
            total += h;
        }
        let a = total / n as f64;
        avg_sum += a;
        avg_sumsq += a * a;
    }
    let half = |s: f64, sq: f64| {
        if trials < 2 {
            return f64::NAN;
        }
        let mean = s / tf;
        let var = ((sq - tf * mean * mean) / (tf - 1.0)).max(0.0);
        Z95 * (var / tf).sqrt()
    };
    let rows = ids
        .iter()
        .enumerate()
        .map(|(k, &id)| DeletionEstimate {
            id,
            estimate: sum[k] / tf,
            ci_halfwidth: half(sum[k], sumsq[k]),
            trials,
        })
        .collect();
    SensitivityReport::from_rows(rows, half(avg_sum, avg_sumsq), trials, Method::CoupledMc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::AlgorithmKind;
    use crate::instances::{gen_prop2, gen_random, RandomSpec};
    use crate::model::Solution;

    #[test]
    fn greedy_on_doubling_instance() {
        for k in [2usize, 4, 10] {
            let r = deterministic_sensitivity(&Algorithm::Greedy, &gen_prop2(k).unwrap()).unwrap();
            assert_eq!(r.average, (k as f64 + 1.0) / 2.0);
            assert_eq!(r.per_deletion.len(), 2 * k);
            assert_eq!(r.method, Method::Exact);
        }
    }

    #[test]
    fn empty_instance_and_randomized_are_rejected() {
        let empty = Instance::empty(1.0);
        assert!(deterministic_sensitivity(&Algorithm::Greedy, &empty).is_err());
        let mg = AlgorithmKind::ModifiedGreedy.with_eps(0.5).unwrap();
        assert!(deterministic_sensitivity(&mg, &gen_prop2(2).unwrap()).is_err());
        assert!(mc_sensitivity_upper(&mg, &empty, 10, 1).is_err());
        assert!(mc_sensitivity_upper(&mg, &gen_prop2(2).unwrap(), 0, 1).is_err());
    }

    #[test]
    fn deterministic_through_mc_has_zero_spread() {
        let inst = gen_prop2(4).unwrap();
        let exact = deterministic_sensitivity(&Algorithm::Greedy, &inst).unwrap();
        let mc = mc_sensitivity_upper(&Algorithm::Greedy, &inst, 7, 3).unwrap();
        assert_eq!(mc.average, exact.average);
        assert!(mc.per_deletion.iter().all(|d| d.ci_halfwidth == 0.0 && d.trials == 7));
    }

    #[test]
    fn greedy_fast_path_matches_coupled_runs() {
        let mg = AlgorithmKind::ModifiedGreedy.with_eps(0.3).unwrap();
        for inst in [gen_prop2(5).unwrap(), gen_random(&RandomSpec::uniform(12), 4).unwrap()] {
            let trials = 40;
            let report = mc_sensitivity_upper(&mg, &inst, trials, 99).unwrap();
            for row in &report.per_deletion {
                let total: usize = (0..trials as u64)
                    .map(|t| {
                        let (a, b) = coupled_run(&mg, &inst, row.id, derive_seed(99, &[t])).unwrap();
                        a.solution.hamming(&b.solution)
                    })
                    .sum();
                assert_eq!(row.estimate, total as f64 / trials as f64, "item {}", row.id);
            }
        }
    }

    #[test]
    fn unused_item_never_changes_the_output() {
        // Item 3 has zero value and fills the whole budget: no algorithm takes it.
        let inst = Instance::new(
            vec![
                crate::model::Item::new(1, 0.6, 0.3),
                crate::model::Item::new(2, 0.5, 0.3),
                crate::model::Item::new(3, 0.0, 1.0),
            ],
            1.0,
        )
        .unwrap();
        for kind in [AlgorithmKind::ModifiedGreedy, AlgorithmKind::Stable, AlgorithmKind::Fpras] {
            let alg = kind.with_eps(0.4).unwrap();
            for seed in 0..50 {
                let (a, b) = coupled_run(&alg, &inst, ItemId(3), seed).unwrap();
                assert_eq!(a.solution, b.solution, "{kind} seed {seed}");
            }
        }
        let alg = Algorithm::Greedy;
        let (a, _) = coupled_run(&alg, &inst, ItemId(3), 0).unwrap();
        assert_eq!(a.solution, Solution::from_raw([1, 2]));
        assert!(coupled_run(&alg, &inst, ItemId(9), 0).is_err());
    }

    #[test]
    fn report_serializations() {
        let r = deterministic_sensitivity(&Algorithm::Greedy, &gen_prop2(2).unwrap()).unwrap();
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 1 + 4);
        assert!(csv.starts_with("id,estimate,ci_halfwidth,trials"));
        let back: SensitivityReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_json().contains("\"method\": \"exact\""));
    }
}
