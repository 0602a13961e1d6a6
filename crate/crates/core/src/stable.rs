//! The stable-on-average knapsack algorithm.
//!
//! A value threshold `c` is sampled around `eps * fopt(V)`. Items worth at
//! least `c` are large. For each value window `[tc, (t+1)c)` the lightest
//! subset of large items with value in the window is a candidate; one
//! candidate is chosen by the exponential mechanism on the score
//! `tc + fopt(small items, 1 - w(candidate))`, and the residual capacity is
//! filled with the modified greedy over the small items.

use crate::algorithm::Run;
use crate::draws::{DrawSource, Recorder, Stage};
use crate::error::{Error, Result};
use crate::exact::integer_value_opt;
use crate::fractional::fopt_sorted;
use crate::greedy::{check_eps, efficiency_sorted, sampled_prefix};
use crate::model::{Instance, Item, ItemId, Solution};
use crate::tolerance;

pub const DEFAULT_CANDIDATE_CAP: usize = 20;

/// How the per-window minimum-weight candidates are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateSolver {
    /// Exhaustive search over subsets of the large items; at most `cap` of them.
    Exact { cap: usize },
    /// Min-weight-per-value dynamic program; requires integral values.
    Dp,
}

impl Default for CandidateSolver {
    fn default() -> Self {
        CandidateSolver::Exact {
            cap: DEFAULT_CANDIDATE_CAP,
        }
    }
}

/// The parameter actually used internally: `min(0.05, eps / 12)`.
pub fn internal_eps(eps: f64) -> f64 {
    (eps / 12.0).min(0.05)
}

/// Index of the half-open window `[tc, (t+1)c)` holding `value`.
#[inline]
pub fn window_of(value: f64, c: f64) -> usize {
    ((value + tolerance::tolerance()) / c).floor().max(0.0) as usize
}

/// `L = {i : v(i) >= c}`.
pub fn large_items(instance: &Instance, c: f64) -> Vec<ItemId> {
    instance
        .items()
        .iter()
        .filter(|it| tolerance::ge(it.value, c))
        .map(|it| it.id)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub set: Solution,
    pub value: f64,
    pub weight: f64,
    /// `tc + fopt(V \ L, 1 - w(A_t))`.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateTable {
    pub c: f64,
    pub l: usize,
    pub large: Vec<ItemId>,
    /// Entry `t` is `None` when no feasible subset of `L` has value in window `t`.
    pub entries: Vec<Option<Candidate>>,
}

impl CandidateTable {
    /// Scores with `-inf` for absent windows.
    pub fn scores(&self) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| e.as_ref().map_or(f64::NEG_INFINITY, |c| c.score))
            .collect()
    }
}

/// Builds the candidate table of a normalized instance for threshold `c`.
pub fn candidate_table(instance: &Instance, c: f64, solver: CandidateSolver) -> Result<CandidateTable> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::domain(format!("threshold must be positive, got {c}")));
    }
    let norm = instance.normalized();
    let sorted = efficiency_sorted(norm.items());
    let total = fopt_sorted(&sorted, 1.0);
    build_table(&norm, &sorted, total, c, solver)
}

fn build_table(
    norm: &Instance,
    sorted: &[Item],
    fopt_all: f64,
    c: f64,
    solver: CandidateSolver,
) -> Result<CandidateTable> {
    let large_ids = large_items(norm, c);
    let large = norm.filter(|it| tolerance::ge(it.value, c));
    let small_sorted: Vec<Item> = sorted
        .iter()
        .filter(|it| !tolerance::ge(it.value, c))
        .copied()
        .collect();
    let l = window_of(fopt_all, c);
    let sets = match solver {
        CandidateSolver::Exact { cap } => exact_windows(&large, c, l, cap)?,
        CandidateSolver::Dp => dp_windows(&large, c, l)?,
    };
    let entries = sets
        .into_iter()
        .enumerate()
        .map(|(t, set)| {
            set.map(|set| {
                let value = large.value_of(&set).expect("candidate drawn from L");
                let weight = large.weight_of(&set).expect("candidate drawn from L");
                let residual = (1.0 - weight).max(0.0);
                Candidate {
                    score: t as f64 * c + fopt_sorted(&small_sorted, residual),
                    set,
                    value,
                    weight,
                }
            })
        })
        .collect();
    Ok(CandidateTable {
        c,
        l,
        large: large_ids,
        entries,
    })
}

/// Keeps the lightest set per window, lexicographically smallest on ties.
struct WindowBest {
    best: Vec<Option<(f64, Vec<ItemId>)>>,
}

impl WindowBest {
    fn new(l: usize) -> Self {
        let mut best = vec![None; l + 1];
        best[0] = Some((0.0, Vec::new()));
        WindowBest { best }
    }

    fn offer(&mut self, t: usize, weight: f64, ids: &[ItemId]) {
        let tol = tolerance::tolerance();
        let slot = &mut self.best[t];
        let better = match slot {
            None => true,
            Some((w, set)) => weight < *w - tol || (weight <= *w + tol && ids < set.as_slice()),
        };
        if better {
            *slot = Some((weight, ids.to_vec()));
        }
    }

    fn finish(self) -> Vec<Option<Solution>> {
        self.best
            .into_iter()
            .map(|b| b.map(|(_, ids)| Solution::from_ids(ids)))
            .collect()
    }
}

fn exact_windows(large: &Instance, c: f64, l: usize, cap: usize) -> Result<Vec<Option<Solution>>> {
    if large.len() > cap {
        return Err(Error::Size {
            what: "large item set",
            size: large.len(),
            cap,
        });
    }
    let items = large.items();
    let limit = large.weight_limit();
    let mut best = WindowBest::new(l);
    let mut path = Vec::with_capacity(items.len());
    // Nonempty feasible subsets in DFS order; every one has value >= c, so
    // none lands in window 0, whose candidate is the empty set.
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        items: &[Item],
        j: usize,
        value: f64,
        weight: f64,
        limit: f64,
        c: f64,
        l: usize,
        path: &mut Vec<ItemId>,
        best: &mut WindowBest,
    ) {
        for k in j..items.len() {
            let it = items[k];
            let (v, w) = (value + it.value, weight + it.weight);
            if !tolerance::le(w, limit) {
                continue;
            }
            let t = window_of(v, c);
            if t > l {
                continue;
            }
            path.push(it.id);
            best.offer(t, w, path);
            dfs(items, k + 1, v, w, limit, c, l, path, best);
            path.pop();
        }
    }
    dfs(items, 0, 0.0, 0.0, limit, c, l, &mut path, &mut best);
    Ok(best.finish())
}

fn dp_windows(large: &Instance, c: f64, l: usize) -> Result<Vec<Option<Solution>>> {
    // Every value sum in windows 0..=l is below (l + 1) * c.
    let cap = (((l + 1) as f64) * c).floor() as usize;
    let table = integer_value_opt(large, Some(cap))?;
    let minweight = table.minweight();
    let tol = tolerance::tolerance();
    let limit = large.weight_limit();
    let mut lightest = vec![f64::INFINITY; l + 1];
    for (s, &w) in minweight.iter().enumerate().skip(1) {
        let t = window_of(s as f64, c);
        if t <= l && tolerance::le(w, limit) && w < lightest[t] {
            lightest[t] = w;
        }
    }
    let mut best = WindowBest::new(l);
    for (s, &w) in minweight.iter().enumerate().skip(1) {
        let t = window_of(s as f64, c);
        if t <= l && tolerance::le(w, limit) && w <= lightest[t] + tol {
            let set = table.reconstruct(s).expect("finite entries reconstruct");
            best.offer(t, w, set.ids());
        }
    }
    Ok(best.finish())
}

/// The lightest subset of `large` with value in window `t`, by exhaustive search.
pub fn candidate_exact(large: &Instance, t: usize, c: f64) -> Result<Option<Solution>> {
    candidate_exact_capped(large, t, c, DEFAULT_CANDIDATE_CAP)
}

pub fn candidate_exact_capped(large: &Instance, t: usize, c: f64, cap: usize) -> Result<Option<Solution>> {
    if c.is_nan() || c <= 0.0 {
        return Err(Error::domain(format!("threshold must be positive, got {c}")));
    }
    let mut windows = exact_windows(large, c, t, cap)?;
    Ok(windows.swap_remove(t))
}

/// The lightest subset of `large` (integral values) with value in window `t`,
/// via the min-weight-per-value table.
pub fn candidate_dp(large: &Instance, t: usize, c: f64) -> Result<Option<Solution>> {
    if c.is_nan() || c <= 0.0 {
        return Err(Error::domain(format!("threshold must be positive, got {c}")));
    }
    let mut windows = dp_windows(large, c, t)?;
    Ok(windows.swap_remove(t))
}

/// Selection probabilities of the exponential mechanism, `exp(x_t / d)`
/// normalized; `-inf` scores get probability zero.
pub fn exp_mech_probs(scores: &[f64], d: f64) -> Result<Vec<f64>> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::domain(format!("scale d must be positive, got {d}")));
    }
    let max = scores
        .iter()
        .copied()
        .filter(|s| s.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::domain("exponential mechanism needs at least one finite score"));
    }
    let weights: Vec<f64> = scores
        .iter()
        .map(|&s| if s.is_finite() { ((s - max) / d).exp() } else { 0.0 })
        .collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Samples an index with probability proportional to `exp(score / d)`.
pub fn exponential_mechanism(scores: &[f64], d: f64, source: &mut dyn DrawSource) -> Result<usize> {
    let probs = exp_mech_probs(scores, d)?;
    let mut rec = Recorder::new(source);
    rec.categorical(Stage::ExpMechT, probs)
}

/// Runs the algorithm with parameter `eps` (internally `min(0.05, eps/12)`).
pub fn stable_knapsack(
    instance: &Instance,
    eps: f64,
    source: &mut dyn DrawSource,
    solver: CandidateSolver,
) -> Result<Run> {
    check_eps(eps)?;
    let mut rec = Recorder::new(source);
    let solution = stable_with(instance, internal_eps(eps), solver, &mut rec)?;
    Ok(Run {
        solution,
        transcript: rec.transcript,
    })
}

pub(crate) fn stable_with(
    instance: &Instance,
    eps_int: f64,
    solver: CandidateSolver,
    rec: &mut Recorder<'_>,
) -> Result<Solution> {
    let norm = instance.normalized();
    let sorted = efficiency_sorted(norm.items());
    let total = fopt_sorted(&sorted, 1.0);
    if total <= tolerance::tolerance() {
        return Ok(Solution::empty());
    }
    let c = rec.uniform(Stage::ThresholdC, eps_int * total, 2.0 * eps_int * total)?;
    let table = build_table(&norm, &sorted, total, c, solver)?;
    let d = c / (10.0 * (1.0 / eps_int).ln());
    let probs = exp_mech_probs(&table.scores(), d)?;
    let t = rec.categorical(Stage::ExpMechT, probs)?;
    let chosen = table.entries[t]
        .as_ref()
        .ok_or_else(|| Error::domain("exponential mechanism picked an empty window"))?;
    let small: Vec<Item> = sorted
        .iter()
        .filter(|it| !tolerance::ge(it.value, c))
        .copied()
        .collect();
    let rest = sampled_prefix(&small, 1.0 - chosen.weight, eps_int, rec)?;
    Ok(chosen.set.union(&Solution::from_ids(rest)))
}
