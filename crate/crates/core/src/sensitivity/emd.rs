use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{require_items, DeletionEstimate, Method, SensitivityReport};
use crate::algorithm::Algorithm;
use crate::draws::{derive_seed, SeededSource};
use crate::error::{Error, Result};
use crate::model::{Instance, Solution};

const MASS_TOLERANCE: f64 = 1e-9;

/// A finitely supported distribution over solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    support: Vec<(Solution, f64)>,
}

impl EmpiricalDistribution {
    /// Validates masses in `[0, 1]` summing to 1 and distinct solutions.
    pub fn new(mut support: Vec<(Solution, f64)>) -> Result<Self> {
        if support.iter().any(|(_, m)| !(m.is_finite() && (0.0..=1.0).contains(m))) {
            return Err(Error::domain("masses must lie in [0, 1]"));
        }
        let total: f64 = support.iter().map(|(_, m)| m).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::domain(format!("masses sum to {total}, not 1")));
        }
        support.sort_by(|a, b| a.0.cmp(&b.0));
        if support.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::domain("duplicate solution in support"));
        }
        Ok(EmpiricalDistribution { support })
    }

    pub fn point(solution: Solution) -> Self {
        EmpiricalDistribution {
            support: vec![(solution, 1.0)],
        }
    }

    /// Frequency table of a nonempty sample.
    pub fn from_samples(samples: impl IntoIterator<Item = Solution>) -> Result<Self> {
        let mut counts: BTreeMap<Solution, usize> = BTreeMap::new();
        let mut total = 0usize;
        for s in samples {
            *counts.entry(s).or_default() += 1;
            total += 1;
        }
        if total == 0 {
            return Err(Error::domain("empty sample"));
        }
        Ok(EmpiricalDistribution {
            support: counts
                .into_iter()
                .map(|(s, c)| (s, c as f64 / total as f64))
                .collect(),
        })
    }

    /// Support in lexicographic solution order.
    pub fn support(&self) -> &[(Solution, f64)] {
        &self.support
    }

    pub fn mass(&self, solution: &Solution) -> f64 {
        self.support
            .binary_search_by(|(s, _)| s.cmp(solution))
            .map(|k| self.support[k].1)
            .unwrap_or(0.0)
    }
}

/// Output frequencies over `trials` independent runs, run `t` seeded by
/// `derive_seed(seed, [t])`.
pub fn empirical_distribution(
    algorithm: &Algorithm,
    instance: &Instance,
    trials: usize,
    seed: u64,
) -> Result<EmpiricalDistribution> {
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    let trials = if algorithm.is_deterministic() { 1 } else { trials };
    let outputs = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut src = SeededSource::new(derive_seed(seed, &[t]));
            algorithm.run(instance, &mut src).map(|r| r.solution)
        })
        .collect::<Result<Vec<_>>>()?;
    EmpiricalDistribution::from_samples(outputs)
}

/// Minimum expected Hamming distance over all couplings of `p` and `q`,
/// by successive shortest paths on the transport network.
pub fn emd_exact(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> Result<f64> {
    for d in [p, q] {
        let total: f64 = d.support.iter().map(|(_, m)| m).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::domain(format!("masses sum to {total}, not 1")));
        }
    }
    let (np, nq) = (p.support.len(), q.support.len());
    // Nodes: source, p-side, q-side, sink.
    let source = 0;
    let sink = np + nq + 1;
    let mut net = Network::new(np + nq + 2);
    for (a, (_, m)) in p.support.iter().enumerate() {
        net.add_edge(source, 1 + a, *m, 0.0);
    }
    for (b, (_, m)) in q.support.iter().enumerate() {
        net.add_edge(1 + np + b, sink, *m, 0.0);
    }
    for (a, (sa, _)) in p.support.iter().enumerate() {
        for (b, (sb, _)) in q.support.iter().enumerate() {
            net.add_edge(1 + a, 1 + np + b, f64::INFINITY, sa.hamming(sb) as f64);
        }
    }
    Ok(net.min_cost_flow(source, sink))
}

const FLOW_EPS: f64 = 1e-15;

struct Edge {
    to: usize,
    cap: f64,
    cost: f64,
}

struct Network {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: f64, cost: f64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap, cost });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0.0, cost: -cost });
    }

    /// Pushes as much flow as possible, cheapest paths first; returns the cost.
    fn min_cost_flow(&mut self, s: usize, t: usize) -> f64 {
        let n = self.adj.len();
        let mut total = 0.0;
        loop {
            // Bellman-Ford with a FIFO queue; residual costs may be negative.
            let mut dist = vec![f64::INFINITY; n];
            let mut via = vec![usize::MAX; n];
            let mut queued = vec![false; n];
            let mut queue = VecDeque::from([s]);
            dist[s] = 0.0;
            while let Some(u) = queue.pop_front() {
                queued[u] = false;
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap > FLOW_EPS && dist[u] + edge.cost < dist[edge.to] - 1e-12 {
                        dist[edge.to] = dist[u] + edge.cost;
                        via[edge.to] = e;
                        if !queued[edge.to] {
                            queued[edge.to] = true;
                            queue.push_back(edge.to);
                        }
                    }
                }
            }
            if !dist[t].is_finite() {
                return total;
            }
            let mut push = f64::INFINITY;
            let mut v = t;
            while v != s {
                let e = via[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let e = via[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                v = self.edges[e ^ 1].to;
            }
            total += push * dist[t];
        }
    }
}

/// Per-deletion exact EMD between empirical output distributions on `V` and
/// `V \ {i}`. Plug-in estimates carry no confidence interval (`NaN`).
pub fn emd_sensitivity(
    algorithm: &Algorithm,
    instance: &Instance,
    trials: usize,
    seed: u64,
) -> Result<SensitivityReport> {
    require_items(instance)?;
    let full = empirical_distribution(algorithm, instance, trials, derive_seed(seed, &[0]))?;
    let rows = instance
        .ids()
        .map(|id| {
            let reduced = instance.delete_item(id)?;
            let other = empirical_distribution(algorithm, &reduced, trials, derive_seed(seed, &[1, id.0]))?;
            Ok(DeletionEstimate {
                id,
                estimate: emd_exact(&full, &other)?,
                ci_halfwidth: f64::NAN,
                trials,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SensitivityReport::from_rows(rows, f64::NAN, trials, Method::ExactEmd))
}
