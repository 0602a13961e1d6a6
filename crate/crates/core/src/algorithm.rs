//! Uniform entry point over every algorithm in the crate.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::draws::{DrawSource, Transcript};
use crate::error::{Error, Result};
use crate::exact::brute_force_opt;
use crate::fpras::fpras;
use crate::greedy::{check_eps, modified_greedy, plain_greedy};
use crate::model::{Instance, Solution};
use crate::simple::simple_stable;
use crate::stable::{stable_knapsack, CandidateSolver};

/// Output of one run: the solution plus every random draw behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Run {
    pub solution: Solution,
    pub transcript: Transcript,
}

impl Run {
    pub fn deterministic(solution: Solution) -> Self {
        Run {
            solution,
            transcript: Transcript::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    /// Efficiency-ordered greedy with the full budget.
    Greedy,
    ModifiedGreedy { eps: f64 },
    Stable { eps: f64, solver: CandidateSolver },
    Fpras { eps: f64 },
    Simple { eps: f64 },
    /// Exhaustive optimum, used as a reference "algorithm".
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    Greedy,
    ModifiedGreedy,
    Stable,
    Fpras,
    Simple,
    BruteForce,
}

impl AlgorithmKind {
    pub fn with_eps(self, eps: f64) -> Result<Algorithm> {
        let needs_eps = !matches!(self, AlgorithmKind::Greedy | AlgorithmKind::BruteForce);
        if needs_eps {
            check_eps(eps)?;
        }
        Ok(match self {
            AlgorithmKind::Greedy => Algorithm::Greedy,
            AlgorithmKind::ModifiedGreedy => Algorithm::ModifiedGreedy { eps },
            AlgorithmKind::Stable => Algorithm::Stable {
                eps,
                solver: CandidateSolver::default(),
            },
            AlgorithmKind::Fpras => Algorithm::Fpras { eps },
            AlgorithmKind::Simple => Algorithm::Simple { eps },
            AlgorithmKind::BruteForce => Algorithm::BruteForce,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Greedy => "greedy",
            AlgorithmKind::ModifiedGreedy => "modified-greedy",
            AlgorithmKind::Stable => "stable",
            AlgorithmKind::Fpras => "fpras",
            AlgorithmKind::Simple => "simple",
            AlgorithmKind::BruteForce => "brute-force",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "greedy" => AlgorithmKind::Greedy,
            "modified-greedy" => AlgorithmKind::ModifiedGreedy,
            "stable" => AlgorithmKind::Stable,
            "fpras" => AlgorithmKind::Fpras,
            "simple" => AlgorithmKind::Simple,
            "brute-force" => AlgorithmKind::BruteForce,
            other => return Err(Error::domain(format!("unknown algorithm {other:?}"))),
        })
    }
}

impl Algorithm {
    pub fn kind(&self) -> AlgorithmKind {
        match self {
            Algorithm::Greedy => AlgorithmKind::Greedy,
            Algorithm::ModifiedGreedy { .. } => AlgorithmKind::ModifiedGreedy,
            Algorithm::Stable { .. } => AlgorithmKind::Stable,
            Algorithm::Fpras { .. } => AlgorithmKind::Fpras,
            Algorithm::Simple { .. } => AlgorithmKind::Simple,
            Algorithm::BruteForce => AlgorithmKind::BruteForce,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(
            self,
            Algorithm::Greedy | Algorithm::Simple { .. } | Algorithm::BruteForce
        )
    }

    pub fn run(&self, instance: &Instance, source: &mut dyn DrawSource) -> Result<Run> {
        match *self {
            Algorithm::Greedy => Ok(Run::deterministic(plain_greedy(instance))),
            Algorithm::ModifiedGreedy { eps } => modified_greedy(instance, eps, source),
            Algorithm::Stable { eps, solver } => stable_knapsack(instance, eps, source, solver),
            Algorithm::Fpras { eps } => fpras(instance, eps, source),
            Algorithm::Simple { eps } => simple_stable(instance, eps).map(Run::deterministic),
            Algorithm::BruteForce => {
                brute_force_opt(&instance.normalized()).map(|opt| Run::deterministic(opt.solution))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::draws::SeededSource;
    use crate::instances::gen_prop2;

    #[test]
    fn names_round_trip() {
        for kind in [
            AlgorithmKind::Greedy,
            AlgorithmKind::ModifiedGreedy,
            AlgorithmKind::Stable,
            AlgorithmKind::Fpras,
            AlgorithmKind::Simple,
            AlgorithmKind::BruteForce,
        ] {
            assert_eq!(kind.name().parse::<AlgorithmKind>().unwrap(), kind);
        }
        assert!("nope".parse::<AlgorithmKind>().is_err());
    }

    #[test]
    fn every_algorithm_returns_feasible_output() {
        let inst = gen_prop2(3).unwrap();
        for kind in [
            AlgorithmKind::Greedy,
            AlgorithmKind::ModifiedGreedy,
            AlgorithmKind::Stable,
            AlgorithmKind::Fpras,
            AlgorithmKind::BruteForce,
        ] {
            let alg = kind.with_eps(0.3).unwrap();
            let run = alg.run(&inst, &mut SeededSource::new(5)).unwrap();
            assert!(inst.is_feasible(&run.solution), "{kind}");
            assert_eq!(alg.is_deterministic(), run.transcript.is_empty(), "{kind}");
        }
    }

    #[test]
    fn eps_is_validated_for_parametrized_algorithms() {
        assert!(AlgorithmKind::Stable.with_eps(1.5).is_err());
        assert!(AlgorithmKind::Greedy.with_eps(1.5).is_ok());
    }
}
