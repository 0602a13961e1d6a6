//! Polynomial-time variant: round values to integers by a random unit `delta`
//! and compute the candidates with the min-weight-per-value table.

use crate::algorithm::Run;
use crate::draws::{DrawSource, Recorder, Stage};
use crate::error::{Error, Result};
use crate::fractional::fopt;
use crate::greedy::check_eps;
use crate::model::{Instance, Solution};
use crate::stable::{internal_eps, stable_with, CandidateSolver};
use crate::tolerance;

/// Same ids and weights, values `floor(v / delta)`.
pub fn round_values(instance: &Instance, delta: f64) -> Result<Instance> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::domain(format!("rounding unit must be positive, got {delta}")));
    }
    let values: Vec<f64> = instance
        .items()
        .iter()
        .map(|it| (it.value / delta).floor())
        .collect();
    Ok(instance.with_values(values))
}

/// Rounding parameter used for `eps`: the rounding step and the inner
/// algorithm each get `eps / 5`.
pub fn rounding_eps(eps: f64) -> f64 {
    eps / 5.0
}

/// The interval `delta` is drawn from: `[fopt * eps' / n, 2 fopt * eps' / n]`.
pub fn delta_interval(instance: &Instance, eps: f64) -> Option<(f64, f64)> {
    let norm = instance.normalized();
    let total = fopt(&norm);
    if norm.is_empty() || total <= tolerance::tolerance() {
        return None;
    }
    let lo = total * rounding_eps(eps) / norm.len() as f64;
    Some((lo, 2.0 * lo))
}

pub fn fpras(instance: &Instance, eps: f64, source: &mut dyn DrawSource) -> Result<Run> {
    check_eps(eps)?;
    let mut rec = Recorder::new(source);
    let solution = match delta_interval(instance, eps) {
        None => Solution::empty(),
        Some((lo, hi)) => {
            let delta = rec.uniform(Stage::RoundDelta, lo, hi)?;
            run_rounded(instance, eps, delta, &mut rec)?
        }
    };
    Ok(Run {
        solution,
        transcript: rec.transcript,
    })
}

/// The algorithm conditioned on a given rounding unit.
pub fn fpras_with_delta(
    instance: &Instance,
    eps: f64,
    delta: f64,
    source: &mut dyn DrawSource,
) -> Result<Run> {
    check_eps(eps)?;
    let mut rec = Recorder::new(source);
    let solution = run_rounded(instance, eps, delta, &mut rec)?;
    Ok(Run {
        solution,
        transcript: rec.transcript,
    })
}

fn run_rounded(instance: &Instance, eps: f64, delta: f64, rec: &mut Recorder<'_>) -> Result<Solution> {
    let rounded = round_values(&instance.normalized(), delta)?;
    stable_with(
        &rounded,
        internal_eps(rounding_eps(eps)),
        CandidateSolver::Dp,
        rec,
    )
}
