//! The fractional (LP-relaxed) knapsack optimum via the efficiency-ordered fill.

use crate::error::{Error, Result};
use crate::greedy::efficiency_sorted;
use crate::model::{Instance, Item};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOpt {
    pub value: f64,
    /// Position, in efficiency order, of the first item that does not fit
    /// entirely. `None` when every item fits.
    pub break_position: Option<usize>,
    /// Fraction of the break item taken, in `[0, 1]`.
    pub fraction: f64,
}

/// `fopt(V, W)` where `W` is the instance's limit or `limit_override`.
pub fn fractional_opt(instance: &Instance, limit_override: Option<f64>) -> Result<FractionalOpt> {
    let limit = match limit_override {
        Some(w) if w.is_nan() || w < 0.0 => {
            return Err(Error::domain(format!("weight limit override must be >= 0, got {w}")))
        }
        Some(w) => w,
        None => instance.weight_limit(),
    };
    Ok(fill(&efficiency_sorted(instance.items()), limit))
}

/// Greedy fill over items already in efficiency order.
pub(crate) fn fill<'a>(sorted: impl IntoIterator<Item = &'a Item>, limit: f64) -> FractionalOpt {
    let mut used = 0.0;
    let mut value = 0.0;
    for (pos, it) in sorted.into_iter().enumerate() {
        if tolerance::le(used + it.weight, limit) {
            used += it.weight;
            value += it.value;
        } else {
            let fraction = ((limit - used) / it.weight).clamp(0.0, 1.0);
            return FractionalOpt {
                value: value + fraction * it.value,
                break_position: Some(pos),
                fraction,
            };
        }
    }
    FractionalOpt {
        value,
        break_position: None,
        fraction: 0.0,
    }
}

#[inline]
pub(crate) fn fopt_sorted<'a>(sorted: impl IntoIterator<Item = &'a Item>, limit: f64) -> f64 {
    fill(sorted, limit).value
}

/// `fopt(V)` with the instance's own limit.
pub fn fopt(instance: &Instance) -> f64 {
    fopt_sorted(&efficiency_sorted(instance.items()), instance.weight_limit())
}
