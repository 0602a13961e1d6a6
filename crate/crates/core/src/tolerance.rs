//! The single absolute tolerance used for every weight and value comparison.

use std::sync::atomic::{AtomicU64, Ordering};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9

/// Current comparison tolerance.
#[inline]
pub fn tolerance() -> f64 {
    f64::from_bits(TOLERANCE_BITS.load(Ordering::Relaxed))
}

/// Overrides the process-wide tolerance. Intended for testing hooks; call it
/// before any algorithm runs.
pub fn set_tolerance(tol: f64) {
    assert!(tol.is_finite() && tol >= 0.0, "tolerance must be finite and nonnegative");
    TOLERANCE_BITS.store(tol.to_bits(), Ordering::Relaxed);
}

/// Environment variable read by [`init_from_env`].
pub const TOLERANCE_ENV: &str = "STABLE_KNAPSACK_TOLERANCE";

/// Applies `STABLE_KNAPSACK_TOLERANCE` if it is set. Returns the value
/// applied, or a domain error when it is not a finite nonnegative number.
pub fn init_from_env() -> crate::Result<Option<f64>> {
    let Ok(raw) = std::env::var(TOLERANCE_ENV) else {
        return Ok(None);
    };
    match raw.trim().parse::<f64>() {
        Ok(tol) if tol.is_finite() && tol >= 0.0 => {
            set_tolerance(tol);
            Ok(Some(tol))
        }
        _ => Err(crate::Error::Domain(format!("{TOLERANCE_ENV}={raw:?} is not a nonnegative number"))),
    }
}

/// `a <= b` up to the tolerance.
#[inline]
pub fn le(a: f64, b: f64) -> bool {
    a <= b + tolerance()
}

/// `a >= b` up to the tolerance.
#[inline]
pub fn ge(a: f64, b: f64) -> bool {
    a + tolerance() >= b
}

#[inline]
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= tolerance()
}
