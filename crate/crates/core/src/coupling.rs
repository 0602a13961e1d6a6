//! Maximal couplings of uniform and categorical laws.
//!
//! Both couplings are built from the same conditional kernel: draw `x` from
//! the first law `p`, keep it for the second coordinate with probability
//! `min(1, q(x)/p(x))`, otherwise draw from the normalized positive part
//! `(q - p)+`. The pair has marginals `p` and `q` and agrees with probability
//! `sum/integral of min(p, q)`, the largest possible.

use rand::Rng;

use crate::draws::{Draw, Law};
use crate::error::{Error, Result};

/// Samples an index proportionally to nonnegative `weights`.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().copied().filter(|w| *w > 0.0).sum();
    let mut u = rng.random::<f64>() * total;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if u < w {
                return i;
            }
            u -= w;
            last_positive = i;
        }
    }
    last_positive
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo < hi {
        Ok(())
    } else {
        Err(Error::domain(format!("degenerate interval [{lo}, {hi}]")))
    }
}

fn check_simplex(p: &[f64]) -> Result<()> {
    if p.iter().any(|&m| !(m.is_finite() && m >= 0.0)) {
        return Err(Error::domain("probability vector has a negative or non-finite mass"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("probability vector sums to {total}, not 1")));
    }
    Ok(())
}

/// Draws the second coordinate of the maximal coupling of `leader_law` and
/// `own_law`, given the leader's draw. Returns the draw and whether it
/// coincides with the leader's.
pub fn follow<R: Rng + ?Sized>(
    leader_law: &Law,
    leader_draw: Draw,
    own_law: &Law,
    rng: &mut R,
) -> Result<(Draw, bool)> {
    match (leader_law, own_law) {
        (Law::Uniform { lo: a1, hi: b1 }, Law::Uniform { lo: a2, hi: b2 }) => {
            check_interval(*a1, *b1)?;
            check_interval(*a2, *b2)?;
            let x = leader_draw.real();
            let p = leader_law.density(Draw::Real(x));
            let q = own_law.density(Draw::Real(x));
            if p > 0.0 && rng.random::<f64>() * p < q {
                return Ok((Draw::Real(x), true));
            }
            Ok((Draw::Real(uniform_excess(*a1, *b1, *a2, *b2, rng)), false))
        }
        (Law::Categorical { probs: p }, Law::Categorical { probs: q }) => {
            let i = leader_draw.index();
            let pi = p.get(i).copied().unwrap_or(0.0);
            let qi = q.get(i).copied().unwrap_or(0.0);
            if pi > 0.0 && rng.random::<f64>() * pi < qi {
                return Ok((Draw::Index(i), true));
            }
            let excess: Vec<f64> = q
                .iter()
                .enumerate()
                .map(|(k, &qk)| (qk - p.get(k).copied().unwrap_or(0.0)).max(0.0))
                .collect();
            let j = if excess.iter().sum::<f64>() > 0.0 {
                sample_index(&excess, rng)
            } else {
                sample_index(q, rng)
            };
            Ok((Draw::Index(j), j == i))
        }
        _ => Err(Error::domain("cannot couple laws of different kinds")),
    }
}

/// Samples from `(q - p)+` normalized, with `p = U[a1,b1]`, `q = U[a2,b2]`.
fn uniform_excess<R: Rng + ?Sized>(a1: f64, b1: f64, a2: f64, b2: f64, rng: &mut R) -> f64 {
    let dq = 1.0 / (b2 - a2);
    let dp = 1.0 / (b1 - a1);
    let lo = a1.max(a2);
    let hi = b1.min(b2);
    // Pieces of [a2, b2] with their excess density.
    let mut pieces: Vec<(f64, f64, f64)> = Vec::with_capacity(3);
    if lo < hi {
        pieces.push((a2, lo, dq));
        pieces.push((lo, hi, (dq - dp).max(0.0)));
        pieces.push((hi, b2, dq));
    } else {
        pieces.push((a2, b2, dq));
    }
    let masses: Vec<f64> = pieces
        .iter()
        .map(|&(l, h, d)| if h > l { (h - l) * d } else { 0.0 })
        .collect();
    if masses.iter().sum::<f64>() <= 0.0 {
        return a2 + (b2 - a2) * rng.random::<f64>();
    }
    let (l, h, _) = pieces[sample_index(&masses, rng)];
    l + (h - l) * rng.random::<f64>()
}

/// Maximal coupling of `U[a1,b1]` and `U[a2,b2]`.
pub fn maximal_coupling_uniform<R: Rng + ?Sized>(
    a1: f64,
    b1: f64,
    a2: f64,
    b2: f64,
    rng: &mut R,
) -> Result<(f64, f64, bool)> {
    check_interval(a1, b1)?;
    check_interval(a2, b2)?;
    let p = Law::Uniform { lo: a1, hi: b1 };
    let q = Law::Uniform { lo: a2, hi: b2 };
    let x1 = p.sample(rng);
    let (x2, shared) = follow(&p, x1, &q, rng)?;
    Ok((x1.real(), x2.real(), shared))
}

/// Maximal coupling of two probability vectors (shorter one zero-padded).
pub fn maximal_coupling_categorical<R: Rng + ?Sized>(
    p: &[f64],
    q: &[f64],
    rng: &mut R,
) -> Result<(usize, usize, bool)> {
    check_simplex(p)?;
    check_simplex(q)?;
    let lp = Law::Categorical { probs: p.to_vec() };
    let lq = Law::Categorical { probs: q.to_vec() };
    let i = lp.sample(rng);
    let (j, shared) = follow(&lp, i, &lq, rng)?;
    Ok((i.index(), j.index(), shared))
}

/// Probability that the maximal coupling of two uniforms agrees.
pub fn uniform_overlap(a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    let len = (b1.min(b2) - a1.max(a2)).max(0.0);
    len * (1.0 / (b1 - a1)).min(1.0 / (b2 - a2))
}

/// Probability that the maximal coupling of two probability vectors agrees.
pub fn categorical_overlap(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a.min(*b)).sum()
}
