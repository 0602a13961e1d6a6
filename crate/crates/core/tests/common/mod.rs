#![allow(dead_code)]

use stable_knapsack::instances::{gen_random, Dist, RandomSpec};
use stable_knapsack::{Instance, Item};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Random instance whose weights are spread over `(0, w_hi]`.
pub fn random_instance(n: usize, w_hi: f64, seed: u64) -> Instance {
    let spec = RandomSpec {
        n,
        values: Dist::Uniform { lo: 0.0, hi: 1.0 },
        weights: Dist::Uniform { lo: 0.0, hi: w_hi },
        simple: false,
    };
    gen_random(&spec, seed).unwrap()
}

/// Pearson χ² p-value of `observed` counts against `expected` probabilities.
/// Cells with expected count below 5 are pooled into one cell.
pub fn chi_square_p(observed: &[usize], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    let total: usize = observed.iter().sum();
    let n = total as f64;
    let mut stat = 0.0;
    let mut cells = 0usize;
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected) {
        let e = p * n;
        if e < 5.0 {
            pool_o += o as f64;
            pool_e += e;
            continue;
        }
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    if pool_e == 0.0 && pool_o > 0.0 {
        return 0.0;
    }
    if pool_e > 0.0 {
        stat += (pool_o - pool_e).powi(2) / pool_e;
        cells += 1;
    }
    if cells < 2 {
        return 1.0;
    }
    ChiSquared::new((cells - 1) as f64).unwrap().sf(stat)
}

/// Two-sample χ² homogeneity p-value for count tables over the same cells.
/// Cells with fewer than 10 pooled observations are merged.
pub fn chi_square_two_sample_p(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut merged: Vec<(usize, usize)> = Vec::new();
    let mut rare = (0, 0);
    for (&x, &y) in a.iter().zip(b) {
        if x + y < 10 {
            rare.0 += x;
            rare.1 += y;
        } else {
            merged.push((x, y));
        }
    }
    if rare.0 + rare.1 > 0 {
        merged.push(rare);
    }
    let na = merged.iter().map(|c| c.0).sum::<usize>() as f64;
    let nb = merged.iter().map(|c| c.1).sum::<usize>() as f64;
    if merged.len() < 2 {
        return 1.0;
    }
    let stat: f64 = merged
        .iter()
        .map(|&(x, y)| {
            let pooled = (x + y) as f64;
            let ea = pooled * na / (na + nb);
            let eb = pooled * nb / (na + nb);
            (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb
        })
        .sum();
    ChiSquared::new((merged.len() - 1) as f64).unwrap().sf(stat)
}

/// Values log-uniform over `[1e-3, 1]`, weights uniform on `[0.01, 0.5)`.
/// Some values then fall near the random threshold, so the randomized
/// algorithms have outputs with more than one likely solution.
pub fn spread_instance(n: usize, seed: u64) -> Instance {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let items = (1..=n as u64)
        .map(|id| {
            let value = 10f64.powf(-3.0 * rng.random::<f64>());
            Item::new(id, value, rng.random_range(0.01..0.5))
        })
        .collect();
    Instance::new(items, 1.0).unwrap()
}
