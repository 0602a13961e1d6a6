//! Instance families and the JSON instance format.
//!
//! ```json
//! {"schema_version": 1, "weight_limit": 1.0, "items": [{"id": 1, "value": 0.5, "weight": 0.25}]}
//! ```

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Item};

/// `k` items of weight and value `1/k`, then `k` items of weight `1/k^2` and
/// value `1/k^3`. The plain greedy's output on this family changes by `k + 1`
/// items whenever one of the first `k` is deleted.
pub fn gen_prop2(k: usize) -> Result<Instance> {
    if k < 2 {
        return Err(Error::domain(format!("prop2 family needs k >= 2, got {k}")));
    }
    let kf = k as f64;
    let mut items = Vec::with_capacity(2 * k);
    for i in 0..k {
        items.push(Item::new(i as u64 + 1, 1.0 / kf, 1.0 / kf));
    }
    for i in 0..k {
        items.push(Item::new((k + i) as u64 + 1, 1.0 / (kf * kf * kf), 1.0 / (kf * kf)));
    }
    Instance::new(items, 1.0)
}

/// `k = floor(1 / (8 eps))` for the lower-bound family.
pub fn lowerbound_k(eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    Ok((1.0 / eps / 8.0).floor() as usize)
}

/// The lower-bound family for `eps`, see [`gen_lowerbound_k`].
pub fn gen_lowerbound(eps: f64) -> Result<Instance> {
    gen_lowerbound_k(lowerbound_k(eps)?)
}

/// `k` items of weight `1/k` and value 1, then `k - 1` items of weight
/// `1/(k-1)` and value `(2k-1)/(2k-2)`. The first `k` items form the unique
/// optimum; without any of them the other `k - 1` do.
pub fn gen_lowerbound_k(k: usize) -> Result<Instance> {
    if k < 2 {
        return Err(Error::domain(format!("lower-bound family needs k >= 2, got {k}")));
    }
    let kf = k as f64;
    let mut items = Vec::with_capacity(2 * k - 1);
    for i in 0..k {
        items.push(Item::new(i as u64 + 1, 1.0, 1.0 / kf));
    }
    let heavy_value = (2.0 * kf - 1.0) / (2.0 * kf - 2.0);
    for i in 0..k - 1 {
        items.push(Item::new((k + i) as u64 + 1, heavy_value, 1.0 / (kf - 1.0)));
    }
    Instance::new(items, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dist {
    Uniform { lo: f64, hi: f64 },
    /// Pareto with scale 1 and shape `alpha`; used as `1/x` for weights.
    Pareto { alpha: f64 },
}

impl Dist {
    fn validate(&self) -> Result<()> {
        match *self {
            Dist::Uniform { lo, hi } if lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi => {
                Ok(())
            }
            Dist::Pareto { alpha } if alpha.is_finite() && alpha > 0.0 => Ok(()),
            other => Err(Error::domain(format!("invalid distribution {other:?}"))),
        }
    }

    fn sample_value<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Dist::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Dist::Pareto { alpha } => Pareto::new(1.0, alpha).expect("validated").sample(rng),
        }
    }

    /// Samples a weight in `(0, 1]`.
    fn sample_weight<R: Rng>(&self, rng: &mut R) -> f64 {
        let w = match *self {
            // 1 - u lies in (0, 1], so U(0, 1) yields weights in (0, 1].
            Dist::Uniform { lo, hi } => lo + (hi - lo) * (1.0 - rng.random::<f64>()),
            Dist::Pareto { alpha } => 1.0 / Pareto::new(1.0, alpha).expect("validated").sample(rng),
        };
        w.clamp(f64::MIN_POSITIVE, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub n: usize,
    pub values: Dist,
    pub weights: Dist,
    /// Emit simple-knapsack instances (`value = weight`); `values` is ignored.
    #[serde(default)]
    pub simple: bool,
}

impl RandomSpec {
    /// Values and weights uniform on `(0, 1]`.
    pub fn uniform(n: usize) -> Self {
        RandomSpec {
            n,
            values: Dist::Uniform { lo: 0.0, hi: 1.0 },
            weights: Dist::Uniform { lo: 0.0, hi: 1.0 },
            simple: false,
        }
    }
}

/// Reproducible random instance with ids `1..=n` and weight limit 1.
pub fn gen_random(spec: &RandomSpec, seed: u64) -> Result<Instance> {
    spec.values.validate()?;
    spec.weights.validate()?;
    if let Dist::Uniform { hi, .. } = spec.weights {
        if hi <= 0.0 {
            return Err(Error::domain("weight distribution must allow positive weights"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items = (1..=spec.n as u64)
        .map(|id| {
            let weight = spec.weights.sample_weight(&mut rng);
            let value = if spec.simple {
                weight
            } else {
                spec.values.sample_value(&mut rng)
            };
            Item::new(id, value, weight)
        })
        .collect();
    Instance::new(items, 1.0)
}

/// Version written into instance files; files without the field are accepted.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema_version: Option<u32>,
    weight_limit: f64,
    items: Vec<ItemRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemRecord {
    id: u64,
    value: f64,
    weight: f64,
}

/// Parses the JSON instance format. `origin` names the source in errors.
pub fn parse_instance(text: &str, origin: &Path) -> Result<Instance> {
    let parse_err = |message: String| Error::Parse {
        path: origin.to_path_buf(),
        message,
    };
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    if let Some(v) = file.schema_version.filter(|&v| v != SCHEMA_VERSION) {
        return Err(parse_err(format!("unsupported schema_version {v}")));
    }
    for (pos, pair) in file.items.windows(2).enumerate() {
        if pair[1].id <= pair[0].id {
            return Err(parse_err(format!(
                "item #{} has id {} but ids must be strictly increasing (previous id {})",
                pos + 1,
                pair[1].id,
                pair[0].id
            )));
        }
    }
    let items = file
        .items
        .iter()
        .map(|r| Item::new(r.id, r.value, r.weight))
        .collect();
    Instance::new(items, file.weight_limit).map_err(|e| parse_err(e.to_string()))
}

/// Canonical JSON: items in id order, shortest round-trip float formatting.
pub fn instance_to_json(instance: &Instance) -> String {
    let file = InstanceFile {
        schema_version: Some(SCHEMA_VERSION),
        weight_limit: instance.weight_limit(),
        items: instance
            .items()
            .iter()
            .map(|it| ItemRecord {
                id: it.id.0,
                value: it.value,
                weight: it.weight,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("instance serializes")
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_instance(&text, path)
}

pub fn write_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let mut text = instance_to_json(instance);
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
