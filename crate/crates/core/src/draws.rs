//! Labeled random draws.
//!
//! Every randomized algorithm in this crate asks a [`DrawSource`] for each of
//! its random choices, naming the stage and the law it samples from. The
//! resulting [`Transcript`] can be replayed, or handed to a [`FollowSource`]
//! that couples a second run to the first stage by stage.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coupling;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    #[serde(rename = "round_delta")]
    RoundDelta,
    #[serde(rename = "threshold_c")]
    ThresholdC,
    #[serde(rename = "exp_mech_t")]
    ExpMechT,
    #[serde(rename = "greedy_W")]
    GreedyW,
}

impl Stage {
    pub const ALL: [Stage; 4] = [
        Stage::RoundDelta,
        Stage::ThresholdC,
        Stage::ExpMechT,
        Stage::GreedyW,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Stage::RoundDelta => "round_delta",
            Stage::ThresholdC => "threshold_c",
            Stage::ExpMechT => "exp_mech_t",
            Stage::GreedyW => "greedy_W",
        }
    }

    fn stream(self) -> u64 {
        match self {
            Stage::RoundDelta => 1,
            Stage::ThresholdC => 2,
            Stage::ExpMechT => 3,
            Stage::GreedyW => 4,
        }
    }
}

/// The distribution a stage samples from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Law {
    Uniform { lo: f64, hi: f64 },
    Categorical { probs: Vec<f64> },
}

impl Law {
    /// Probability of `draw`: a density for uniform laws, a mass for categorical ones.
    pub fn density(&self, draw: Draw) -> f64 {
        match (self, draw) {
            (Law::Uniform { lo, hi }, Draw::Real(x)) => {
                if hi > lo && x >= *lo && x <= *hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            (Law::Categorical { probs }, Draw::Index(i)) => probs.get(i).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }

    /// Samples with a single uniform variate from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Draw {
        match self {
            Law::Uniform { lo, hi } => {
                let u: f64 = rng.random();
                Draw::Real(lo + (hi - lo) * u)
            }
            Law::Categorical { probs } => Draw::Index(coupling::sample_index(probs, rng)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Draw {
    Index(usize),
    Real(f64),
}

impl Draw {
    pub fn real(self) -> f64 {
        match self {
            Draw::Real(x) => x,
            Draw::Index(i) => i as f64,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Draw::Index(i) => i,
            Draw::Real(x) => x as usize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub stage: Stage,
    pub draw: Draw,
    pub law: Law,
}

/// Ordered record of every random draw made by one algorithm run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn push(&mut self, stage: Stage, law: Law, draw: Draw) {
        self.entries.push(TranscriptEntry { stage, draw, law });
    }

    /// First recorded draw for `stage`.
    pub fn draw(&self, stage: Stage) -> Option<Draw> {
        self.entries.iter().find(|e| e.stage == stage).map(|e| e.draw)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Supplier of random draws, one per labeled stage.
pub trait DrawSource {
    fn draw(&mut self, stage: Stage, law: &Law) -> Result<Draw>;
}

/// Fresh randomness: one ChaCha substream per stage, all derived from a seed,
/// so a stage's draws do not depend on how many draws other stages made.
#[derive(Debug, Clone)]
pub struct SeededSource {
    seed: u64,
    streams: HashMap<Stage, ChaCha8Rng>,
}

impl SeededSource {
    pub fn new(seed: u64) -> Self {
        SeededSource {
            seed,
            streams: HashMap::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn stream(&mut self, stage: Stage) -> &mut ChaCha8Rng {
        let seed = self.seed;
        self.streams.entry(stage).or_insert_with(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stage.stream());
            rng
        })
    }
}

impl DrawSource for SeededSource {
    fn draw(&mut self, stage: Stage, law: &Law) -> Result<Draw> {
        Ok(law.sample(self.stream(stage)))
    }
}

/// Replays the draws of a transcript in order, per stage.
#[derive(Debug, Clone)]
pub struct ReplaySource<'a> {
    transcript: &'a Transcript,
    cursors: HashMap<Stage, usize>,
}

impl<'a> ReplaySource<'a> {
    pub fn new(transcript: &'a Transcript) -> Self {
        ReplaySource {
            transcript,
            cursors: HashMap::new(),
        }
    }
}

fn nth_entry(transcript: &Transcript, stage: Stage, n: usize) -> Option<&TranscriptEntry> {
    transcript
        .entries
        .iter()
        .filter(|e| e.stage == stage)
        .nth(n)
}

impl DrawSource for ReplaySource<'_> {
    fn draw(&mut self, stage: Stage, _law: &Law) -> Result<Draw> {
        let cursor = self.cursors.entry(stage).or_insert(0);
        let entry = nth_entry(self.transcript, stage, *cursor).ok_or_else(|| {
            Error::domain(format!("transcript has no draw #{cursor} for stage {}", stage.label()))
        })?;
        *cursor += 1;
        Ok(entry.draw)
    }
}

/// Couples a run to a previously recorded leader run.
///
/// For each stage the follower looks up the leader's draw `x` from law `p`
/// and samples its own draw from the conditional law of the maximal coupling
/// of `p` and its own law `q`: it keeps `x` with probability
/// `min(1, q(x)/p(x))`, otherwise it draws from `(q - p)+`. If the leader's
/// draw had law `p`, the follower's draw has law `q`. Stages missing from the
/// leader are drawn fresh.
#[derive(Debug, Clone)]
pub struct FollowSource<'a> {
    leader: &'a Transcript,
    fresh: SeededSource,
    cursors: HashMap<Stage, usize>,
    shared: Vec<(Stage, bool)>,
}

impl<'a> FollowSource<'a> {
    pub fn new(leader: &'a Transcript, seed: u64) -> Self {
        FollowSource {
            leader,
            fresh: SeededSource::new(seed),
            cursors: HashMap::new(),
            shared: Vec::new(),
        }
    }

    /// For each stage drawn so far, whether the leader's draw was reused.
    pub fn shared(&self) -> &[(Stage, bool)] {
        &self.shared
    }
}

impl DrawSource for FollowSource<'_> {
    fn draw(&mut self, stage: Stage, law: &Law) -> Result<Draw> {
        let cursor = self.cursors.entry(stage).or_insert(0);
        let leader = nth_entry(self.leader, stage, *cursor);
        *cursor += 1;
        let rng = self.fresh.stream(stage);
        let (draw, shared) = match leader {
            Some(entry) => coupling::follow(&entry.law, entry.draw, law, rng)?,
            None => (law.sample(rng), false),
        };
        self.shared.push((stage, shared));
        Ok(draw)
    }
}

/// Wraps a source and records everything drawn through it.
pub(crate) struct Recorder<'s> {
    inner: &'s mut dyn DrawSource,
    pub(crate) transcript: Transcript,
}

impl<'s> Recorder<'s> {
    pub(crate) fn new(inner: &'s mut dyn DrawSource) -> Self {
        Recorder {
            inner,
            transcript: Transcript::new(),
        }
    }

    pub(crate) fn uniform(&mut self, stage: Stage, lo: f64, hi: f64) -> Result<f64> {
        let law = Law::Uniform { lo, hi };
        let draw = self.inner.draw(stage, &law)?;
        self.transcript.push(stage, law, draw);
        Ok(draw.real())
    }

    pub(crate) fn categorical(&mut self, stage: Stage, probs: Vec<f64>) -> Result<usize> {
        let law = Law::Categorical { probs };
        let draw = self.inner.draw(stage, &law)?;
        self.transcript.push(stage, law, draw);
        Ok(draw.index())
    }
}

/// Derives an independent 64-bit seed from a base seed and a path of
/// indices (SplitMix64 finalizer over each component).
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    path.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_source_is_reproducible_per_stage() {
        let law = Law::Uniform { lo: 0.0, hi: 1.0 };
        let mut a = SeededSource::new(7);
        let mut b = SeededSource::new(7);
        // Interleaving another stage must not shift GreedyW's stream.
        a.draw(Stage::ThresholdC, &law).unwrap();
        let x = a.draw(Stage::GreedyW, &law).unwrap();
        let y = b.draw(Stage::GreedyW, &law).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn replay_returns_recorded_draws() {
        let mut t = Transcript::new();
        t.push(Stage::GreedyW, Law::Uniform { lo: 0.5, hi: 1.0 }, Draw::Real(0.75));
        t.push(Stage::ExpMechT, Law::Categorical { probs: vec![0.5, 0.5] }, Draw::Index(1));
        let mut r = ReplaySource::new(&t);
        let law = Law::Uniform { lo: 0.0, hi: 1.0 };
        assert_eq!(r.draw(Stage::ExpMechT, &law).unwrap(), Draw::Index(1));
        assert_eq!(r.draw(Stage::GreedyW, &law).unwrap(), Draw::Real(0.75));
        assert!(r.draw(Stage::GreedyW, &law).is_err());
    }

    #[test]
    fn follower_with_identical_law_copies_the_leader() {
        let law = Law::Uniform { lo: 0.9, hi: 1.0 };
        let mut t = Transcript::new();
        t.push(Stage::GreedyW, law.clone(), Draw::Real(0.93));
        let mut f = FollowSource::new(&t, 1);
        assert_eq!(f.draw(Stage::GreedyW, &law).unwrap(), Draw::Real(0.93));
        assert_eq!(f.shared(), &[(Stage::GreedyW, true)]);
    }

    #[test]
    fn transcript_serializes_with_stage_labels() {
        let mut t = Transcript::new();
        t.push(Stage::ThresholdC, Law::Uniform { lo: 1.0, hi: 2.0 }, Draw::Real(1.5));
        t.push(Stage::ExpMechT, Law::Categorical { probs: vec![1.0] }, Draw::Index(0));
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"threshold_c\""));
        assert!(json.contains("\"exp_mech_t\""));
        let back: Transcript = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn derived_seeds_differ_along_paths() {
        let a = derive_seed(1, &[0, 1]);
        let b = derive_seed(1, &[1, 0]);
        let c = derive_seed(2, &[0, 1]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(1, &[0, 1]));
    }
}
