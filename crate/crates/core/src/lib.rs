//! Knapsack algorithms whose output distribution changes little, on
//! average, when a single item is deleted, together with tools to measure
//! that change and to run the algorithms on item streams.
//!
//! Weight limits are normalized to 1 internally. Randomized algorithms
//! draw through a [`DrawSource`] and return a [`Transcript`] of labeled
//! draws, which is what coupling, replay, and streaming build on.

pub mod algorithm;
pub mod coupling;
pub mod draws;
pub mod dynamic;
pub mod error;
pub mod exact;
pub mod fpras;
pub mod fractional;
pub mod greedy;
pub mod instances;
pub mod model;
pub mod sensitivity;
pub mod simple;
pub mod stable;
pub mod tolerance;

pub use algorithm::{Algorithm, AlgorithmKind, Run};
pub use draws::{derive_seed, Draw, DrawSource, FollowSource, Law, ReplaySource, SeededSource, Stage, Transcript};
pub use error::{Error, Result};
pub use exact::{brute_force_opt, integer_value_opt, ExactOpt};
pub use fpras::fpras;
pub use fractional::{fopt, fractional_opt, FractionalOpt};
pub use greedy::{greedy_prefix, modified_greedy, plain_greedy};
pub use model::{Instance, Item, ItemId, Solution};
pub use simple::simple_stable;
pub use stable::{stable_knapsack, CandidateSolver};
