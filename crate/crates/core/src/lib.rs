//! Rotational analysis of the ChaCha permutation.
//!
//! * [`arx`]: word-size-generic quarter round, rounds and permutation.
//! * [`bounds`]: exact rotational probabilities and bounds.
//! * [`search`]: exhaustive and sampled rotational-collision experiments.
//! * [`distinguisher`]: the toy-scale oracle game against a random permutation.
//! * [`exact`]: exact rationals and report rendering.

pub mod arx;
pub mod bounds;
pub mod distinguisher;
pub mod error;
pub mod exact;
pub mod rng;
pub mod search;
pub mod stats;
pub mod tables;

pub use arx::{QuarterRoundParams, RotAmount, RoundKind, State, WordSpec, WordVec4};
pub use bounds::{BoundVariant, BoundsPair};
pub use error::{Error, Result};
pub use exact::ExactProb;
