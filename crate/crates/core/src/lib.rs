//! Simulation and exact-computation toolkit for null-recurrent random walks
//! in random environment on supercritical Galton-Watson trees.

pub mod clusters;
pub mod config;
pub mod envspec;
pub mod error;
pub mod experiments;
pub mod exact;
pub mod rng;
pub mod spine;
pub mod stats;
pub mod tree;
pub mod walker;

pub use config::Config;
pub use envspec::{Analytics, EnvironmentSpec, WeightLaw};
pub use error::{Error, Result};
pub use exact::{path_hitting, quenched_mean_k, root_excursion_hit, MissBound, PathStart};
pub use rng::{derive_rng, StreamId};
pub use stats::{Accumulator, Estimate};
pub use tree::{GenStats, Node, TreeArena};
pub use walker::{Observables, RunOutcome, Walker, WalkSummary};
