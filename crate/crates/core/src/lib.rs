//! Anonymous multi-armed bandits.
//!
//! A central learner assigns `N` users to `K` arms every round but may only
//! observe rewards as sums over groups of at least `C` users sharing an arm.
//! This crate provides:
//!
//! - [`env`]: problem instances, the anonymity-enforcing round simulator and
//!   regret accounting;
//! - [`feedback`]: the `2C+2`-round leave-one-out protocol that turns a fixed
//!   assignment into unbiased per-user reward estimates;
//! - [`base`]: batched successive elimination on a static grid;
//! - [`decomp`]: anonymous decompositions of batched graphs (greedy,
//!   randomized, and exact polytope/Caratheodory based);
//! - [`learners`]: the batched learner, explore-then-commit and a
//!   non-anonymous parallel UCB baseline;
//! - [`harness`]: seeded replication, confidence intervals and CSV output.

pub mod base;
pub mod decomp;
pub mod env;
pub mod feedback;
pub mod harness;
pub mod learners;
pub mod rng;

pub use base::{BaseGrid, BaseState, BatchRequest};
pub use decomp::{BatchedGraph, Decomposition, PolytopePoint, ValidityReport};
pub use env::{
    Assignment, BanditEnv, Group, GroupPartition, Instance, ObservableEnv, RegretTrace,
    RewardFamily, Simulator,
};
pub use feedback::{EstimateRecord, GroupingPlan};
pub use harness::{AggregateResult, Algorithm, ExperimentConfig, InstanceSpec};
pub use learners::{Alg1Config, Decomposer, EtcConfig};
pub use rng::{SeedStreams, Stream};
