//! End-to-end learners.
//!
//! [`alg1`] and [`etc`] only ever see group sums through [`BanditEnv`]; the
//! parallel UCB baseline needs [`ObservableEnv`] and is therefore not
//! anonymous. The `run_*` wrappers build a [`Simulator`] for an instance and
//! return its regret trace.

mod alg1;
mod etc;
mod ucb;

pub use alg1::{alg1, run_alg1, Alg1Config, Alg1Report, BatchLog, Decomposer};
pub use etc::{etc, etc_exploration_length, run_etc, EtcConfig, EtcReport};
pub use ucb::{run_ucb, ucb};

use crate::base::BaseError;
use crate::decomp::DecompError;
use crate::env::{Assignment, BanditEnv, EnvError, GroupPartition};
#[cfg(doc)]
use crate::env::{ObservableEnv, Simulator};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnerError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Base(#[from] BaseError),
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error("effective horizon {horizon} is shorter than {batches} batches")]
    HorizonTooSmall { horizon: usize, batches: usize },
    #[error("exploration covers {iterations} iterations but there are {arms} arms")]
    ExplorationTooShort { iterations: usize, arms: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Plays `assignment` without feedback until the horizon.
fn play_out<E: BanditEnv + ?Sized>(env: &mut E, assignment: &Assignment) -> Result<(), EnvError> {
    let silent = GroupPartition::empty();
    while env.remaining() > 0 {
        env.play(assignment, &silent)?;
    }
    Ok(())
}
