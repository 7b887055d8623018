//! Per-user UCB1 with direct reward observation. Not anonymous: this is the
//! reference point for what anonymity costs.

use super::LearnerError;
use crate::env::{Assignment, Instance, ObservableEnv, RegretTrace, Simulator};
use crate::rng::{SeedStreams, Stream};

/// Each user pulls every arm once, then follows `mean + sqrt(2 ln t / n)`.
pub fn ucb<E: ObservableEnv + ?Sized>(env: &mut E) -> Result<(), LearnerError> {
    let shape = env.shape();
    let (n, k) = (shape.n_users, shape.n_arms);
    let mut counts = vec![0u64; n * k];
    let mut sums = vec![0.0f64; n * k];
    let mut arms = vec![0usize; n];
    let mut t = 0u64;
    while env.remaining() > 0 {
        t += 1;
        let log_t = (t as f64).ln();
        for (i, arm) in arms.iter_mut().enumerate() {
            let row = i * k..(i + 1) * k;
            *arm = match counts[row.clone()].iter().position(|&m| m == 0) {
                Some(j) => j,
                None => {
                    let mut best = 0;
                    let mut best_index = f64::NEG_INFINITY;
                    for (j, (&m, &s)) in counts[row.clone()].iter().zip(&sums[row]).enumerate() {
                        let index = s / m as f64 + (2.0 * log_t / m as f64).sqrt();
                        if index > best_index {
                            best = j;
                            best_index = index;
                        }
                    }
                    best
                }
            };
        }
        let rewards = env.play_observed(&Assignment::new(arms.clone()))?;
        for (i, (&j, r)) in arms.iter().zip(rewards).enumerate() {
            counts[i * k + j] += 1;
            sums[i * k + j] += r;
        }
    }
    Ok(())
}

pub fn run_ucb(instance: &Instance, seed: u64) -> Result<RegretTrace, LearnerError> {
    let mut sim = Simulator::new(instance, SeedStreams::new(seed).stream(Stream::Rewards));
    ucb(&mut sim)?;
    Ok(sim.into_trace())
}
