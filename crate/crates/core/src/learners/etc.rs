//! Explore-then-commit over elicited estimates.

use super::{play_out, LearnerError};
use crate::env::{argmax, Assignment, BanditEnv, Instance, RegretTrace, Simulator};
use crate::feedback::{elicit, elicitation_rounds};
use crate::rng::{SeedStreams, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtcConfig {
    /// Leading constant of the exploration length.
    pub scale: f64,
}

impl Default for EtcConfig {
    fn default() -> Self {
        Self { scale: 10.0 }
    }
}

/// `min(scale C^(2/3) K^(1/3) T^(2/3) ln(NKT)^(1/3), floor(T/2))`.
pub fn etc_exploration_length(n: usize, k: usize, c: usize, t: usize, scale: f64) -> usize {
    let raw = scale
        * (c as f64).powf(2.0 / 3.0)
        * (k as f64).cbrt()
        * (t as f64).powf(2.0 / 3.0)
        * ((n * k * t) as f64).max(1.0).ln().cbrt();
    (raw.ceil() as usize).min(t / 2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtcReport {
    pub t_exp: usize,
    pub iterations: usize,
    /// Estimates gathered, indexed `[user][arm]`.
    pub counts: Vec<Vec<usize>>,
    pub committed: Vec<usize>,
}

/// Cycles every user through the arms in lockstep, one elicitation per
/// iteration, then commits each user to its best estimated arm.
pub fn etc<E: BanditEnv + ?Sized>(
    env: &mut E,
    config: &EtcConfig,
) -> Result<EtcReport, LearnerError> {
    let shape = env.shape();
    let (n, k, c, t) = (shape.n_users, shape.n_arms, shape.anonymity, shape.horizon);
    let t_exp = etc_exploration_length(n, k, c, t, config.scale);
    let iterations = t_exp.div_ceil(elicitation_rounds(c));
    if iterations < k {
        return Err(LearnerError::ExplorationTooShort {
            iterations,
            arms: k,
        });
    }
    let mut counts = vec![vec![0usize; k]; n];
    let mut sums = vec![vec![0.0f64; k]; n];
    for r in 0..iterations {
        let arm = r % k;
        for e in elicit(env, &Assignment::constant(n, arm))? {
            counts[e.user][e.arm] += 1;
            sums[e.user][e.arm] += e.value;
        }
    }
    let committed: Vec<usize> = (0..n)
        .map(|i| {
            let means: Vec<f64> = (0..k)
                .map(|j| match counts[i][j] {
                    0 => f64::NEG_INFINITY,
                    m => sums[i][j] / m as f64,
                })
                .collect();
            argmax(&means)
        })
        .collect();
    play_out(env, &Assignment::new(committed.clone()))?;
    Ok(EtcReport {
        t_exp,
        iterations,
        counts,
        committed,
    })
}

pub fn run_etc(
    instance: &Instance,
    config: &EtcConfig,
    seed: u64,
) -> Result<RegretTrace, LearnerError> {
    let mut sim = Simulator::new(instance, SeedStreams::new(seed).stream(Stream::Rewards));
    etc(&mut sim, config)?;
    Ok(sim.into_trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{gen_uniform_instance, RewardFamily};
    use crate::learners::spy::Spy;

    #[test]
    fn default_problem_size_hits_the_cap() {
        // closed form evaluated by hand: 10 * 4^(2/3) * 5^(1/3) * 1e5^(2/3) * ln(2.5e7)^(1/3)
        let raw = 10.0 * 2.519_842 * 1.709_976 * 2154.435 * 17.034_386_f64.cbrt();
        assert!(raw > 100_000.0, "{raw}");
        assert_eq!(etc_exploration_length(50, 5, 4, 100_000, 10.0), 50_000);
    }

    #[test]
    fn small_scale_stays_below_the_cap() {
        let t = etc_exploration_length(50, 5, 4, 100_000, 0.1);
        assert!(t < 50_000);
        let raw = 0.1
            * 4f64.powf(2.0 / 3.0)
            * 5f64.cbrt()
            * 1e5f64.powf(2.0 / 3.0)
            * (2.5e7f64).ln().cbrt();
        assert_eq!(t, raw.ceil() as usize);
    }

    #[test]
    fn deterministic_rewards_find_every_argmax() {
        let means = vec![
            0.1, 0.9, 0.3, //
            0.8, 0.2, 0.1, //
            0.0, 0.5, 0.6, //
            0.7, 0.6, 0.5,
        ];
        let inst = Instance::new(4, 3, 1, 2000, means, RewardFamily::Deterministic).unwrap();
        let mut sim = Simulator::new(&inst, SeedStreams::new(0).stream(Stream::Rewards));
        let report = etc(&mut sim, &EtcConfig::default()).unwrap();
        assert_eq!(report.committed, vec![1, 0, 2, 0]);
        assert_eq!(sim.remaining(), 0);
    }

    #[test]
    fn every_pair_is_sampled_evenly_and_commit_is_stable() {
        let inst = gen_uniform_instance(12, 3, 2, 30_000, 2).unwrap();
        let mut spy = Spy::new(Simulator::new(
            &inst,
            SeedStreams::new(2).stream(Stream::Rewards),
        ));
        spy.keep_assignments = true;
        let report = etc(&mut spy, &EtcConfig { scale: 1.0 }).unwrap();
        let floor = report.iterations / 3;
        assert!(report.counts.iter().flatten().all(|&m| m >= floor));
        assert!(spy.smallest_group >= 2);
        assert_eq!(spy.rounds, 30_000);
        let explored = report.iterations * elicitation_rounds(2);
        assert!(spy.assignments[explored..]
            .iter()
            .all(|a| a.arms() == report.committed.as_slice()));
    }

    #[test]
    fn without_c_plus_one_users_nothing_is_learned() {
        for second in [false, true] {
            let inst = crate::env::linear_pair(3000, second).unwrap();
            let trace = run_etc(&inst, &EtcConfig::default(), 0).unwrap();
            assert_eq!(trace.final_reward(), 3000.0);
        }
    }

    #[test]
    fn too_little_exploration_is_an_error() {
        let inst = gen_uniform_instance(5, 5, 4, 60, 1).unwrap();
        assert_eq!(
            run_etc(&inst, &EtcConfig::default(), 0),
            Err(LearnerError::ExplorationTooShort {
                iterations: 3,
                arms: 5
            })
        );
    }
}
