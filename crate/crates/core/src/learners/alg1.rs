//! Batched elimination driven through anonymous decompositions.
//!
//! Every user runs its own [`BaseState`] on a shared grid over the shortened
//! horizon `T' = T / (alpha (2C+2))`. In each batch the users' active sets
//! form a batched graph with demand `D_b`; its decomposition is played
//! assignment by assignment through the elicitation protocol, and the
//! resulting estimates feed back into the users' states. After the last
//! exploration batch every user plays its empirical leader.

use super::{play_out, LearnerError};
use crate::base::{default_gamma, BaseGrid, BaseState};
use crate::decomp::{
    alpha_factor, greedy_decompose, lp_decompose, random_decompose, BatchedGraph, DecompError,
    Decomposition,
};
use crate::env::{Assignment, BanditEnv, Instance, RegretTrace, Simulator};
use crate::feedback::{elicit, elicitation_rounds};
use crate::rng::{SeedStreams, Stream};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decomposer {
    Greedy,
    Random,
    Lp,
}

impl Decomposer {
    pub fn name(self) -> &'static str {
        match self {
            Decomposer::Greedy => "greedy",
            Decomposer::Random => "random",
            Decomposer::Lp => "lp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alg1Config {
    pub decomposer: Decomposer,
    /// Assumed cluster size `U`; `None` means `C+1`.
    pub u_assumed: Option<usize>,
    /// `gamma = gamma_const * ln(N K T)`.
    pub gamma_const: f64,
    /// Number of batches; `None` picks `max(1, floor(log2 log2 T'))`.
    pub batches: Option<usize>,
    /// Repair thin arms and keep going instead of stopping exploration.
    pub robust_mode: bool,
}

impl Alg1Config {
    pub fn new(decomposer: Decomposer) -> Self {
        Self {
            decomposer,
            u_assumed: None,
            gamma_const: 2.0,
            batches: None,
            robust_mode: true,
        }
    }
}

/// What happened in one exploration batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchLog {
    pub batch: usize,
    pub demand: usize,
    pub assignments: usize,
    pub shortfall_flag: bool,
    /// Users whose demand set emptied during repair.
    pub parked: Vec<usize>,
    /// Announced per-user quota.
    pub quotas: Vec<usize>,
    /// Estimates delivered, indexed `[user][arm]`, counted only on the
    /// arms the user's state asked for.
    pub routed: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alg1Report {
    pub alpha: usize,
    pub effective_horizon: usize,
    pub batches: Vec<BatchLog>,
    /// Exploration stopped early because a graph was not `U`-batched.
    pub aborted: bool,
    /// Arm each user played once exploration ended.
    pub committed: Vec<usize>,
}

/// Removes arms that fewer than `C+1` users still demand. Returns the users
/// left with nothing to demand.
fn repair(sets: &mut [Vec<usize>], n_arms: usize, c: usize) -> Vec<usize> {
    let mut counts = vec![0usize; n_arms];
    for set in sets.iter() {
        for &j in set {
            counts[j] += 1;
        }
    }
    let mut parked = Vec::new();
    for (i, set) in sets.iter_mut().enumerate() {
        set.retain(|&j| counts[j] > c);
        if set.is_empty() {
            parked.push(i);
        }
    }
    parked
}

fn decompose<R: Rng + ?Sized>(
    graph: &BatchedGraph,
    config: &Alg1Config,
    c: usize,
    u: usize,
    rng: &mut R,
) -> Result<Decomposition, LearnerError> {
    Ok(match config.decomposer {
        Decomposer::Greedy => greedy_decompose(graph, c),
        Decomposer::Random => random_decompose(graph, c, rng),
        Decomposer::Lp => match lp_decompose(graph, c, u) {
            Err(DecompError::NotInPolytope(_)) if config.robust_mode && u > c + 1 => {
                lp_decompose(graph, c, c + 1)?
            }
            other => other?,
        },
    })
}

/// Runs the batched learner against any anonymous environment.
pub fn alg1<E: BanditEnv + ?Sized, R: Rng + ?Sized>(
    env: &mut E,
    config: &Alg1Config,
    rng: &mut R,
) -> Result<Alg1Report, LearnerError> {
    let shape = env.shape();
    let (n, k, c, t) = (shape.n_users, shape.n_arms, shape.anonymity, shape.horizon);
    if !(config.gamma_const > 0.0) {
        return Err(LearnerError::InvalidConfig(
            "gamma_const must be positive".into(),
        ));
    }
    let u = config.u_assumed.unwrap_or(c + 1);
    if config.decomposer == Decomposer::Lp && u < c + 1 {
        return Err(DecompError::ClusterTooSmall { u, c }.into());
    }
    let alpha = match config.decomposer {
        Decomposer::Greedy => k,
        _ => alpha_factor(k, c, u).unwrap_or(k),
    };
    let rounds_per = elicitation_rounds(c);
    let effective_horizon = t / (alpha * rounds_per);
    let batches = config
        .batches
        .unwrap_or_else(|| BaseGrid::default_batches(effective_horizon));
    if batches == 0 {
        return Err(LearnerError::InvalidConfig(
            "need at least one batch".into(),
        ));
    }
    if effective_horizon < batches {
        return Err(LearnerError::HorizonTooSmall {
            horizon: effective_horizon,
            batches,
        });
    }
    let grid = BaseGrid::new(effective_horizon, batches)?;
    let gamma = default_gamma(n, k, t, config.gamma_const);
    let noise = (4 * c + 1) as f64;
    let mut states = (0..n)
        .map(|_| BaseState::new(k, grid.clone(), gamma, noise))
        .collect::<Result<Vec<_>, _>>()?;

    let mut logs = Vec::new();
    let mut aborted = false;
    for b in 1..=batches {
        let requests = states
            .iter()
            .map(BaseState::begin_batch)
            .collect::<Result<Vec<_>, _>>()?;
        if requests[0].commit || env.remaining() < rounds_per {
            break;
        }
        let demand = grid.batch_len(b);
        let mut sets: Vec<Vec<usize>> = requests.iter().map(|r| r.active.clone()).collect();
        let graph_ok = {
            let probe = BatchedGraph::new(demand, k, sets.clone())?;
            probe.is_u_batched(u.max(c + 1))
        };
        if !graph_ok && !config.robust_mode {
            aborted = true;
            break;
        }
        let parked = repair(&mut sets, k, c);
        let members: Vec<usize> = (0..n).filter(|i| !parked.contains(i)).collect();
        if members.is_empty() {
            break;
        }
        let graph = BatchedGraph::new(
            demand,
            k,
            members.iter().map(|&i| sets[i].clone()).collect(),
        )?;
        let decomposition = decompose(&graph, config, c, u, rng)?;

        let leaders: Vec<usize> = states.iter().map(BaseState::empirical_best).collect();
        let mut samples: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); k]; n];
        for m in decomposition.assignments() {
            if env.remaining() < rounds_per {
                break;
            }
            // parked users sit on their leader; they only add to group sizes
            let mut arms = leaders.clone();
            for (slot, &i) in members.iter().enumerate() {
                arms[i] = m.arm_of(slot);
            }
            let full = Assignment::new(arms);
            for e in elicit(env, &full)? {
                if requests[e.user].active.contains(&e.arm) {
                    samples[e.user][e.arm].push(e.value);
                }
            }
        }

        let mut routed = vec![vec![0; k]; n];
        for (i, state) in states.iter_mut().enumerate() {
            let quota = requests[i].quota;
            for &j in &requests[i].active {
                routed[i][j] = samples[i][j].len();
            }
            let met = requests[i].active.iter().all(|&j| routed[i][j] >= quota);
            if met {
                state.end_batch(&samples[i])?;
            } else {
                state.end_batch_lenient(&samples[i])?;
            }
        }
        logs.push(BatchLog {
            batch: b,
            demand,
            assignments: decomposition.len(),
            shortfall_flag: decomposition.shortfall_flag(),
            parked,
            quotas: requests.iter().map(|r| r.quota).collect(),
            routed,
        });
    }

    let committed: Vec<usize> = states.iter().map(BaseState::empirical_best).collect();
    play_out(env, &Assignment::new(committed.clone()))?;
    Ok(Alg1Report {
        alpha,
        effective_horizon,
        batches: logs,
        aborted,
        committed,
    })
}

/// Simulates `instance` under the batched learner. Rewards and internal
/// randomness come from separate streams of `seed`.
pub fn run_alg1(
    instance: &Instance,
    config: &Alg1Config,
    seed: u64,
) -> Result<RegretTrace, LearnerError> {
    let streams = SeedStreams::new(seed);
    let mut sim = Simulator::new(instance, streams.stream(Stream::Rewards));
    let mut rng = streams.stream(Stream::Algorithm);
    alg1(&mut sim, config, &mut rng)?;
    Ok(sim.into_trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{gen_clustered_instance, gen_uniform_instance, RewardFamily};
    use crate::learners::spy::Spy;

    #[test]
    fn repair_drops_thin_arms() {
        let mut sets = vec![vec![0, 1], vec![0], vec![1, 2], vec![0]];
        let parked = repair(&mut sets, 3, 1);
        assert_eq!(sets, vec![vec![0, 1], vec![0], vec![1], vec![0]]);
        assert!(parked.is_empty());
        let mut sets = vec![vec![2], vec![0], vec![0]];
        assert_eq!(repair(&mut sets, 3, 1), vec![0]);
    }

    #[test]
    fn single_arm_has_no_regret() {
        let inst = Instance::new(6, 1, 2, 3000, vec![0.4; 6], RewardFamily::Bernoulli).unwrap();
        for d in [Decomposer::Greedy, Decomposer::Random, Decomposer::Lp] {
            let trace = run_alg1(&inst, &Alg1Config::new(d), 1).unwrap();
            assert_eq!(trace.rounds_used, 3000);
            assert!(trace.cumulative_pseudo_regret.iter().all(|&r| r == 0.0));
        }
    }

    #[test]
    fn rounds_are_anonymous_and_exactly_t() {
        for (seed, d) in [
            (1, Decomposer::Greedy),
            (2, Decomposer::Random),
            (3, Decomposer::Lp),
        ] {
            let inst = gen_uniform_instance(20, 3, 2, 20_000, seed).unwrap();
            let streams = SeedStreams::new(seed);
            let mut spy = Spy::new(Simulator::new(&inst, streams.stream(Stream::Rewards)));
            let report = alg1(
                &mut spy,
                &Alg1Config::new(d),
                &mut streams.stream(Stream::Algorithm),
            )
            .unwrap();
            assert_eq!(spy.rounds, 20_000);
            assert!(spy.smallest_group >= 2, "{}", spy.smallest_group);
            assert!(!report.batches.is_empty());
        }
    }

    #[test]
    fn routed_estimates_meet_the_quota() {
        // clustered instance, LP with U = N/K: every batch graph stays U-batched
        let inst = gen_clustered_instance(30, 3, 2, 60_000, 10, 0.2, 4).unwrap();
        let streams = SeedStreams::new(4);
        let mut sim = Simulator::new(&inst, streams.stream(Stream::Rewards));
        let config = Alg1Config {
            u_assumed: Some(10),
            ..Alg1Config::new(Decomposer::Lp)
        };
        let report = alg1(&mut sim, &config, &mut streams.stream(Stream::Algorithm)).unwrap();
        for log in &report.batches {
            // independent recount: every user, every arm it was asked about
            for i in 0..30 {
                if log.parked.contains(&i) {
                    continue;
                }
                for (j, &got) in log.routed[i].iter().enumerate() {
                    if got > 0 {
                        assert!(got >= log.quotas[i], "batch {} user {i} arm {j}", log.batch);
                    }
                }
            }
        }
    }

    #[test]
    fn without_c_plus_one_users_nothing_is_learned() {
        // N = C: no arm can ever hold an informative group
        for second in [false, true] {
            let inst = crate::env::linear_pair(3000, second).unwrap();
            for d in [Decomposer::Greedy, Decomposer::Random, Decomposer::Lp] {
                let trace = run_alg1(&inst, &Alg1Config::new(d), 0).unwrap();
                assert_eq!(trace.final_reward(), 3000.0);
            }
        }
    }

    #[test]
    fn greedy_uses_k_as_alpha() {
        let inst = gen_uniform_instance(10, 4, 1, 8000, 3).unwrap();
        let mut sim = Simulator::new(&inst, SeedStreams::new(3).stream(Stream::Rewards));
        let report = alg1(
            &mut sim,
            &Alg1Config::new(Decomposer::Greedy),
            &mut SeedStreams::new(3).stream(Stream::Algorithm),
        )
        .unwrap();
        assert_eq!(report.alpha, 4);
        assert_eq!(report.effective_horizon, 8000 / (4 * 4));
    }

    #[test]
    fn short_horizons_are_rejected() {
        let inst = gen_uniform_instance(10, 5, 4, 40, 3).unwrap();
        assert_eq!(
            run_alg1(&inst, &Alg1Config::new(Decomposer::Greedy), 0),
            Err(LearnerError::HorizonTooSmall {
                horizon: 0,
                batches: 1
            })
        );
    }

    #[test]
    fn robust_mode_survives_unstructured_instances() {
        for seed in 0..10 {
            let inst = gen_uniform_instance(9, 4, 2, 5000, seed).unwrap();
            for d in [Decomposer::Greedy, Decomposer::Random, Decomposer::Lp] {
                let config = Alg1Config {
                    u_assumed: Some(6),
                    ..Alg1Config::new(d)
                };
                let trace = run_alg1(&inst, &config, seed).unwrap();
                assert_eq!(trace.rounds_used, 5000);
            }
        }
    }

    #[test]
    fn strict_mode_stops_exploring_on_thin_arms() {
        // U = 10 exceeds N = 9, so no graph can be 10-batched
        let inst = gen_uniform_instance(9, 4, 2, 20_000, 1).unwrap();
        let config = Alg1Config {
            robust_mode: false,
            u_assumed: Some(10),
            ..Alg1Config::new(Decomposer::Lp)
        };
        let mut sim = Simulator::new(&inst, SeedStreams::new(1).stream(Stream::Rewards));
        let report = alg1(
            &mut sim,
            &config,
            &mut SeedStreams::new(1).stream(Stream::Algorithm),
        )
        .unwrap();
        assert!(report.aborted);
        assert!(report.batches.is_empty());
        assert_eq!(sim.remaining(), 0);
    }
}
