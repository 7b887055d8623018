//! Problem instances, the anonymity-enforcing simulator and regret ledger.
//!
//! Learners only ever see an environment through [`BanditEnv`], whose
//! [`BanditEnv::play`] returns one aggregate per reported group. Individual
//! rewards stay inside [`Simulator`] and only feed the regret ledger. The
//! non-anonymous baseline goes through the separate [`ObservableEnv`] trait so
//! anonymous learners cannot reach per-user rewards even by accident.

mod fixture;
mod generators;

pub use generators::{
    gen_clustered_instance, gen_hard_instance, gen_linear_instance, gen_uniform_instance,
    linear_means, linear_pair, random_unit_vector, t23_pair, HardKind,
};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("group {group} has {size} members, anonymity requires at least {required}")]
    AnonymityViolation {
        group: usize,
        size: usize,
        required: usize,
    },
    #[error("arm index {arm} out of range for {n_arms} arms")]
    InvalidArm { arm: usize, n_arms: usize },
    #[error("user index {user} out of range for {n_users} users")]
    InvalidUser { user: usize, n_users: usize },
    #[error("user {user} appears in more than one group")]
    OverlappingGroups { user: usize },
    #[error("user {user} is grouped on arm {group_arm} but assigned to arm {assigned_arm}")]
    GroupArmMismatch {
        user: usize,
        group_arm: usize,
        assigned_arm: usize,
    },
    #[error("assignment covers {got} users, instance has {expected}")]
    AssignmentSize { got: usize, expected: usize },
    #[error("horizon of {horizon} rounds exhausted")]
    HorizonExhausted { horizon: usize },
    #[error("cannot give {k} arms at least {u} favorite users each with only {n} users")]
    InfeasibleCluster { n: usize, k: usize, u: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("malformed instance fixture: {0}")]
    Fixture(String),
}

/// Reward distribution family shared by every user/arm pair of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RewardFamily {
    /// Bernoulli with the pair's mean.
    Bernoulli,
    /// Gaussian with the pair's mean and unit variance.
    UnitGaussian,
    /// Always exactly the pair's mean.
    Deterministic,
}

impl RewardFamily {
    pub fn name(self) -> &'static str {
        match self {
            RewardFamily::Bernoulli => "bernoulli",
            RewardFamily::UnitGaussian => "unit_gaussian",
            RewardFamily::Deterministic => "deterministic",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "bernoulli" => Some(RewardFamily::Bernoulli),
            "unit_gaussian" => Some(RewardFamily::UnitGaussian),
            "deterministic" => Some(RewardFamily::Deterministic),
            _ => None,
        }
    }

    /// Draws one reward with mean `mean`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(self, mean: f64, rng: &mut R) -> f64 {
        match self {
            RewardFamily::Bernoulli => {
                if rng.random::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            RewardFamily::UnitGaussian => {
                let z: f64 = rng.sample(StandardNormal);
                mean + z
            }
            RewardFamily::Deterministic => mean,
        }
    }
}

/// Dimensions of a problem, the only structural facts a learner is told.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub n_users: usize,
    pub n_arms: usize,
    pub anonymity: usize,
    pub horizon: usize,
}

/// Ground truth for one anonymous bandit problem. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n_users: usize,
    n_arms: usize,
    anonymity: usize,
    horizon: usize,
    /// Row-major `n_users x n_arms`.
    means: Vec<f64>,
    family: RewardFamily,
}

impl Instance {
    pub fn new(
        n_users: usize,
        n_arms: usize,
        anonymity: usize,
        horizon: usize,
        means: Vec<f64>,
        family: RewardFamily,
    ) -> Result<Self, EnvError> {
        if n_users == 0 || n_arms == 0 || anonymity == 0 || horizon == 0 {
            return Err(EnvError::InvalidInstance(format!(
                "N, K, C and T must be positive (got {n_users}, {n_arms}, {anonymity}, {horizon})"
            )));
        }
        if means.len() != n_users * n_arms {
            return Err(EnvError::InvalidInstance(format!(
                "expected {} means, got {}",
                n_users * n_arms,
                means.len()
            )));
        }
        if let Some(bad) = means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(EnvError::InvalidInstance(format!(
                "mean {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            n_users,
            n_arms,
            anonymity,
            horizon,
            means,
            family,
        })
    }

    pub fn shape(&self) -> Shape {
        Shape {
            n_users: self.n_users,
            n_arms: self.n_arms,
            anonymity: self.anonymity,
            horizon: self.horizon,
        }
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_arms(&self) -> usize {
        self.n_arms
    }

    pub fn anonymity(&self) -> usize {
        self.anonymity
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn family(&self) -> RewardFamily {
        self.family
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Same problem with a different horizon.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self, EnvError> {
        Self::new(
            self.n_users,
            self.n_arms,
            self.anonymity,
            horizon,
            self.means.clone(),
            self.family,
        )
    }

    #[inline]
    pub fn mean(&self, user: usize, arm: usize) -> f64 {
        self.means[user * self.n_arms + arm]
    }

    pub fn row(&self, user: usize) -> &[f64] {
        &self.means[user * self.n_arms..(user + 1) * self.n_arms]
    }

    /// The user's optimal arm, lowest index on ties.
    pub fn best_arm(&self, user: usize) -> usize {
        argmax(self.row(user))
    }

    pub fn best_mean(&self, user: usize) -> f64 {
        self.row(user)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_j mu[user][j] - mu[user][arm]`.
    pub fn gap(&self, user: usize, arm: usize) -> f64 {
        self.best_mean(user) - self.mean(user, arm)
    }

    /// Number of users whose (lowest-index) optimal arm is each arm.
    pub fn favorite_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_arms];
        for i in 0..self.n_users {
            counts[self.best_arm(i)] += 1;
        }
        counts
    }

    /// Whether every arm is the optimal arm of at least `u` users.
    pub fn satisfies_cluster(&self, u: usize) -> bool {
        self.favorite_counts().iter().all(|&c| c >= u)
    }

    pub fn to_fixture(&self) -> String {
        fixture::write(self)
    }

    pub fn from_fixture(text: &str) -> Result<Self, EnvError> {
        fixture::read(text)
    }
}

/// Index of the largest value, lowest index on ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = j;
        }
    }
    best
}

/// A total map from users to arms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(Vec<usize>);

impl Assignment {
    pub fn new(arm_of: Vec<usize>) -> Self {
        Self(arm_of)
    }

    /// Every user on the same arm.
    pub fn constant(n_users: usize, arm: usize) -> Self {
        Self(vec![arm; n_users])
    }

    #[inline]
    pub fn arm_of(&self, user: usize) -> usize {
        self.0[user]
    }

    pub fn arms(&self) -> &[usize] {
        &self.0
    }

    pub fn n_users(&self) -> usize {
        self.0.len()
    }

    /// Users mapped to `arm`, ascending.
    pub fn users_on(&self, arm: usize) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] == arm).collect()
    }

    /// Number of users mapped to each arm.
    pub fn loads(&self, n_arms: usize) -> Vec<usize> {
        let mut loads = vec![0; n_arms];
        for &j in &self.0 {
            loads[j] += 1;
        }
        loads
    }

    pub fn validate(&self, shape: &Shape) -> Result<(), EnvError> {
        if self.0.len() != shape.n_users {
            return Err(EnvError::AssignmentSize {
                got: self.0.len(),
                expected: shape.n_users,
            });
        }
        if let Some(&arm) = self.0.iter().find(|&&j| j >= shape.n_arms) {
            return Err(EnvError::InvalidArm {
                arm,
                n_arms: shape.n_arms,
            });
        }
        Ok(())
    }
}

/// Users reported together on one arm; their rewards are observed as a sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub arm: usize,
    pub members: Vec<usize>,
}

/// The grouping reported for one round. Users in no group yield no feedback.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupPartition {
    pub groups: Vec<Group>,
}

impl GroupPartition {
    pub fn new(groups: Vec<Group>) -> Self {
        Self { groups }
    }

    /// A round reported with no groups at all.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Users not in any group, ascending.
    pub fn ungrouped(&self, n_users: usize) -> Vec<usize> {
        let mut grouped = vec![false; n_users];
        for g in &self.groups {
            for &i in &g.members {
                if i < n_users {
                    grouped[i] = true;
                }
            }
        }
        (0..n_users).filter(|&i| !grouped[i]).collect()
    }

    /// Checks the partition against the model: disjoint groups of at least
    /// `C` users, all playing the group's arm under `assignment`.
    pub fn validate(&self, shape: &Shape, assignment: &Assignment) -> Result<(), EnvError> {
        let mut seen = vec![false; shape.n_users];
        for (s, g) in self.groups.iter().enumerate() {
            if g.arm >= shape.n_arms {
                return Err(EnvError::InvalidArm {
                    arm: g.arm,
                    n_arms: shape.n_arms,
                });
            }
            if g.members.len() < shape.anonymity {
                return Err(EnvError::AnonymityViolation {
                    group: s,
                    size: g.members.len(),
                    required: shape.anonymity,
                });
            }
            for &i in &g.members {
                if i >= shape.n_users {
                    return Err(EnvError::InvalidUser {
                        user: i,
                        n_users: shape.n_users,
                    });
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(EnvError::OverlappingGroups { user: i });
                }
                if assignment.arm_of(i) != g.arm {
                    return Err(EnvError::GroupArmMismatch {
                        user: i,
                        group_arm: g.arm,
                        assigned_arm: assignment.arm_of(i),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Everything that happened in one round. Only `group_sums` may reach a
/// learner; `hidden_rewards` exists for the regret ledger and for tests.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub group_sums: Vec<f64>,
    pub hidden_rewards: Vec<f64>,
}

impl RoundOutcome {
    /// The learner-visible part of the round.
    pub fn feedback(&self) -> Vec<f64> {
        self.group_sums.clone()
    }
}

/// Plays one round: every user draws a reward from its assigned arm and the
/// rewards of each group are summed.
pub fn play_round<R: Rng + ?Sized>(
    instance: &Instance,
    assignment: &Assignment,
    partition: &GroupPartition,
    rng: &mut R,
) -> Result<RoundOutcome, EnvError> {
    let shape = instance.shape();
    assignment.validate(&shape)?;
    partition.validate(&shape, assignment)?;
    let hidden_rewards: Vec<f64> = (0..shape.n_users)
        .map(|i| {
            instance
                .family
                .sample(instance.mean(i, assignment.arm_of(i)), rng)
        })
        .collect();
    let group_sums = sum_groups(partition, &hidden_rewards);
    Ok(RoundOutcome {
        group_sums,
        hidden_rewards,
    })
}

fn sum_groups(partition: &GroupPartition, rewards: &[f64]) -> Vec<f64> {
    partition
        .groups
        .iter()
        .map(|g| g.members.iter().map(|&i| rewards[i]).sum())
        .collect()
}

/// `sum_i (max_j mu[i][j] - mu[i][assignment(i)])`.
pub fn pseudo_regret(instance: &Instance, assignment: &Assignment) -> f64 {
    (0..instance.n_users)
        .map(|i| instance.gap(i, assignment.arm_of(i)))
        .sum()
}

/// Per-round cumulative regret and reward of one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegretTrace {
    pub cumulative_pseudo_regret: Vec<f64>,
    pub cumulative_realized_reward: Vec<f64>,
    pub rounds_used: usize,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.cumulative_pseudo_regret.last().copied().unwrap_or(0.0)
    }

    pub fn final_reward(&self) -> f64 {
        self.cumulative_realized_reward
            .last()
            .copied()
            .unwrap_or(0.0)
    }
}

/// The anonymous interface every C-anonymous learner is written against.
pub trait BanditEnv {
    fn shape(&self) -> Shape;

    /// Rounds left before the horizon.
    fn remaining(&self) -> usize;

    /// Plays one round and returns one reward sum per group of `partition`.
    fn play(
        &mut self,
        assignment: &Assignment,
        partition: &GroupPartition,
    ) -> Result<Vec<f64>, EnvError>;
}

/// Individual-reward access, reserved for the non-anonymous baseline.
pub trait ObservableEnv: BanditEnv {
    fn play_observed(&mut self, assignment: &Assignment) -> Result<Vec<f64>, EnvError>;
}

/// Simulates an [`Instance`] round by round and keeps the regret ledger.
pub struct Simulator<'a> {
    instance: &'a Instance,
    rng: ChaCha8Rng,
    gaps: Vec<f64>,
    trace: RegretTrace,
    regret: f64,
    reward: f64,
    rewards: Vec<f64>,
}

impl<'a> Simulator<'a> {
    pub fn new(instance: &'a Instance, reward_rng: ChaCha8Rng) -> Self {
        let k = instance.n_arms;
        let gaps = (0..instance.n_users * k)
            .map(|idx| instance.gap(idx / k, idx % k))
            .collect();
        Self {
            instance,
            rng: reward_rng,
            gaps,
            trace: RegretTrace {
                cumulative_pseudo_regret: Vec::with_capacity(instance.horizon),
                cumulative_realized_reward: Vec::with_capacity(instance.horizon),
                rounds_used: 0,
            },
            regret: 0.0,
            reward: 0.0,
            rewards: vec![0.0; instance.n_users],
        }
    }

    pub fn instance(&self) -> &Instance {
        self.instance
    }

    pub fn rounds_played(&self) -> usize {
        self.trace.rounds_used
    }

    pub fn trace(&self) -> &RegretTrace {
        &self.trace
    }

    pub fn into_trace(self) -> RegretTrace {
        self.trace
    }

    fn step(&mut self, assignment: &Assignment) -> Result<(), EnvError> {
        if self.trace.rounds_used >= self.instance.horizon {
            return Err(EnvError::HorizonExhausted {
                horizon: self.instance.horizon,
            });
        }
        let k = self.instance.n_arms;
        let family = self.instance.family;
        let mut round_regret = 0.0;
        let mut round_reward = 0.0;
        for (i, &j) in assignment.arms().iter().enumerate() {
            let r = family.sample(self.instance.means[i * k + j], &mut self.rng);
            self.rewards[i] = r;
            round_reward += r;
            round_regret += self.gaps[i * k + j];
        }
        self.regret += round_regret;
        self.reward += round_reward;
        self.trace.cumulative_pseudo_regret.push(self.regret);
        self.trace.cumulative_realized_reward.push(self.reward);
        self.trace.rounds_used += 1;
        Ok(())
    }
}

impl BanditEnv for Simulator<'_> {
    fn shape(&self) -> Shape {
        self.instance.shape()
    }

    fn remaining(&self) -> usize {
        self.instance.horizon - self.trace.rounds_used
    }

    fn play(
        &mut self,
        assignment: &Assignment,
        partition: &GroupPartition,
    ) -> Result<Vec<f64>, EnvError> {
        let shape = self.instance.shape();
        assignment.validate(&shape)?;
        partition.validate(&shape, assignment)?;
        self.step(assignment)?;
        Ok(sum_groups(partition, &self.rewards))
    }
}

impl ObservableEnv for Simulator<'_> {
    fn play_observed(&mut self, assignment: &Assignment) -> Result<Vec<f64>, EnvError> {
        assignment.validate(&self.instance.shape())?;
        self.step(assignment)?;
        Ok(self.rewards.clone())
    }
}
