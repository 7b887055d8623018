//! Leave-one-out feedback elicitation.
//!
//! Given a fixed assignment, users on every arm that holds at least `C+1`
//! users are split into groups of `C+1..=2C+1` members. The assignment is
//! then played for `2C+2` rounds: once reporting the full groups, and once
//! per position `k` reporting each group with its `k`-th member left out.
//! The difference between the two group sums is an unbiased estimate of the
//! left-out user's mean on its arm, and every reported group keeps at least
//! `C` members.

use crate::env::{Assignment, BanditEnv, EnvError, Group, GroupPartition};

/// One unbiased sample of `mu[user][arm]`. May fall outside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRecord {
    pub user: usize,
    pub arm: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupingPlan {
    /// Members ascending; the order defines who is left out in which round.
    pub groups: Vec<Group>,
    /// Users on arms with at most `C` users.
    pub skipped_users: Vec<usize>,
}

/// Rounds consumed by one full elicitation.
pub fn elicitation_rounds(c: usize) -> usize {
    2 * c + 2
}

/// Splits each sufficiently popular arm's users into chunks of `C+1`,
/// merging the remainder into the last chunk.
pub fn plan_groups(assignment: &Assignment, c: usize) -> GroupingPlan {
    let n_arms = assignment.arms().iter().max().map_or(0, |&j| j + 1);
    let mut by_arm: Vec<Vec<usize>> = vec![Vec::new(); n_arms];
    for (i, &j) in assignment.arms().iter().enumerate() {
        by_arm[j].push(i);
    }
    let mut groups = Vec::new();
    let mut skipped_users = Vec::new();
    for (arm, users) in by_arm.into_iter().enumerate() {
        if users.len() < c + 1 {
            skipped_users.extend(users);
            continue;
        }
        let n_chunks = users.len() / (c + 1);
        for (s, chunk) in users.chunks(c + 1).enumerate() {
            if s < n_chunks {
                groups.push(Group {
                    arm,
                    members: chunk.to_vec(),
                });
            } else {
                groups
                    .last_mut()
                    .expect("at least one full chunk")
                    .members
                    .extend_from_slice(chunk);
            }
        }
    }
    skipped_users.sort_unstable();
    GroupingPlan {
        groups,
        skipped_users,
    }
}

/// Runs the protocol on `assignment` and returns one estimate per grouped
/// user.
///
/// Every user plays its assigned arm in all rounds; only the reported
/// grouping changes. If fewer than `2C+2` rounds remain, the remaining rounds
/// are played and no estimates are produced.
pub fn elicit<E: BanditEnv + ?Sized>(
    env: &mut E,
    assignment: &Assignment,
) -> Result<Vec<EstimateRecord>, EnvError> {
    let c = env.shape().anonymity;
    let plan = plan_groups(assignment, c);
    let full = GroupPartition::new(plan.groups.clone());
    let rounds = elicitation_rounds(c);

    if env.remaining() < rounds {
        while env.remaining() > 0 {
            env.play(assignment, &full)?;
        }
        return Ok(Vec::new());
    }

    let baseline = env.play(assignment, &full)?;
    let mut estimates = Vec::with_capacity(assignment.n_users());
    for k in 0..rounds - 1 {
        let groups = plan
            .groups
            .iter()
            .map(|g| {
                let mut members = g.members.clone();
                if k < members.len() {
                    members.remove(k);
                }
                Group {
                    arm: g.arm,
                    members,
                }
            })
            .collect();
        let sums = env.play(assignment, &GroupPartition::new(groups))?;
        for (s, g) in plan.groups.iter().enumerate() {
            if let Some(&user) = g.members.get(k) {
                estimates.push(EstimateRecord {
                    user,
                    arm: g.arm,
                    value: baseline[s] - sums[s],
                });
            }
        }
    }
    Ok(estimates)
}
