//! Anonymous decompositions of batched graphs.
//!
//! A batched graph asks every user `i` for `ceil(D / |A_i|)` informative
//! samples on each arm of its demand set `A_i`. A decomposition is a list of
//! assignments; assignment `M` is informative for `(i, M(i))` when at least
//! `C+1` users share the arm `M(i)`, because then the elicitation protocol
//! can recover `i`'s reward without exposing groups smaller than `C`.
//!
//! Three back-ends are provided: [`greedy_decompose`] (one assignment family
//! per arm), [`random_decompose`] (uniform draws until demand is met) and
//! [`lp_decompose`], which writes the demand weights as a convex combination
//! of integral vertices of the anonymity polytope using exact rational
//! arithmetic. [`validate_decomposition`] recounts everything from scratch
//! and is the reference for all three.

mod fixture;
mod flow;
mod greedy;
mod lp;
mod polytope;
mod random;
mod validate;

pub use fixture::{read_decomposition, read_graph, write_decomposition, write_graph};
pub use greedy::greedy_decompose;
pub use lp::{block_point, lp_decompose};
pub use polytope::{caratheodory_decompose, check_membership, PolytopePoint, Vertex};
pub use random::random_decompose;
pub use validate::{validate_decomposition, Shortfall, ValidityReport, ZeroDemandUse};

use crate::env::Assignment;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecompError {
    #[error("cluster size {u} is below C+1 = {}", .c + 1)]
    ClusterTooSmall { u: usize, c: usize },
    #[error("point is not in the anonymity polytope: {0}")]
    NotInPolytope(String),
    #[error("invalid batched graph: {0}")]
    InvalidGraph(String),
    #[error("malformed fixture: {0}")]
    Fixture(String),
}

/// `max(1, ceil(K (C+1) / U))`.
pub fn alpha_factor(k: usize, c: usize, u: usize) -> Result<usize, DecompError> {
    if u < c + 1 {
        return Err(DecompError::ClusterTooSmall { u, c });
    }
    Ok((k * (c + 1)).div_ceil(u).max(1))
}

/// Number of arm blocks the LP back-end uses: `ceil(K / floor(U / (C+1)))`.
pub fn block_count(k: usize, c: usize, u: usize) -> Result<usize, DecompError> {
    if u < c + 1 {
        return Err(DecompError::ClusterTooSmall { u, c });
    }
    Ok(k.div_ceil(u / (c + 1)).max(1))
}

/// Demand `D` plus a nonempty demand set `A_i` per user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchedGraph {
    demand: usize,
    n_arms: usize,
    active_sets: Vec<Vec<usize>>,
}

impl BatchedGraph {
    /// Demand sets are sorted and deduplicated.
    pub fn new(
        demand: usize,
        n_arms: usize,
        mut active_sets: Vec<Vec<usize>>,
    ) -> Result<Self, DecompError> {
        if demand == 0 {
            return Err(DecompError::InvalidGraph("demand must be positive".into()));
        }
        for (i, set) in active_sets.iter_mut().enumerate() {
            set.sort_unstable();
            set.dedup();
            if set.is_empty() {
                return Err(DecompError::InvalidGraph(format!("user {i} has no demand")));
            }
            if let Some(&j) = set.iter().find(|&&j| j >= n_arms) {
                return Err(DecompError::InvalidGraph(format!(
                    "user {i} demands arm {j}, only {n_arms} arms"
                )));
            }
        }
        Ok(Self {
            demand,
            n_arms,
            active_sets,
        })
    }

    pub fn demand(&self) -> usize {
        self.demand
    }

    pub fn n_users(&self) -> usize {
        self.active_sets.len()
    }

    pub fn n_arms(&self) -> usize {
        self.n_arms
    }

    pub fn active(&self, user: usize) -> &[usize] {
        &self.active_sets[user]
    }

    pub fn active_sets(&self) -> &[Vec<usize>] {
        &self.active_sets
    }

    pub fn demands(&self, user: usize, arm: usize) -> bool {
        self.active_sets[user].binary_search(&arm).is_ok()
    }

    /// `w_ij = 1/|A_i|` on the demand set, zero elsewhere.
    pub fn weight(&self, user: usize, arm: usize) -> BigRational {
        if self.demands(user, arm) {
            BigRational::one() / BigRational::from_integer(self.active_sets[user].len().into())
        } else {
            BigRational::default()
        }
    }

    /// `ceil(D / |A_i|)`.
    pub fn need(&self, user: usize) -> usize {
        self.demand.div_ceil(self.active_sets[user].len())
    }

    /// `B_j`, ascending.
    pub fn demanders(&self, arm: usize) -> Vec<usize> {
        (0..self.n_users())
            .filter(|&i| self.demands(i, arm))
            .collect()
    }

    pub fn demander_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_arms];
        for set in &self.active_sets {
            for &j in set {
                counts[j] += 1;
            }
        }
        counts
    }

    /// Arms with at least one demander, ascending.
    pub fn demanded_arms(&self) -> Vec<usize> {
        let counts = self.demander_counts();
        (0..self.n_arms).filter(|&j| counts[j] > 0).collect()
    }

    /// Every demanded arm has at least `u` demanders. Arms nobody asks for
    /// need no feedback and are ignored.
    pub fn is_u_batched(&self, u: usize) -> bool {
        self.demander_counts().iter().all(|&n| n == 0 || n >= u)
    }

    /// Lowest-index arm of `A_i`; where users go when they are not needed.
    pub fn home_arm(&self, user: usize) -> usize {
        self.active_sets[user][0]
    }
}

/// An ordered list of assignments with their informative tallies.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    assignments: Vec<Assignment>,
    n_arms: usize,
    informative: Vec<usize>,
    shortfall_flag: bool,
}

impl Decomposition {
    pub fn new(assignments: Vec<Assignment>, n_arms: usize, c: usize) -> Self {
        let n_users = assignments.first().map_or(0, Assignment::n_users);
        let mut informative = vec![0; n_users * n_arms];
        for m in &assignments {
            let loads = m.loads(n_arms);
            for (i, &j) in m.arms().iter().enumerate() {
                if loads[j] > c {
                    informative[i * n_arms + j] += 1;
                }
            }
        }
        Self {
            assignments,
            n_arms,
            informative,
            shortfall_flag: false,
        }
    }

    pub(crate) fn flagged(mut self) -> Self {
        self.shortfall_flag = true;
        self
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn into_assignments(self) -> Vec<Assignment> {
        self.assignments
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Number of assignments informative for `(user, arm)`.
    pub fn informative(&self, user: usize, arm: usize) -> usize {
        self.informative
            .get(user * self.n_arms + arm)
            .copied()
            .unwrap_or(0)
    }

    /// Set when a capped back-end stopped before meeting all demand.
    pub fn shortfall_flag(&self) -> bool {
        self.shortfall_flag
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_factor(5, 4, 25), Ok(1));
        assert_eq!(alpha_factor(5, 4, 5), Ok(5));
        assert_eq!(alpha_factor(3, 2, 4), Ok(3));
        assert_eq!(alpha_factor(3, 2, 100), Ok(1));
        assert_eq!(
            alpha_factor(3, 2, 2),
            Err(DecompError::ClusterTooSmall { u: 2, c: 2 })
        );
    }

    #[test]
    fn block_counts() {
        assert_eq!(block_count(5, 4, 25), Ok(1));
        assert_eq!(block_count(5, 4, 5), Ok(5));
        // s = floor(14/5) = 2 -> 3 blocks, while alpha = ceil(25/14) = 2
        assert_eq!(block_count(5, 4, 14), Ok(3));
    }

    #[test]
    fn graph_basics() {
        let g = BatchedGraph::new(6, 3, vec![vec![2, 0], vec![1], vec![0, 1, 2]]).unwrap();
        assert_eq!(g.active(0), &[0, 2]);
        assert_eq!(g.need(0), 3);
        assert_eq!(g.need(2), 2);
        assert_eq!(g.demanders(0), vec![0, 2]);
        assert_eq!(g.demander_counts(), vec![2, 2, 2]);
        assert!(g.is_u_batched(2));
        assert!(!g.is_u_batched(3));
        assert_eq!(g.home_arm(0), 0);
        assert_eq!(g.weight(2, 1), BigRational::new(1.into(), 3.into()));
        assert_eq!(g.weight(1, 0), BigRational::default());
    }

    #[test]
    fn invalid_graphs() {
        assert!(BatchedGraph::new(0, 1, vec![vec![0]]).is_err());
        assert!(BatchedGraph::new(1, 1, vec![vec![]]).is_err());
        assert!(BatchedGraph::new(1, 1, vec![vec![1]]).is_err());
    }

    #[test]
    fn informative_tallies() {
        let d = Decomposition::new(
            vec![
                Assignment::new(vec![0, 0, 1]),
                Assignment::new(vec![0, 1, 1]),
            ],
            2,
            1,
        );
        // a user alone on an arm is never informative
        assert_eq!(d.informative(0, 0), 1);
        assert_eq!(d.informative(1, 0), 1);
        assert_eq!(d.informative(1, 1), 1);
        assert_eq!(d.informative(2, 1), 1);
        assert!(!d.shortfall_flag());
    }
}
