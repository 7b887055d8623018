use super::{BatchedGraph, Decomposition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shortfall {
    pub user: usize,
    pub arm: usize,
    pub have: usize,
    pub need: usize,
}

/// Assignment `index` sends `user` to an arm it has no demand for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroDemandUse {
    pub index: usize,
    pub user: usize,
    pub arm: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityReport {
    pub valid: bool,
    pub shortfalls: Vec<Shortfall>,
    pub zero_demand: Vec<ZeroDemandUse>,
}

impl std::fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "valid: {}", self.valid)?;
        writeln!(f, "shortfalls: {}", self.shortfalls.len())?;
        for s in &self.shortfalls {
            writeln!(
                f,
                "  user {} arm {}: have {}, need {}",
                s.user, s.arm, s.have, s.need
            )?;
        }
        writeln!(f, "zero-demand uses: {}", self.zero_demand.len())?;
        for z in &self.zero_demand {
            writeln!(f, "  assignment {} user {} arm {}", z.index, z.user, z.arm)?;
        }
        Ok(())
    }
}

/// Recounts informative assignments from the raw assignment list and
/// checks every demanded pair against `ceil(D / |A_i|)`.
pub fn validate_decomposition(
    graph: &BatchedGraph,
    c: usize,
    decomposition: &Decomposition,
) -> ValidityReport {
    let (n, k) = (graph.n_users(), graph.n_arms());
    let mut have = vec![vec![0usize; k]; n];
    let mut zero_demand = Vec::new();
    for (index, m) in decomposition.assignments().iter().enumerate() {
        let mut loads = vec![0usize; k];
        for &j in m.arms().iter().filter(|&&j| j < k) {
            loads[j] += 1;
        }
        for (user, &arm) in m.arms().iter().enumerate() {
            if user >= n || arm >= k || !graph.demands(user, arm) {
                zero_demand.push(ZeroDemandUse { index, user, arm });
                continue;
            }
            if loads[arm] > c {
                have[user][arm] += 1;
            }
        }
        // users missing from a short assignment are unassigned
        for user in m.n_users()..n {
            zero_demand.push(ZeroDemandUse {
                index,
                user,
                arm: usize::MAX,
            });
        }
    }
    let mut shortfalls = Vec::new();
    for (user, row) in have.iter().enumerate() {
        let need = graph.need(user);
        for &arm in graph.active(user) {
            if row[arm] < need {
                shortfalls.push(Shortfall {
                    user,
                    arm,
                    have: row[arm],
                    need,
                });
            }
        }
    }
    ValidityReport {
        valid: shortfalls.is_empty() && zero_demand.is_empty(),
        shortfalls,
        zero_demand,
    }
}
