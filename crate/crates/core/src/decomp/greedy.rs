use super::{BatchedGraph, Decomposition};
use crate::env::Assignment;

/// For every arm `j` with at least `C+1` demanders, `D` copies of the
/// assignment sending all of `B_j` to `j` and everyone else home.
///
/// Arms with fewer demanders get no copies; the resulting shortfall is left
/// for [`validate_decomposition`](super::validate_decomposition) to report.
pub fn greedy_decompose(graph: &BatchedGraph, c: usize) -> Decomposition {
    let counts = graph.demander_counts();
    let mut assignments = Vec::new();
    for (j, &count) in counts.iter().enumerate() {
        if count < c + 1 {
            continue;
        }
        let m = Assignment::new(
            (0..graph.n_users())
                .map(|i| {
                    if graph.demands(i, j) {
                        j
                    } else {
                        graph.home_arm(i)
                    }
                })
                .collect(),
        );
        assignments.extend(std::iter::repeat_n(m, graph.demand()));
    }
    Decomposition::new(assignments, graph.n_arms(), c)
}
