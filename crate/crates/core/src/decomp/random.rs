use super::{BatchedGraph, Decomposition};
use crate::env::Assignment;
use rand::seq::IndexedRandom;
use rand::Rng;

/// Draws assignments with every user uniform over its demand set until each
/// demanded pair has `ceil(D / |A_i|)` informative draws.
///
/// Stops after `50 K D` draws; the result is then flagged with a shortfall.
pub fn random_decompose<R: Rng + ?Sized>(
    graph: &BatchedGraph,
    c: usize,
    rng: &mut R,
) -> Decomposition {
    let (n, k) = (graph.n_users(), graph.n_arms());
    let cap = 50 * k * graph.demand();
    let mut missing: Vec<usize> = vec![0; n * k];
    let mut open = 0usize;
    for i in 0..n {
        for &j in graph.active(i) {
            missing[i * k + j] = graph.need(i);
            open += 1;
        }
    }

    let mut assignments = Vec::new();
    let mut loads = vec![0; k];
    while open > 0 && assignments.len() < cap {
        let arms: Vec<usize> = (0..n)
            .map(|i| *graph.active(i).choose(rng).expect("nonempty demand set"))
            .collect();
        loads.fill(0);
        for &j in &arms {
            loads[j] += 1;
        }
        for (i, &j) in arms.iter().enumerate() {
            let slot = &mut missing[i * k + j];
            if loads[j] > c && *slot > 0 {
                *slot -= 1;
                if *slot == 0 {
                    open -= 1;
                }
            }
        }
        assignments.push(Assignment::new(arms));
    }
    let d = Decomposition::new(assignments, k, c);
    if open > 0 {
        d.flagged()
    } else {
        d
    }
}
