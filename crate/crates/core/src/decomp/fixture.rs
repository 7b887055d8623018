//! Text fixtures for batched graphs and decompositions.
//!
//! Graph:
//!
//! ```text
//! N K C D
//! <arms demanded by user 0>
//! ...
//! ```
//!
//! Decomposition: one assignment per line, `N` arm indices separated by
//! spaces. Arms are 0-based; blank lines and `#` comments are ignored.

use super::{BatchedGraph, DecompError, Decomposition};
use crate::env::Assignment;

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn numbers(line: &str) -> Result<Vec<usize>, DecompError> {
    line.split_whitespace()
        .map(|v| {
            v.parse()
                .map_err(|_| DecompError::Fixture(format!("not a count: `{v}`")))
        })
        .collect()
}

pub fn write_graph(graph: &BatchedGraph, c: usize) -> String {
    let mut out = format!(
        "{} {} {} {}\n",
        graph.n_users(),
        graph.n_arms(),
        c,
        graph.demand()
    );
    for set in graph.active_sets() {
        let row: Vec<String> = set.iter().map(usize::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Returns the graph and the anonymity level stored with it.
pub fn read_graph(text: &str) -> Result<(BatchedGraph, usize), DecompError> {
    let mut lines = content_lines(text);
    let header = numbers(
        lines
            .next()
            .ok_or_else(|| DecompError::Fixture("empty".into()))?,
    )?;
    let [n, k, c, demand] = header[..] else {
        return Err(DecompError::Fixture("header needs `N K C D`".into()));
    };
    let mut sets = Vec::with_capacity(n);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| DecompError::Fixture(format!("missing demand set of user {i}")))?;
        sets.push(numbers(line)?);
    }
    if lines.next().is_some() {
        return Err(DecompError::Fixture("trailing lines after N users".into()));
    }
    Ok((BatchedGraph::new(demand, k, sets)?, c))
}

pub fn write_decomposition(decomposition: &Decomposition) -> String {
    let mut out = String::new();
    for m in decomposition.assignments() {
        let row: Vec<String> = m.arms().iter().map(usize::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Every row must hold exactly `n_users` arms.
pub fn read_decomposition(
    text: &str,
    n_users: usize,
    n_arms: usize,
    c: usize,
) -> Result<Decomposition, DecompError> {
    let mut assignments = Vec::new();
    for (r, line) in content_lines(text).enumerate() {
        let arms = numbers(line)?;
        if arms.len() != n_users {
            return Err(DecompError::Fixture(format!(
                "assignment {r} has {} entries, expected {n_users}",
                arms.len()
            )));
        }
        if let Some(j) = arms.iter().find(|&&j| j >= n_arms) {
            return Err(DecompError::Fixture(format!(
                "assignment {r} uses arm {j}, only {n_arms} arms"
            )));
        }
        assignments.push(Assignment::new(arms));
    }
    Ok(Decomposition::new(assignments, n_arms, c))
}
