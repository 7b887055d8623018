//! Dinic max-flow and feasible circulations with lower bounds.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
struct Network {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    level: Vec<i32>,
    next: Vec<usize>,
}

impl Network {
    fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; n],
            next: vec![0; n],
        }
    }

    /// Returns the id of the forward edge; its reverse is `id ^ 1`.
    fn add_edge(&mut self, u: usize, v: usize, cap: i64) -> usize {
        let id = self.to.len();
        self.adj[u].push(id);
        self.to.push(v);
        self.cap.push(cap);
        self.adj[v].push(id + 1);
        self.to.push(u);
        self.cap.push(0);
        id
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.fill(-1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: i64) -> i64 {
        if u == t {
            return pushed;
        }
        while self.next[u] < self.adj[u].len() {
            let e = self.adj[u][self.next[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && self.level[v] == self.level[u] + 1 {
                let got = self.dfs(v, t, pushed.min(self.cap[e]));
                if got > 0 {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            self.next[u] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        while self.bfs(s, t) {
            self.next.fill(0);
            loop {
                let f = self.dfs(s, t, i64::MAX);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
        total
    }
}

/// Circulation problem where every edge carries a flow in `[lo, hi]`.
#[derive(Debug, Clone)]
pub(crate) struct Circulation {
    net: Network,
    n: usize,
    excess: Vec<i64>,
    edges: Vec<(usize, i64)>,
}

impl Circulation {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            net: Network::new(n + 2),
            n,
            excess: vec![0; n],
            edges: Vec::new(),
        }
    }

    pub(crate) fn add(&mut self, u: usize, v: usize, lo: i64, hi: i64) -> usize {
        debug_assert!(0 <= lo && lo <= hi);
        let id = self.net.add_edge(u, v, hi - lo);
        self.excess[v] += lo;
        self.excess[u] -= lo;
        self.edges.push((id, lo));
        self.edges.len() - 1
    }

    /// Finds an integral feasible circulation, returning the flow on each
    /// edge in insertion order, or `None` if none exists.
    pub(crate) fn solve(mut self) -> Option<Vec<i64>> {
        let (source, sink) = (self.n, self.n + 1);
        let mut required = 0;
        for v in 0..self.n {
            let x = self.excess[v];
            if x > 0 {
                self.net.add_edge(source, v, x);
                required += x;
            } else if x < 0 {
                self.net.add_edge(v, sink, -x);
            }
        }
        if self.net.max_flow(source, sink) != required {
            return None;
        }
        Some(
            self.edges
                .iter()
                .map(|&(id, lo)| lo + self.net.cap[id ^ 1])
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_flow_on_a_textbook_network() {
        // CLRS figure 26.1: max flow 23
        let mut g = Network::new(6);
        for (u, v, c) in [
            (0, 1, 16),
            (0, 2, 13),
            (2, 1, 4),
            (1, 3, 12),
            (3, 2, 9),
            (2, 4, 14),
            (4, 3, 7),
            (3, 5, 20),
            (4, 5, 4),
        ] {
            g.add_edge(u, v, c);
        }
        assert_eq!(g.max_flow(0, 5), 23);
    }

    #[test]
    fn lower_bounds_are_honoured() {
        // s -> a -> t -> s with a forced unit on s -> a
        let mut c = Circulation::new(3);
        let e0 = c.add(0, 1, 1, 1);
        let e1 = c.add(1, 2, 0, 5);
        let e2 = c.add(2, 0, 0, 5);
        let flows = c.solve().unwrap();
        assert_eq!((flows[e0], flows[e1], flows[e2]), (1, 1, 1));
    }

    #[test]
    fn infeasible_bounds_are_detected() {
        let mut c = Circulation::new(2);
        c.add(0, 1, 2, 3);
        c.add(1, 0, 0, 1);
        assert!(c.solve().is_none());
    }
}
