//! The anonymity polytope `P_C(S)` and exact Caratheodory decomposition.
//!
//! `P_C(S)` holds the `N x K` matrices with entries in `[0, 1]`, row sums at
//! most 1, column sums at least `C+1` on the arms of `S` and zero columns
//! elsewhere. Its constraint matrix is totally unimodular, so every 0/1 point
//! is a vertex and every face contains one. Vertices are found by solving the
//! tight constraints as a bounded bipartite circulation.

use super::flow::Circulation;
use super::{BatchedGraph, DecompError};
use crate::env::Assignment;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// `N x K` matrix of exact rationals together with an arm scope `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolytopePoint {
    n_users: usize,
    n_arms: usize,
    entries: Vec<BigRational>,
    scope: Vec<usize>,
}

fn int(v: usize) -> BigRational {
    BigRational::from_integer(v.into())
}

impl PolytopePoint {
    pub fn new(
        n_users: usize,
        n_arms: usize,
        entries: Vec<BigRational>,
        mut scope: Vec<usize>,
    ) -> Result<Self, DecompError> {
        if entries.len() != n_users * n_arms {
            return Err(DecompError::InvalidGraph(format!(
                "{} entries for a {n_users} x {n_arms} point",
                entries.len()
            )));
        }
        scope.sort_unstable();
        scope.dedup();
        if scope.last().is_some_and(|&j| j >= n_arms) {
            return Err(DecompError::InvalidGraph("scope arm out of range".into()));
        }
        Ok(Self {
            n_users,
            n_arms,
            entries,
            scope,
        })
    }

    pub fn zeros(n_users: usize, n_arms: usize, scope: Vec<usize>) -> Self {
        Self::new(
            n_users,
            n_arms,
            vec![BigRational::zero(); n_users * n_arms],
            scope,
        )
        .expect("consistent dimensions")
    }

    /// The demand weights `w` of a batched graph, scoped to its demanded arms.
    pub fn from_weights(graph: &BatchedGraph) -> Self {
        let (n, k) = (graph.n_users(), graph.n_arms());
        let entries = (0..n)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| graph.weight(i, j))
            .collect();
        Self::new(n, k, entries, graph.demanded_arms()).expect("consistent dimensions")
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_arms(&self) -> usize {
        self.n_arms
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn in_scope(&self, arm: usize) -> bool {
        self.scope.binary_search(&arm).is_ok()
    }

    pub fn get(&self, user: usize, arm: usize) -> &BigRational {
        &self.entries[user * self.n_arms + arm]
    }

    pub fn set(&mut self, user: usize, arm: usize, value: BigRational) {
        self.entries[user * self.n_arms + arm] = value;
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn row_sum(&self, user: usize) -> BigRational {
        self.entries[user * self.n_arms..(user + 1) * self.n_arms]
            .iter()
            .sum()
    }

    pub fn col_sum(&self, arm: usize) -> BigRational {
        (0..self.n_users).map(|i| self.get(i, arm)).sum()
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|x| x.is_integer())
    }

    /// The 0/1 matrix of a vertex.
    pub fn from_vertex(vertex: &Vertex, n_arms: usize, scope: Vec<usize>) -> Self {
        let mut p = Self::zeros(vertex.0.len(), n_arms, scope);
        for (i, arm) in vertex.0.iter().enumerate() {
            if let Some(j) = *arm {
                p.set(i, j, BigRational::one());
            }
        }
        p
    }
}

/// A 0/1 point of the polytope: each user plays at most one arm.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vertex(pub Vec<Option<usize>>);

impl Vertex {
    pub fn arm_of(&self, user: usize) -> Option<usize> {
        self.0[user]
    }

    pub fn loads(&self, n_arms: usize) -> Vec<usize> {
        let mut loads = vec![0; n_arms];
        for j in self.0.iter().flatten() {
            loads[*j] += 1;
        }
        loads
    }

    /// Whether this is a vertex of `P_C(scope)`.
    pub fn is_vertex_of(&self, c: usize, n_arms: usize, scope: &[usize]) -> bool {
        let loads = self.loads(n_arms);
        (0..n_arms).all(|j| {
            if scope.contains(&j) {
                loads[j] > c
            } else {
                loads[j] == 0
            }
        })
    }

    /// A total assignment: abstaining users go to the lowest arm they demand.
    pub fn materialize(&self, graph: &BatchedGraph) -> Assignment {
        Assignment::new(
            self.0
                .iter()
                .enumerate()
                .map(|(i, a)| a.unwrap_or_else(|| graph.home_arm(i)))
                .collect(),
        )
    }
}

/// Exact membership test for `P_C(S)`, where `S` is the point's scope.
pub fn check_membership(x: &PolytopePoint, c: usize) -> bool {
    let zero = BigRational::zero();
    let one = BigRational::one();
    if x.entries.iter().any(|v| *v < zero || *v > one) {
        return false;
    }
    if (0..x.n_users).any(|i| x.row_sum(i) > one) {
        return false;
    }
    let floor = int(c + 1);
    (0..x.n_arms).all(|j| {
        let col = x.col_sum(j);
        if x.in_scope(j) {
            col >= floor
        } else {
            col.is_zero()
        }
    })
}

/// Finds a 0/1 point satisfying every constraint of `P_C(S)` with all
/// constraints tight at `x` kept tight. Such a point lies on the minimal face
/// containing `x`, which is nonempty and integral.
fn vertex_on_face(x: &PolytopePoint, c: usize) -> Option<Vertex> {
    let (n, k) = (x.n_users, x.n_arms);
    let one = BigRational::one();
    let (source, sink) = (0, n + k + 1);
    let mut net = Circulation::new(n + k + 2);
    for i in 0..n {
        let lo = i64::from(x.row_sum(i) == one);
        net.add(source, 1 + i, lo, 1);
    }
    let mut cells = Vec::new();
    for i in 0..n {
        for &j in &x.scope {
            let v = x.get(i, j);
            if v.is_zero() {
                continue;
            }
            let lo = i64::from(*v == one);
            cells.push((i, j, net.add(1 + i, 1 + n + j, lo, 1)));
        }
    }
    let floor = int(c + 1);
    for &j in &x.scope {
        let hi = if x.col_sum(j) == floor { c + 1 } else { n };
        net.add(1 + n + j, sink, (c + 1) as i64, hi as i64);
    }
    net.add(sink, source, 0, n as i64);
    let flows = net.solve()?;
    let mut arms = vec![None; n];
    for (i, j, e) in cells {
        if flows[e] == 1 {
            arms[i] = Some(j);
        }
    }
    Some(Vertex(arms))
}

/// Slack pairs `(s(x), s(v))` of every inequality of `P_C(S)`.
fn slacks(x: &PolytopePoint, v: &PolytopePoint, c: usize) -> Vec<(BigRational, BigRational)> {
    let one = BigRational::one();
    let floor = int(c + 1);
    let mut out = Vec::new();
    for i in 0..x.n_users {
        for &j in &x.scope {
            let (a, b) = (x.get(i, j), v.get(i, j));
            out.push((a.clone(), b.clone()));
            out.push((&one - a, &one - b));
        }
        out.push((&one - x.row_sum(i), &one - v.row_sum(i)));
    }
    for &j in &x.scope {
        out.push((x.col_sum(j) - &floor, v.col_sum(j) - &floor));
    }
    out
}

/// Writes `x` as a convex combination of at most `N |S| + 1` vertices of
/// `P_C(S)`. The returned weights are positive, sum to one, and reproduce `x`
/// exactly.
pub fn caratheodory_decompose(
    x: &PolytopePoint,
    c: usize,
) -> Result<Vec<(BigRational, Vertex)>, DecompError> {
    if !check_membership(x, c) {
        return Err(DecompError::NotInPolytope(
            "constraints of the anonymity polytope are violated".into(),
        ));
    }
    let limit = x.n_users * x.scope.len() + 1;
    let mut current = x.clone();
    let mut remaining = BigRational::one();
    let mut terms = Vec::new();
    loop {
        let vertex = vertex_on_face(&current, c).ok_or_else(|| {
            DecompError::NotInPolytope("no integral point on the minimal face".into())
        })?;
        if current.is_integral() {
            terms.push((remaining, vertex));
            break;
        }
        let v = PolytopePoint::from_vertex(&vertex, x.n_arms, x.scope.clone());
        let lambda = slacks(&current, &v, c)
            .into_iter()
            .filter(|(_, sv)| sv.is_positive())
            .map(|(sx, sv)| sx / sv)
            .min()
            .expect("a fractional point has a constraint slack at the vertex");
        debug_assert!(lambda.is_positive() && lambda < BigRational::one());
        let rest = BigRational::one() - &lambda;
        for (cur, vv) in current.entries.iter_mut().zip(&v.entries) {
            *cur = (&*cur - &lambda * vv) / &rest;
        }
        terms.push((&remaining * &lambda, vertex));
        remaining *= rest;
        assert!(
            terms.len() < limit,
            "Caratheodory loop exceeded {limit} terms"
        );
    }
    Ok(terms)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::decomp::testutil::fuzz_graph;
    use crate::rng::{SeedStreams, Stream};
    use rand::Rng;

    pub(crate) fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// `sum_l lambda_l v_l`, computed independently of the decomposition.
    pub(crate) fn reconstruct(
        terms: &[(BigRational, Vertex)],
        n: usize,
        k: usize,
    ) -> Vec<BigRational> {
        let mut acc = vec![BigRational::zero(); n * k];
        for (w, v) in terms {
            for (i, a) in v.0.iter().enumerate() {
                if let Some(j) = a {
                    acc[i * k + j] += w;
                }
            }
        }
        acc
    }

    /// Every 0/1 point of `P_C(S)` by brute force.
    pub(crate) fn enumerate_vertices(n: usize, k: usize, c: usize, scope: &[usize]) -> Vec<Vertex> {
        let choices = k + 1;
        let total = choices.pow(n as u32);
        (0..total)
            .map(|mut code| {
                Vertex(
                    (0..n)
                        .map(|_| {
                            let a = code % choices;
                            code /= choices;
                            (a < k).then_some(a)
                        })
                        .collect(),
                )
            })
            .filter(|v| v.is_vertex_of(c, k, scope))
            .collect()
    }

    fn assert_exact(x: &PolytopePoint, c: usize) -> usize {
        let terms = caratheodory_decompose(x, c).unwrap();
        assert!(terms.len() <= x.n_users() * x.scope().len() + 1);
        assert_eq!(
            terms.iter().map(|(w, _)| w.clone()).sum::<BigRational>(),
            BigRational::one()
        );
        assert!(terms.iter().all(|(w, _)| w.is_positive()));
        for (_, v) in &terms {
            assert!(v.is_vertex_of(c, x.n_arms(), x.scope()), "{v:?}");
        }
        assert_eq!(reconstruct(&terms, x.n_users(), x.n_arms()), x.entries());
        terms.len()
    }

    #[test]
    fn empty_scope_zero_point_is_a_member() {
        let x = PolytopePoint::zeros(3, 2, vec![]);
        assert!(check_membership(&x, 1));
        let terms = caratheodory_decompose(&x, 1).unwrap();
        assert_eq!(terms, vec![(BigRational::one(), Vertex(vec![None; 3]))]);
    }

    #[test]
    fn column_just_short_of_the_floor_is_rejected() {
        // C = 1: column sum 1.5 < 2
        let mut x = PolytopePoint::zeros(3, 1, vec![0]);
        x.set(0, 0, r(1, 1));
        x.set(1, 0, r(1, 2));
        assert!(!check_membership(&x, 1));
        x.set(2, 0, r(1, 2));
        assert!(check_membership(&x, 1));
        assert!(matches!(
            caratheodory_decompose(&PolytopePoint::zeros(3, 1, vec![0]), 1),
            Err(DecompError::NotInPolytope(_))
        ));
    }

    #[test]
    fn other_violations() {
        let mut x = PolytopePoint::zeros(2, 2, vec![0]);
        x.set(0, 0, r(1, 1));
        x.set(1, 0, r(1, 1));
        assert!(check_membership(&x, 1));
        x.set(1, 1, r(1, 3));
        // outside scope and row sum above 1
        assert!(!check_membership(&x, 1));
        let mut y = PolytopePoint::zeros(2, 1, vec![0]);
        y.set(0, 0, r(3, 2));
        y.set(1, 0, r(1, 2));
        assert!(!check_membership(&y, 1));
        y.set(0, 0, r(-1, 2));
        assert!(!check_membership(&y, 0));
    }

    #[test]
    fn a_vertex_decomposes_into_itself() {
        let v = Vertex(vec![Some(0), Some(0), None, Some(1), Some(1)]);
        let x = PolytopePoint::from_vertex(&v, 2, vec![0, 1]);
        let terms = caratheodory_decompose(&x, 1).unwrap();
        assert_eq!(terms, vec![(BigRational::one(), v)]);
    }

    #[test]
    fn midpoint_of_two_vertices() {
        let a = Vertex(vec![Some(0), Some(0), Some(1), Some(1)]);
        let b = Vertex(vec![Some(1), Some(1), Some(0), Some(0)]);
        let pa = PolytopePoint::from_vertex(&a, 2, vec![0, 1]);
        let pb = PolytopePoint::from_vertex(&b, 2, vec![0, 1]);
        let half = r(1, 2);
        let entries = pa
            .entries()
            .iter()
            .zip(pb.entries())
            .map(|(p, q)| (p + q) * &half)
            .collect();
        let x = PolytopePoint::new(4, 2, entries, vec![0, 1]).unwrap();
        assert!(assert_exact(&x, 1) <= 9);
    }

    #[test]
    fn emitted_vertices_are_among_enumerated_ones() {
        let mut rng = SeedStreams::new(3).stream(Stream::Algorithm);
        for _ in 0..60 {
            let k = rng.random_range(1..=3);
            let c = rng.random_range(1..=2);
            let n = rng.random_range(c + 1..=6);
            let scope: Vec<usize> = (0..k).filter(|_| rng.random_bool(0.8)).collect();
            let all = enumerate_vertices(n, k, c, &scope);
            if all.is_empty() {
                continue;
            }
            // a random convex combination of three enumerated vertices
            let mut entries = vec![BigRational::zero(); n * k];
            let weights = [r(1, 2), r(1, 3), r(1, 6)];
            for w in &weights {
                let v = &all[rng.random_range(0..all.len())];
                let p = PolytopePoint::from_vertex(v, k, scope.clone());
                for (e, q) in entries.iter_mut().zip(p.entries()) {
                    *e += w * q;
                }
            }
            let x = PolytopePoint::new(n, k, entries, scope.clone()).unwrap();
            assert!(check_membership(&x, c));
            assert_exact(&x, c);
            for (_, v) in caratheodory_decompose(&x, c).unwrap() {
                assert!(all.contains(&v));
            }
        }
    }

    #[test]
    fn weights_of_large_clusters_are_members() {
        let mut rng = SeedStreams::new(4).stream(Stream::Algorithm);
        for _ in 0..40 {
            let c = rng.random_range(1..=3);
            let k = rng.random_range(1..=4);
            let n = rng.random_range(k * (c + 1)..=24);
            let g = fuzz_graph(&mut rng, n, k, k * (c + 1), 5);
            let w = PolytopePoint::from_weights(&g);
            assert!(check_membership(&w, c));
            assert_exact(&w, c);
        }
    }
}
