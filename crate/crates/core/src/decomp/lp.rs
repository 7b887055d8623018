use super::polytope::{caratheodory_decompose, check_membership, PolytopePoint};
use super::{BatchedGraph, DecompError, Decomposition};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// `w^(a)_ij = 1 / |A_i ∩ S_a|` for `j ∈ A_i ∩ S_a`, scoped to `S_a`.
pub fn block_point(graph: &BatchedGraph, block: &[usize]) -> PolytopePoint {
    let (n, k) = (graph.n_users(), graph.n_arms());
    let mut x = PolytopePoint::zeros(n, k, block.to_vec());
    for i in 0..n {
        let mine: Vec<usize> = graph
            .active(i)
            .iter()
            .copied()
            .filter(|j| block.contains(j))
            .collect();
        for &j in &mine {
            x.set(i, j, BigRational::new(1.into(), mine.len().into()));
        }
    }
    x
}

/// Polytope-based decomposition.
///
/// When the demand weights `w` already lie in `P_C(S)` (guaranteed once
/// `U >= K(C+1)`) they are decomposed directly, giving at most
/// `D + N K + 1` assignments. Otherwise the demanded arms are cut, in index
/// order, into blocks of `floor(U / (C+1))` arms and each block's
/// renormalised weights are decomposed separately, giving at most
/// `a D + N K + a` assignments for `a` blocks. Each vertex of weight `λ` is
/// repeated `ceil(D λ)` times.
pub fn lp_decompose(
    graph: &BatchedGraph,
    c: usize,
    u: usize,
) -> Result<Decomposition, DecompError> {
    if u < c + 1 {
        return Err(DecompError::ClusterTooSmall { u, c });
    }
    let w = PolytopePoint::from_weights(graph);
    let points = if check_membership(&w, c) {
        vec![w]
    } else if u >= graph.n_arms() * (c + 1) {
        return Err(DecompError::NotInPolytope(format!(
            "demand weights violate the polytope although U = {u} >= K(C+1)"
        )));
    } else {
        let size = u / (c + 1);
        let arms = graph.demanded_arms();
        let mut points = Vec::new();
        for block in arms.chunks(size) {
            let x = block_point(graph, block);
            if !check_membership(&x, c) {
                return Err(DecompError::NotInPolytope(format!(
                    "block {block:?} has an arm with fewer than {u} demanders"
                )));
            }
            points.push(x);
        }
        points
    };

    let demand = BigRational::from_integer(graph.demand().into());
    let mut assignments = Vec::new();
    for x in &points {
        for (lambda, vertex) in caratheodory_decompose(x, c)? {
            debug_assert!(!lambda.is_zero());
            let copies = (&demand * lambda)
                .ceil()
                .to_integer()
                .to_usize()
                .expect("copies fit in usize");
            let m = vertex.materialize(graph);
            assignments.extend(std::iter::repeat_n(m, copies));
        }
    }
    Ok(Decomposition::new(assignments, graph.n_arms(), c))
}
