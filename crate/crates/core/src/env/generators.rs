//! Synthetic instance generators: uniform and linear-model Bernoulli
//! instances, clustered instances with a guaranteed favorite-arm structure,
//! and the hard instances used to argue lower bounds.

use super::{EnvError, Instance, RewardFamily};
use crate::rng::{SeedStreams, Stream};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

/// Bernoulli instance with every mean drawn i.i.d. from `U[0, 1]`.
pub fn gen_uniform_instance(
    n: usize,
    k: usize,
    c: usize,
    t: usize,
    seed: u64,
) -> Result<Instance, EnvError> {
    let mut rng = SeedStreams::new(seed).stream(Stream::Instance);
    let means = (0..n * k).map(|_| rng.random::<f64>()).collect();
    Instance::new(n, k, c, t, means, RewardFamily::Bernoulli)
}

/// A uniformly random point on the unit sphere in `dim` dimensions.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// `mu[i][j] = (cos(v_i, w_j) + 1) / 2`, clamped into `[0, 1]` against
/// rounding.
pub fn linear_means(users: &[Vec<f64>], arms: &[Vec<f64>]) -> Vec<f64> {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut means = Vec::with_capacity(users.len() * arms.len());
    for v in users {
        for w in arms {
            let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
            let cos = dot / (norm(v) * norm(w));
            means.push((0.5 * (cos + 1.0)).clamp(0.0, 1.0));
        }
    }
    means
}

/// Bernoulli instance from a linear model: random unit vectors for users
/// and arms, means from their cosine similarity.
pub fn gen_linear_instance(
    n: usize,
    k: usize,
    c: usize,
    t: usize,
    dim: usize,
    seed: u64,
) -> Result<Instance, EnvError> {
    if dim == 0 {
        return Err(EnvError::InvalidInstance(
            "dimension must be positive".into(),
        ));
    }
    let mut rng = SeedStreams::new(seed).stream(Stream::Instance);
    let users: Vec<Vec<f64>> = (0..n).map(|_| random_unit_vector(dim, &mut rng)).collect();
    let arms: Vec<Vec<f64>> = (0..k).map(|_| random_unit_vector(dim, &mut rng)).collect();
    Instance::new(
        n,
        k,
        c,
        t,
        linear_means(&users, &arms),
        RewardFamily::Bernoulli,
    )
}

/// Bernoulli instance in which every arm is the unique optimum of at least
/// `u` users and each user's favorite beats every other arm by `gap`.
///
/// The first `k * u` favorites are dealt out evenly, the rest uniformly, and
/// the dealing order is shuffled. A user's favorite mean is drawn from
/// `U[gap, 1]` and the other arms from `U[0, favorite - gap]`.
pub fn gen_clustered_instance(
    n: usize,
    k: usize,
    c: usize,
    t: usize,
    u: usize,
    gap: f64,
    seed: u64,
) -> Result<Instance, EnvError> {
    if k == 0 || n < k * u {
        return Err(EnvError::InfeasibleCluster { n, k, u });
    }
    if !(gap > 0.0 && gap <= 1.0) {
        return Err(EnvError::InvalidInstance(format!(
            "cluster gap must lie in (0, 1], got {gap}"
        )));
    }
    let mut rng = SeedStreams::new(seed).stream(Stream::Instance);
    let mut favorites: Vec<usize> = (0..k * u).map(|idx| idx % k).collect();
    favorites.extend((k * u..n).map(|_| rng.random_range(0..k)));
    favorites.shuffle(&mut rng);

    let mut means = vec![0.0; n * k];
    for (i, &fav) in favorites.iter().enumerate() {
        let top = rng.random_range(gap..=1.0);
        for j in 0..k {
            means[i * k + j] = if j == fav {
                top
            } else {
                rng.random_range(0.0..=top - gap)
            };
        }
    }
    Instance::new(n, k, c, t, means, RewardFamily::Bernoulli)
}

/// Families of hard instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HardKind {
    /// Unit-variance Gaussian rewards; each user's favorite arm (uniform)
    /// has mean `sqrt(C/T)`, every other arm mean 0.
    GaussianCluster { n: usize, k: usize, c: usize },
    /// Three users, three arms, `C = 2`; two Bernoulli tables that differ by
    /// `2 T^(-1/3)` on users 2 and 3.
    T23Pair,
    /// Two users, two arms, `C = 2`; deterministic rewards `(1,0,0,1)` or
    /// `(0,1,1,0)`.
    LinearPair,
}

/// The `T^(2/3)` pair. `second` selects the table with users 2 and 3 swapped.
pub fn t23_pair(t: usize, second: bool) -> Result<Instance, EnvError> {
    if t < 8 {
        return Err(EnvError::InvalidInstance(format!(
            "horizon {t} makes T^(-1/3) exceed 1/2"
        )));
    }
    let eps = (t as f64).powf(-1.0 / 3.0);
    let (lo, hi) = (0.5 - eps, 0.5 + eps);
    let (a, b) = if second { (hi, lo) } else { (lo, hi) };
    let means = vec![
        1.0, 0.0, 0.0, //
        0.0, a, b, //
        0.0, b, a,
    ];
    Instance::new(3, 3, 2, t, means, RewardFamily::Bernoulli)
}

/// The linear-regret pair for `N = C`.
pub fn linear_pair(t: usize, second: bool) -> Result<Instance, EnvError> {
    let means = if second {
        vec![0.0, 1.0, 1.0, 0.0]
    } else {
        vec![1.0, 0.0, 0.0, 1.0]
    };
    Instance::new(2, 2, 2, t, means, RewardFamily::Deterministic)
}

/// Draws a hard instance; the pairs pick their table with a fair coin.
pub fn gen_hard_instance(kind: HardKind, t: usize, seed: u64) -> Result<Instance, EnvError> {
    let mut rng = SeedStreams::new(seed).stream(Stream::Instance);
    match kind {
        HardKind::GaussianCluster { n, k, c } => {
            if c > t {
                return Err(EnvError::InvalidInstance(format!(
                    "sqrt(C/T) exceeds 1 for C = {c}, T = {t}"
                )));
            }
            let high = (c as f64 / t as f64).sqrt();
            let mut means = vec![0.0; n * k];
            for i in 0..n {
                means[i * k + rng.random_range(0..k.max(1))] = high;
            }
            Instance::new(n, k, c, t, means, RewardFamily::UnitGaussian)
        }
        HardKind::T23Pair => t23_pair(t, rng.random::<bool>()),
        HardKind::LinearPair => linear_pair(t, rng.random::<bool>()),
    }
}
