//! Instance specifications and algorithm names as they appear in configs.

use super::HarnessError;
use crate::env::{
    gen_clustered_instance, gen_hard_instance, gen_linear_instance, gen_uniform_instance, EnvError,
    HardKind, Instance,
};
use crate::learners::Decomposer;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// How each replication obtains its instance.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSpec {
    /// All means i.i.d. `U[0, 1]`.
    Uniform {
        n: usize,
        k: usize,
        c: usize,
        t: usize,
    },
    /// Means `0.5 (cos + 1)` of random unit vectors in `dim` dimensions.
    Linear {
        n: usize,
        k: usize,
        c: usize,
        t: usize,
        dim: usize,
    },
    /// Every arm is the favorite of at least `u` users, margin `gap`.
    Clustered {
        n: usize,
        k: usize,
        c: usize,
        t: usize,
        u: usize,
        gap: f64,
    },
    Hard {
        kind: HardKind,
        t: usize,
    },
    /// The same instance in every replication.
    Fixed(Instance),
}

impl InstanceSpec {
    pub fn horizon(&self) -> usize {
        match self {
            InstanceSpec::Uniform { t, .. }
            | InstanceSpec::Linear { t, .. }
            | InstanceSpec::Clustered { t, .. }
            | InstanceSpec::Hard { t, .. } => *t,
            InstanceSpec::Fixed(inst) => inst.horizon(),
        }
    }

    pub fn with_horizon(&self, horizon: usize) -> Result<Self, EnvError> {
        let mut spec = self.clone();
        match &mut spec {
            InstanceSpec::Uniform { t, .. }
            | InstanceSpec::Linear { t, .. }
            | InstanceSpec::Clustered { t, .. }
            | InstanceSpec::Hard { t, .. } => *t = horizon,
            InstanceSpec::Fixed(inst) => *inst = inst.with_horizon(horizon)?,
        }
        Ok(spec)
    }

    pub fn generate(&self, seed: u64) -> Result<Instance, EnvError> {
        match *self {
            InstanceSpec::Uniform { n, k, c, t } => gen_uniform_instance(n, k, c, t, seed),
            InstanceSpec::Linear { n, k, c, t, dim } => gen_linear_instance(n, k, c, t, dim, seed),
            InstanceSpec::Clustered { n, k, c, t, u, gap } => {
                gen_clustered_instance(n, k, c, t, u, gap, seed)
            }
            InstanceSpec::Hard { kind, t } => gen_hard_instance(kind, t, seed),
            InstanceSpec::Fixed(ref inst) => Ok(inst.clone()),
        }
    }
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceSpec::Uniform { n, k, c, t } => write!(f, "uniform:n={n},k={k},c={c},t={t}"),
            InstanceSpec::Linear { n, k, c, t, dim } => {
                write!(f, "linear:n={n},k={k},c={c},t={t},dim={dim}")
            }
            InstanceSpec::Clustered { n, k, c, t, u, gap } => {
                write!(f, "clustered:n={n},k={k},c={c},t={t},u={u},gap={gap}")
            }
            InstanceSpec::Hard { kind, t } => match kind {
                HardKind::GaussianCluster { n, k, c } => {
                    write!(f, "gaussian-cluster:n={n},k={k},c={c},t={t}")
                }
                HardKind::T23Pair => write!(f, "t23-pair:t={t}"),
                HardKind::LinearPair => write!(f, "linear-pair:t={t}"),
            },
            InstanceSpec::Fixed(inst) => write!(
                f,
                "fixed:n={},k={},c={},t={}",
                inst.n_users(),
                inst.n_arms(),
                inst.anonymity(),
                inst.horizon()
            ),
        }
    }
}

/// Parses `kind:key=value,...`, e.g. `uniform:n=50,k=5,c=4,t=100000`.
///
/// Kinds: `uniform`, `linear` (`dim` defaults to 10), `clustered`
/// (`u` defaults to `n/k`, `gap` to 0.2), `gaussian-cluster`, `t23-pair`,
/// `linear-pair`.
impl FromStr for InstanceSpec {
    type Err = HarnessError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = |msg: String| HarnessError::InvalidConfig(format!("instance `{text}`: {msg}"));
        let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut params = BTreeMap::new();
        for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got `{pair}`")))?;
            params.insert(key.trim().to_string(), value.trim().to_string());
        }
        let mut take = |key: &str, default: Option<f64>| -> Result<f64, HarnessError> {
            match params.remove(key) {
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|_| bad(format!("`{key}` is not a number"))),
                None => default.ok_or_else(|| bad(format!("missing `{key}`"))),
            }
        };
        let count = |v: f64, key: &str| -> Result<usize, HarnessError> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(bad(format!("`{key}` must be a non-negative integer")))
            }
        };
        let spec = match kind.trim() {
            "uniform" => InstanceSpec::Uniform {
                n: count(take("n", None)?, "n")?,
                k: count(take("k", None)?, "k")?,
                c: count(take("c", None)?, "c")?,
                t: count(take("t", None)?, "t")?,
            },
            "linear" => InstanceSpec::Linear {
                n: count(take("n", None)?, "n")?,
                k: count(take("k", None)?, "k")?,
                c: count(take("c", None)?, "c")?,
                t: count(take("t", None)?, "t")?,
                dim: count(take("dim", Some(10.0))?, "dim")?,
            },
            "clustered" => {
                let n = count(take("n", None)?, "n")?;
                let k = count(take("k", None)?, "k")?;
                InstanceSpec::Clustered {
                    n,
                    k,
                    c: count(take("c", None)?, "c")?,
                    t: count(take("t", None)?, "t")?,
                    u: count(take("u", Some((n / k.max(1)) as f64))?, "u")?,
                    gap: take("gap", Some(0.2))?,
                }
            }
            "gaussian-cluster" => InstanceSpec::Hard {
                kind: HardKind::GaussianCluster {
                    n: count(take("n", None)?, "n")?,
                    k: count(take("k", None)?, "k")?,
                    c: count(take("c", None)?, "c")?,
                },
                t: count(take("t", None)?, "t")?,
            },
            "t23-pair" => InstanceSpec::Hard {
                kind: HardKind::T23Pair,
                t: count(take("t", None)?, "t")?,
            },
            "linear-pair" => InstanceSpec::Hard {
                kind: HardKind::LinearPair,
                t: count(take("t", None)?, "t")?,
            },
            other => {
                return Err(bad(format!(
                    "unknown kind `{other}` (expected uniform, linear, clustered, \
                     gaussian-cluster, t23-pair or linear-pair)"
                )))
            }
        };
        if let Some(key) = params.keys().next() {
            return Err(bad(format!("unknown parameter `{key}`")));
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Etc,
    Alg1Greedy,
    Alg1Random,
    Alg1Lp,
    Ucb,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Etc,
        Algorithm::Alg1Greedy,
        Algorithm::Alg1Random,
        Algorithm::Alg1Lp,
        Algorithm::Ucb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Etc => "etc",
            Algorithm::Alg1Greedy => "alg1-greedy",
            Algorithm::Alg1Random => "alg1-random",
            Algorithm::Alg1Lp => "alg1-lp",
            Algorithm::Ucb => "ucb",
        }
    }

    /// UCB reads individual rewards and is only a reference point.
    pub fn is_anonymous(self) -> bool {
        self != Algorithm::Ucb
    }

    pub fn decomposer(self) -> Option<Decomposer> {
        match self {
            Algorithm::Alg1Greedy => Some(Decomposer::Greedy),
            Algorithm::Alg1Random => Some(Decomposer::Random),
            Algorithm::Alg1Lp => Some(Decomposer::Lp),
            _ => None,
        }
    }

    /// Parses a comma-separated list.
    pub fn parse_list(text: &str) -> Result<Vec<Algorithm>, HarnessError> {
        let list = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()?;
        if list.is_empty() {
            return Err(HarnessError::InvalidConfig(
                "algorithm list is empty".into(),
            ));
        }
        Ok(list)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                HarnessError::InvalidConfig(format!(
                    "unknown algorithm `{s}`; valid names: {}",
                    names.join(", ")
                ))
            })
    }
}
