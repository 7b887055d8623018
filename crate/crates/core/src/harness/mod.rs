//! Seeded replications, aggregation and CSV output.
//!
//! Every `(algorithm, replication)` pair is an independent run. The instance
//! of replication `r` is drawn from a seed keyed by `(root, r)` only, so all
//! algorithms in one replication face the same instance and comparisons are
//! paired. Reward and algorithm randomness is keyed by
//! `(root, algorithm, r)`. Runs execute in parallel; aggregation happens in a
//! fixed order, so output is identical regardless of scheduling.

mod csv;
mod spec;
pub mod stats;

pub use csv::{emit_csv, final_table_path, parse_curve_csv, CurveRow};
pub use spec::{Algorithm, InstanceSpec};

use crate::env::{EnvError, RegretTrace};
use crate::learners::{run_alg1, run_etc, run_ucb, Alg1Config, EtcConfig, LearnerError};
use crate::rng::derive_seed;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::path::PathBuf;
use thiserror::Error;

/// Elimination constant picked by validation on held-out uniform and linear
/// instances (see the README). The learner's own default is 2.
pub const DEFAULT_GAMMA_CONST: f64 = 0.1;
/// Exploration constant for explore-then-commit picked the same way. The
/// learner's own default is 10, which saturates the `T/2` cap below
/// `T = 10^6` at the default problem sizes.
pub const DEFAULT_ETC_SCALE: f64 = 1.0;
/// Uniform means, 50 users, 5 arms, C = 4, 10^5 rounds.
pub const DEFAULT_INSTANCE: &str = "uniform:n=50,k=5,c=4,t=100000";
pub const DEFAULT_STRIDE: usize = 100;
pub const DEFAULT_REPLICATIONS: usize = 20;
/// Horizon and replication count of the reduced `ci` scale.
pub const CI_HORIZON: usize = 20_000;
pub const CI_REPLICATIONS: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{algorithm}, replication {replication}: {message}")]
    Replication {
        algorithm: String,
        replication: usize,
        message: String,
    },
    #[error("i/o failure on {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    pub algorithms: Vec<Algorithm>,
    pub replications: usize,
    pub root_seed: u64,
    /// Directory for CSV output; `None` keeps results in memory only.
    pub output: Option<PathBuf>,
    /// Keep every `stride`-th round (and the last) in the curve CSV.
    pub stride: usize,
    pub gamma_const: f64,
    pub etc_scale: f64,
    pub u_assumed: Option<usize>,
    pub batches: Option<usize>,
    pub robust_mode: bool,
}

impl ExperimentConfig {
    pub fn new(instance: InstanceSpec, algorithms: Vec<Algorithm>) -> Self {
        Self {
            instance,
            algorithms,
            replications: DEFAULT_REPLICATIONS,
            root_seed: 0,
            output: None,
            stride: DEFAULT_STRIDE,
            gamma_const: DEFAULT_GAMMA_CONST,
            etc_scale: DEFAULT_ETC_SCALE,
            u_assumed: None,
            batches: None,
            robust_mode: true,
        }
    }

    /// Builds a config from `key = value` settings whose keys match the CLI
    /// flags: `instance` (a spec string or `file:<fixture>`, default
    /// [`DEFAULT_INSTANCE`]), `algos`, `reps`, `seed`, `out`,
    /// `stride`, `gamma-const`, `etc-scale`, `u-assumed`, `batches`,
    /// `robust`, and `scale` (`full` or `ci`).
    pub fn from_settings(settings: &BTreeMap<String, String>) -> Result<Self, HarnessError> {
        let bad = |key: &str, value: &str| {
            HarnessError::InvalidConfig(format!("bad value `{value}` for `{key}`"))
        };
        let instance = settings
            .get("instance")
            .map_or(DEFAULT_INSTANCE, String::as_str);
        let instance = match instance.strip_prefix("file:") {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
                    path: path.into(),
                    message: e.to_string(),
                })?;
                let inst = crate::env::Instance::from_fixture(&text)
                    .map_err(|e| HarnessError::InvalidConfig(format!("{path}: {e}")))?;
                InstanceSpec::Fixed(inst)
            }
            None => instance.parse()?,
        };
        let algorithms = match settings.get("algos") {
            Some(list) => Algorithm::parse_list(list)?,
            None => Algorithm::ALL.to_vec(),
        };
        let mut config = Self::new(instance, algorithms);
        for (key, value) in settings {
            let v = value.as_str();
            match key.as_str() {
                "instance" | "algos" | "scale" => {}
                "reps" => config.replications = v.parse().map_err(|_| bad(key, v))?,
                "seed" => config.root_seed = v.parse().map_err(|_| bad(key, v))?,
                "out" => config.output = Some(PathBuf::from(v)),
                "stride" => config.stride = v.parse().map_err(|_| bad(key, v))?,
                "gamma-const" => config.gamma_const = v.parse().map_err(|_| bad(key, v))?,
                "etc-scale" => config.etc_scale = v.parse().map_err(|_| bad(key, v))?,
                "u-assumed" => config.u_assumed = Some(v.parse().map_err(|_| bad(key, v))?),
                "batches" => config.batches = Some(v.parse().map_err(|_| bad(key, v))?),
                "robust" => config.robust_mode = v.parse().map_err(|_| bad(key, v))?,
                other => {
                    return Err(HarnessError::InvalidConfig(format!(
                        "unknown key `{other}`"
                    )))
                }
            }
        }
        match settings.get("scale").map(String::as_str) {
            None | Some("full") => {}
            Some("ci") => {
                config.instance = config
                    .instance
                    .with_horizon(CI_HORIZON)
                    .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
                config.replications = CI_REPLICATIONS;
            }
            Some(other) => return Err(bad("scale", other)),
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: &str| Err(HarnessError::InvalidConfig(msg.into()));
        if self.replications == 0 {
            return fail("replications must be at least 1");
        }
        if self.algorithms.is_empty() {
            return fail("algorithm list is empty");
        }
        if self.stride == 0 {
            return fail("stride must be at least 1");
        }
        if self.instance.horizon() == 0 {
            return fail("horizon must be positive");
        }
        if !(self.gamma_const > 0.0) || !(self.etc_scale > 0.0) {
            return fail("gamma-const and etc-scale must be positive");
        }
        Ok(())
    }

    pub fn alg1_config(&self, algorithm: Algorithm) -> Option<Alg1Config> {
        algorithm.decomposer().map(|d| Alg1Config {
            decomposer: d,
            u_assumed: self.u_assumed,
            gamma_const: self.gamma_const,
            batches: self.batches,
            robust_mode: self.robust_mode,
        })
    }
}

/// Seed of the instance used by replication `rep`, shared by all algorithms.
pub fn instance_seed(root: u64, rep: usize) -> u64 {
    derive_seed(root, &["instance"], rep as u64)
}

/// Seed of the reward and algorithm streams of one run.
pub fn run_seed(root: u64, algorithm: Algorithm, rep: usize) -> u64 {
    derive_seed(root, &[algorithm.name()], rep as u64)
}

#[derive(Debug, Error)]
enum RunError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
}

/// One run of one algorithm in one replication.
pub fn run_replication(
    config: &ExperimentConfig,
    algorithm: Algorithm,
    rep: usize,
) -> Result<RegretTrace, HarnessError> {
    let attempt = || -> Result<RegretTrace, RunError> {
        let instance = config
            .instance
            .generate(instance_seed(config.root_seed, rep))?;
        let seed = run_seed(config.root_seed, algorithm, rep);
        Ok(match algorithm {
            Algorithm::Etc => run_etc(
                &instance,
                &EtcConfig {
                    scale: config.etc_scale,
                },
                seed,
            )?,
            Algorithm::Ucb => run_ucb(&instance, seed)?,
            _ => run_alg1(
                &instance,
                &config.alg1_config(algorithm).expect("batched variant"),
                seed,
            )?,
        })
    };
    attempt().map_err(|e| HarnessError::Replication {
        algorithm: algorithm.name().into(),
        replication: rep,
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    /// Mean cumulative pseudo-regret after each round.
    pub mean_curve: Vec<f64>,
    pub ci_half_width: Vec<f64>,
    pub final_mean: f64,
    pub final_ci_half_width: f64,
    pub final_reward_mean: f64,
    /// Final regret of each successful replication, in replication order.
    pub finals: Vec<f64>,
    /// Successful replications.
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub horizon: usize,
    pub summaries: Vec<AlgorithmSummary>,
    pub failures: Vec<HarnessError>,
}

impl AggregateResult {
    pub fn summary(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.summaries.iter().find(|s| s.algorithm == algorithm)
    }
}

/// Runs every `(algorithm, replication)` pair and aggregates the curves.
///
/// Failed runs are collected in `failures` and left out of the aggregates;
/// an algorithm with no successful run gets no summary.
pub fn run_experiment(config: &ExperimentConfig) -> Result<AggregateResult, HarnessError> {
    config.validate()?;
    let jobs: Vec<(Algorithm, usize)> = config
        .algorithms
        .iter()
        .flat_map(|&a| (0..config.replications).map(move |r| (a, r)))
        .collect();
    let outcomes: Vec<Result<RegretTrace, HarnessError>> = jobs
        .par_iter()
        .map(|&(a, r)| run_replication(config, a, r))
        .collect();

    let mut summaries = Vec::new();
    let mut failures = Vec::new();
    let mut outcomes = outcomes.into_iter();
    for &algorithm in &config.algorithms {
        let mut traces = Vec::new();
        for outcome in outcomes.by_ref().take(config.replications) {
            match outcome {
                Ok(trace) => traces.push(trace),
                Err(e) => failures.push(e),
            }
        }
        if traces.is_empty() {
            continue;
        }
        let curves: Vec<&[f64]> = traces
            .iter()
            .map(|t| t.cumulative_pseudo_regret.as_slice())
            .collect();
        let (mean_curve, ci_half_width) = stats::curve_band(&curves);
        let finals: Vec<f64> = traces.iter().map(RegretTrace::final_regret).collect();
        let rewards: Vec<f64> = traces.iter().map(RegretTrace::final_reward).collect();
        let (final_mean, final_ci_half_width) = stats::mean_and_half_width(&finals);
        summaries.push(AlgorithmSummary {
            algorithm,
            mean_curve,
            ci_half_width,
            final_mean,
            final_ci_half_width,
            final_reward_mean: stats::mean_and_half_width(&rewards).0,
            finals,
            replications: traces.len(),
        });
    }
    Ok(AggregateResult {
        horizon: config.instance.horizon(),
        summaries,
        failures,
    })
}

/// Reads `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_settings(text: &str) -> Result<BTreeMap<String, String>, HarnessError> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            HarnessError::InvalidConfig(format!("line {}: expected `key = value`", no + 1))
        })?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    fn small(algos: &str, reps: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::from_settings(&settings(&[
            ("instance", "uniform:n=8,k=2,c=1,t=600"),
            ("algos", algos),
        ]))
        .unwrap();
        c.replications = reps;
        c
    }

    #[test]
    fn settings_file_parses() {
        let text =
            "# demo\ninstance = uniform:n=8,k=2,c=1,t=600\nalgos = etc, ucb\nreps=3\n\nseed = 7\n";
        let config = ExperimentConfig::from_settings(&parse_settings(text).unwrap()).unwrap();
        assert_eq!(config.algorithms, vec![Algorithm::Etc, Algorithm::Ucb]);
        assert_eq!((config.replications, config.root_seed), (3, 7));
        assert!(parse_settings("reps 3").is_err());
    }

    #[test]
    fn fixture_instances_are_loaded() {
        let inst = crate::env::gen_uniform_instance(4, 2, 1, 300, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.txt");
        std::fs::write(&path, inst.to_fixture()).unwrap();
        let value = format!("file:{}", path.display());
        let config = ExperimentConfig::from_settings(&settings(&[("instance", &value)])).unwrap();
        assert_eq!(config.instance, InstanceSpec::Fixed(inst));
        let missing = settings(&[("instance", "file:/nonexistent/inst.txt")]);
        assert!(matches!(
            ExperimentConfig::from_settings(&missing),
            Err(HarnessError::Io { .. })
        ));
    }

    #[test]
    fn defaults() {
        let config = ExperimentConfig::from_settings(&BTreeMap::new()).unwrap();
        assert_eq!(config.instance.to_string(), DEFAULT_INSTANCE);
        assert_eq!(config.algorithms, Algorithm::ALL.to_vec());
        assert_eq!((config.replications, config.stride), (20, 100));
        assert_eq!((config.gamma_const, config.etc_scale), (0.1, 1.0));
    }

    #[test]
    fn ci_scale_rescales_horizon_and_reps() {
        let config = ExperimentConfig::from_settings(&settings(&[
            ("instance", "uniform:n=50,k=5,c=4,t=100000"),
            ("scale", "ci"),
            ("reps", "20"),
        ]))
        .unwrap();
        assert_eq!(config.instance.horizon(), 20_000);
        assert_eq!(config.replications, 5);
    }

    #[test]
    fn invalid_settings_are_rejected() {
        for pairs in [
            vec![("instance", "uniform:n=8,k=2")],
            vec![("instance", "uniform:n=8,k=2,c=1,t=60"), ("reps", "0")],
            vec![
                ("instance", "uniform:n=8,k=2,c=1,t=60"),
                ("algos", "etc,alg9"),
            ],
            vec![("instance", "uniform:n=8,k=2,c=1,t=60"), ("colour", "red")],
            vec![("instance", "uniform:n=8,k=2,c=1,t=60"), ("scale", "huge")],
            vec![("instance", "uniform:n=8,k=2,c=1,t=60"), ("stride", "0")],
        ] {
            assert!(
                ExperimentConfig::from_settings(&settings(&pairs)).is_err(),
                "{pairs:?}"
            );
        }
    }

    #[test]
    fn one_replication_reproduces_the_run() {
        let config = small("ucb", 1);
        let result = run_experiment(&config).unwrap();
        let s = &result.summaries[0];
        let trace = run_replication(&config, Algorithm::Ucb, 0).unwrap();
        assert_eq!(s.mean_curve, trace.cumulative_pseudo_regret);
        assert!(s.ci_half_width.iter().all(|&h| h == 0.0));
        assert_eq!(s.final_ci_half_width, 0.0);
    }

    #[test]
    fn instances_are_shared_across_algorithms() {
        let config = small("etc,ucb", 2);
        let a = config
            .instance
            .generate(instance_seed(config.root_seed, 1))
            .unwrap();
        let b = config
            .instance
            .generate(instance_seed(config.root_seed, 1))
            .unwrap();
        assert_eq!(a, b);
        assert_ne!(
            run_seed(0, Algorithm::Etc, 1),
            run_seed(0, Algorithm::Ucb, 1)
        );
        assert_ne!(instance_seed(0, 0), instance_seed(0, 1));
    }

    #[test]
    fn results_are_deterministic() {
        let config = small("etc,alg1-random,ucb", 3);
        assert_eq!(
            run_experiment(&config).unwrap(),
            run_experiment(&config).unwrap()
        );
    }

    #[test]
    fn single_arm_gives_zero_regret_everywhere() {
        let mut config = small("etc,alg1-greedy,alg1-random,alg1-lp,ucb", 20);
        config.instance = "uniform:n=6,k=1,c=2,t=2000".parse().unwrap();
        let result = run_experiment(&config).unwrap();
        assert!(result.failures.is_empty());
        for s in &result.summaries {
            assert_eq!(s.final_mean, 0.0, "{}", s.algorithm);
        }
    }

    #[test]
    fn failures_are_isolated() {
        // ETC cannot explore 5 arms in 60 rounds with C = 4; UCB is unaffected
        let mut config = small("etc,ucb", 2);
        config.instance = "uniform:n=5,k=5,c=4,t=60".parse().unwrap();
        let result = run_experiment(&config).unwrap();
        assert_eq!(result.failures.len(), 2);
        assert!(result.failures[0]
            .to_string()
            .starts_with("etc, replication 0"));
        assert_eq!(result.summaries.len(), 1);
        assert_eq!(result.summaries[0].algorithm, Algorithm::Ucb);
        assert_eq!(result.summaries[0].replications, 2);
    }
}
