//! Batched successive elimination on a static grid.
//!
//! The grid depends only on the horizon and the number of batches, so many
//! independent instances (one per user) stay in lockstep. In each batch the
//! caller learns the active arms and a per-arm sample quota, gathers at least
//! that many samples for every active arm, and reports them back; arms whose
//! empirical mean trails the leader by `sqrt(gamma * sigma^2 / tau)` are then
//! eliminated. The last batch of a multi-batch grid commits to the empirical
//! leader.

use crate::env::argmax;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaseError {
    #[error("cannot split a horizon of {horizon} into {batches} non-empty batches")]
    GridInfeasible { horizon: usize, batches: usize },
    #[error("arm {arm} received {have} samples, batch quota is {need}")]
    QuotaUnmet {
        arm: usize,
        have: usize,
        need: usize,
    },
    #[error("all {batches} batches have already been completed")]
    BatchesExhausted { batches: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Batch boundaries `0 = t_0 < t_1 < ... < t_B = T'`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseGrid {
    horizon: usize,
    boundaries: Vec<usize>,
    base: f64,
}

impl BaseGrid {
    /// Builds the grid `t_b = ceil(a^(2 - 2^(1-b)))` with
    /// `a = T'^(1 / (2 - 2^(1-B)))`, nudged to be strictly increasing.
    pub fn new(horizon: usize, batches: usize) -> Result<Self, BaseError> {
        if batches == 0 || horizon < batches {
            return Err(BaseError::GridInfeasible { horizon, batches });
        }
        let exponent = |b: usize| 2.0 - 2f64.powi(1 - b as i32);
        let base = (horizon as f64).powf(1.0 / exponent(batches));
        let mut boundaries = vec![0usize; batches + 1];
        for b in 1..batches {
            let raw = base.powf(exponent(b)).ceil().min(horizon as f64) as usize;
            boundaries[b] = raw.max(boundaries[b - 1] + 1);
        }
        boundaries[batches] = horizon;
        // leave room for the later batches
        for b in (1..batches).rev() {
            boundaries[b] = boundaries[b].min(boundaries[b + 1] - 1);
        }
        Ok(Self {
            horizon,
            boundaries,
            base,
        })
    }

    /// `max(1, floor(log2 log2 T'))`.
    pub fn default_batches(horizon: usize) -> usize {
        if horizon < 4 {
            return 1;
        }
        ((horizon as f64).log2().log2().floor() as usize).max(1)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn batches(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// `D_b = t_b - t_(b-1)`, batches numbered from 1.
    pub fn batch_len(&self, b: usize) -> usize {
        self.boundaries[b] - self.boundaries[b - 1]
    }
}

/// `gamma = scale * ln(N K T)`.
pub fn default_gamma(n_users: usize, n_arms: usize, horizon: usize, scale: f64) -> f64 {
    scale * ((n_users * n_arms * horizon) as f64).max(2.0).ln()
}

/// What one batch asks of the caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchRequest {
    /// 1-based batch number.
    pub batch: usize,
    pub active: Vec<usize>,
    /// Samples required for every arm in `active`.
    pub quota: usize,
    /// Set on the final batch of a multi-batch grid, where `active` is the
    /// single empirical leader.
    pub commit: bool,
}

#[derive(Debug, Clone)]
pub struct BaseState {
    grid: BaseGrid,
    gamma: f64,
    noise_proxy: f64,
    active: Vec<usize>,
    counts: Vec<usize>,
    sums: Vec<f64>,
    batch: usize,
}

impl BaseState {
    pub fn new(
        n_arms: usize,
        grid: BaseGrid,
        gamma: f64,
        noise_proxy: f64,
    ) -> Result<Self, BaseError> {
        if n_arms == 0 {
            return Err(BaseError::InvalidParameter("need at least one arm".into()));
        }
        if !(gamma > 0.0) || !(noise_proxy > 0.0) {
            return Err(BaseError::InvalidParameter(format!(
                "gamma ({gamma}) and noise proxy ({noise_proxy}) must be positive"
            )));
        }
        Ok(Self {
            grid,
            gamma,
            noise_proxy,
            active: (0..n_arms).collect(),
            counts: vec![0; n_arms],
            sums: vec![0.0; n_arms],
            batch: 1,
        })
    }

    pub fn grid(&self) -> &BaseGrid {
        &self.grid
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// The batch the next `begin_batch` refers to (1-based).
    pub fn current_batch(&self) -> usize {
        self.batch
    }

    pub fn is_finished(&self) -> bool {
        self.batch > self.grid.batches()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn empirical_mean(&self, arm: usize) -> Option<f64> {
        (self.counts[arm] > 0).then(|| self.sums[arm] / self.counts[arm] as f64)
    }

    /// Active arm with the highest empirical mean, lowest index on ties.
    /// Unsampled arms only win when nothing has been sampled.
    pub fn empirical_best(&self) -> usize {
        let means: Vec<f64> = self
            .active
            .iter()
            .map(|&j| self.empirical_mean(j).unwrap_or(f64::NEG_INFINITY))
            .collect();
        self.active[argmax(&means)]
    }

    /// Current elimination threshold `sqrt(gamma sigma^2 / tau)`.
    pub fn threshold(&self) -> f64 {
        let tau = self
            .active
            .iter()
            .map(|&j| self.counts[j])
            .max()
            .unwrap_or(0);
        if tau == 0 {
            return f64::INFINITY;
        }
        (self.gamma * self.noise_proxy / tau as f64).sqrt()
    }

    fn is_commit_batch(&self) -> bool {
        self.batch == self.grid.batches() && self.batch > 1
    }

    pub fn begin_batch(&self) -> Result<BatchRequest, BaseError> {
        if self.is_finished() {
            return Err(BaseError::BatchesExhausted {
                batches: self.grid.batches(),
            });
        }
        let len = self.grid.batch_len(self.batch);
        let commit = self.is_commit_batch();
        let active = if commit {
            vec![self.empirical_best()]
        } else {
            self.active.clone()
        };
        Ok(BatchRequest {
            batch: self.batch,
            quota: len.div_ceil(active.len()),
            active,
            commit,
        })
    }

    /// Absorbs one batch of samples (indexed by arm) and returns the active
    /// set for the next batch. Every announced arm must meet the quota.
    pub fn end_batch(&mut self, samples: &[Vec<f64>]) -> Result<Vec<usize>, BaseError> {
        let request = self.begin_batch()?;
        for &j in &request.active {
            let have = samples.get(j).map_or(0, Vec::len);
            if have < request.quota {
                return Err(BaseError::QuotaUnmet {
                    arm: j,
                    have,
                    need: request.quota,
                });
            }
        }
        Ok(self.absorb(&request, samples))
    }

    /// Like [`end_batch`](Self::end_batch) but accepts short batches. Arms
    /// that have never been sampled are never eliminated.
    pub fn end_batch_lenient(&mut self, samples: &[Vec<f64>]) -> Result<Vec<usize>, BaseError> {
        let request = self.begin_batch()?;
        Ok(self.absorb(&request, samples))
    }

    fn absorb(&mut self, request: &BatchRequest, samples: &[Vec<f64>]) -> Vec<usize> {
        for &j in &request.active {
            if let Some(xs) = samples.get(j) {
                self.counts[j] += xs.len();
                self.sums[j] += xs.iter().sum::<f64>();
            }
        }
        if !request.commit && self.batch < self.grid.batches() {
            let leader = self.empirical_best();
            if let Some(top) = self.empirical_mean(leader) {
                let threshold = self.threshold();
                let counts = &self.counts;
                let sums = &self.sums;
                self.active.retain(|&j| {
                    j == leader || counts[j] == 0 || top - sums[j] / (counts[j] as f64) < threshold
                });
            }
        }
        self.batch += 1;
        self.active.clone()
    }
}

/// Outcome of running the elimination policy alone on one user.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleUserRun {
    pub best_survived: bool,
    pub regret: f64,
    pub pulls: usize,
}

/// Drives one [`BaseState`] directly on Bernoulli arms with raw rewards
/// (noise proxy 1), pulling exactly the quota of every active arm in each
/// batch.
pub fn simulate_single_user<R: Rng + ?Sized>(
    means: &[f64],
    horizon: usize,
    batches: usize,
    gamma: f64,
    rng: &mut R,
) -> Result<SingleUserRun, BaseError> {
    let grid = BaseGrid::new(horizon, batches)?;
    let mut state = BaseState::new(means.len(), grid, gamma, 1.0)?;
    let best = argmax(means);
    let top = means[best];
    let mut best_survived = true;
    let mut regret = 0.0;
    let mut pulls = 0;
    while !state.is_finished() {
        let request = state.begin_batch()?;
        if !request.commit && !request.active.contains(&best) {
            best_survived = false;
        }
        let mut samples = vec![Vec::new(); means.len()];
        for &j in &request.active {
            samples[j] = (0..request.quota)
                .map(|_| f64::from(u8::from(rng.random::<f64>() < means[j])))
                .collect();
            regret += request.quota as f64 * (top - means[j]);
            pulls += request.quota;
        }
        state.end_batch(&samples)?;
    }
    Ok(SingleUserRun {
        best_survived,
        regret,
        pulls,
    })
}
