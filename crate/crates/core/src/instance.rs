use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use rand::{Rng, RngCore};
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};

/// One-based arm identifier, stable for the whole run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArmId(u32);

impl ArmId {
    /// # Panics
    ///
    /// Panics if `id` is zero.
    pub fn new(id: u32) -> Self {
        assert!(id >= 1, "arm ids are one-based");
        ArmId(id)
    }

    /// Arm id for a zero-based position.
    pub fn from_index(index: usize) -> Self {
        ArmId(index as u32 + 1)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Zero-based position of the arm.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for ArmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Shape of the per-pull reward distribution around an arm mean.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RewardKind {
    #[default]
    Bernoulli,
    /// Uniform on `[mu - w, mu + w]` with `w = min(half_width, mu, 1 - mu)`,
    /// which keeps the support inside `[0, 1]` without moving the mean.
    ClippedUniform { half_width: f64 },
}

impl RewardKind {
    /// Sum of `count` independent rewards for an arm with the given mean.
    pub fn draw_sum(self, mean: f64, count: u64, rng: &mut dyn RngCore) -> f64 {
        if count == 0 {
            return 0.0;
        }
        match self {
            RewardKind::Bernoulli => {
                let p = mean.clamp(0.0, 1.0);
                // A sum of Bernoulli draws is binomial; sampling it directly keeps
                // large horizons cheap.
                Binomial::new(count, p).expect("p in [0, 1]").sample(rng) as f64
            }
            RewardKind::ClippedUniform { half_width } => {
                let w = half_width.min(mean).min(1.0 - mean).max(0.0);
                let mut sum = 0.0;
                for _ in 0..count {
                    let u: f64 = rng.random();
                    sum += mean - w + 2.0 * w * u;
                }
                sum
            }
        }
    }
}

/// Source of rewards for the simulated agents.
///
/// `draw_sum` returns the total reward of `count` pulls of `arm` (zero-based)
/// made by `agent`. Every single reward must lie in `[0, 1]`.
pub trait RewardModel {
    fn arm_count(&self) -> usize;

    /// Means the output is judged against (global means for non-IID data).
    fn true_means(&self) -> Vec<f64>;

    fn draw_sum(&self, arm: usize, agent: usize, count: u64, rng: &mut dyn RngCore) -> f64;
}

/// IID instance: every agent samples arm `i` from the same distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    means: Vec<f64>,
    kind: RewardKind,
}

impl Instance {
    pub fn new(means: Vec<f64>, kind: RewardKind) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::InvalidParams("an instance needs at least one arm"));
        }
        if means.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::InvalidParams("arm means must lie in [0, 1]"));
        }
        Ok(Instance { means, kind })
    }

    pub fn bernoulli(means: Vec<f64>) -> Result<Self> {
        Self::new(means, RewardKind::Bernoulli)
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn kind(&self) -> RewardKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }
}

impl RewardModel for Instance {
    fn arm_count(&self) -> usize {
        self.means.len()
    }

    fn true_means(&self) -> Vec<f64> {
        self.means.clone()
    }

    fn draw_sum(&self, arm: usize, _agent: usize, count: u64, rng: &mut dyn RngCore) -> f64 {
        self.kind.draw_sum(self.means[arm], count, rng)
    }
}

/// Non-IID instance: agent `k` samples arm `i` around its own local mean.
///
/// Stored row-major, one row per agent. Global means are always recomputed
/// from the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct NonIidInstance {
    local: Vec<f64>,
    agents: usize,
    arms: usize,
    kind: RewardKind,
}

impl NonIidInstance {
    pub fn new(rows: Vec<Vec<f64>>, kind: RewardKind) -> Result<Self> {
        let agents = rows.len();
        if agents == 0 || rows[0].is_empty() {
            return Err(Error::InvalidParams("local mean matrix must be nonempty"));
        }
        let arms = rows[0].len();
        if rows.iter().any(|r| r.len() != arms) {
            return Err(Error::InvalidParams("every agent needs a mean for every arm"));
        }
        let local: Vec<f64> = rows.into_iter().flatten().collect();
        if local.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::InvalidParams("local means must lie in [0, 1]"));
        }
        Ok(NonIidInstance { local, agents, arms, kind })
    }

    pub fn bernoulli(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows, RewardKind::Bernoulli)
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn kind(&self) -> RewardKind {
        self.kind
    }

    /// Local mean of zero-based `arm` at zero-based `agent`.
    pub fn local_mean(&self, agent: usize, arm: usize) -> f64 {
        self.local[agent * self.arms + arm]
    }

    pub fn row(&self, agent: usize) -> &[f64] {
        &self.local[agent * self.arms..(agent + 1) * self.arms]
    }

    pub fn global_means(&self) -> Vec<f64> {
        (0..self.arms)
            .map(|i| (0..self.agents).map(|k| self.local_mean(k, i)).sum::<f64>() / self.agents as f64)
            .collect()
    }
}

impl RewardModel for NonIidInstance {
    fn arm_count(&self) -> usize {
        self.arms
    }

    fn true_means(&self) -> Vec<f64> {
        self.global_means()
    }

    fn draw_sum(&self, arm: usize, agent: usize, count: u64, rng: &mut dyn RngCore) -> f64 {
        self.kind.draw_sum(self.local_mean(agent, arm), count, rng)
    }
}

/// Per-arm gaps to the top-m boundary and the resulting hardness.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile {
    pub gaps: Vec<f64>,
    /// Sum of inverse squared gaps.
    pub hardness: f64,
}

/// Gap of every arm to the m-th / (m+1)-th boundary.
///
/// Arm `i` gets `max(mu_i - mu_[m+1], mu_[m] - mu_i)` where `mu_[j]` is the
/// j-th highest mean.
pub fn compute_gaps(means: &[f64], m: usize) -> Result<GapProfile> {
    if m == 0 || m >= means.len() {
        return Err(Error::InvalidParams("compute_gaps needs 1 <= m < n"));
    }
    let mut sorted = means.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let upper = sorted[m - 1];
    let lower = sorted[m];
    if upper == lower {
        return Err(Error::Degenerate { m });
    }
    let gaps: Vec<f64> = means.iter().map(|&mu| (mu - lower).max(upper - mu)).collect();
    let hardness = gaps.iter().map(|g| 1.0 / (g * g)).sum();
    Ok(GapProfile { gaps, hardness })
}

/// The `m` arms of highest mean, ties going to the lower arm index.
///
/// Returned in increasing id order.
pub fn top_m(means: &[f64], m: usize) -> Vec<ArmId> {
    let mut order: Vec<usize> = (0..means.len()).collect();
    order.sort_by(|&a, &b| match means[b].partial_cmp(&means[a]) {
        Some(Ordering::Equal) | None => a.cmp(&b),
        Some(o) => o,
    });
    let mut top: Vec<ArmId> = order.into_iter().take(m).map(ArmId::from_index).collect();
    top.sort();
    top
}

/// Column averages of a K x n matrix of local means.
pub fn global_means(local: &[Vec<f64>]) -> Vec<f64> {
    if local.is_empty() {
        return Vec::new();
    }
    let agents = local.len() as f64;
    (0..local[0].len()).map(|i| local.iter().map(|row| row[i]).sum::<f64>() / agents).collect()
}
