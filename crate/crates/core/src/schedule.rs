use alloc::vec::Vec;

/// Which budget denominator the schedule uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Cumulative per-arm budget `floor(T K 2^r / (4 n R))`.
    Iid,
    /// Cumulative per-arm budget `floor(T K 2^r / (2 n R))`.
    NonIid,
}

/// Round structure shared by every elimination algorithm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundSchedule {
    /// Number of elimination rounds, `ceil(log2 n)`.
    pub rounds: usize,
    /// `survivors[r] = floor(n / 2^r)` arms at the start of round `r`, for `r = 0..=R`.
    pub survivors: Vec<usize>,
    /// Cumulative pulls per arm after round `r - 1`, with `budgets[0] = 0`.
    pub budgets: Vec<u64>,
}

impl RoundSchedule {
    /// Pulls each surviving arm receives during round `r`.
    pub fn increment(&self, r: usize) -> u64 {
        self.budgets[r + 1] - self.budgets[r]
    }

    /// Cumulative per-agent pulls when a per-arm budget is split over `agents`,
    /// rounded up: `ceil(budgets[r] / agents)`.
    pub fn local_budgets(&self, agents: usize) -> Vec<u64> {
        let k = agents as u64;
        self.budgets.iter().map(|b| b.div_ceil(k)).collect()
    }
}

/// `ceil(log2 n)` for `n >= 1`.
pub(crate) fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Builds the halving schedule for `n` arms, horizon `horizon` and `agents` agents.
///
/// # Panics
///
/// Panics if `n < 2` or `agents == 0`.
pub fn round_schedule(n: usize, horizon: u64, agents: usize, variant: Variant) -> RoundSchedule {
    assert!(n >= 2, "a schedule needs at least two arms");
    assert!(agents >= 1, "a schedule needs at least one agent");
    let rounds = ceil_log2(n);
    let survivors = (0..=rounds).map(|r| n >> r).collect();
    let factor: u128 = match variant {
        Variant::Iid => 4,
        Variant::NonIid => 2,
    };
    let denom = factor * n as u128 * rounds as u128;
    let budgets = (0..=rounds)
        .map(|r| {
            if r == 0 {
                0
            } else {
                let num = horizon as u128 * agents as u128 * (1u128 << r);
                (num / denom) as u64
            }
        })
        .collect();
    RoundSchedule { rounds, survivors, budgets }
}

/// Lower bound on the success probability of the halving algorithms.
///
/// Evaluates `1 - 2n log2(2n) exp(-T K / (128 H log2(2n)))` and clamps it to
/// `[0, 1]`.
pub fn success_bound(n: usize, horizon: u64, agents: usize, hardness: f64) -> f64 {
    let log_term = libm::log2(2.0 * n as f64);
    let exponent = -(horizon as f64 * agents as f64) / (128.0 * hardness * log_term);
    let bound = 1.0 - 2.0 * n as f64 * log_term * libm::exp(exponent);
    bound.clamp(0.0, 1.0)
}
