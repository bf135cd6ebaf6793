use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The m-th and (m+1)-th highest means coincide, so the top-m set is not unique.
    #[error("degenerate instance: the {m}-th and {}-th highest means are equal", m + 1)]
    Degenerate { m: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),

    #[error("message tagged for round {got} posted during round {current}")]
    RoundMismatch { current: u32, got: u32 },

    #[error("agent {agent} would reach {would_be} pulls, above the horizon {horizon}")]
    BudgetExceeded { agent: usize, would_be: u64, horizon: u64 },

    #[error("order statistic {m} is out of range for {total} elements")]
    OutOfRange { m: usize, total: usize },

    #[error("inconsistent slot count: {slots} arms still to accept among {arms}")]
    InconsistentSlots { slots: usize, arms: usize },

    #[error("set-disjointness instance needs n > 6K (got n = {n}, K = {agents})")]
    DisjSeparation { n: usize, agents: usize },

    #[error("horizon {horizon} is smaller than the number of arms {arms}")]
    HorizonTooSmall { horizon: u64, arms: usize },
}
