use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::NonIidInstance;

/// One bit vector per agent; `rows[k][i]` is coordinate `i` of agent `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjInput {
    pub rows: Vec<Vec<bool>>,
}

impl DisjInput {
    pub fn new(rows: Vec<Vec<bool>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidParams("DISJ input must be nonempty"));
        }
        if rows.iter().any(|r| r.len() != rows[0].len()) {
            return Err(Error::InvalidParams("DISJ rows must have equal length"));
        }
        Ok(DisjInput { rows })
    }

    pub fn agents(&self) -> usize {
        self.rows.len()
    }

    pub fn len(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when some coordinate is set for every agent.
    pub fn disj(&self) -> bool {
        (0..self.len()).any(|i| self.rows.iter().all(|r| r[i]))
    }
}

/// Local mean of the extra arm: below every all-ones column, above every other one.
fn threshold(agents: usize) -> f64 {
    2.0 / 3.0 - 1.0 / (6.0 * agents as f64)
}

/// Builds the `n + 1` arm instance whose best global arm is the extra arm
/// `n + 1` exactly when no coordinate is shared by all agents.
///
/// Arm `i` has local mean `(1 + X_i^k) / 3 + i / n^2` at agent `k`. The
/// separation argument needs `n > 6K`.
pub fn disj_instance(input: &DisjInput) -> Result<NonIidInstance> {
    let n = input.len();
    let agents = input.agents();
    if n <= 6 * agents {
        return Err(Error::DisjSeparation { n, agents });
    }
    let delta = 1.0 / (n as f64 * n as f64);
    let special = threshold(agents);
    let rows = input
        .rows
        .iter()
        .map(|bits| {
            let mut row: Vec<f64> = bits
                .iter()
                .enumerate()
                .map(|(i, &b)| (1.0 + f64::from(u8::from(b))) / 3.0 + (i + 1) as f64 * delta)
                .collect();
            row.push(special);
            row
        })
        .collect();
    NonIidInstance::bernoulli(rows)
}
