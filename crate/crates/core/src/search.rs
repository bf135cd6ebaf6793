//! Distributed order statistics over agent-held sets.
//!
//! Each iteration the active agents report their lower medians, the
//! coordinator broadcasts the size-weighted median of those medians as a
//! pivot, agents report how many of their elements fall below it, and the
//! coordinator tells them which side to keep. At least a quarter of the
//! remaining elements lie on each side of the pivot, so the loop runs
//! `O(log z)` times at `O(K)` words each. Once few elements remain, agents
//! ship them directly.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::elim::RankKey;
use crate::error::{Error, Result};
use crate::fabric::{Fabric, Word};

/// Remaining elements per active agent below which agents send everything.
const DIRECT_SEND_RATIO: usize = 2;

pub(crate) trait SearchKey: Ord + Copy {
    fn word(&self) -> Word;
}

impl SearchKey for RankKey {
    fn word(&self) -> Word {
        Word::Real(self.value)
    }
}

/// A raw value tagged with its owner and local position so duplicates order totally.
#[derive(Debug, Clone, Copy)]
struct Tagged {
    value: f64,
    agent: usize,
    pos: usize,
}

impl PartialEq for Tagged {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Tagged {}

impl PartialOrd for Tagged {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Tagged {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value).then(self.agent.cmp(&other.agent)).then(self.pos.cmp(&other.pos))
    }
}

impl SearchKey for Tagged {
    fn word(&self) -> Word {
        Word::Real(self.value)
    }
}

/// The `m`-th smallest key (one-based) across the sets held by the fabric's agents.
///
/// `sets[k]` belongs to agent `k`; keys must be distinct across all sets,
/// which [`RankKey`] guarantees when each arm appears once.
pub fn collab_search(fabric: &mut Fabric, sets: &[Vec<RankKey>], m: usize) -> Result<RankKey> {
    search(fabric, sets, m, false)
}

/// The `m`-th smallest value of the multiset union of `sets`.
pub fn collab_search_values(fabric: &mut Fabric, sets: &[Vec<f64>], m: usize) -> Result<f64> {
    let tagged: Vec<Vec<Tagged>> = sets
        .iter()
        .enumerate()
        .map(|(agent, set)| set.iter().enumerate().map(|(pos, &value)| Tagged { value, agent, pos }).collect())
        .collect();
    search(fabric, &tagged, m, false).map(|t| t.value)
}

/// Runs the search; `sizes_known` skips the initial size report when the
/// coordinator already holds every agent's set size.
pub(crate) fn search<T: SearchKey>(fabric: &mut Fabric, sets: &[Vec<T>], m: usize, sizes_known: bool) -> Result<T> {
    let agents = fabric.agents();
    if sets.len() != agents {
        return Err(Error::InvalidParams("one set per agent"));
    }
    let total: usize = sets.iter().map(Vec::len).sum();
    if m == 0 || m > total {
        return Err(Error::OutOfRange { m, total });
    }

    let sorted: Vec<Vec<T>> = sets
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s
        })
        .collect();
    // Each agent's live window is sorted[k][lo[k]..hi[k]].
    let mut lo = vec![0usize; agents];
    let mut hi: Vec<usize> = sorted.iter().map(Vec::len).collect();

    if !sizes_known {
        for (k, set) in sorted.iter().enumerate() {
            fabric.send_up(k, vec![Word::Count(set.len() as u64)])?;
        }
    }

    let mut rank = m;
    let mut remaining = total;
    loop {
        let active: Vec<usize> = (0..agents).filter(|&k| hi[k] > lo[k]).collect();

        if remaining <= DIRECT_SEND_RATIO * active.len() {
            let mut pool = Vec::with_capacity(remaining);
            for &k in &active {
                let window = &sorted[k][lo[k]..hi[k]];
                fabric.send_up(k, window.iter().map(SearchKey::word).collect())?;
                pool.extend_from_slice(window);
            }
            pool.sort_unstable();
            return Ok(pool[rank - 1]);
        }

        let mut medians: Vec<(T, usize, usize)> = Vec::with_capacity(active.len());
        for &k in &active {
            let size = hi[k] - lo[k];
            let median = sorted[k][lo[k] + (size - 1) / 2];
            fabric.send_up(k, vec![median.word()])?;
            medians.push((median, k, size));
        }
        medians.sort_unstable_by_key(|a| a.0);
        let mut weight = 0;
        let (pivot, owner) = medians
            .iter()
            .find(|&&(_, _, size)| {
                weight += size;
                2 * weight >= remaining
            })
            .map(|&(key, k, _)| (key, k))
            .expect("weights sum to the remaining count");

        let mut below = vec![0usize; agents];
        for &k in &active {
            fabric.send_down(k, vec![pivot.word()])?;
        }
        for &k in &active {
            let window = &sorted[k][lo[k]..hi[k]];
            below[k] = window.partition_point(|x| *x < pivot);
            // The owner's count is implied by the median position it already sent.
            if k != owner {
                fabric.send_up(k, vec![Word::Count(below[k] as u64)])?;
            }
        }
        let smaller: usize = below.iter().sum();

        match rank.cmp(&(smaller + 1)) {
            Ordering::Equal => return Ok(pivot),
            Ordering::Less => {
                for &k in &active {
                    fabric.send_down(k, vec![Word::Count(0)])?;
                    hi[k] = lo[k] + below[k];
                }
                remaining = smaller;
            }
            Ordering::Greater => {
                for &k in &active {
                    fabric.send_down(k, vec![Word::Count(1)])?;
                    lo[k] += below[k] + usize::from(k == owner);
                }
                rank -= smaller + 1;
                remaining -= smaller + 1;
            }
        }
    }
}
