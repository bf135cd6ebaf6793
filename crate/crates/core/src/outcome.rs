use alloc::vec::Vec;

use crate::fabric::Transcript;
use crate::instance::ArmId;

/// Where an elimination round was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Agents decide on their own partitions.
    Local,
    /// The coordinator decides on the pooled statistics.
    Global,
}

/// Simulator-side snapshot taken after each elimination round. Not charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundTrace {
    pub round: usize,
    pub phase: Phase,
    /// `|I_{r+1}|`
    pub survivors: usize,
    /// `|Q_{r+1}|`
    pub accepted: usize,
    /// `m_{r+1}`
    pub slots_left: usize,
    /// Smallest and largest cumulative pull count over the survivors (per
    /// agent for non-IID runs).
    pub min_pulls: u64,
    pub max_pulls: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Selected arms in increasing id order.
    pub selected: Vec<ArmId>,
    /// Exact match with the true top-m set.
    pub success: bool,
    pub transcript: Transcript,
    pub trace: Vec<RoundTrace>,
    /// Rounds decided locally before the hand-off to the coordinator.
    pub local_rounds: usize,
}

impl Outcome {
    pub fn words_total(&self) -> u64 {
        self.transcript.words_total
    }

    pub fn rounds(&self) -> u32 {
        self.transcript.rounds_used
    }

    pub fn max_pulls_per_agent(&self) -> u64 {
        self.transcript.max_pulls()
    }
}
