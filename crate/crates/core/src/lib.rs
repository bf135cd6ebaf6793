//! Collaborative top-m arm identification in the coordinator model.
//!
//! `K` agents pull arms in parallel and talk only to a central coordinator.
//! Every message goes through a metered [`Fabric`], so each run reports the
//! exact number of words exchanged alongside the arms it selected.
//!
//! ## Algorithms
//!
//! - [`run_iid`]: two-phase successive halving for IID data. Agents first
//!   eliminate arms locally over a hash partition, then hand the survivors to
//!   the coordinator once the partition becomes unbalanced.
//! - [`run_noniid`]: coordinator-driven halving on agent-specific rewards,
//!   targeting the average of the local means.
//! - [`uniform_baseline`]: one round of uniform sampling.
//!
//! ## Primitives
//!
//! - [`collab_search`]: distributed order statistic over agent-held sets.
//! - [`balanced_pull_dist`]: greedy contiguous split of a pull budget.
//! - [`PolyHash`]: k-wise independent polynomial hash for partitioning arms.
//! - [`disj_instance`]: set-disjointness instance family for top-1 testing.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

mod assign;
mod disj;
mod elim;
mod error;
mod fabric;
mod hash;
mod iid;
mod instance;
mod noniid;
mod outcome;
mod schedule;
mod search;
mod seed;

pub use assign::{balanced_pull_dist, Assignment, PullTask};
pub use disj::{disj_instance, DisjInput};
pub use elim::{elim_decide, Decision, RankKey};
pub use error::{Error, Result};
pub use fabric::{Direction, Fabric, Message, Party, Receipt, Receiver, Transcript, Word};
pub use hash::{hash_degree, is_balanced, sample_hash, PolyHash, MERSENNE_61};
pub use iid::{run_iid, run_iid_with, AgentState, CoordState, IidParams, IidRun, Phase, PhasePolicy};
pub use instance::{
    compute_gaps, global_means, top_m, ArmId, GapProfile, Instance, NonIidInstance, RewardKind, RewardModel,
};
pub use noniid::{run_noniid, run_noniid_with, uniform_baseline, uniform_baseline_with};
pub use outcome::{Outcome, RoundTrace};
pub use schedule::{round_schedule, success_bound, RoundSchedule, Variant};
pub use search::{collab_search, collab_search_values};
pub use seed::{trial_seed, PullStats, Streams};
