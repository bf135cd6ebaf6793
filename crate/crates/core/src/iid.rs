//! Two-phase collaborative halving for IID data.
//!
//! Phase one: a random polynomial hash splits the arms among the agents and
//! each agent eliminates arms from its own share. The coordinator only learns
//! a few order statistics per round, found with [`collab_search`]. Phase one
//! lasts while the shares stay within a factor of two of each other.
//!
//! Phase two: the agents hand their survivors and estimates to the
//! coordinator, which spreads the pulls evenly with [`balanced_pull_dist`]
//! and makes every elimination decision itself.
//!
//! [`collab_search`]: crate::collab_search

use alloc::vec;
use alloc::vec::Vec;

use crate::assign::balanced_pull_dist;
use crate::elim::{elim_decide, empirical_gap, rule, RankKey, Rule};
use crate::error::{Error, Result};
use crate::fabric::{Fabric, Word};
use crate::hash::{is_balanced, sample_hash, PolyHash};
use crate::instance::{compute_gaps, top_m, ArmId, Instance, RewardModel};
use crate::outcome::{Outcome, RoundTrace};
use crate::schedule::{round_schedule, RoundSchedule, Variant};
use crate::search::{search, SearchKey};
use crate::seed::{PullStats, Streams};

pub use crate::outcome::Phase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhasePolicy {
    /// Local rounds while the partition stays balanced, then global rounds.
    #[default]
    Adaptive,
    /// Hand everything to the coordinator before the first round.
    GlobalOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IidParams {
    /// Number of arms to identify (`m`).
    pub slots: usize,
    pub agents: usize,
    /// Pull budget per agent (`T`).
    pub horizon: u64,
    pub seed: u64,
    pub policy: PhasePolicy,
}

impl IidParams {
    pub fn new(slots: usize, agents: usize, horizon: u64, seed: u64) -> Self {
        IidParams { slots, agents, horizon, seed, policy: PhasePolicy::Adaptive }
    }
}

/// What one agent holds during the local phase.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    /// `I_r^k`, sorted.
    pub surviving: Vec<ArmId>,
    /// `Q_r^k`, sorted.
    pub accepted: Vec<ArmId>,
    /// Indexed by zero-based arm; only the agent's own arms are ever touched.
    pub stats: Vec<PullStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordState {
    /// `m_r`
    pub slots_left: usize,
    /// `Q_r`; only populated once the coordinator has collected it.
    pub accepted: Vec<ArmId>,
    pub phase: Phase,
    /// `I_r` during the global phase.
    pub surviving: Vec<ArmId>,
    pub stats: Vec<PullStats>,
}

/// A single IID run, advanced one round at a time.
pub struct IidRun<'a, M: RewardModel> {
    model: &'a M,
    params: IidParams,
    schedule: RoundSchedule,
    hash: PolyHash,
    fabric: Fabric,
    streams: Streams,
    agents: Vec<AgentState>,
    coord: CoordState,
    round: usize,
    trace: Vec<RoundTrace>,
    local_rounds: usize,
}

pub(crate) fn validate(means: &[f64], slots: usize, agents: usize) -> Result<()> {
    if slots == 0 {
        return Err(Error::InvalidParams("m must be at least 1"));
    }
    if means.len() < 2 * slots {
        return Err(Error::InvalidParams("need n >= 2m arms"));
    }
    if agents == 0 {
        return Err(Error::InvalidParams("need at least one agent"));
    }
    compute_gaps(means, slots).map(|_| ())
}

impl<'a, M: RewardModel> IidRun<'a, M> {
    /// Validates the parameters, samples the hash and sends it to every agent.
    pub fn new(model: &'a M, params: IidParams) -> Result<Self> {
        let n = model.arm_count();
        validate(&model.true_means(), params.slots, params.agents)?;
        let k = params.agents;
        let schedule = round_schedule(n, params.horizon, k, Variant::Iid);
        let streams = Streams::new(params.seed, k, n);
        let hash = sample_hash(n, k, &mut streams.coordinator());
        let mut fabric = Fabric::new(k, params.horizon);
        fabric.broadcast(hash.to_words().into_iter().map(Word::Count).collect())?;
        let agents = hash
            .partition(n)
            .into_iter()
            .map(|surviving| AgentState { surviving, accepted: Vec::new(), stats: vec![PullStats::default(); n] })
            .collect();
        let coord = CoordState {
            slots_left: params.slots,
            accepted: Vec::new(),
            phase: Phase::Local,
            surviving: Vec::new(),
            stats: vec![PullStats::default(); n],
        };
        Ok(IidRun {
            model,
            params,
            schedule,
            hash,
            fabric,
            streams,
            agents,
            coord,
            round: 0,
            trace: Vec::new(),
            local_rounds: 0,
        })
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn schedule(&self) -> &RoundSchedule {
        &self.schedule
    }

    pub fn hash(&self) -> &PolyHash {
        &self.hash
    }

    pub fn fabric(&self) -> &Fabric {
        &self.fabric
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn coord(&self) -> &CoordState {
        &self.coord
    }

    pub fn is_done(&self) -> bool {
        self.round >= self.schedule.rounds
    }

    /// Every agent reports `|I_r^k|`; true when the partition is balanced.
    pub fn check_balance(&mut self) -> Result<bool> {
        let sizes: Vec<usize> = self.agents.iter().map(|a| a.surviving.len()).collect();
        for (k, &s) in sizes.iter().enumerate() {
            self.fabric.send_up(k, vec![Word::Count(s as u64)])?;
        }
        Ok(is_balanced(&sizes))
    }

    /// One local elimination round.
    ///
    /// Expects the size report of [`check_balance`](Self::check_balance) for
    /// this round to have been sent already.
    pub fn local_elim(&mut self) -> Result<()> {
        if self.coord.phase != Phase::Local || self.is_done() {
            return Err(Error::InvalidParams("local elimination outside the local phase"));
        }
        let r = self.round;
        let inc = self.schedule.increment(r);
        let keep = self.schedule.survivors[r + 1];
        for (k, agent) in self.agents.iter_mut().enumerate() {
            for &arm in &agent.surviving {
                let sum = self.model.draw_sum(arm.index(), k, inc, self.streams.pull(k, arm.index()));
                agent.stats[arm.index()].add(inc, sum);
            }
            self.fabric.record_pulls(k, agent.surviving.len() as u64 * inc)?;
        }

        let arms: usize = self.agents.iter().map(|a| a.surviving.len()).sum();
        let slots = self.coord.slots_left;
        let mean_sets: Vec<Vec<RankKey>> = self
            .agents
            .iter()
            .map(|a| a.surviving.iter().map(|&i| RankKey::by_mean(a.stats[i.index()].mean(), i)).collect())
            .collect();

        // Each agent keeps arms for which `survives` holds and accepts eliminated
        // arms for which `accepts` holds.
        let (survives, accepts): (Cut, Cut) = match rule(arms, slots, keep)? {
            Rule::KeepAll => (Cut::All, Cut::None),
            Rule::TopOnly if keep == 0 => (Cut::None, Cut::None),
            Rule::TopOnly => {
                let cut = search(&mut self.fabric, &mean_sets, keep, true)?;
                self.fabric.broadcast(vec![cut.word()])?;
                (Cut::MeanAtMost(cut), Cut::None)
            }
            Rule::AcceptAllBut => {
                let cut = search(&mut self.fabric, &mean_sets, arms - keep, true)?;
                self.fabric.broadcast(vec![cut.word()])?;
                (Cut::MeanAbove(cut), Cut::MeanAtMost(cut))
            }
            Rule::Gap => {
                let upper = search(&mut self.fabric, &mean_sets, slots, true)?;
                let lower = search(&mut self.fabric, &mean_sets, slots + 1, true)?;
                self.fabric.broadcast(vec![upper.word(), lower.word()])?;
                if keep == 0 {
                    (Cut::None, Cut::MeanAtMost(upper))
                } else {
                    let gap_sets: Vec<Vec<RankKey>> = self
                        .agents
                        .iter()
                        .map(|a| {
                            a.surviving
                                .iter()
                                .map(|&i| {
                                    let mu = a.stats[i.index()].mean();
                                    RankKey::new(empirical_gap(mu, -upper.value, -lower.value), i)
                                })
                                .collect()
                        })
                        .collect();
                    let cut = search(&mut self.fabric, &gap_sets, keep, true)?;
                    self.fabric.broadcast(vec![cut.word()])?;
                    let bounds = (-upper.value, -lower.value);
                    (Cut::GapAtMost(cut, bounds), Cut::MeanAtMost(upper))
                }
            }
        };

        let mut accepted_now = 0;
        for (k, agent) in self.agents.iter_mut().enumerate() {
            let mut kept = Vec::new();
            let mut taken = Vec::new();
            for &arm in &agent.surviving {
                let mu = agent.stats[arm.index()].mean();
                if survives.holds(arm, mu) {
                    kept.push(arm);
                } else if accepts.holds(arm, mu) {
                    taken.push(arm);
                }
            }
            self.fabric.send_up(k, vec![Word::Count(taken.len() as u64)])?;
            accepted_now += taken.len();
            agent.surviving = kept;
            agent.accepted.extend(taken);
            agent.accepted.sort();
        }
        self.coord.slots_left -= accepted_now;

        let (min_pulls, max_pulls) =
            pull_range(self.agents.iter().flat_map(|a| a.surviving.iter().map(move |i| a.stats[i.index()].count)));
        self.trace.push(RoundTrace {
            round: r,
            phase: Phase::Local,
            survivors: self.agents.iter().map(|a| a.surviving.len()).sum(),
            accepted: self.agents.iter().map(|a| a.accepted.len()).sum(),
            slots_left: self.coord.slots_left,
            min_pulls,
            max_pulls,
        });
        self.local_rounds += 1;
        self.finish_round();
        Ok(())
    }

    /// Agents send their surviving arms, estimates and accepted arms to the coordinator.
    pub fn hand_off(&mut self) -> Result<()> {
        if self.coord.phase != Phase::Local {
            return Err(Error::InvalidParams("hand-off happens once"));
        }
        for (k, agent) in self.agents.iter().enumerate() {
            let mut payload: Vec<Word> = agent.surviving.iter().map(|&i| Word::Arm(i)).collect();
            payload.extend(agent.surviving.iter().map(|i| Word::Real(agent.stats[i.index()].mean())));
            payload.extend(agent.accepted.iter().map(|&i| Word::Arm(i)));
            if !payload.is_empty() {
                self.fabric.send_up(k, payload)?;
            }
            for &arm in &agent.surviving {
                let local = agent.stats[arm.index()];
                self.coord.stats[arm.index()] =
                    PullStats { count: local.count, sum: local.mean() * local.count as f64 };
            }
            self.coord.surviving.extend_from_slice(&agent.surviving);
            self.coord.accepted.extend_from_slice(&agent.accepted);
        }
        self.coord.surviving.sort();
        self.coord.accepted.sort();
        self.coord.phase = Phase::Global;
        Ok(())
    }

    /// One coordinator-driven elimination round.
    pub fn global_elim(&mut self) -> Result<()> {
        if self.coord.phase != Phase::Global || self.is_done() {
            return Err(Error::InvalidParams("global elimination outside the global phase"));
        }
        let r = self.round;
        let inc = self.schedule.increment(r);
        let keep = self.schedule.survivors[r + 1];
        let assignment = balanced_pull_dist(&self.coord.surviving, inc, self.params.agents);
        for k in 0..self.params.agents {
            let tasks: Vec<_> = assignment.tasks_for(k).copied().collect();
            if tasks.is_empty() {
                continue;
            }
            self.fabric.send_down(k, tasks.iter().flat_map(|t| [Word::Arm(t.arm), Word::Count(t.count)]).collect())?;
            let mut sums = Vec::with_capacity(tasks.len());
            for t in &tasks {
                let sum = self.model.draw_sum(t.arm.index(), k, t.count, self.streams.pull(k, t.arm.index()));
                sums.push(Word::Real(sum));
                self.coord.stats[t.arm.index()].add(t.count, sum);
            }
            self.fabric.record_pulls(k, tasks.iter().map(|t| t.count).sum())?;
            self.fabric.send_up(k, sums)?;
        }

        let estimates = self.estimates();
        let decision = elim_decide(&estimates, self.coord.slots_left, keep)?;
        self.coord.slots_left -= decision.accepted.len();
        self.coord.accepted.extend(decision.accepted);
        self.coord.accepted.sort();
        self.coord.surviving = decision.survivors;

        let (min_pulls, max_pulls) = pull_range(self.coord.surviving.iter().map(|i| self.coord.stats[i.index()].count));
        self.trace.push(RoundTrace {
            round: r,
            phase: Phase::Global,
            survivors: self.coord.surviving.len(),
            accepted: self.coord.accepted.len(),
            slots_left: self.coord.slots_left,
            min_pulls,
            max_pulls,
        });
        self.finish_round();
        Ok(())
    }

    /// Settles any arm left after the last round and announces the answer.
    pub fn finish(mut self) -> Result<Outcome> {
        if self.coord.phase != Phase::Global || !self.is_done() {
            return Err(Error::InvalidParams("run finished early"));
        }
        if !self.coord.surviving.is_empty() {
            let decision = elim_decide(&self.estimates(), self.coord.slots_left, 0)?;
            self.coord.slots_left -= decision.accepted.len();
            self.coord.accepted.extend(decision.accepted);
            self.coord.accepted.sort();
            self.coord.surviving.clear();
        }
        let selected = self.coord.accepted;
        self.fabric.output(selected.iter().map(|&i| Word::Arm(i)).collect())?;
        let success = selected == top_m(&self.model.true_means(), self.params.slots);
        Ok(Outcome {
            selected,
            success,
            transcript: self.fabric.into_transcript(),
            trace: self.trace,
            local_rounds: self.local_rounds,
        })
    }

    /// Drives the run to completion.
    pub fn run(mut self) -> Result<Outcome> {
        if self.params.policy == PhasePolicy::Adaptive {
            while !self.is_done() && self.check_balance()? {
                self.local_elim()?;
            }
        }
        self.hand_off()?;
        while !self.is_done() {
            self.global_elim()?;
        }
        self.finish()
    }

    fn estimates(&self) -> Vec<(ArmId, f64)> {
        self.coord.surviving.iter().map(|&i| (i, self.coord.stats[i.index()].mean())).collect()
    }

    fn finish_round(&mut self) {
        self.round += 1;
        self.fabric.advance_round();
    }
}

/// Threshold an agent applies locally after the coordinator broadcasts a key.
#[derive(Debug, Clone, Copy)]
enum Cut {
    All,
    None,
    MeanAtMost(RankKey),
    MeanAbove(RankKey),
    /// Gap key at most the cut, with gaps measured against (upper, lower).
    GapAtMost(RankKey, (f64, f64)),
}

impl Cut {
    fn holds(&self, arm: ArmId, mean: f64) -> bool {
        match *self {
            Cut::All => true,
            Cut::None => false,
            Cut::MeanAtMost(cut) => RankKey::by_mean(mean, arm) <= cut,
            Cut::MeanAbove(cut) => RankKey::by_mean(mean, arm) > cut,
            Cut::GapAtMost(cut, (upper, lower)) => RankKey::new(empirical_gap(mean, upper, lower), arm) <= cut,
        }
    }
}

fn pull_range(counts: impl Iterator<Item = u64>) -> (u64, u64) {
    counts.fold((u64::MAX, 0), |(lo, hi), c| (lo.min(c), hi.max(c)))
}

/// Runs the IID algorithm on a Bernoulli (or other bounded) instance.
pub fn run_iid(instance: &Instance, m: usize, agents: usize, horizon: u64, seed: u64) -> Result<Outcome> {
    run_iid_with(instance, IidParams::new(m, agents, horizon, seed))
}

/// Runs the IID algorithm on any reward model.
pub fn run_iid_with<M: RewardModel>(model: &M, params: IidParams) -> Result<Outcome> {
    IidRun::new(model, params)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        let inst = Instance::bernoulli(alloc::vec![0.9, 0.5, 0.4]).unwrap();
        assert!(matches!(run_iid(&inst, 2, 2, 100, 0), Err(Error::InvalidParams(_))));
        assert!(matches!(run_iid(&inst, 0, 2, 100, 0), Err(Error::InvalidParams(_))));
        assert!(matches!(run_iid(&inst, 1, 0, 100, 0), Err(Error::InvalidParams(_))));
        let tied = Instance::bernoulli(alloc::vec![0.9, 0.9, 0.4, 0.1]).unwrap();
        assert_eq!(run_iid(&tied, 1, 2, 100, 0), Err(Error::Degenerate { m: 1 }));
    }

    #[test]
    fn hash_words_are_charged_per_agent() {
        let inst = Instance::bernoulli((0..8).map(|i| 0.1 * i as f64).collect()).unwrap();
        let run = IidRun::new(&inst, IidParams::new(1, 3, 100, 5)).unwrap();
        assert_eq!(run.fabric().words_total(), 3 * 22);
    }

    #[test]
    fn zero_horizon_still_terminates() {
        let inst = Instance::bernoulli(alloc::vec![0.9, 0.6, 0.3, 0.1, 0.05]).unwrap();
        let out = run_iid(&inst, 2, 2, 0, 1).unwrap();
        assert_eq!(out.selected.len(), 2);
        assert_eq!(out.max_pulls_per_agent(), 0);
    }

    /// Rewards without noise: every pull of arm `i` returns `observed[i]`.
    /// Tests use dyadic values so that `observed * count / count` is exact.
    struct Exact {
        truth: Vec<f64>,
        observed: Vec<f64>,
    }

    impl RewardModel for Exact {
        fn arm_count(&self) -> usize {
            self.truth.len()
        }

        fn true_means(&self) -> Vec<f64> {
            self.truth.clone()
        }

        fn draw_sum(&self, arm: usize, _agent: usize, count: u64, _rng: &mut dyn rand::RngCore) -> f64 {
            self.observed[arm] * count as f64
        }
    }

    fn exact(observed: Vec<f64>) -> Exact {
        let n = observed.len();
        Exact { truth: (0..n).map(|i| 1.0 - i as f64 / n as f64).collect(), observed }
    }

    #[test]
    fn local_round_matches_centralised_decision_on_example() {
        let model = exact(alloc::vec![0.875, 0.5, 0.375, 0.125, 0.4375, 0.25, 0.1875, 0.0625]);
        let mut run = (0..)
            .map(|seed| IidRun::new(&model, IidParams::new(2, 2, 4000, seed)).unwrap())
            .find(|r| is_balanced(&r.agents().iter().map(|a| a.surviving.len()).collect::<Vec<_>>()))
            .unwrap();
        assert!(run.check_balance().unwrap());
        run.local_elim().unwrap();
        let est: Vec<(ArmId, f64)> =
            model.observed.iter().enumerate().map(|(i, &m)| (ArmId::from_index(i), m)).collect();
        let want = elim_decide(&est, 2, 4).unwrap();
        let mut survivors: Vec<ArmId> = run.agents().iter().flat_map(|a| a.surviving.clone()).collect();
        let mut accepted: Vec<ArmId> = run.agents().iter().flat_map(|a| a.accepted.clone()).collect();
        survivors.sort();
        accepted.sort();
        assert_eq!(survivors, want.survivors);
        assert_eq!(accepted, want.accepted);
        assert_eq!(run.coord().slots_left, 2 - want.accepted.len());
    }

    #[test]
    fn phase_policy_does_not_change_exact_answers() {
        let model = exact((0..16).map(|i| ((i * 7) % 16) as f64 / 16.0).collect());
        let a = run_iid_with(&model, IidParams::new(3, 2, 10_000, 4)).unwrap();
        let b = run_iid_with(&model, IidParams { policy: PhasePolicy::GlobalOnly, ..IidParams::new(3, 2, 10_000, 4) })
            .unwrap();
        assert_eq!(a.selected, b.selected);
        assert_eq!(b.local_rounds, 0);
    }

    proptest::proptest! {
        #[test]
        fn local_rounds_agree_with_centralised_rule(
            observed in proptest::collection::vec(0u8..9, 8..40),
            m_pick in 0usize..100,
            agents in 1usize..4,
            seed in 0u64..1000,
        ) {
            let observed: Vec<f64> = observed.into_iter().map(|v| f64::from(v) / 8.0).collect();
            let n = observed.len();
            let m = m_pick % (n / 2) + 1;
            let model = exact(observed);
            let mut run = IidRun::new(&model, IidParams::new(m, agents, 100_000, seed)).unwrap();
            let mut est: Vec<(ArmId, f64)> =
                model.observed.iter().enumerate().map(|(i, &v)| (ArmId::from_index(i), v)).collect();
            let mut slots = m;
            let mut accepted_all = Vec::new();
            while !run.is_done() && run.check_balance().unwrap() {
                let keep = run.schedule().survivors[run.round() + 1];
                run.local_elim().unwrap();
                let want = elim_decide(&est, slots, keep).unwrap();
                let mut survivors: Vec<ArmId> = run.agents().iter().flat_map(|a| a.surviving.clone()).collect();
                survivors.sort();
                proptest::prop_assert_eq!(&survivors, &want.survivors);
                slots -= want.accepted.len();
                accepted_all.extend(want.accepted);
                accepted_all.sort();
                let mut accepted: Vec<ArmId> = run.agents().iter().flat_map(|a| a.accepted.clone()).collect();
                accepted.sort();
                proptest::prop_assert_eq!(&accepted, &accepted_all);
                proptest::prop_assert_eq!(run.coord().slots_left, slots);
                est.retain(|(a, _)| survivors.contains(a));
            }
        }

        #[test]
        fn round_invariants_hold(n in 4usize..40, m_pick in 0usize..100, agents in 1usize..6, t in 0u64..20_000, seed: u64) {
            let m = m_pick % (n / 2) + 1;
            let means: Vec<f64> = (0..n).map(|i| 0.95 - 0.9 * i as f64 / n as f64).collect();
            let inst = Instance::bernoulli(means).unwrap();
            let out = run_iid(&inst, m, agents, t, seed).unwrap();
            let sched = round_schedule(n, t, agents, Variant::Iid);
            proptest::prop_assert_eq!(out.selected.len(), m);
            proptest::prop_assert!(out.max_pulls_per_agent() <= t);
            proptest::prop_assert!(out.rounds() as usize <= sched.rounds + 1);
            for tr in &out.trace {
                proptest::prop_assert_eq!(tr.survivors, sched.survivors[tr.round + 1]);
                proptest::prop_assert_eq!(tr.accepted + tr.slots_left, m);
            }
        }
    }
}
