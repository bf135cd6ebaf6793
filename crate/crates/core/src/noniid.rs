//! Coordinator-driven halving when agents see different local means.
//!
//! Every round each agent pulls every surviving arm the same number of times
//! and reports its local empirical means. The coordinator averages them, so
//! the estimate targets the global mean, and runs the usual elimination step.

use alloc::vec;
use alloc::vec::Vec;

use crate::elim::{elim_decide, RankKey};
use crate::error::{Error, Result};
use crate::fabric::{Fabric, Word};
use crate::iid::{validate, IidParams};
use crate::instance::{top_m, ArmId, NonIidInstance, RewardModel};
use crate::outcome::{Outcome, Phase, RoundTrace};
use crate::schedule::{round_schedule, Variant};
use crate::seed::{PullStats, Streams};

fn check_agents(instance: &NonIidInstance, agents: usize) -> Result<()> {
    if instance.agents() != agents {
        return Err(Error::InvalidParams("instance rows must match the agent count"));
    }
    Ok(())
}

/// Runs the non-IID algorithm; `agents` must equal the instance's row count.
pub fn run_noniid(instance: &NonIidInstance, m: usize, agents: usize, horizon: u64, seed: u64) -> Result<Outcome> {
    check_agents(instance, agents)?;
    run_noniid_with(instance, IidParams::new(m, agents, horizon, seed))
}

/// Runs the non-IID algorithm on any reward model. `params.policy` is ignored.
pub fn run_noniid_with<M: RewardModel>(model: &M, params: IidParams) -> Result<Outcome> {
    let n = model.arm_count();
    let k = params.agents;
    validate(&model.true_means(), params.slots, k)?;
    let schedule = round_schedule(n, params.horizon, k, Variant::NonIid);
    let local_budgets = schedule.local_budgets(k);
    let mut streams = Streams::new(params.seed, k, n);
    let mut fabric = Fabric::new(k, params.horizon);
    // stats[agent][arm]
    let mut stats = vec![vec![PullStats::default(); n]; k];

    let mut surviving: Vec<ArmId> = (0..n).map(ArmId::from_index).collect();
    let mut accepted: Vec<ArmId> = Vec::new();
    let mut slots = params.slots;
    let mut trace = Vec::with_capacity(schedule.rounds);

    for r in 0..schedule.rounds {
        let inc = local_budgets[r + 1] - local_budgets[r];
        let mut sums = vec![0.0; n];
        for (agent, row) in stats.iter_mut().enumerate() {
            for &arm in &surviving {
                let s = model.draw_sum(arm.index(), agent, inc, streams.pull(agent, arm.index()));
                row[arm.index()].add(inc, s);
            }
            fabric.record_pulls(agent, surviving.len() as u64 * inc)?;
            let means: Vec<f64> = surviving.iter().map(|i| row[i.index()].mean()).collect();
            for (&arm, &mu) in surviving.iter().zip(&means) {
                sums[arm.index()] += mu;
            }
            fabric.send_up(agent, means.into_iter().map(Word::Real).collect())?;
        }
        let estimates: Vec<(ArmId, f64)> = surviving.iter().map(|&i| (i, sums[i.index()] / k as f64)).collect();
        let decision = elim_decide(&estimates, slots, schedule.survivors[r + 1])?;
        slots -= decision.accepted.len();
        accepted.extend(decision.accepted);
        accepted.sort();
        surviving = decision.survivors;
        if !surviving.is_empty() {
            fabric.broadcast(surviving.iter().map(|&i| Word::Arm(i)).collect())?;
        }

        let pulls = local_budgets[r + 1];
        let (min_pulls, max_pulls) = if surviving.is_empty() { (u64::MAX, 0) } else { (pulls, pulls) };
        trace.push(RoundTrace {
            round: r,
            phase: Phase::Global,
            survivors: surviving.len(),
            accepted: accepted.len(),
            slots_left: slots,
            min_pulls,
            max_pulls,
        });
        fabric.advance_round();
    }

    if !surviving.is_empty() {
        let estimates: Vec<(ArmId, f64)> = surviving
            .iter()
            .map(|&i| (i, stats.iter().map(|row| row[i.index()].mean()).sum::<f64>() / k as f64))
            .collect();
        let decision = elim_decide(&estimates, slots, 0)?;
        accepted.extend(decision.accepted);
        accepted.sort();
    }
    finish(model, params.slots, fabric, accepted, trace)
}

fn finish<M: RewardModel>(
    model: &M,
    m: usize,
    mut fabric: Fabric,
    selected: Vec<ArmId>,
    trace: Vec<RoundTrace>,
) -> Result<Outcome> {
    fabric.output(selected.iter().map(|&i| Word::Arm(i)).collect())?;
    let success = selected == top_m(&model.true_means(), m);
    Ok(Outcome { selected, success, transcript: fabric.into_transcript(), trace, local_rounds: 0 })
}

/// One-round baseline: every agent pulls every arm `floor(T / n)` times.
pub fn uniform_baseline(
    instance: &NonIidInstance,
    m: usize,
    agents: usize,
    horizon: u64,
    seed: u64,
) -> Result<Outcome> {
    check_agents(instance, agents)?;
    uniform_baseline_with(instance, IidParams::new(m, agents, horizon, seed))
}

pub fn uniform_baseline_with<M: RewardModel>(model: &M, params: IidParams) -> Result<Outcome> {
    let n = model.arm_count();
    let k = params.agents;
    validate(&model.true_means(), params.slots, k)?;
    if params.horizon < n as u64 {
        return Err(Error::HorizonTooSmall { horizon: params.horizon, arms: n });
    }
    let per_arm = params.horizon / n as u64;
    let mut streams = Streams::new(params.seed, k, n);
    let mut fabric = Fabric::new(k, params.horizon);
    let mut sums = vec![0.0; n];
    for agent in 0..k {
        let means: Vec<f64> =
            (0..n).map(|arm| model.draw_sum(arm, agent, per_arm, streams.pull(agent, arm)) / per_arm as f64).collect();
        fabric.record_pulls(agent, per_arm * n as u64)?;
        for (s, mu) in sums.iter_mut().zip(&means) {
            *s += mu;
        }
        fabric.send_up(agent, means.into_iter().map(Word::Real).collect())?;
    }
    let mut keys: Vec<RankKey> =
        sums.iter().enumerate().map(|(i, s)| RankKey::by_mean(s / k as f64, ArmId::from_index(i))).collect();
    keys.sort();
    let mut selected: Vec<ArmId> = keys[..params.slots].iter().map(|key| key.arm).collect();
    selected.sort();
    let trace = vec![RoundTrace {
        round: 0,
        phase: Phase::Global,
        survivors: 0,
        accepted: params.slots,
        slots_left: 0,
        min_pulls: u64::MAX,
        max_pulls: 0,
    }];
    fabric.advance_round();
    finish(model, params.slots, fabric, selected, trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hetero(global: &[f64], agents: usize) -> NonIidInstance {
        let rows = (0..agents)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                global.iter().map(|&mu| mu + sign * 0.5 * mu.min(1.0 - mu)).collect()
            })
            .collect();
        NonIidInstance::bernoulli(rows).unwrap()
    }

    #[test]
    fn picks_best_global_arm() {
        let inst = hetero(&[0.9, 0.6, 0.3, 0.1], 2);
        for seed in 0..20 {
            let out = run_noniid(&inst, 1, 2, 20_000, seed).unwrap();
            assert_eq!(out.selected, vec![ArmId::new(1)]);
        }
    }

    #[test]
    fn local_pull_counts_follow_rounded_schedule() {
        let inst = hetero(&[0.9, 0.7, 0.5, 0.4, 0.3, 0.2, 0.15, 0.1], 4);
        let out = run_noniid(&inst, 2, 4, 800, 3).unwrap();
        let budgets = round_schedule(8, 800, 4, Variant::NonIid).local_budgets(4);
        for t in &out.trace {
            if t.survivors > 0 {
                assert_eq!((t.min_pulls, t.max_pulls), (budgets[t.round + 1], budgets[t.round + 1]));
            }
        }
        assert_eq!(budgets, vec![0, 34, 67, 134]);
    }

    #[test]
    fn words_do_not_depend_on_rewards() {
        let inst = hetero(&[0.9, 0.7, 0.5, 0.4, 0.3, 0.2, 0.15, 0.1], 3);
        let words: Vec<u64> = (0..10).map(|s| run_noniid(&inst, 3, 3, 5000, s).unwrap().words_total()).collect();
        assert!(words.windows(2).all(|w| w[0] == w[1]));
        // Means up, then the survivor list down to every agent, then the answer.
        let sched = round_schedule(8, 5000, 3, Variant::NonIid);
        let expected: usize = (0..sched.rounds).map(|r| 3 * (sched.survivors[r] + sched.survivors[r + 1])).sum();
        assert_eq!(words[0], expected as u64 + 3);
    }

    #[test]
    fn uniform_costs_kn_mean_words() {
        for (k, n) in [(1, 4), (3, 6), (5, 10)] {
            let global: Vec<f64> = (0..n).map(|i| 0.9 - 0.8 * i as f64 / n as f64).collect();
            let inst = hetero(&global, k);
            let out = uniform_baseline(&inst, 2, k, 100, 1).unwrap();
            assert_eq!(out.transcript.words_up, (k * n) as u64);
            assert_eq!(out.words_total(), (k * n + 2) as u64);
            assert_eq!(out.rounds(), 1);
        }
    }

    #[test]
    fn uniform_needs_one_pull_per_arm() {
        let inst = hetero(&[0.9, 0.6, 0.3, 0.1], 2);
        assert_eq!(uniform_baseline(&inst, 1, 2, 3, 0), Err(Error::HorizonTooSmall { horizon: 3, arms: 4 }));
    }

    #[test]
    fn agent_count_must_match() {
        let inst = hetero(&[0.9, 0.6, 0.3, 0.1], 2);
        assert!(matches!(run_noniid(&inst, 1, 3, 100, 0), Err(Error::InvalidParams(_))));
    }
}
