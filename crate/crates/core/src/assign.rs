use alloc::vec::Vec;

use crate::instance::ArmId;

/// Agent `agent` (zero-based) pulls `arm` exactly `count` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PullTask {
    pub arm: ArmId,
    pub agent: usize,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    pub tasks: Vec<PullTask>,
}

impl Assignment {
    pub fn tasks_for(&self, agent: usize) -> impl Iterator<Item = &PullTask> {
        self.tasks.iter().filter(move |t| t.agent == agent)
    }

    pub fn load(&self, agent: usize) -> u64 {
        self.tasks_for(agent).map(|t| t.count).sum()
    }

    pub fn pulls_of(&self, arm: ArmId) -> u64 {
        self.tasks.iter().filter(|t| t.arm == arm).map(|t| t.count).sum()
    }
}

/// Splits `pulls_per_arm` pulls of every arm in `arms` over `agents` agents.
///
/// Each agent gets a budget of `ceil(|arms| * pulls_per_arm / agents)` and
/// consumes arms left to right, so an agent's tasks form a contiguous run of
/// arms and at most two of them are partial.
pub fn balanced_pull_dist(arms: &[ArmId], pulls_per_arm: u64, agents: usize) -> Assignment {
    assert!(agents >= 1);
    let budget = (arms.len() as u64 * pulls_per_arm).div_ceil(agents as u64);
    let mut left_on_arm = pulls_per_arm;
    let mut i = 0;
    let mut tasks = Vec::new();
    for agent in 0..agents {
        let mut left = budget;
        while i < arms.len() && left > 0 {
            let t = left_on_arm.min(left);
            tasks.push(PullTask { arm: arms[i], agent, count: t });
            left_on_arm -= t;
            left -= t;
            if left_on_arm == 0 {
                i += 1;
                left_on_arm = pulls_per_arm;
            }
        }
    }
    Assignment { tasks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ids(v: &[u32]) -> Vec<ArmId> {
        v.iter().map(|&i| ArmId::new(i)).collect()
    }

    fn task(arm: u32, agent: usize, count: u64) -> PullTask {
        PullTask { arm: ArmId::new(arm), agent, count }
    }

    #[test]
    fn three_arms_two_agents() {
        let a = balanced_pull_dist(&ids(&[1, 2, 3]), 2, 2);
        assert_eq!(a.tasks, vec![task(1, 0, 2), task(2, 0, 1), task(2, 1, 1), task(3, 1, 2)]);
    }

    #[test]
    fn one_arm_three_agents() {
        let a = balanced_pull_dist(&ids(&[1]), 3, 3);
        assert_eq!(a.tasks, vec![task(1, 0, 1), task(1, 1, 1), task(1, 2, 1)]);
    }

    #[test]
    fn zero_pulls() {
        assert!(balanced_pull_dist(&ids(&[1, 2, 3]), 0, 4).tasks.is_empty());
        assert!(balanced_pull_dist(&[], 5, 4).tasks.is_empty());
    }

    proptest::proptest! {
        #[test]
        fn per_arm_and_per_agent_limits(arms in 0usize..100, b in 0u64..50, k in 1usize..10) {
            let arm_ids: Vec<ArmId> = (0..arms).map(ArmId::from_index).collect();
            let a = balanced_pull_dist(&arm_ids, b, k);
            let budget = (arms as u64 * b).div_ceil(k as u64);
            for &arm in &arm_ids {
                proptest::prop_assert_eq!(a.pulls_of(arm), b);
            }
            for agent in 0..k {
                proptest::prop_assert!(a.load(agent) <= budget);
                proptest::prop_assert!(a.tasks_for(agent).count() <= arms / k + 2);
            }
            proptest::prop_assert!(a.tasks.iter().all(|t| t.count > 0));
        }
    }
}
