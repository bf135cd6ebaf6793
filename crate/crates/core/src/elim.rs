use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::instance::ArmId;

/// A value tagged with its arm, ordered by value and then by arm id.
///
/// The tag breaks ties, so keys of distinct arms are always distinct and
/// order statistics over them are well defined.
#[derive(Debug, Clone, Copy)]
pub struct RankKey {
    pub value: f64,
    pub arm: ArmId,
}

impl RankKey {
    pub fn new(value: f64, arm: ArmId) -> Self {
        RankKey { value, arm }
    }

    /// Key whose ascending order lists arms by decreasing `mean`.
    pub fn by_mean(mean: f64, arm: ArmId) -> Self {
        RankKey { value: -mean, arm }
    }
}

impl PartialEq for RankKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for RankKey {}

impl PartialOrd for RankKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RankKey {
    fn cmp(&self, other: &Self) -> Ordering {
        // partial_cmp treats -0.0 and 0.0 as equal, which total_cmp does not.
        let by_value = self.value.partial_cmp(&other.value).unwrap_or_else(|| self.value.total_cmp(&other.value));
        by_value.then(self.arm.cmp(&other.arm))
    }
}

/// Empirical gap of an arm with estimate `mean` given the estimated boundary
/// means `upper` (m-th largest) and `lower` ((m+1)-th largest).
pub(crate) fn empirical_gap(mean: f64, upper: f64, lower: f64) -> f64 {
    (mean - lower).max(upper - mean)
}

/// Arms kept for the next round and arms accepted into the answer.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Decision {
    pub survivors: Vec<ArmId>,
    pub accepted: Vec<ArmId>,
}

/// Which thresholds a round needs, given the remaining slots and survivors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Rule {
    /// Nothing is eliminated.
    KeepAll,
    /// No slots left: keep the `keep` highest means, accept nothing.
    TopOnly,
    /// Every arm belongs to the answer: accept all but the `keep` lowest means.
    AcceptAllBut,
    /// General case: rank by empirical gap.
    Gap,
}

pub(crate) fn rule(arms: usize, slots: usize, keep: usize) -> Result<Rule> {
    if slots > arms {
        return Err(Error::InconsistentSlots { slots, arms });
    }
    if keep > arms {
        return Err(Error::InvalidParams("cannot keep more arms than remain"));
    }
    Ok(if keep == arms {
        Rule::KeepAll
    } else if slots == 0 {
        Rule::TopOnly
    } else if slots == arms {
        Rule::AcceptAllBut
    } else {
        Rule::Gap
    })
}

/// One elimination step on empirical means.
///
/// Arms are ranked by (mean descending, id ascending). Each arm's empirical
/// gap to the `slots`-th / `(slots + 1)`-th boundary is computed, and the
/// `keep` arms with the smallest (gap, id) survive. Eliminated arms ranked
/// within the top `slots` are accepted. Exactly `keep` arms survive, even
/// under ties.
pub fn elim_decide(estimates: &[(ArmId, f64)], slots: usize, keep: usize) -> Result<Decision> {
    let n = estimates.len();
    let rule = rule(n, slots, keep)?;
    let mut by_mean: Vec<RankKey> = estimates.iter().map(|&(a, mu)| RankKey::by_mean(mu, a)).collect();
    by_mean.sort();

    let mut decision = Decision::default();
    match rule {
        Rule::KeepAll => decision.survivors = by_mean.iter().map(|k| k.arm).collect(),
        Rule::TopOnly => decision.survivors = by_mean[..keep].iter().map(|k| k.arm).collect(),
        Rule::AcceptAllBut => {
            decision.accepted = by_mean[..n - keep].iter().map(|k| k.arm).collect();
            decision.survivors = by_mean[n - keep..].iter().map(|k| k.arm).collect();
        }
        Rule::Gap => {
            let upper = -by_mean[slots - 1].value;
            let lower = -by_mean[slots].value;
            let boundary = by_mean[slots - 1];
            let mut by_gap: Vec<(RankKey, RankKey)> = estimates
                .iter()
                .map(|&(a, mu)| (RankKey::new(empirical_gap(mu, upper, lower), a), RankKey::by_mean(mu, a)))
                .collect();
            by_gap.sort_by_key(|x| x.0);
            decision.survivors = by_gap[..keep].iter().map(|(g, _)| g.arm).collect();
            decision.accepted = by_gap[keep..].iter().filter(|(_, m)| *m <= boundary).map(|(g, _)| g.arm).collect();
        }
    }
    decision.survivors.sort();
    decision.accepted.sort();
    Ok(decision)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(means: &[f64]) -> Vec<(ArmId, f64)> {
        means.iter().enumerate().map(|(i, &m)| (ArmId::from_index(i), m)).collect()
    }

    fn ids(v: &[u32]) -> Vec<ArmId> {
        v.iter().map(|&i| ArmId::new(i)).collect()
    }

    #[test]
    fn keeps_boundary_pair() {
        let d = elim_decide(&est(&[0.9, 0.8, 0.3, 0.2]), 1, 2).unwrap();
        assert_eq!(d.survivors, ids(&[1, 2]));
        assert!(d.accepted.is_empty());
    }

    #[test]
    fn accepts_clear_winner() {
        let d = elim_decide(&est(&[0.9, 0.5, 0.4, 0.1]), 2, 2).unwrap();
        assert_eq!(d.survivors, ids(&[2, 3]));
        assert_eq!(d.accepted, ids(&[1]));
    }

    #[test]
    fn tie_goes_to_lower_index() {
        let d = elim_decide(&est(&[0.6, 0.4]), 1, 1).unwrap();
        assert_eq!(d.survivors, ids(&[1]));
        assert!(d.accepted.is_empty());
    }

    #[test]
    fn no_slots_keeps_highest() {
        let d = elim_decide(&est(&[0.1, 0.7, 0.3, 0.5]), 0, 2).unwrap();
        assert_eq!(d.survivors, ids(&[2, 4]));
        assert!(d.accepted.is_empty());
    }

    #[test]
    fn all_slots_accepts_highest() {
        let d = elim_decide(&est(&[0.1, 0.7, 0.3, 0.5]), 4, 1).unwrap();
        assert_eq!(d.survivors, ids(&[1]));
        assert_eq!(d.accepted, ids(&[2, 3, 4]));
    }

    #[test]
    fn keep_zero_accepts_exactly_the_slots() {
        let d = elim_decide(&est(&[0.2, 0.9, 0.4]), 2, 0).unwrap();
        assert!(d.survivors.is_empty());
        assert_eq!(d.accepted, ids(&[2, 3]));
    }

    #[test]
    fn all_equal_means() {
        let d = elim_decide(&est(&[0.5; 6]), 2, 3).unwrap();
        assert_eq!(d.survivors, ids(&[1, 2, 3]));
        // Arms 1 and 2 hold the slots and both survive, so nothing is accepted.
        assert!(d.accepted.is_empty());
    }

    #[test]
    fn inconsistent_slots() {
        assert_eq!(elim_decide(&est(&[0.1, 0.2]), 3, 1), Err(Error::InconsistentSlots { slots: 3, arms: 2 }));
        assert!(elim_decide(&est(&[0.1, 0.2]), 1, 3).is_err());
    }

    #[test]
    fn rank_key_ignores_zero_sign() {
        let a = RankKey::new(0.0, ArmId::new(1));
        let b = RankKey::new(-0.0, ArmId::new(1));
        assert_eq!(a, b);
    }

    proptest::proptest! {
        #[test]
        fn shift_invariant(
            raw in proptest::collection::vec(0u32..256, 2..40),
            shift in 0u32..256,
            slots in 0usize..40,
            keep in 0usize..40,
        ) {
            let n = raw.len();
            let slots = slots.min(n);
            let keep = keep.min(n - 1);
            let means: Vec<f64> = raw.iter().map(|&v| v as f64 / 1024.0).collect();
            let shifted: Vec<f64> = means.iter().map(|v| v + shift as f64 / 1024.0).collect();
            proptest::prop_assert_eq!(
                elim_decide(&est(&means), slots, keep).unwrap(),
                elim_decide(&est(&shifted), slots, keep).unwrap()
            );
        }

        #[test]
        fn sizes_add_up(
            raw in proptest::collection::vec(0u32..64, 1..40),
            slots in 0usize..40,
            keep in 0usize..40,
        ) {
            let n = raw.len();
            let slots = slots.min(n);
            let keep = keep.min(n);
            let means: Vec<f64> = raw.iter().map(|&v| v as f64 / 64.0).collect();
            let d = elim_decide(&est(&means), slots, keep).unwrap();
            proptest::prop_assert_eq!(d.survivors.len(), keep);
            proptest::prop_assert!(d.accepted.len() <= slots);
            // Remaining slots never exceed the arms left to fill them.
            proptest::prop_assert!(slots - d.accepted.len() <= keep);
            proptest::prop_assert!(d.accepted.iter().all(|a| !d.survivors.contains(a)));
        }
    }
}
