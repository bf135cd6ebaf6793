//! Oracle-equivalence suites: each distributed primitive is checked against a
//! brute-force computation on random inputs.

use collabtop_core::{
    balanced_pull_dist, collab_search_values, disj_instance, elim_decide, global_means, is_balanced, round_schedule,
    run_noniid, sample_hash, top_m, trial_seed, ArmId, DisjInput, Fabric, IidParams, IidRun, Outcome, RewardModel,
    Streams, Variant,
};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::Algo;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

/// Random multiset split over `agents` sets, with heavy duplication in a fifth of the cases.
fn random_sets(rng: &mut ChaCha8Rng, agents: usize) -> Vec<Vec<f64>> {
    let total = rng.random_range(1..=200usize);
    let dup = rng.random_bool(0.2);
    let distinct = (total / 4).max(1) as u32;
    let mut sets = vec![Vec::new(); agents];
    for _ in 0..total {
        let v = if dup { f64::from(rng.random_range(0..distinct)) } else { rng.random::<f64>() };
        sets[rng.random_range(0..agents)].push(v);
    }
    sets
}

/// `collab_search_values` against the sorted union, plus a word-count ceiling of
/// `8 K log2(total) + 4 K` per call.
pub fn search_suite(cases: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wrong = 0;
    let mut over = 0;
    let mut worst_ratio: f64 = 0.0;
    for case in 0..cases {
        let agents = [2, 5, 9][case % 3];
        let sets = random_sets(&mut rng, agents);
        let mut union: Vec<f64> = sets.iter().flatten().copied().collect();
        union.sort_by(f64::total_cmp);
        let m = rng.random_range(1..=union.len());
        let mut fabric = Fabric::new(agents, 0);
        let got = collab_search_values(&mut fabric, &sets, m);
        if got != Ok(union[m - 1]) {
            wrong += 1;
        }
        let bound = 8.0 * agents as f64 * (union.len() as f64).log2() + 4.0 * agents as f64;
        let words = fabric.words_total() as f64;
        worst_ratio = worst_ratio.max(words / bound);
        if words > bound {
            over += 1;
        }
    }
    Check {
        name: "collab-search",
        passed: wrong == 0 && over == 0,
        detail: format!("{cases} cases, {wrong} wrong, {over} over the word bound, worst words/bound {worst_ratio:.3}"),
    }
}

/// `balanced_pull_dist`: exact per-arm totals, per-agent load and tuple-count limits.
pub fn pull_dist_suite(cases: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    let mut first = None;
    for _ in 0..cases {
        let arms = rng.random_range(0..=100usize);
        let b = rng.random_range(0..=50u64);
        let k = rng.random_range(1..=10usize);
        let ids: Vec<ArmId> = (0..arms).map(ArmId::from_index).collect();
        let a = balanced_pull_dist(&ids, b, k);
        let budget = (arms as u64 * b).div_ceil(k as u64);
        let ok = ids.iter().all(|&i| a.pulls_of(i) == b)
            && (0..k).all(|j| a.load(j) <= budget && a.tasks_for(j).count() <= arms / k + 2);
        if !ok {
            bad += 1;
            first.get_or_insert((arms, b, k));
        }
    }
    Check {
        name: "balanced-pull-dist",
        passed: bad == 0,
        detail: match first {
            None => format!("{cases} cases, all within limits"),
            Some(f) => format!("{bad} of {cases} cases broke a limit, first (|I|, B, K) = {f:?}"),
        },
    }
}

/// Fraction of hash seeds whose initial partition is balanced.
pub fn hash_balance_rate(n: usize, agents: usize, seeds: u64, master: u64) -> f64 {
    let balanced = (0..seeds)
        .into_par_iter()
        .filter(|&s| {
            let mut rng = Streams::new(trial_seed(master, s), agents, 1).coordinator();
            let hash = sample_hash(n, agents, &mut rng);
            let sizes: Vec<usize> = hash.partition(n).iter().map(Vec::len).collect();
            is_balanced(&sizes)
        })
        .count();
    balanced as f64 / seeds as f64
}

pub fn hash_suite(n: usize, agents: usize, seeds: u64, master: u64, min_rate: f64) -> Check {
    let rate = hash_balance_rate(n, agents, seeds, master);
    Check {
        name: "hash-balance",
        passed: rate >= min_rate,
        detail: format!("n={n} K={agents}: {:.4} of {seeds} seeds balanced (need {min_rate})", rate),
    }
}

/// Random DISJ inputs with `n` coordinates over `agents` agents; each bit is
/// set with a probability that makes both answers about equally likely.
pub fn random_disj(rng: &mut impl RngCore, n: usize, agents: usize) -> DisjInput {
    let p = (1.0 - 0.5f64.powf(1.0 / n as f64)).powf(1.0 / agents as f64);
    let rows = (0..agents).map(|_| (0..n).map(|_| rng.random_bool(p)).collect()).collect();
    DisjInput::new(rows).expect("rows are rectangular")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisjStats {
    pub cases: usize,
    /// Noiseless top-1 on exact global means agrees with brute-force DISJ.
    pub exact_agree: usize,
    /// `run_noniid` picks the extra arm exactly when DISJ is 0.
    pub run_agree: usize,
    pub intersecting: usize,
}

pub fn disj_stats(
    cases: usize,
    n: usize,
    agents: usize,
    horizon: u64,
    master: u64,
) -> collabtop_core::Result<DisjStats> {
    let results = (0..cases as u64)
        .into_par_iter()
        .map(|case| {
            let seed = trial_seed(master, case);
            let x = random_disj(&mut ChaCha8Rng::seed_from_u64(seed), n, agents);
            let inst = disj_instance(&x)?;
            let extra = vec![ArmId::from_index(n)];
            let truth = x.disj();
            let exact = (top_m(&inst.global_means(), 1) != extra) == truth;
            let out = run_noniid(&inst, 1, agents, horizon, seed)?;
            Ok((exact, (out.selected != extra) == truth, truth))
        })
        .collect::<collabtop_core::Result<Vec<_>>>()?;
    Ok(DisjStats {
        cases,
        exact_agree: results.iter().filter(|r| r.0).count(),
        run_agree: results.iter().filter(|r| r.1).count(),
        intersecting: results.iter().filter(|r| r.2).count(),
    })
}

/// Noise-free model: every pull of arm `i` returns `observed[i]`.
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

    fn draw_sum(&self, arm: usize, _agent: usize, count: u64, _rng: &mut dyn RngCore) -> f64 {
        self.observed[arm] * count as f64
    }
}

/// Local elimination rounds over a hash partition against the centralised rule.
pub fn local_elim_suite(cases: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wrong = 0;
    let mut rounds = 0;
    for case in 0..cases {
        let n = rng.random_range(8..=64usize);
        let m = rng.random_range(1..=n / 2);
        let agents = rng.random_range(1..=4usize);
        // Dyadic values keep empirical means exact; the coarse grid forces ties.
        let observed: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..=8u8)) / 8.0).collect();
        let truth = (0..n).map(|i| 1.0 - i as f64 / n as f64).collect();
        let model = Exact { truth, observed: observed.clone() };
        let Ok(mut run) = IidRun::new(&model, IidParams::new(m, agents, 1 << 20, trial_seed(seed, case as u64))) else {
            wrong += 1;
            continue;
        };
        let mut est: Vec<(ArmId, f64)> = observed.iter().enumerate().map(|(i, &v)| (ArmId::from_index(i), v)).collect();
        let mut slots = m;
        let mut accepted = Vec::new();
        while !run.is_done() && run.check_balance().unwrap_or(false) {
            let keep = run.schedule().survivors[run.round() + 1];
            if run.local_elim().is_err() {
                wrong += 1;
                break;
            }
            rounds += 1;
            let want = elim_decide(&est, slots, keep).expect("valid centralised step");
            let mut survivors: Vec<ArmId> = run.agents().iter().flat_map(|a| a.surviving.iter().copied()).collect();
            survivors.sort();
            slots -= want.accepted.len();
            accepted.extend(want.accepted);
            accepted.sort();
            let mut got: Vec<ArmId> = run.agents().iter().flat_map(|a| a.accepted.iter().copied()).collect();
            got.sort();
            if survivors != want.survivors || got != accepted || run.coord().slots_left != slots {
                wrong += 1;
                break;
            }
            est.retain(|(a, _)| survivors.binary_search(a).is_ok());
        }
    }
    Check {
        name: "local-elim",
        passed: wrong == 0,
        detail: format!("{cases} runs, {rounds} local rounds compared, {wrong} mismatches"),
    }
}

/// Round-structure checks on a finished run; `Err` describes the first violation.
/// The pull budget is checked separately.
pub fn round_invariants(
    algo: Algo,
    out: &Outcome,
    n: usize,
    m: usize,
    agents: usize,
    horizon: u64,
) -> Result<(), String> {
    let variant = if algo == Algo::Iid { Variant::Iid } else { Variant::NonIid };
    let sched = round_schedule(n, horizon, agents, variant);
    if out.selected.len() != m {
        return Err(format!("selected {} arms, expected {m}", out.selected.len()));
    }
    if out.rounds() as usize > sched.rounds + 1 {
        return Err(format!("{} rounds used, limit {}", out.rounds(), sched.rounds + 1));
    }
    if algo == Algo::Uniform {
        return Ok(());
    }
    for t in &out.trace {
        if t.accepted + t.slots_left != m {
            return Err(format!("round {}: |Q| + m_r = {}", t.round, t.accepted + t.slots_left));
        }
        if t.survivors != sched.survivors[t.round + 1] {
            return Err(format!(
                "round {}: {} survivors, schedule says {}",
                t.round,
                t.survivors,
                sched.survivors[t.round + 1]
            ));
        }
    }
    if out.trace.len() != sched.rounds {
        return Err(format!("{} rounds traced, schedule has {}", out.trace.len(), sched.rounds));
    }
    Ok(())
}

/// The suites run by `collabtop verify`, at the given case count.
pub fn run_all(cases: usize, seed: u64) -> Vec<Check> {
    let disj = match disj_stats(cases.min(500), 32, 4, 1_000_000, seed) {
        Ok(s) => Check {
            name: "disj-reduction",
            passed: s.exact_agree == s.cases && s.run_agree * 100 >= s.cases * 99,
            detail: format!(
                "{} inputs ({} intersecting): exact {}/{}, run {}/{}",
                s.cases, s.intersecting, s.exact_agree, s.cases, s.run_agree, s.cases
            ),
        },
        Err(e) => Check { name: "disj-reduction", passed: false, detail: e.to_string() },
    };
    let exact_globals = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let agree = (0..cases)
            .filter(|_| {
                let k = rng.random_range(1..=5usize);
                let n = 6 * k + rng.random_range(1..=20usize);
                let x = random_disj(&mut rng, n, k);
                let inst = disj_instance(&x).expect("n > 6K");
                let rows: Vec<Vec<f64>> = (0..k).map(|a| inst.row(a).to_vec()).collect();
                let extra = vec![ArmId::from_index(x.len())];
                (top_m(&global_means(&rows), 1) != extra) == x.disj()
            })
            .count();
        Check {
            name: "disj-brute-force",
            passed: agree == cases,
            detail: format!("{agree}/{cases} random inputs agree"),
        }
    };
    vec![
        search_suite(cases, seed),
        pull_dist_suite(cases, seed),
        local_elim_suite(cases.min(300), seed),
        hash_suite(4096, 2, cases.min(2000) as u64, seed, 0.999),
        disj,
        exact_globals,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_at_small_scale() {
        for check in run_all(60, 11) {
            assert!(check.passed, "{check}");
        }
    }

    #[test]
    fn disj_generator_is_roughly_even() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let hits = (0..400).filter(|_| random_disj(&mut rng, 32, 4).disj()).count();
        assert!((120..=280).contains(&hits), "{hits}");
    }
}
