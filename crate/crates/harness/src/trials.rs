//! Builds instances from a config and fans trials out over a thread pool.
//!
//! Trial `t` of every point uses `trial_seed(seed, t)`, so results depend only
//! on the config and never on scheduling.

use collabtop_core::{run_iid, run_noniid, trial_seed, uniform_baseline, Instance, NonIidInstance, Outcome};
use rayon::prelude::*;

use crate::config::{Algo, ExperimentConfig, Point, Source};
use crate::error::{HarnessError, Result};
use crate::ingest::{ingest_ratings, Ingested, Mode};
use crate::record::TrialRecord;

/// Evenly spaced means from 0.9 down to 0.1.
pub fn linear_means(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5];
    }
    (0..n).map(|i| 0.9 - 0.8 * i as f64 / (n - 1) as f64).collect()
}

/// Spreads each global mean over `agents` agents while keeping its average.
///
/// Agent `k` gets `mu + w * ((2k + 1) / K - 1) * min(mu, 1 - mu)`, which stays
/// in `[0, 1]` for `w <= 1`.
pub fn heterogeneous(global: &[f64], agents: usize, w: f64) -> Result<NonIidInstance> {
    let rows = (0..agents)
        .map(|k| {
            let offset = (2 * k + 1) as f64 / agents as f64 - 1.0;
            global.iter().map(|&mu| (mu + w * offset * mu.min(1.0 - mu)).clamp(0.0, 1.0)).collect()
        })
        .collect();
    Ok(NonIidInstance::bernoulli(rows)?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Built {
    Iid(Instance),
    NonIid(NonIidInstance),
}

impl Built {
    pub fn arms(&self) -> usize {
        match self {
            Built::Iid(i) => i.len(),
            Built::NonIid(i) => i.arms(),
        }
    }
}

/// The instance a config describes for `agents` agents.
pub fn build_instance(config: &ExperimentConfig, agents: usize) -> Result<Built> {
    match (&config.source, config.algo) {
        (Source::Synthetic { means, .. }, Algo::Iid) => {
            let means = means.clone().unwrap_or_else(|| linear_means(config.n));
            Ok(Built::Iid(Instance::bernoulli(means)?))
        }
        (Source::Synthetic { means, heterogeneity }, _) => {
            let means = means.clone().unwrap_or_else(|| linear_means(config.n));
            Ok(Built::NonIid(heterogeneous(&means, agents, *heterogeneity)?))
        }
        (Source::Ratings { path, min_count }, algo) => {
            let mode = if algo == Algo::Iid { Mode::Iid } else { Mode::NonIid { agents } };
            Ok(match ingest_ratings(path, mode, *min_count)? {
                Ingested::Iid { instance, .. } => Built::Iid(instance),
                Ingested::NonIid { instance, .. } => Built::NonIid(instance),
            })
        }
    }
}

pub fn run_one(algo: Algo, instance: &Built, m: usize, point: Point, seed: u64) -> Result<Outcome> {
    let Point { agents, horizon } = point;
    Ok(match (algo, instance) {
        (Algo::Iid, Built::Iid(i)) => run_iid(i, m, agents, horizon, seed)?,
        (Algo::NonIid, Built::NonIid(i)) => run_noniid(i, m, agents, horizon, seed)?,
        (Algo::Uniform, Built::NonIid(i)) => uniform_baseline(i, m, agents, horizon, seed)?,
        _ => return Err(HarnessError::Config(format!("{algo} cannot run on this instance"))),
    })
}

/// A finished trial together with its full outcome.
#[derive(Debug, Clone)]
pub struct Trial {
    pub record: TrialRecord,
    pub outcome: Outcome,
}

/// Runs every trial of every point, sorted by (point, trial).
pub fn run_trials_full(config: &ExperimentConfig) -> Result<Vec<Trial>> {
    config.validate()?;
    let mut all = Vec::new();
    for point in config.points() {
        let instance = build_instance(config, point.agents)?;
        let n = instance.arms();
        let mut trials = (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                let outcome = run_one(config.algo, &instance, config.m, point, trial_seed(config.seed, trial))?;
                let record = TrialRecord {
                    trial,
                    algorithm: config.algo,
                    n,
                    m: config.m,
                    agents: point.agents,
                    horizon: point.horizon,
                    success: outcome.success,
                    words_total: outcome.words_total(),
                    rounds: outcome.rounds(),
                    max_pulls_per_agent: outcome.max_pulls_per_agent(),
                };
                Ok(Trial { record, outcome })
            })
            .collect::<Result<Vec<_>>>()?;
        trials.sort_by_key(|t| t.record.trial);
        all.extend(trials);
    }
    Ok(all)
}

pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    Ok(run_trials_full(config)?.into_iter().map(|t| t.record).collect())
}
