//! Experiment configuration.
//!
//! Settings come from a flat `key = value` file (blank lines and `#` comments
//! allowed) with command-line flags layered on top. Both feed the same string
//! map, so a key means the same thing in either place.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{io_err, HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algo {
    Iid,
    NonIid,
    Uniform,
}

impl Algo {
    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Iid => "iid",
            Algo::NonIid => "noniid",
            Algo::Uniform => "uniform",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algo {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "iid" => Ok(Algo::Iid),
            "noniid" | "non-iid" => Ok(Algo::NonIid),
            "uniform" => Ok(Algo::Uniform),
            other => Err(HarnessError::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Horizon,
    Agents,
}

impl FromStr for SweepAxis {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "T" | "t" | "horizon" => Ok(SweepAxis::Horizon),
            "K" | "k" | "agents" => Ok(SweepAxis::Agents),
            other => Err(HarnessError::Config(format!("unknown sweep axis `{other}` (use T or K)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// Means spaced evenly from 0.9 down to 0.1 unless given explicitly.
    /// Non-IID runs spread each mean across agents by `heterogeneity`.
    Synthetic {
        means: Option<Vec<f64>>,
        heterogeneity: f64,
    },
    Ratings {
        path: PathBuf,
        min_count: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algo: Algo,
    /// Arm count for synthetic instances; ratings files decide their own.
    pub n: usize,
    pub m: usize,
    pub agents: usize,
    pub horizon: u64,
    pub trials: u64,
    pub seed: u64,
    pub source: Source,
    pub sweep: Option<(SweepAxis, Vec<u64>)>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            algo: Algo::Iid,
            n: 20,
            m: 3,
            agents: 5,
            horizon: 100_000,
            trials: 100,
            seed: 0,
            source: Source::Synthetic { means: None, heterogeneity: 0.5 },
            sweep: None,
        }
    }
}

/// One (K, T) combination a sweep visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Point {
    pub agents: usize,
    pub horizon: u64,
}

pub const KEYS: &[&str] = &[
    "algo",
    "n",
    "m",
    "agents",
    "horizon",
    "trials",
    "seed",
    "ratings",
    "min_count",
    "sweep_axis",
    "sweep_values",
    "means",
    "heterogeneity",
];

/// Parses `key = value` lines. Dashes in keys are read as underscores.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", i + 1)))?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(HarnessError::Config(format!("line {}: unknown key `{key}`", i + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

pub fn read_kv_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_kv(&text)
}

fn num<T: FromStr>(map: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| HarnessError::Config(format!("`{key}` is not a valid number: `{v}`"))),
    }
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| HarnessError::Config(format!("`{key}` has a bad entry `{s}`"))))
        .collect()
}

impl ExperimentConfig {
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let d = ExperimentConfig::default();
        let algo = map.get("algo").map(|s| s.parse()).transpose()?.unwrap_or(d.algo);
        let source = match map.get("ratings") {
            Some(path) => {
                if map.contains_key("means") {
                    return Err(HarnessError::Config("give either `ratings` or `means`, not both".into()));
                }
                Source::Ratings { path: PathBuf::from(path), min_count: num(map, "min_count", 1)? }
            }
            None => Source::Synthetic {
                means: map.get("means").map(|v| list("means", v)).transpose()?,
                heterogeneity: num(map, "heterogeneity", 0.5)?,
            },
        };
        let sweep = match (map.get("sweep_axis"), map.get("sweep_values")) {
            (None, None) => None,
            (Some(axis), Some(values)) => Some((axis.parse()?, list("sweep_values", values)?)),
            _ => return Err(HarnessError::Config("`sweep_axis` and `sweep_values` go together".into())),
        };
        let mut config = ExperimentConfig {
            algo,
            n: num(map, "n", d.n)?,
            m: num(map, "m", d.m)?,
            agents: num(map, "agents", d.agents)?,
            horizon: num(map, "horizon", d.horizon)?,
            trials: num(map, "trials", d.trials)?,
            seed: num(map, "seed", d.seed)?,
            source,
            sweep,
        };
        if let Source::Synthetic { means: Some(means), .. } = &config.source {
            config.n = means.len();
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::Config("`trials` must be at least 1".into()));
        }
        if self.agents == 0 {
            return Err(HarnessError::Config("`agents` must be at least 1".into()));
        }
        if let Some((_, values)) = &self.sweep {
            if values.is_empty() {
                return Err(HarnessError::Config("`sweep_values` is empty".into()));
            }
            if values.contains(&0) && matches!(self.sweep, Some((SweepAxis::Agents, _))) {
                return Err(HarnessError::Config("agent counts must be positive".into()));
            }
        }
        if let Source::Synthetic { heterogeneity, .. } = self.source {
            if !(0.0..=1.0).contains(&heterogeneity) {
                return Err(HarnessError::Config("`heterogeneity` must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }

    /// Points in sweep order; a single point without a sweep.
    pub fn points(&self) -> Vec<Point> {
        match &self.sweep {
            None => vec![Point { agents: self.agents, horizon: self.horizon }],
            Some((SweepAxis::Horizon, ts)) => ts.iter().map(|&t| Point { agents: self.agents, horizon: t }).collect(),
            Some((SweepAxis::Agents, ks)) => {
                ks.iter().map(|&k| Point { agents: k as usize, horizon: self.horizon }).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let mut map = parse_kv("# demo\nalgo = noniid\nn = 32\nsweep-axis = T\nsweep_values = 1000, 2000\n").unwrap();
        map.insert("n".into(), "16".into());
        let c = ExperimentConfig::from_map(&map).unwrap();
        assert_eq!(c.algo, Algo::NonIid);
        assert_eq!(c.n, 16);
        assert_eq!(c.points().len(), 2);
        assert_eq!(c.points()[1], Point { agents: 5, horizon: 2000 });
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_kv("nonsense").is_err());
        assert!(parse_kv("colour = red").is_err());
        let map = parse_kv("trials = 0").unwrap();
        assert!(ExperimentConfig::from_map(&map).is_err());
        let map = parse_kv("sweep_axis = T").unwrap();
        assert!(ExperimentConfig::from_map(&map).is_err());
        let map = parse_kv("ratings = a.csv\nmeans = 0.5, 0.2").unwrap();
        assert!(ExperimentConfig::from_map(&map).is_err());
    }

    #[test]
    fn explicit_means_set_n() {
        let map = parse_kv("means = 0.9, 0.5, 0.4, 0.1").unwrap();
        assert_eq!(ExperimentConfig::from_map(&map).unwrap().n, 4);
    }
}
