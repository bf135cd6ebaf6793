use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::Algo;
use crate::error::{io_err, Result};

/// One trial at one configuration point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub algorithm: Algo,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "K")]
    pub agents: usize,
    #[serde(rename = "T")]
    pub horizon: u64,
    #[serde(with = "bit")]
    pub success: bool,
    pub words_total: u64,
    pub rounds: u32,
    pub max_pulls_per_agent: u64,
}

pub const HEADER: &str = "trial,algorithm,n,m,K,T,success,words_total,rounds,max_pulls_per_agent";

impl Serialize for Algo {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Algo {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `success` is written as 0/1.
mod bit {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!("success must be 0 or 1, got {other}"))),
        }
    }
}

pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER.split(','))?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    write_csv(records, std::io::BufWriter::new(file))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TrialRecord>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Aggregate over the trials of one configuration point.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub algorithm: Algo,
    pub n: usize,
    pub m: usize,
    pub agents: usize,
    pub horizon: u64,
    pub trials: usize,
    /// `1 - mean(success)`
    pub error_rate: f64,
    pub mean_words: f64,
    pub max_words: u64,
    pub max_pulls_per_agent: u64,
}

/// Groups consecutive records of the same point; records are expected sorted by point.
pub fn summarize(records: &[TrialRecord]) -> Vec<Summary> {
    records
        .chunk_by(|a, b| (a.algorithm, a.n, a.m, a.agents, a.horizon) == (b.algorithm, b.n, b.m, b.agents, b.horizon))
        .map(|group| {
            let trials = group.len();
            let wins = group.iter().filter(|r| r.success).count();
            let first = &group[0];
            Summary {
                algorithm: first.algorithm,
                n: first.n,
                m: first.m,
                agents: first.agents,
                horizon: first.horizon,
                trials,
                error_rate: 1.0 - wins as f64 / trials as f64,
                mean_words: group.iter().map(|r| r.words_total as f64).sum::<f64>() / trials as f64,
                max_words: group.iter().map(|r| r.words_total).max().unwrap_or(0),
                max_pulls_per_agent: group.iter().map(|r| r.max_pulls_per_agent).max().unwrap_or(0),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(trial: u64, success: bool) -> TrialRecord {
        TrialRecord {
            trial,
            algorithm: Algo::NonIid,
            n: 16,
            m: 2,
            agents: 4,
            horizon: 1000,
            success,
            words_total: 123 + trial,
            rounds: 4,
            max_pulls_per_agent: 999,
        }
    }

    fn to_string(records: &[TrialRecord]) -> String {
        let mut buf = Vec::new();
        write_csv(records, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_is_header_only() {
        assert_eq!(to_string(&[]), format!("{HEADER}\n"));
    }

    #[test]
    fn one_record_two_lines() {
        let text = to_string(&[rec(0, true)]);
        assert_eq!(text, format!("{HEADER}\n0,noniid,16,2,4,1000,1,123,4,999\n"));
    }

    #[test]
    fn parse_back() {
        let records: Vec<_> = (0..5).map(|t| rec(t, t % 2 == 0)).collect();
        let text = to_string(&records);
        assert_eq!(read_csv(text.as_bytes()).unwrap(), records);
    }

    #[test]
    fn error_rate_from_successes() {
        let records: Vec<_> = (0..4).map(|t| rec(t, t == 0)).collect();
        let s = summarize(&records);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].error_rate, 0.75);
        assert_eq!(s[0].max_words, 126);
    }
}
