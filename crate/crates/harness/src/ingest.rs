//! Ratings files: `user_id,item_id,rating` with a header, ratings in `[0, 5]`.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use collabtop_core::{Instance, NonIidInstance};

use crate::error::{io_err, HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Iid,
    /// Users are split into groups by `user_id mod K`; group `g` becomes agent `g`.
    NonIid {
        agents: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ingested {
    Iid { items: Vec<u64>, instance: Instance },
    NonIid { items: Vec<u64>, instance: NonIidInstance },
}

impl Ingested {
    /// Item ids in arm order: arm `i` (one-based) is `items[i - 1]`.
    pub fn items(&self) -> &[u64] {
        match self {
            Ingested::Iid { items, .. } | Ingested::NonIid { items, .. } => items,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    sum: f64,
    count: u64,
}

fn rows<R: Read>(reader: R) -> Result<Vec<(u64, u64, f64)>> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).flexible(true).from_reader(reader);
    let mut out = Vec::new();
    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |reason: &str| HarnessError::MalformedRow { line, reason: reason.to_string() };
        if record.len() != 3 {
            return Err(bad("expected user_id,item_id,rating"));
        }
        let user: u64 = record[0].parse().map_err(|_| bad("user_id is not an integer"))?;
        let item: u64 = record[1].parse().map_err(|_| bad("item_id is not an integer"))?;
        let rating: f64 = record[2].parse().map_err(|_| bad("rating is not a number"))?;
        if !(0.0..=5.0).contains(&rating) {
            return Err(bad("rating outside [0, 5]"));
        }
        out.push((user, item, rating));
    }
    Ok(out)
}

pub fn ingest_reader<R: Read>(reader: R, mode: Mode, min_count: u64) -> Result<Ingested> {
    let rows = rows(reader)?;
    let need = min_count.max(1);
    match mode {
        Mode::Iid => {
            let mut tallies: BTreeMap<u64, Tally> = BTreeMap::new();
            for (_, item, rating) in rows {
                let t = tallies.entry(item).or_default();
                t.sum += rating;
                t.count += 1;
            }
            let kept: Vec<(u64, Tally)> = tallies.into_iter().filter(|(_, t)| t.count >= need).collect();
            if kept.is_empty() {
                return Err(HarnessError::NoItems);
            }
            let items = kept.iter().map(|(i, _)| *i).collect();
            let means = kept.iter().map(|(_, t)| t.sum / t.count as f64 / 5.0).collect();
            Ok(Ingested::Iid { items, instance: Instance::bernoulli(means)? })
        }
        Mode::NonIid { agents } => {
            if agents == 0 {
                return Err(HarnessError::Config("need at least one agent".into()));
            }
            let mut tallies: BTreeMap<u64, Vec<Tally>> = BTreeMap::new();
            for (user, item, rating) in rows {
                let group = (user % agents as u64) as usize;
                let t = &mut tallies.entry(item).or_insert_with(|| vec![Tally::default(); agents])[group];
                t.sum += rating;
                t.count += 1;
            }
            let kept: Vec<(u64, Vec<Tally>)> =
                tallies.into_iter().filter(|(_, ts)| ts.iter().all(|t| t.count >= need)).collect();
            if kept.is_empty() {
                return Err(HarnessError::NoItems);
            }
            let items = kept.iter().map(|(i, _)| *i).collect();
            let matrix = (0..agents)
                .map(|g| kept.iter().map(|(_, ts)| ts[g].sum / ts[g].count as f64 / 5.0).collect())
                .collect();
            Ok(Ingested::NonIid { items, instance: NonIidInstance::bernoulli(matrix)? })
        }
    }
}

pub fn ingest_ratings(path: &Path, mode: Mode, min_count: u64) -> Result<Ingested> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    ingest_reader(std::io::BufReader::new(file), mode, min_count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iid(text: &str, min_count: u64) -> Result<Ingested> {
        ingest_reader(text.as_bytes(), Mode::Iid, min_count)
    }

    #[test]
    fn iid_average_over_five() {
        let Ingested::Iid { items, instance } = iid("user_id,item_id,rating\n1,7,5.0\n2,7,3.0\n", 2).unwrap() else {
            panic!("wrong mode")
        };
        assert_eq!(items, vec![7]);
        assert!((instance.means()[0] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn filter_can_remove_everything() {
        assert!(matches!(iid("user_id,item_id,rating\n1,7,5.0\n", 2), Err(HarnessError::NoItems)));
    }

    #[test]
    fn groups_by_user_modulo_agents() {
        let text = "user_id,item_id,rating\n1,7,4.0\n2,7,2.0\n";
        let Ingested::NonIid { items, instance } =
            ingest_reader(text.as_bytes(), Mode::NonIid { agents: 2 }, 1).unwrap()
        else {
            panic!("wrong mode")
        };
        assert_eq!(items, vec![7]);
        // user 1 lands in group 1, user 2 in group 0
        assert!((instance.local_mean(1, 0) - 0.8).abs() < 1e-12);
        assert!((instance.local_mean(0, 0) - 0.4).abs() < 1e-12);
        assert!((instance.global_means()[0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn every_group_needs_enough_ratings() {
        let text = "user_id,item_id,rating\n1,7,4.0\n3,7,2.0\n2,8,1.0\n1,8,1.0\n";
        let got = ingest_reader(text.as_bytes(), Mode::NonIid { agents: 2 }, 1).unwrap();
        assert_eq!(got.items(), &[8]);
    }

    #[test]
    fn malformed_rows_are_reported_with_line() {
        let err = iid("user_id,item_id,rating\n1,7,5.0\n2,x,3.0\n", 1).unwrap_err();
        assert!(matches!(err, HarnessError::MalformedRow { line: 3, .. }), "{err}");
        assert!(matches!(iid("user_id,item_id,rating\n1,7,6.5\n", 1), Err(HarnessError::MalformedRow { .. })));
        assert!(matches!(iid("user_id,item_id,rating\n1,7\n", 1), Err(HarnessError::MalformedRow { .. })));
    }
}
