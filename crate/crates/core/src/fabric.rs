//! Simulated coordinator/agent message fabric.
//!
//! Every message is charged by content words only: one word per numeric value
//! or arm index. Envelopes (sender, receiver, round) are free. A broadcast is
//! delivered to all `K` agents and charged `K` times its payload.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::instance::ArmId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Coordinator,
    Agent(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Receiver {
    Coordinator,
    Agent(usize),
    /// Every agent receives its own copy.
    Broadcast,
    /// The coordinator's final answer.
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Agent to coordinator.
    Up,
    /// Coordinator to agents or output.
    Down,
}

/// One unit of communication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Word {
    Real(f64),
    Count(u64),
    Arm(ArmId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub sender: Party,
    pub receiver: Receiver,
    pub payload: Vec<Word>,
    pub round: u32,
}

impl Message {
    pub fn word_count(&self) -> usize {
        self.payload.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Receipt {
    /// Position of the message in the transcript.
    pub seq: usize,
    /// Words charged, including broadcast fan-out.
    pub charged: u64,
}

/// Append-only record of a run's communication and pulls.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Transcript {
    pub messages: Vec<Message>,
    pub words_total: u64,
    pub words_up: u64,
    pub words_down: u64,
    pub rounds_used: u32,
    pub pulls_by_agent: Vec<u64>,
}

impl Transcript {
    pub fn max_pulls(&self) -> u64 {
        self.pulls_by_agent.iter().copied().max().unwrap_or(0)
    }

    /// Writes one tab-separated line per message: round, sender, receiver, words.
    pub fn dump_tsv(&self, out: &mut impl fmt::Write) -> fmt::Result {
        writeln!(out, "round\tsender\treceiver\twords")?;
        for msg in &self.messages {
            let sender = match msg.sender {
                Party::Coordinator => Endpoint::Coordinator,
                Party::Agent(k) => Endpoint::Agent(k),
            };
            let receiver = match msg.receiver {
                Receiver::Coordinator => Endpoint::Coordinator,
                Receiver::Agent(k) => Endpoint::Agent(k),
                Receiver::Broadcast => Endpoint::Named("broadcast"),
                Receiver::Output => Endpoint::Named("output"),
            };
            writeln!(out, "{}\t{}\t{}\t{}", msg.round, sender, receiver, msg.word_count())?;
        }
        Ok(())
    }
}

enum Endpoint {
    Coordinator,
    Agent(usize),
    Named(&'static str),
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Coordinator => f.write_str("coordinator"),
            Endpoint::Agent(k) => write!(f, "agent{k}"),
            Endpoint::Named(s) => f.write_str(s),
        }
    }
}

/// Message fabric for a single simulated run.
#[derive(Debug, Clone)]
pub struct Fabric {
    agents: usize,
    horizon: u64,
    round: u32,
    transcript: Transcript,
}

impl Fabric {
    pub fn new(agents: usize, horizon: u64) -> Self {
        assert!(agents >= 1, "a fabric needs at least one agent");
        Fabric {
            agents,
            horizon,
            round: 0,
            transcript: Transcript { pulls_by_agent: vec![0; agents], ..Transcript::default() },
        }
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    pub fn words_total(&self) -> u64 {
        self.transcript.words_total
    }

    pub fn post(&mut self, msg: Message) -> Result<Receipt> {
        if msg.round != self.round {
            return Err(Error::RoundMismatch { current: self.round, got: msg.round });
        }
        let direction = match (msg.sender, msg.receiver) {
            (Party::Agent(k), Receiver::Coordinator) if k < self.agents => Direction::Up,
            (Party::Coordinator, Receiver::Agent(k)) if k < self.agents => Direction::Down,
            (Party::Coordinator, Receiver::Broadcast | Receiver::Output) => Direction::Down,
            _ => return Err(Error::InvalidParams("agents talk only to the coordinator")),
        };
        let fan_out = match msg.receiver {
            Receiver::Broadcast => self.agents as u64,
            _ => 1,
        };
        let charged = msg.payload.len() as u64 * fan_out;
        let t = &mut self.transcript;
        t.words_total += charged;
        match direction {
            Direction::Up => t.words_up += charged,
            Direction::Down => t.words_down += charged,
        }
        t.messages.push(msg);
        Ok(Receipt { seq: t.messages.len() - 1, charged })
    }

    pub fn send_up(&mut self, agent: usize, payload: Vec<Word>) -> Result<Receipt> {
        self.post(Message { sender: Party::Agent(agent), receiver: Receiver::Coordinator, payload, round: self.round })
    }

    pub fn send_down(&mut self, agent: usize, payload: Vec<Word>) -> Result<Receipt> {
        self.post(Message { sender: Party::Coordinator, receiver: Receiver::Agent(agent), payload, round: self.round })
    }

    pub fn broadcast(&mut self, payload: Vec<Word>) -> Result<Receipt> {
        self.post(Message { sender: Party::Coordinator, receiver: Receiver::Broadcast, payload, round: self.round })
    }

    pub fn output(&mut self, payload: Vec<Word>) -> Result<Receipt> {
        self.post(Message { sender: Party::Coordinator, receiver: Receiver::Output, payload, round: self.round })
    }

    /// Charges `count` pulls to `agent`, failing if its total would pass the horizon.
    pub fn record_pulls(&mut self, agent: usize, count: u64) -> Result<()> {
        let slot = &mut self.transcript.pulls_by_agent[agent];
        let would_be = *slot + count;
        if would_be > self.horizon {
            return Err(Error::BudgetExceeded { agent, would_be, horizon: self.horizon });
        }
        *slot = would_be;
        Ok(())
    }

    pub fn advance_round(&mut self) -> u32 {
        self.round += 1;
        self.transcript.rounds_used = self.round;
        self.round
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;

    fn reals(n: usize) -> Vec<Word> {
        (0..n).map(|i| Word::Real(i as f64)).collect()
    }

    #[test]
    fn unicast_charges_payload() {
        let mut f = Fabric::new(4, 100);
        let r = f.send_up(1, reals(3)).unwrap();
        assert_eq!(r.charged, 3);
        assert_eq!(f.words_total(), 3);
        assert_eq!(f.transcript().words_up, 3);
    }

    #[test]
    fn empty_payload_is_free() {
        let mut f = Fabric::new(2, 100);
        f.send_down(0, Vec::new()).unwrap();
        assert_eq!(f.words_total(), 0);
        assert_eq!(f.transcript().messages.len(), 1);
    }

    #[test]
    fn broadcast_fans_out() {
        let mut f = Fabric::new(4, 100);
        f.broadcast(reals(2)).unwrap();
        assert_eq!(f.words_total(), 8);
        assert_eq!(f.transcript().words_down, 8);
    }

    #[test]
    fn stale_round_rejected() {
        let mut f = Fabric::new(2, 100);
        f.advance_round();
        let msg = Message { sender: Party::Agent(0), receiver: Receiver::Coordinator, payload: reals(1), round: 0 };
        assert_eq!(f.post(msg), Err(Error::RoundMismatch { current: 1, got: 0 }));
    }

    #[test]
    fn agent_to_agent_rejected() {
        let mut f = Fabric::new(2, 100);
        let msg = Message { sender: Party::Agent(0), receiver: Receiver::Agent(1), payload: reals(1), round: 0 };
        assert!(f.post(msg).is_err());
    }

    #[test]
    fn pulls_accumulate() {
        let mut f = Fabric::new(2, 100);
        f.record_pulls(0, 10).unwrap();
        f.record_pulls(0, 5).unwrap();
        f.record_pulls(1, 0).unwrap();
        assert_eq!(f.transcript().pulls_by_agent, vec![15, 0]);
        assert_eq!(f.record_pulls(0, 86), Err(Error::BudgetExceeded { agent: 0, would_be: 101, horizon: 100 }));
        assert_eq!(f.transcript().pulls_by_agent[0], 15);
    }

    #[test]
    fn halving_charges_fit_the_horizon() {
        // Per-round charge 2 n_r (T_{r+1} - T_r) / K summed over the schedule.
        for &(n, horizon, k) in &[(8usize, 800u64, 4usize), (64, 100_000, 16), (37, 12_345, 3)] {
            let s = crate::round_schedule(n, horizon, k, crate::Variant::Iid);
            let mut f = Fabric::new(k, horizon);
            for r in 0..s.rounds {
                let charge = 2 * s.survivors[r] as u64 * s.increment(r) / k as u64;
                f.record_pulls(0, charge).unwrap();
            }
            assert!(f.transcript().pulls_by_agent[0] <= horizon);
        }
    }

    #[test]
    fn rounds_count_up() {
        let mut f = Fabric::new(1, 0);
        assert_eq!(f.advance_round(), 1);
        f.advance_round();
        f.advance_round();
        assert_eq!(f.transcript().rounds_used, 3);
    }

    #[test]
    fn tsv_dump() {
        let mut f = Fabric::new(2, 10);
        f.send_up(1, reals(2)).unwrap();
        f.advance_round();
        f.broadcast(reals(1)).unwrap();
        let mut s = String::new();
        f.transcript().dump_tsv(&mut s).unwrap();
        assert_eq!(s, "round\tsender\treceiver\twords\n0\tagent1\tcoordinator\t2\n1\tcoordinator\tbroadcast\t1\n");
    }
}
