use std::fmt::{Debug, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::NodeId;

/// A protocol message. Values are paired with their originator so that
/// messages are distinct and totally ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Message {
    pub value: u64,
    pub origin: NodeId,
}

/// Anything carried over the air. Payloads that carry protocol data expose it
/// through [`Payload::message`] so audits can follow information flow.
pub trait Payload: Clone + Debug {
    fn message(&self) -> Option<Message> {
        None
    }
}

impl Payload for Message {
    fn message(&self) -> Option<Message> {
        Some(*self)
    }
}

impl Payload for u64 {}
impl Payload for () {}

/// Execution fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    /// Every transmission is simulated by the engine.
    Faithful,
    /// Schedule-level operations run as oracles and their cost is charged.
    Charged,
}

/// Process a round belongs to. Main-process lanes run on even global rounds,
/// background lanes on odd ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lane {
    Single,
    Precompute,
    Main,
    MainDecay,
    Background,
    BackgroundDecay,
}

impl Lane {
    pub fn name(self) -> &'static str {
        match self {
            Lane::Single => "single",
            Lane::Precompute => "precompute",
            Lane::Main => "main",
            Lane::MainDecay => "main_decay",
            Lane::Background => "background",
            Lane::BackgroundDecay => "background_decay",
        }
    }

    /// Required parity of the global round, if any.
    pub fn parity(self) -> Option<u64> {
        match self {
            Lane::Main | Lane::MainDecay => Some(0),
            Lane::Background | Lane::BackgroundDecay => Some(1),
            _ => None,
        }
    }
}

/// How a node came to know a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Via {
    /// The node is the message's originator.
    Origin,
    /// Received over the air in the recorded round.
    Reception { from: NodeId },
    /// Delivered by a charged-mode schedule operation that started at `from`.
    Oracle { from: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Learn {
    pub round: u64,
    pub node: NodeId,
    pub message: Message,
    pub via: Via,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Charge {
    pub tag: &'static str,
    pub rounds: u64,
}

/// Charged-mode schedule operation placed on a lane timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaneOp {
    pub tag: &'static str,
    pub lane: Lane,
    pub start_round: u64,
    pub steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct RoundMeta {
    round: u64,
    lane: Lane,
    tx_end: usize,
    rx_end: usize,
    collisions: u32,
}

/// One recorded round.
#[derive(Debug)]
pub struct RoundView<'a, P> {
    pub round: u64,
    pub lane: Lane,
    pub transmitters: &'a [(NodeId, P)],
    /// `(listener, index into transmitters)`, sorted by listener.
    pub receptions: &'a [(NodeId, u32)],
    pub collisions: u32,
}

impl<P> RoundView<'_, P> {
    pub fn sender(&self, rx: (NodeId, u32)) -> (NodeId, &P) {
        let (v, p) = &self.transmitters[rx.1 as usize];
        (*v, p)
    }
}

/// Complete record of a run: engine rounds, charged costs and knowledge events.
#[derive(Debug, Clone)]
pub struct Trace<P> {
    fidelity: Fidelity,
    meta: Vec<RoundMeta>,
    tx: Vec<(NodeId, P)>,
    rx: Vec<(NodeId, u32)>,
    charges: Vec<Charge>,
    charged: u64,
    lane_ops: Vec<LaneOp>,
    modelled: Vec<Charge>,
    learned: Vec<Learn>,
    notes: Vec<(&'static str, u64)>,
}

/// Summary persisted next to result rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub rounds: u64,
    pub charged_rounds: u64,
    pub success: bool,
}

impl<P: Payload> Trace<P> {
    pub fn new(fidelity: Fidelity) -> Self {
        Trace {
            fidelity,
            meta: Vec::new(),
            tx: Vec::new(),
            rx: Vec::new(),
            charges: Vec::new(),
            charged: 0,
            lane_ops: Vec::new(),
            modelled: Vec::new(),
            learned: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn fidelity(&self) -> Fidelity {
        self.fidelity
    }

    /// Number of simulated engine rounds so far; also the index of the next round.
    pub fn rounds(&self) -> u64 {
        self.meta.len() as u64
    }

    pub fn charged_rounds(&self) -> u64 {
        self.charged
    }

    /// Adds `rounds` to the charged total. Only valid in charged mode.
    pub fn charge(&mut self, rounds: u64, tag: &'static str) -> Result<()> {
        if self.fidelity != Fidelity::Charged {
            return Err(Error::Mode(format!("charge '{tag}' in faithful mode")));
        }
        self.charged += rounds;
        self.charges.push(Charge { tag, rounds });
        Ok(())
    }

    pub fn charges(&self) -> &[Charge] {
        &self.charges
    }

    /// Records a cost that is modelled rather than simulated in faithful mode.
    /// It is kept for audit and never folded into either round counter.
    pub fn record_modelled(&mut self, rounds: u64, tag: &'static str) {
        self.modelled.push(Charge { tag, rounds });
    }

    pub fn modelled(&self) -> &[Charge] {
        &self.modelled
    }

    pub fn record_lane_op(&mut self, op: LaneOp) {
        self.lane_ops.push(op);
    }

    pub fn lane_ops(&self) -> &[LaneOp] {
        &self.lane_ops
    }

    /// Free-form counters such as retries.
    pub fn note(&mut self, tag: &'static str, value: u64) {
        self.notes.push((tag, value));
    }

    pub fn notes(&self) -> &[(&'static str, u64)] {
        &self.notes
    }

    pub fn push_round(&mut self, lane: Lane, tx: &[(NodeId, P)], rx: &[(NodeId, u32)], collisions: u32) {
        let round = self.rounds();
        self.tx.extend_from_slice(tx);
        self.rx.extend_from_slice(rx);
        self.meta.push(RoundMeta {
            round,
            lane,
            tx_end: self.tx.len(),
            rx_end: self.rx.len(),
            collisions,
        });
    }

    /// Appends `count` rounds in which nothing is transmitted.
    pub fn push_silent(&mut self, lane: Lane, count: u64) {
        for _ in 0..count {
            self.push_round(lane, &[], &[], 0);
        }
    }

    pub fn round(&self, idx: usize) -> RoundView<'_, P> {
        let m = &self.meta[idx];
        let (tx0, rx0) = if idx == 0 {
            (0, 0)
        } else {
            (self.meta[idx - 1].tx_end, self.meta[idx - 1].rx_end)
        };
        RoundView {
            round: m.round,
            lane: m.lane,
            transmitters: &self.tx[tx0..m.tx_end],
            receptions: &self.rx[rx0..m.rx_end],
            collisions: m.collisions,
        }
    }

    pub fn iter_rounds(&self) -> impl Iterator<Item = RoundView<'_, P>> + '_ {
        (0..self.meta.len()).map(move |i| self.round(i))
    }

    pub fn learn(&mut self, round: u64, node: NodeId, message: Message, via: Via) {
        self.learned.push(Learn {
            round,
            node,
            message,
            via,
        });
    }

    pub fn learned(&self) -> &[Learn] {
        &self.learned
    }

    pub fn summary(&self, success: bool) -> TraceSummary {
        TraceSummary {
            rounds: self.rounds(),
            charged_rounds: self.charged,
            success,
        }
    }

    /// CSV with one line per simulated round.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,lane,transmitters,receptions,collisions\n");
        for r in self.iter_rounds() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.round,
                r.lane.name(),
                r.transmitters.len(),
                r.receptions.len(),
                r.collisions
            );
        }
        out
    }
}
