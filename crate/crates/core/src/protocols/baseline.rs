use crate::error::{invalid, Result};
use crate::netmodel::{Network, NodeId};
use crate::primitives::{decay_coin, decay_len, Packet};
use crate::radio::{default_round_cap, run, Fidelity, Lane, Message, Protocol, RunStatus, Trace, Via};

/// Result of the Decay broadcast baseline.
#[derive(Debug)]
pub struct BaselineOutcome {
    pub outputs: Vec<Option<Message>>,
    pub trace: Trace<Packet>,
    pub status: RunStatus,
    pub rounds: u64,
    pub success: bool,
}

impl BaselineOutcome {
    pub fn informed(&self) -> usize {
        self.outputs.iter().filter(|o| o.is_some()).count()
    }
}

struct DecayBroadcast {
    seed: u64,
    steps: u32,
    step: u64,
    participants: Vec<NodeId>,
    pending: Vec<NodeId>,
    best: Vec<Option<Message>>,
    informed: usize,
}

impl Protocol for DecayBroadcast {
    type Payload = Packet;

    fn transmit(&mut self, _round: u64, tx: &mut Vec<(NodeId, Packet)>) -> Lane {
        let epoch = self.step / self.steps as u64;
        let i = (self.step % self.steps as u64) as u32 + 1;
        for &v in &self.participants {
            if decay_coin(self.seed, v, epoch, i) {
                if let Some(msg) = self.best[v] {
                    tx.push((v, Packet::Data { msg, cluster: v }));
                }
            }
        }
        Lane::Single
    }

    fn receive(&mut self, round: u64, tx: &[(NodeId, Packet)], rx: &[(NodeId, u32)], trace: &mut Trace<Packet>) {
        for &(w, idx) in rx {
            if let (from, Packet::Data { msg, .. }) = tx[idx as usize] {
                if self.best[w].is_none() {
                    self.best[w] = Some(msg);
                    self.informed += 1;
                    self.pending.push(w);
                    trace.learn(round, w, msg, Via::Reception { from });
                }
            }
        }
        self.step += 1;
        if self.step.is_multiple_of(self.steps as u64) {
            self.participants.append(&mut self.pending);
        }
    }

    fn finished(&self) -> bool {
        self.informed == self.best.len()
    }
}

/// Classic Decay broadcast: informed nodes run Decay epochs, and nodes
/// informed during an epoch join from the next one.
pub fn decay_broadcast_baseline(
    net: &Network,
    source: NodeId,
    value: u64,
    seed: u64,
    cap: Option<u64>,
) -> Result<BaselineOutcome> {
    net.check_node(source)?;
    let cap = cap.unwrap_or_else(|| default_round_cap(net.n(), net.diameter()));
    if cap == 0 {
        return invalid("round cap must be at least 1");
    }
    let msg = Message { value, origin: source };
    let mut best = vec![None; net.n()];
    best[source] = Some(msg);
    let mut trace = Trace::new(Fidelity::Faithful);
    trace.learn(0, source, msg, Via::Origin);
    let mut proto = DecayBroadcast {
        seed,
        steps: decay_len(net.n()),
        step: 0,
        participants: vec![source],
        pending: Vec::new(),
        best,
        informed: 1,
    };
    let status = run(net, &mut proto, cap, &mut trace)?;
    let rounds = trace.rounds();
    Ok(BaselineOutcome {
        success: proto.finished(),
        outputs: proto.best,
        trace,
        status,
        rounds,
    })
}
