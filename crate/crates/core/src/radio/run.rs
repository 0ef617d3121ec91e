use serde::{Deserialize, Serialize};

use super::engine::Medium;
use super::trace::{Lane, Payload, Trace};
use crate::error::{invalid, Result};
use crate::netmodel::{Network, NodeId};

/// A per-round protocol driven by [`run`].
pub trait Protocol {
    type Payload: Payload;

    /// Fills `tx` (cleared by the caller) with this round's transmitters and
    /// names the lane the round belongs to.
    fn transmit(&mut self, round: u64, tx: &mut Vec<(NodeId, Self::Payload)>) -> Lane;

    /// Handles the round's receptions, given as `(listener, index into tx)`.
    fn receive(
        &mut self,
        round: u64,
        tx: &[(NodeId, Self::Payload)],
        rx: &[(NodeId, u32)],
        trace: &mut Trace<Self::Payload>,
    );

    fn finished(&self) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    TimedOut,
}

/// Runs `protocol` for at most `max_rounds` rounds, appending to `trace`.
/// Round numbers continue from the rounds already in the trace.
pub fn run<Pr: Protocol>(
    net: &Network,
    protocol: &mut Pr,
    max_rounds: u64,
    trace: &mut Trace<Pr::Payload>,
) -> Result<RunStatus> {
    if max_rounds == 0 {
        return invalid("max_rounds must be at least 1");
    }
    let mut medium = Medium::new(net.n());
    let mut tx = Vec::new();
    let mut rx = Vec::new();
    for _ in 0..max_rounds {
        if protocol.finished() {
            return Ok(RunStatus::Completed);
        }
        let round = trace.rounds();
        tx.clear();
        let lane = protocol.transmit(round, &mut tx);
        let collisions = medium.deliver(net, &tx, &mut rx);
        trace.push_round(lane, &tx, &rx, collisions);
        protocol.receive(round, &tx, &rx, trace);
    }
    Ok(if protocol.finished() {
        RunStatus::Completed
    } else {
        RunStatus::TimedOut
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{build_topology, Topology};
    use crate::radio::Fidelity;

    struct Silent;

    impl Protocol for Silent {
        type Payload = ();
        fn transmit(&mut self, _: u64, _: &mut Vec<(NodeId, ())>) -> Lane {
            Lane::Single
        }
        fn receive(&mut self, _: u64, _: &[(NodeId, ())], _: &[(NodeId, u32)], _: &mut Trace<()>) {}
        fn finished(&self) -> bool {
            false
        }
    }

    struct OneShot(bool);

    impl Protocol for OneShot {
        type Payload = ();
        fn transmit(&mut self, _: u64, _: &mut Vec<(NodeId, ())>) -> Lane {
            Lane::Single
        }
        fn receive(&mut self, _: u64, _: &[(NodeId, ())], _: &[(NodeId, u32)], _: &mut Trace<()>) {
            self.0 = true;
        }
        fn finished(&self) -> bool {
            self.0
        }
    }

    #[test]
    fn silent_protocol_times_out() {
        let net = build_topology(&Topology::Path { n: 3 }, 0).unwrap();
        let mut trace = Trace::new(Fidelity::Faithful);
        let status = run(&net, &mut Silent, 5, &mut trace).unwrap();
        assert_eq!(status, RunStatus::TimedOut);
        assert_eq!(trace.rounds(), 5);
        assert!(trace.iter_rounds().all(|r| r.transmitters.is_empty()));
    }

    #[test]
    fn one_round_protocol_completes() {
        let net = build_topology(&Topology::Path { n: 1 }, 0).unwrap();
        let mut trace = Trace::new(Fidelity::Faithful);
        assert_eq!(
            run(&net, &mut OneShot(false), 10, &mut trace).unwrap(),
            RunStatus::Completed
        );
        assert_eq!(trace.rounds(), 1);
        assert!(run(&net, &mut OneShot(false), 0, &mut trace).is_err());
    }
}
