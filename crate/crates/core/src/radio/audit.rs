//! Independent checks over recorded traces.
//!
//! Receptions are recomputed by pulling from each candidate listener's
//! neighbor list, unlike the engine, which pushes from transmitters.

use std::collections::HashMap;

use super::trace::{Lane, Message, Payload, Trace, Via};
use crate::netmodel::{Network, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AuditError {
    #[error("round {round}: reception mismatch at node {node}")]
    Reception { round: u64, node: NodeId },
    #[error("round {round}: collision count {recorded} but recomputed {expected}")]
    Collisions { round: u64, recorded: u32, expected: u32 },
    #[error("node {node}: best message decreased at round {round}")]
    Monotonicity { round: u64, node: NodeId },
    #[error("node {node}: learned {message:?} at round {round} without a source")]
    Conservation { round: u64, node: NodeId, message: Message },
    #[error("node {node}: output {output:?} differs from last learned {learned:?}")]
    Output {
        node: NodeId,
        output: Option<Message>,
        learned: Option<Message>,
    },
    #[error("round {round}: lane {lane:?} on wrong parity")]
    Lane { round: u64, lane: Lane },
}

/// Recomputes every round's receptions and collision count from its
/// transmitting set.
pub fn audit_receptions<P: Payload>(net: &Network, trace: &Trace<P>) -> Result<(), AuditError> {
    let mut transmitting = vec![false; net.n()];
    let mut candidate = vec![false; net.n()];
    let mut listeners = Vec::new();
    for r in trace.iter_rounds() {
        for &(v, _) in r.transmitters {
            transmitting[v] = true;
        }
        listeners.clear();
        for &(v, _) in r.transmitters {
            for &w in net.neighbors(v) {
                if !transmitting[w] && !candidate[w] {
                    candidate[w] = true;
                    listeners.push(w);
                }
            }
        }
        listeners.sort_unstable();
        let mut expected = Vec::new();
        let mut collisions = 0u32;
        for &w in &listeners {
            let senders: Vec<NodeId> = net.neighbors(w).iter().copied().filter(|&u| transmitting[u]).collect();
            match senders.len() {
                1 => expected.push((w, senders[0])),
                0 => {}
                _ => collisions += 1,
            }
            candidate[w] = false;
        }
        let recorded: Vec<(NodeId, NodeId)> = r.receptions.iter().map(|&x| (x.0, r.sender(x).0)).collect();
        for &(v, _) in r.transmitters {
            transmitting[v] = false;
        }
        if recorded != expected {
            let node = recorded
                .iter()
                .zip(&expected)
                .find(|(a, b)| a != b)
                .map(|(a, _)| a.0)
                .or_else(|| recorded.get(expected.len()).map(|a| a.0))
                .or_else(|| expected.get(recorded.len()).map(|a| a.0))
                .unwrap_or(0);
            return Err(AuditError::Reception { round: r.round, node });
        }
        if collisions != r.collisions {
            return Err(AuditError::Collisions {
                round: r.round,
                recorded: r.collisions,
                expected: collisions,
            });
        }
    }
    Ok(())
}

/// Every node's sequence of learned messages is strictly increasing in time.
pub fn audit_monotone<P: Payload>(trace: &Trace<P>) -> Result<(), AuditError> {
    let mut last: HashMap<NodeId, (u64, Message)> = HashMap::new();
    for e in trace.learned() {
        if let Some(&(round, msg)) = last.get(&e.node) {
            if e.message <= msg || e.round < round {
                return Err(AuditError::Monotonicity {
                    round: e.round,
                    node: e.node,
                });
            }
        }
        last.insert(e.node, (e.round, e.message));
    }
    Ok(())
}

/// Every learned message was originated by that node or carried to it by a
/// recorded transmission (or charged operation) from a node that already
/// knew it.
pub fn audit_conservation<P: Payload>(trace: &Trace<P>, origins: &[(NodeId, Message)]) -> Result<(), AuditError> {
    let mut known: HashMap<(NodeId, Message), u64> = HashMap::new();
    let first_round = trace.iter_rounds().next().map(|r| r.round).unwrap_or(0);
    for e in trace.learned() {
        let ok = match e.via {
            Via::Origin => origins.contains(&(e.node, e.message)),
            Via::Reception { from } => {
                let idx = e.round.checked_sub(first_round).map(|i| i as usize);
                let carried = idx.filter(|&i| i < trace.rounds() as usize).is_some_and(|i| {
                    let r = trace.round(i);
                    r.receptions.iter().any(|&x| {
                        let (s, p) = r.sender(x);
                        x.0 == e.node && s == from && p.message() == Some(e.message)
                    })
                });
                carried && sender_knew(&known, origins, from, e.message, e.round, false)
            }
            Via::Oracle { from } => sender_knew(&known, origins, from, e.message, e.round, true),
        };
        if !ok {
            return Err(AuditError::Conservation {
                round: e.round,
                node: e.node,
                message: e.message,
            });
        }
        known.entry((e.node, e.message)).or_insert(e.round);
    }
    Ok(())
}

fn sender_knew(
    known: &HashMap<(NodeId, Message), u64>,
    origins: &[(NodeId, Message)],
    from: NodeId,
    msg: Message,
    round: u64,
    same_round_ok: bool,
) -> bool {
    origins.contains(&(from, msg))
        || known
            .get(&(from, msg))
            .is_some_and(|&r| r < round || (same_round_ok && r <= round))
}

/// Outputs equal the last message each node learned.
pub fn audit_outputs<P: Payload>(trace: &Trace<P>, outputs: &[Option<Message>]) -> Result<(), AuditError> {
    let mut last: Vec<Option<Message>> = vec![None; outputs.len()];
    for e in trace.learned() {
        if e.node < last.len() {
            last[e.node] = Some(e.message);
        }
    }
    for (node, (&out, &learned)) in outputs.iter().zip(&last).enumerate() {
        if out != learned {
            return Err(AuditError::Output {
                node,
                output: out,
                learned,
            });
        }
    }
    Ok(())
}

/// Main-process activity only on even rounds, background only on odd rounds,
/// for both simulated rounds and charged lane operations.
pub fn audit_lanes<P: Payload>(trace: &Trace<P>) -> Result<(), AuditError> {
    for r in trace.iter_rounds() {
        if let Some(parity) = r.lane.parity() {
            if !r.transmitters.is_empty() && r.round % 2 != parity {
                return Err(AuditError::Lane {
                    round: r.round,
                    lane: r.lane,
                });
            }
        }
    }
    for op in trace.lane_ops() {
        if let Some(parity) = op.lane.parity() {
            if op.start_round % 2 != parity {
                return Err(AuditError::Lane {
                    round: op.start_round,
                    lane: op.lane,
                });
            }
        }
    }
    Ok(())
}
