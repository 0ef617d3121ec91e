use serde::{Deserialize, Serialize};

use crate::netmodel::NodeId;
use crate::radio::{Message, Payload};

/// Over-the-air payloads used by the protocol stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Packet {
    /// A protocol message tagged with the sender's cluster center.
    Data { msg: Message, cluster: NodeId },
    /// Tree-construction beacon from a node at `depth` in `cluster`.
    Join { cluster: NodeId, depth: u32 },
    /// Sequence seed disseminated inside a coarse cluster.
    Seed { cluster: NodeId, seed: u64 },
}

impl Payload for Packet {
    fn message(&self) -> Option<Message> {
        match *self {
            Packet::Data { msg, .. } => Some(msg),
            _ => None,
        }
    }
}
