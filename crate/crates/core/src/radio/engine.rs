use crate::netmodel::{Network, NodeId};

/// What a node does in one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action<P> {
    Listen,
    Transmit(P),
}

/// Executes one round: a listener receives iff exactly one neighbor transmits.
/// Transmitters and listeners with zero or several transmitting neighbors get
/// `None`; the two cases are indistinguishable.
pub fn step<P: Clone>(net: &Network, actions: &[Action<P>]) -> Vec<Option<P>> {
    assert_eq!(actions.len(), net.n(), "one action per node");
    let tx: Vec<(NodeId, P)> = actions
        .iter()
        .enumerate()
        .filter_map(|(v, a)| match a {
            Action::Transmit(p) => Some((v, p.clone())),
            Action::Listen => None,
        })
        .collect();
    let mut medium = Medium::new(net.n());
    let mut rx = Vec::new();
    medium.deliver(net, &tx, &mut rx);
    let mut out = vec![None; net.n()];
    for (listener, idx) in rx {
        out[listener] = Some(tx[idx as usize].1.clone());
    }
    out
}

/// Reusable scratch space for sparse rounds, where only transmitters are listed.
#[derive(Debug, Clone)]
pub struct Medium {
    hits: Vec<u32>,
    sender: Vec<u32>,
    transmitting: Vec<bool>,
    touched: Vec<NodeId>,
}

impl Medium {
    pub fn new(n: usize) -> Self {
        Medium {
            hits: vec![0; n],
            sender: vec![0; n],
            transmitting: vec![false; n],
            touched: Vec::new(),
        }
    }

    /// Pushes `(listener, index into tx)` for every successful reception,
    /// sorted by listener, and returns the number of listeners that had two or
    /// more transmitting neighbors.
    pub fn deliver<P>(&mut self, net: &Network, tx: &[(NodeId, P)], out: &mut Vec<(NodeId, u32)>) -> u32 {
        out.clear();
        for &(v, _) in tx {
            debug_assert!(!self.transmitting[v], "node {v} transmits twice in one round");
            self.transmitting[v] = true;
        }
        for (i, &(v, _)) in tx.iter().enumerate() {
            for &w in net.neighbors(v) {
                if self.hits[w] == 0 {
                    self.touched.push(w);
                }
                self.hits[w] += 1;
                self.sender[w] = i as u32;
            }
        }
        let mut collisions = 0;
        for &w in &self.touched {
            if !self.transmitting[w] {
                match self.hits[w] {
                    1 => out.push((w, self.sender[w])),
                    _ => collisions += 1,
                }
            }
            self.hits[w] = 0;
        }
        self.touched.clear();
        for &(v, _) in tx {
            self.transmitting[v] = false;
        }
        out.sort_unstable_by_key(|&(w, _)| w);
        collisions
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{build_topology, Topology};

    fn star() -> Network {
        build_topology(&Topology::Star { n: 4 }, 0).unwrap()
    }

    #[test]
    fn two_transmitters_collide() {
        let acts = vec![Action::Listen, Action::Transmit(1), Action::Transmit(2), Action::Listen];
        let got = step(&star(), &acts);
        assert_eq!(got, vec![None, None, None, None]);
    }

    #[test]
    fn single_transmitter_is_heard() {
        let acts = vec![Action::Listen, Action::Transmit(7), Action::Listen, Action::Listen];
        assert_eq!(step(&star(), &acts), vec![Some(7), None, None, None]);
    }

    #[test]
    fn transmitter_hears_nothing() {
        let acts = vec![Action::Transmit(1), Action::Transmit(2), Action::Listen, Action::Listen];
        assert_eq!(step(&star(), &acts), vec![None, None, Some(1), Some(1)]);
    }

    #[test]
    fn medium_counts_collisions_and_resets() {
        let net = star();
        let mut m = Medium::new(4);
        let mut rx = Vec::new();
        assert_eq!(m.deliver(&net, &[(1, ()), (2, ())], &mut rx), 1);
        assert!(rx.is_empty());
        assert_eq!(m.deliver(&net, &[(3, ())], &mut rx), 0);
        assert_eq!(rx, vec![(0, 0)]);
    }
}
