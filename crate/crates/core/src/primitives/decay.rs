use crate::error::{invalid, Result};
use crate::netmodel::{halving_coin, Network, NodeId, Purpose, RandomStream};
use crate::radio::{Lane, Medium, Payload, Trace};

/// Steps in one Decay round for an `n`-node network.
pub fn decay_len(n: usize) -> u32 {
    crate::ceil_log2(n)
}

/// Whether `node` transmits in step `i` (1-based) of Decay round `epoch`.
#[inline]
pub fn decay_coin(seed: u64, node: NodeId, epoch: u64, i: u32) -> bool {
    let word = RandomStream::first(seed, Purpose::DecayCoin, node as u64, epoch.wrapping_mul(64) + i as u64);
    halving_coin(word, i)
}

/// First reception of each listener during a Decay round.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayOutcome<P> {
    /// `(listener, sender, payload)` sorted by listener.
    pub heard: Vec<(NodeId, NodeId, P)>,
    pub rounds: u64,
}

/// Runs one Decay round: in step `i` every participant transmits with
/// probability `2^-i`. Each listener keeps the first message it receives.
pub fn decay_round<P: Payload>(
    net: &Network,
    participants: &[(NodeId, P)],
    listeners: &[NodeId],
    seed: u64,
    epoch: u64,
    trace: &mut Trace<P>,
) -> Result<DecayOutcome<P>> {
    let mut role = vec![0u8; net.n()];
    for &(v, _) in participants {
        net.check_node(v)?;
        role[v] = 1;
    }
    for &v in listeners {
        net.check_node(v)?;
        if role[v] == 1 {
            return invalid(format!("node {v} both participates and listens"));
        }
        role[v] = 2;
    }
    let steps = decay_len(net.n());
    let mut medium = Medium::new(net.n());
    let mut tx = Vec::new();
    let mut rx = Vec::new();
    let mut heard = Vec::new();
    for i in 1..=steps {
        tx.clear();
        tx.extend(
            participants
                .iter()
                .filter(|(v, _)| decay_coin(seed, *v, epoch, i))
                .cloned(),
        );
        let collisions = medium.deliver(net, &tx, &mut rx);
        trace.push_round(Lane::Single, &tx, &rx, collisions);
        for &(w, idx) in &rx {
            if role[w] == 2 {
                role[w] = 3;
                let (s, p) = &tx[idx as usize];
                heard.push((w, *s, p.clone()));
            }
        }
    }
    heard.sort_by_key(|h| h.0);
    Ok(DecayOutcome {
        heard,
        rounds: steps as u64,
    })
}

/// Exact probability that a listener with `k` participating neighbors hears
/// one of them in a Decay round of `steps` steps.
pub fn decay_success_probability(k: u64, steps: u32) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let mut miss = 1.0;
    for i in 1..=steps {
        let p = 0.5f64.powi(i as i32);
        let single = k as f64 * p * (1.0 - p).powf(k as f64 - 1.0);
        miss *= 1.0 - single;
    }
    1.0 - miss
}

/// Smallest success probability over `1..=max_k` participating neighbors.
pub fn decay_floor(max_k: u64, steps: u32) -> f64 {
    (1..=max_k.max(1))
        .map(|k| decay_success_probability(k, steps))
        .fold(f64::INFINITY, f64::min)
}
