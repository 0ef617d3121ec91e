use super::compete::{compete_messages, CompeteOutcome};
use super::config::CompeteConfig;
use crate::error::{invalid, Result};
use crate::netmodel::{Network, NodeId, Purpose, RandomStream};
use crate::radio::Message;

/// Attempts before giving up on drawing a non-empty candidate set.
pub const MAX_CANDIDATE_ROUNDS: u32 = 1000;

/// Result of a leader election.
#[derive(Debug)]
pub struct ElectionOutcome {
    /// Winning ID as output by each node.
    pub leader: Vec<Option<u64>>,
    /// Node whose ID won, if every node agrees on it.
    pub leader_node: Option<NodeId>,
    pub self_flag: Vec<bool>,
    pub candidates: Vec<(NodeId, u64)>,
    /// Candidate rounds that produced no candidate.
    pub retries: u32,
    pub compete: CompeteOutcome,
    /// All nodes agree and exactly the winner self-identifies.
    pub success: bool,
}

/// Candidate probability `min(1, c_cand·log n/n)`.
pub fn candidate_probability(n: usize, c_cand: f64) -> f64 {
    (c_cand * crate::log2_n(n) / n as f64).min(1.0)
}

/// Elects a leader: nodes become candidates independently, draw `id_bits`-bit
/// IDs, and Compete spreads the highest `(id, node)` pair.
pub fn leader_election(
    net: &Network,
    cfg: &CompeteConfig,
    c_cand: f64,
    id_bits: u32,
    seed: u64,
) -> Result<ElectionOutcome> {
    if !(c_cand > 0.0 && c_cand.is_finite()) {
        return invalid(format!("c_cand must be positive, got {c_cand}"));
    }
    if !(1..=64).contains(&id_bits) {
        return invalid(format!("id_bits must lie in 1..=64, got {id_bits}"));
    }
    let p = candidate_probability(net.n(), c_cand);
    let mask = if id_bits == 64 { u64::MAX } else { (1u64 << id_bits) - 1 };
    for attempt in 0..MAX_CANDIDATE_ROUNDS {
        let candidates: Vec<(NodeId, u64)> = (0..net.n())
            .filter(|&v| RandomStream::new(seed, Purpose::Candidate, v as u64, attempt as u64).bernoulli(p))
            .map(|v| {
                let id = RandomStream::first(seed, Purpose::CandidateId, v as u64, attempt as u64) & mask;
                (v, id)
            })
            .collect();
        if !candidates.is_empty() {
            let mut out = elect_among(net, cfg, &candidates, seed)?;
            out.retries = attempt;
            out.compete.trace.note("election-retries", attempt as u64);
            return Ok(out);
        }
    }
    Err(crate::Error::Internal(format!(
        "no candidate in {MAX_CANDIDATE_ROUNDS} rounds at p = {p}"
    )))
}

/// Election with a fixed candidate set of `(node, id)` pairs.
pub fn elect_among(
    net: &Network,
    cfg: &CompeteConfig,
    candidates: &[(NodeId, u64)],
    seed: u64,
) -> Result<ElectionOutcome> {
    let msgs: Vec<(NodeId, Message)> = candidates
        .iter()
        .map(|&(v, id)| (v, Message { value: id, origin: v }))
        .collect();
    let compete = compete_messages(net, &msgs, cfg, seed)?;
    let leader: Vec<Option<u64>> = compete.outputs.iter().map(|o| o.map(|m| m.value)).collect();
    let self_flag: Vec<bool> = (0..net.n())
        .map(|v| compete.outputs[v].is_some_and(|m| m.origin == v))
        .collect();
    let first = compete.outputs[0];
    let agree = compete.outputs.iter().all(|o| o.is_some() && *o == first);
    let leader_node = if agree { first.map(|m| m.origin) } else { None };
    let flagged = self_flag.iter().filter(|&&f| f).count();
    let success = agree
        && flagged == 1
        && leader_node.is_some_and(|w| self_flag[w] && leader[w] == candidates.iter().find(|c| c.0 == w).map(|c| c.1));
    Ok(ElectionOutcome {
        leader,
        leader_node,
        self_flag,
        candidates: candidates.to_vec(),
        retries: 0,
        compete,
        success,
    })
}
