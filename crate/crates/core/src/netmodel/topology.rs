use serde::{Deserialize, Serialize};

use super::network::{Network, NodeId};
use super::stream::{Purpose, RandomStream};
use crate::error::{invalid, Error, Result};

/// Resampling budget for `gnp_connected`.
pub const GNP_RETRIES: u32 = 100;

/// Topology families used as test substrates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    Path { n: usize },
    Cycle { n: usize },
    Grid { rows: usize, cols: usize },
    RandomTree { n: usize },
    Star { n: usize },
    GnpConnected { n: usize, p: f64 },
}

impl Topology {
    pub fn nodes(&self) -> usize {
        match *self {
            Topology::Path { n }
            | Topology::Cycle { n }
            | Topology::RandomTree { n }
            | Topology::Star { n }
            | Topology::GnpConnected { n, .. } => n,
            Topology::Grid { rows, cols } => rows * cols,
        }
    }

    /// Short label such as `path1024` or `grid32x32`.
    pub fn label(&self) -> String {
        match *self {
            Topology::Path { n } => format!("path{n}"),
            Topology::Cycle { n } => format!("cycle{n}"),
            Topology::Grid { rows, cols } => format!("grid{rows}x{cols}"),
            Topology::RandomTree { n } => format!("random_tree{n}"),
            Topology::Star { n } => format!("star{n}"),
            Topology::GnpConnected { n, p } => format!("gnp{n}p{p}"),
        }
    }
}

/// Builds a connected network of the given family. Deterministic in `seed`;
/// deterministic families ignore it.
pub fn build_topology(kind: &Topology, seed: u64) -> Result<Network> {
    if kind.nodes() == 0 {
        return invalid("topology needs at least one node");
    }
    match *kind {
        Topology::Path { n } => Network::from_edges(n, (1..n).map(|v| (v - 1, v))),
        Topology::Cycle { n } => {
            if n < 3 {
                return invalid(format!("cycle needs n >= 3, got {n}"));
            }
            Network::from_edges(n, (0..n).map(|v| (v, (v + 1) % n)))
        }
        Topology::Grid { rows, cols } => Network::from_edges(rows * cols, grid_edges(rows, cols)),
        Topology::Star { n } => Network::from_edges(n, (1..n).map(|v| (0, v))),
        Topology::RandomTree { n } => Network::from_edges(n, prufer_tree(n, seed)),
        Topology::GnpConnected { n, p } => gnp_connected(n, p, seed),
    }
}

fn grid_edges(rows: usize, cols: usize) -> Vec<(NodeId, NodeId)> {
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    edges
}

/// Uniform labeled tree decoded from a random Prüfer sequence.
fn prufer_tree(n: usize, seed: u64) -> Vec<(NodeId, NodeId)> {
    if n <= 2 {
        return (1..n).map(|v| (0, v)).collect();
    }
    let mut rng = RandomStream::new(seed, Purpose::Topology, 0, 0);
    let seq: Vec<NodeId> = (0..n - 2).map(|_| rng.below(n as u64) as NodeId).collect();
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut leaves: std::collections::BinaryHeap<std::cmp::Reverse<NodeId>> =
        (0..n).filter(|&v| degree[v] == 1).map(std::cmp::Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &s in &seq {
        let std::cmp::Reverse(leaf) = leaves.pop().expect("a leaf always exists");
        edges.push((leaf, s));
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.push(std::cmp::Reverse(s));
        }
    }
    let std::cmp::Reverse(a) = leaves.pop().expect("two leaves remain");
    let std::cmp::Reverse(b) = leaves.pop().expect("two leaves remain");
    edges.push((a, b));
    edges
}

fn gnp_connected(n: usize, p: f64, seed: u64) -> Result<Network> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("edge probability must lie in [0,1], got {p}"));
    }
    if n == 1 {
        return Network::from_edges(1, []);
    }
    for attempt in 0..GNP_RETRIES {
        let mut edges = Vec::new();
        for u in 0..n {
            let mut rng = RandomStream::new(seed, Purpose::Topology, u as u64, attempt as u64);
            for v in u + 1..n {
                if rng.bernoulli(p) {
                    edges.push((u, v));
                }
            }
        }
        match Network::from_edges(n, edges) {
            Ok(net) => return Ok(net),
            Err(Error::Invalid(msg)) if msg.contains("disconnected") => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Generation(format!(
        "G({n},{p}) stayed disconnected after {GNP_RETRIES} samples"
    )))
}
