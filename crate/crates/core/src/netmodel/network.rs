use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::stream::mix64;
use crate::error::{invalid, Error, Result};

pub type NodeId = usize;

/// Marker for "not reachable" in distance arrays.
pub const UNREACHED: u32 = u32::MAX;

/// Undirected connected graph with its hop diameter.
///
/// Adjacency is stored in compressed rows with sorted neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    diameter: usize,
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    n: usize,
    diameter: usize,
    edges: Vec<[NodeId; 2]>,
}

impl Network {
    /// Builds a network from an edge list. Edges may be given in any order and
    /// orientation; loops, duplicates, out-of-range ids and disconnected graphs
    /// are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self> {
        if n == 0 {
            return invalid("a network needs at least one node");
        }
        let mut canon: Vec<(NodeId, NodeId)> = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return invalid(format!("edge ({u},{v}) out of range for n={n}"));
            }
            if u == v {
                return invalid(format!("self-loop at node {u}"));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return invalid(format!("duplicate edge ({},{})", w[0].0, w[0].1));
        }
        let (offsets, targets) = csr(n, &canon);
        let mut net = Network {
            n,
            edges: canon,
            offsets,
            targets,
            diameter: 0,
        };
        let dist = net.bfs_distances(0);
        if let Some(v) = dist.iter().position(|&d| d == UNREACHED) {
            return invalid(format!("network is disconnected: node {v} unreachable from 0"));
        }
        net.diameter = exact_diameter(&net);
        Ok(net)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diameter(&self) -> usize {
        self.diameter
    }

    /// Canonical edge list: `u < v`, sorted lexicographically.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    #[inline]
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            invalid(format!("node {v} out of range for n={}", self.n))
        }
    }

    /// Hop distances from `src`; unreachable nodes get [`UNREACHED`].
    pub fn bfs_distances(&self, src: NodeId) -> Vec<u32> {
        let mut dist = vec![UNREACHED; self.n];
        let mut queue = VecDeque::with_capacity(self.n);
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u] + 1;
            for &w in self.neighbors(u) {
                if dist[w] == UNREACHED {
                    dist[w] = du;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Canonical JSON encoding.
    pub fn to_json(&self) -> String {
        let file = NetworkFile {
            n: self.n,
            diameter: self.diameter,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
        };
        serde_json::to_string(&file).expect("network serialization cannot fail")
    }

    /// Parses the canonical JSON encoding. The stored diameter must match the
    /// recomputed one.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("network json: {e}")))?;
        let net = Network::from_edges(file.n, file.edges.iter().map(|e| (e[0], e[1])))?;
        if net.diameter != file.diameter {
            return invalid(format!(
                "stored diameter {} does not match computed {}",
                file.diameter, net.diameter
            ));
        }
        Ok(net)
    }

    /// Stable 64-bit identifier of the graph structure.
    pub fn fingerprint(&self) -> u64 {
        let mut h = mix64(self.n as u64);
        for &(u, v) in &self.edges {
            h = mix64(h ^ ((u as u64) << 32 | v as u64));
        }
        h
    }
}

fn csr(n: usize, edges: &[(NodeId, NodeId)]) -> (Vec<usize>, Vec<NodeId>) {
    let mut deg = vec![0usize; n + 1];
    for &(u, v) in edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    let mut offsets = vec![0usize; n + 1];
    for v in 0..n {
        offsets[v + 1] = offsets[v] + deg[v];
    }
    let mut fill = offsets.clone();
    let mut targets = vec![0; offsets[n]];
    for &(u, v) in edges {
        targets[fill[u]] = v;
        fill[u] += 1;
        targets[fill[v]] = u;
        fill[v] += 1;
    }
    for v in 0..n {
        targets[offsets[v]..offsets[v + 1]].sort_unstable();
    }
    (offsets, targets)
}

fn eccentricity(dist: &[u32]) -> usize {
    dist.iter().copied().max().unwrap_or(0) as usize
}

/// Double sweep gives a lower bound that is exact on trees; other graphs are
/// verified exactly, by plain all-pairs BFS up to 4096 nodes and by 64-way
/// bit-parallel BFS above that.
fn exact_diameter(net: &Network) -> usize {
    let d0 = net.bfs_distances(0);
    let far = (0..net.n).max_by_key(|&v| (d0[v], std::cmp::Reverse(v))).unwrap_or(0);
    let lower = eccentricity(&net.bfs_distances(far));
    if net.edges.len() + 1 == net.n {
        return lower;
    }
    if net.n <= 4096 {
        (0..net.n)
            .map(|v| eccentricity(&net.bfs_distances(v)))
            .max()
            .unwrap_or(0)
    } else {
        bit_parallel_diameter(net).max(lower)
    }
}

fn bit_parallel_diameter(net: &Network) -> usize {
    let n = net.n;
    let mut best = 0usize;
    let mut seen = vec![0u64; n];
    let mut frontier = vec![0u64; n];
    let mut next = vec![0u64; n];
    for base in (0..n).step_by(64) {
        let width = (n - base).min(64);
        let full = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        seen.iter_mut().for_each(|s| *s = 0);
        frontier.iter_mut().for_each(|s| *s = 0);
        for b in 0..width {
            seen[base + b] |= 1 << b;
            frontier[base + b] |= 1 << b;
        }
        let mut level = 0usize;
        loop {
            let mut any = false;
            for v in 0..n {
                let mut acc = 0u64;
                for &w in net.neighbors(v) {
                    acc |= frontier[w];
                }
                let fresh = acc & !seen[v];
                next[v] = fresh;
                any |= fresh != 0;
            }
            if !any {
                break;
            }
            level += 1;
            for v in 0..n {
                seen[v] |= next[v];
            }
            std::mem::swap(&mut frontier, &mut next);
            if seen.iter().all(|&s| s & full == full) {
                break;
            }
        }
        best = best.max(level);
    }
    best
}

/// Node counts per hop distance from an origin: `x[i] = |{u : dist(origin, u) = i}|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerVector {
    pub origin: NodeId,
    pub network: u64,
    pub entries: Vec<u64>,
}

impl LayerVector {
    /// Entries as reals, padded with zeros up to index `len - 1`.
    pub fn to_f64(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len.max(self.entries.len())];
        for (o, &x) in out.iter_mut().zip(&self.entries) {
            *o = x as f64;
        }
        out
    }
}

/// Layer sizes around `v`, indexed `0..=D`. Entries beyond the origin's
/// eccentricity are zero.
pub fn bfs_layers(net: &Network, v: NodeId) -> Result<LayerVector> {
    net.check_node(v)?;
    let mut entries = vec![0u64; net.diameter() + 1];
    for d in net.bfs_distances(v) {
        entries[d as usize] += 1;
    }
    Ok(LayerVector {
        origin: v,
        network: net.fingerprint(),
        entries,
    })
}
