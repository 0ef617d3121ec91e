use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::Write as _;
use std::sync::OnceLock;

use crate::error::{invalid, Result};
use crate::netmodel::{derive_seed, exponential_from_uniform, Network, NodeId, Purpose, RandomStream, UNREACHED};

/// One cluster: its center and members sorted by distance to the center, then id.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub center: NodeId,
    pub members: Vec<NodeId>,
}

/// Result of an exponential-shift partition.
#[derive(Debug, Clone)]
pub struct Clustering {
    beta: f64,
    center: Vec<NodeId>,
    delta: Vec<f64>,
    dist: Vec<u32>,
    group: Option<Vec<u32>>,
    clusters: Vec<Cluster>,
    index: Vec<u32>,
    diameters: OnceLock<Vec<u32>>,
}

/// Shift of node `v` for the partition drawn with `seed` and rate `beta`.
#[inline]
pub fn shift(seed: u64, v: NodeId, beta: f64) -> f64 {
    exponential_from_uniform(
        RandomStream::new(seed, Purpose::Shift, v as u64, 0).uniform_open0(),
        beta,
    )
}

/// Seed of trial `t` in Monte Carlo campaigns over partitions.
pub fn trial_seed(seed: u64, t: u64) -> u64 {
    derive_seed(seed, Purpose::Trial, t, 0)
}

/// Partitions `net`: each node draws `δ_v ~ Exp(beta)` and joins the center
/// `u` maximizing `δ_u − dist(u, v)`, ties going to the smaller id.
pub fn partition(net: &Network, beta: f64, seed: u64) -> Result<Clustering> {
    check_beta(beta)?;
    let delta: Vec<f64> = (0..net.n()).map(|v| shift(seed, v, beta)).collect();
    Ok(partition_with_shifts(net, beta, delta, None))
}

/// Partition in which distances are measured inside each group (for instance
/// inside each coarse cluster): nodes only compete for members of their own group.
pub fn partition_within(net: &Network, beta: f64, seed: u64, group: &[u32]) -> Result<Clustering> {
    check_beta(beta)?;
    if group.len() != net.n() {
        return invalid("group labels must cover every node");
    }
    let delta: Vec<f64> = (0..net.n()).map(|v| shift(seed, v, beta)).collect();
    Ok(partition_with_shifts(net, beta, delta, Some(group.to_vec())))
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return invalid(format!("partition rate must lie in (0,1], got {beta}"));
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    value: f64,
    center: NodeId,
    node: NodeId,
    dist: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| other.center.cmp(&self.center))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Whether `(value_a, a)` beats `(value_b, b)` under the argmax rule.
#[inline]
pub fn beats(value_a: f64, a: NodeId, value_b: f64, b: NodeId) -> bool {
    match value_a.total_cmp(&value_b) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a < b,
    }
}

/// Builds the clustering for given shifts with a best-first sweep over
/// `δ_u − d`, which settles every node at its argmax center.
pub fn partition_with_shifts(net: &Network, beta: f64, delta: Vec<f64>, group: Option<Vec<u32>>) -> Clustering {
    let n = net.n();
    let mut center = vec![usize::MAX; n];
    let mut dist = vec![UNREACHED; n];
    let mut best_value = vec![f64::NEG_INFINITY; n];
    let mut best_center = vec![usize::MAX; n];
    let mut heap = BinaryHeap::with_capacity(2 * n);
    for v in 0..n {
        best_value[v] = delta[v];
        best_center[v] = v;
        heap.push(Entry {
            value: delta[v],
            center: v,
            node: v,
            dist: 0,
        });
    }
    while let Some(e) = heap.pop() {
        if center[e.node] != usize::MAX {
            continue;
        }
        center[e.node] = e.center;
        dist[e.node] = e.dist;
        let d = e.dist + 1;
        let value = delta[e.center] - d as f64;
        for &w in net.neighbors(e.node) {
            if center[w] != usize::MAX {
                continue;
            }
            if let Some(g) = &group {
                if g[w] != g[e.node] {
                    continue;
                }
            }
            if beats(value, e.center, best_value[w], best_center[w]) {
                best_value[w] = value;
                best_center[w] = e.center;
                heap.push(Entry {
                    value,
                    center: e.center,
                    node: w,
                    dist: d,
                });
            }
        }
    }
    Clustering::assemble(beta, center, delta, dist, group)
}

impl Clustering {
    fn assemble(beta: f64, center: Vec<NodeId>, delta: Vec<f64>, dist: Vec<u32>, group: Option<Vec<u32>>) -> Self {
        let n = center.len();
        let mut order: Vec<NodeId> = (0..n).collect();
        order.sort_unstable_by_key(|&v| (center[v], dist[v], v));
        let mut clusters: Vec<Cluster> = Vec::new();
        let mut index = vec![0u32; n];
        for v in order {
            if clusters.last().is_none_or(|c| c.center != center[v]) {
                clusters.push(Cluster {
                    center: center[v],
                    members: Vec::new(),
                });
            }
            index[v] = (clusters.len() - 1) as u32;
            clusters.last_mut().expect("just pushed").members.push(v);
        }
        Clustering {
            beta,
            center,
            delta,
            dist,
            group,
            clusters,
            index,
            diameters: OnceLock::new(),
        }
    }

    /// Clustering with every node in one cluster around `root`, distances
    /// taken from the whole graph.
    pub fn single(net: &Network, root: NodeId) -> Self {
        let dist = net.bfs_distances(root);
        Clustering::assemble(1.0, vec![root; net.n()], vec![0.0; net.n()], dist, None)
    }

    /// Clustering with explicit centers; distances are recomputed inside the
    /// induced subgraphs. Centers must be self-centered and clusters connected.
    pub fn from_centers(net: &Network, centers: Vec<NodeId>) -> Result<Self> {
        if centers.len() != net.n() {
            return invalid("one center per node");
        }
        for (v, &c) in centers.iter().enumerate() {
            if c >= net.n() || centers[c] != c {
                return invalid(format!("center {c} of node {v} is not self-centered"));
            }
        }
        let dist = cluster_distances(net, &centers);
        if let Some(v) = dist.iter().position(|&d| d == UNREACHED) {
            return invalid(format!("node {v} not connected to its center inside its cluster"));
        }
        Ok(Clustering::assemble(1.0, centers, vec![0.0; net.n()], dist, None))
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[inline]
    pub fn center(&self, v: NodeId) -> NodeId {
        self.center[v]
    }

    pub fn centers(&self) -> &[NodeId] {
        &self.center
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    /// Hop distance from `v` to its center (equal to the distance inside the cluster).
    #[inline]
    pub fn dist_to_center(&self, v: NodeId) -> u32 {
        self.dist[v]
    }

    pub fn distances(&self) -> &[u32] {
        &self.dist
    }

    pub fn group(&self) -> Option<&[u32]> {
        self.group.as_deref()
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster_of(&self, v: NodeId) -> &Cluster {
        &self.clusters[self.index[v] as usize]
    }

    pub fn cluster_index(&self, v: NodeId) -> usize {
        self.index[v] as usize
    }

    /// Largest distance from a center to a member.
    pub fn max_radius(&self) -> u32 {
        self.dist.iter().copied().max().unwrap_or(0)
    }

    /// Strong diameter of every cluster, in cluster order.
    pub fn strong_diameters(&self, net: &Network) -> &[u32] {
        self.diameters.get_or_init(|| {
            let mut mark = vec![u32::MAX; net.n()];
            let mut seen = vec![UNREACHED; net.n()];
            let mut queue = VecDeque::new();
            self.clusters
                .iter()
                .enumerate()
                .map(|(ci, c)| {
                    for &v in &c.members {
                        mark[v] = ci as u32;
                    }
                    let tree = net_is_tree_on(net, &c.members, &mark, ci as u32);
                    let sources: Vec<NodeId> = if tree {
                        let far = farthest(net, c.center, &mark, ci as u32, &mut seen, &mut queue).0;
                        vec![far]
                    } else {
                        c.members.clone()
                    };
                    sources
                        .into_iter()
                        .map(|s| farthest(net, s, &mark, ci as u32, &mut seen, &mut queue).1)
                        .max()
                        .unwrap_or(0)
                })
                .collect()
        })
    }

    pub fn max_strong_diameter(&self, net: &Network) -> u32 {
        self.strong_diameters(net).iter().copied().max().unwrap_or(0)
    }

    /// CSV export: `node_id,center_id,delta,depth`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node_id,center_id,delta,depth\n");
        for v in 0..self.center.len() {
            let _ = writeln!(out, "{},{},{},{}", v, self.center[v], self.delta[v], self.dist[v]);
        }
        out
    }
}

fn net_is_tree_on(net: &Network, members: &[NodeId], mark: &[u32], ci: u32) -> bool {
    let inner: usize = members
        .iter()
        .map(|&v| net.neighbors(v).iter().filter(|&&w| mark[w] == ci).count())
        .sum();
    inner / 2 + 1 == members.len()
}

fn farthest(
    net: &Network,
    src: NodeId,
    mark: &[u32],
    ci: u32,
    seen: &mut [u32],
    queue: &mut VecDeque<NodeId>,
) -> (NodeId, u32) {
    let mut visited = vec![src];
    seen[src] = 0;
    queue.push_back(src);
    let mut best = (src, 0);
    while let Some(u) = queue.pop_front() {
        let du = seen[u];
        if du > best.1 || (du == best.1 && u < best.0) {
            best = (u, du);
        }
        for &w in net.neighbors(u) {
            if mark[w] == ci && seen[w] == UNREACHED {
                seen[w] = du + 1;
                visited.push(w);
                queue.push_back(w);
            }
        }
    }
    for v in visited {
        seen[v] = UNREACHED;
    }
    best
}

/// Distances to each node's center using only intra-cluster edges.
pub fn cluster_distances(net: &Network, centers: &[NodeId]) -> Vec<u32> {
    let mut dist = vec![UNREACHED; net.n()];
    let mut queue = VecDeque::new();
    for v in 0..net.n() {
        if centers[v] == v {
            dist[v] = 0;
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &w in net.neighbors(u) {
            if dist[w] == UNREACHED && centers[w] == centers[u] {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Fraction of cut edges averaged over `trials` independent partitions.
pub fn edge_cut_rate(net: &Network, beta: f64, trials: u64, seed: u64) -> Result<f64> {
    if trials == 0 {
        return invalid("at least one trial");
    }
    if net.edges().is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for t in 0..trials {
        let c = partition(net, beta, trial_seed(seed, t))?;
        let cut = net.edges().iter().filter(|&&(u, v)| c.center(u) != c.center(v)).count();
        total += cut as f64 / net.edges().len() as f64;
    }
    Ok(total / trials as f64)
}
