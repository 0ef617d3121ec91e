use crate::error::{invalid, Result};
use crate::netmodel::{Network, NodeId, UNREACHED};
use crate::primitives::Clustering;

/// Subpath length and neighborhood radius exponents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubpathParams {
    /// Subpaths have `⌈D^len_exp⌉` nodes.
    pub len_exp: f64,
    /// Neighborhood radius `⌈D^radius_exp⌉`.
    pub radius_exp: f64,
}

impl Default for SubpathParams {
    fn default() -> Self {
        SubpathParams {
            len_exp: 0.12,
            radius_exp: 0.11,
        }
    }
}

impl SubpathParams {
    pub fn len(&self, d: usize) -> usize {
        (d.max(1) as f64).powf(self.len_exp).ceil().max(1.0) as usize
    }

    pub fn radius(&self, d: usize) -> u32 {
        (d.max(1) as f64).powf(self.radius_exp).ceil() as u32
    }
}

/// Splits a shortest path into consecutive subpaths and labels each one
/// good (`true`) when its whole neighborhood lies in one coarse cluster.
pub fn classify_subpaths(
    net: &Network,
    coarse: &Clustering,
    path: &[NodeId],
    params: &SubpathParams,
) -> Result<Vec<bool>> {
    if path.is_empty() {
        return invalid("path is empty");
    }
    for &v in path {
        net.check_node(v)?;
    }
    let from_start = net.bfs_distances(path[0]);
    for (k, &v) in path.iter().enumerate() {
        if from_start[v] != k as u32 {
            return invalid(format!("path is not a shortest path at position {k}"));
        }
    }
    if path.windows(2).any(|w| !net.neighbors(w[0]).contains(&w[1])) {
        return invalid("consecutive path nodes are not adjacent");
    }
    let d = net.diameter();
    let len = params.len(d);
    let radius = params.radius(d);
    let mut dist = vec![UNREACHED; net.n()];
    let mut touched = Vec::new();
    let mut labels = Vec::with_capacity(path.len().div_ceil(len));
    for chunk in path.chunks(len) {
        let center = coarse.center(chunk[0]);
        let mut good = true;
        let mut frontier: Vec<NodeId> = Vec::new();
        for &v in chunk {
            dist[v] = 0;
            touched.push(v);
            frontier.push(v);
        }
        let mut level = 0;
        while good && !frontier.is_empty() {
            if frontier.iter().any(|&v| coarse.center(v) != center) {
                good = false;
                break;
            }
            if level == radius {
                break;
            }
            let mut next = Vec::new();
            for &v in &frontier {
                for &w in net.neighbors(v) {
                    if dist[w] == UNREACHED {
                        dist[w] = level + 1;
                        touched.push(w);
                        next.push(w);
                    }
                }
            }
            frontier = next;
            level += 1;
        }
        for v in touched.drain(..) {
            dist[v] = UNREACHED;
        }
        labels.push(good);
    }
    Ok(labels)
}
