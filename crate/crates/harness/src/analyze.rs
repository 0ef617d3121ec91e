use radionet::analysis::{CpropRow, Estimate};
use radionet::netmodel::{Network, NodeId, UNREACHED};
use radionet::primitives::partition;
use radionet::protocols::{classify_subpaths, SubpathParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

/// Coarse rate exponent used when classifying subpaths.
pub const COARSE_EXP: f64 = 0.5;

/// Bad-subpath count for one coarse partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubpathRow {
    pub seed: u64,
    pub subpaths: usize,
    pub good: usize,
    pub bad: usize,
}

/// A shortest path from `from` to `to`, inclusive.
pub fn shortest_path(net: &Network, from: NodeId, to: NodeId) -> Result<Vec<NodeId>> {
    net.check_node(from)?;
    net.check_node(to)?;
    let dist = net.bfs_distances(to);
    if dist[from] == UNREACHED {
        return config_err(format!("{to} is unreachable from {from}"));
    }
    let mut path = vec![from];
    let mut v = from;
    while v != to {
        v = *net
            .neighbors(v)
            .iter()
            .find(|&&w| dist[w] + 1 == dist[v])
            .expect("bfs predecessor exists");
        path.push(v);
    }
    Ok(path)
}

/// The two ends of a diameter-realizing shortest path: the node farthest
/// from 0, and the node farthest from that one.
pub fn diametral_pair(net: &Network) -> (NodeId, NodeId) {
    let far = |src: NodeId| {
        let d = net.bfs_distances(src);
        (0..net.n())
            .max_by_key(|&v| (d[v], std::cmp::Reverse(v)))
            .unwrap_or(src)
    };
    let a = far(0);
    (a, far(a))
}

/// Classifies subpaths of `path` under a coarse partition at rate
/// `D^-COARSE_EXP` for every seed. Rows follow the order of `seeds`.
pub fn subpath_campaign(net: &Network, path: &[NodeId], seeds: &[u64]) -> Result<Vec<SubpathRow>> {
    let beta = (net.diameter().max(1) as f64).powf(-COARSE_EXP);
    let params = SubpathParams::default();
    crate::campaign::thread_pool().install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let coarse = partition(net, beta, seed)?;
                let labels = classify_subpaths(net, &coarse, path, &params)?;
                let good = labels.iter().filter(|&&g| g).count();
                Ok(SubpathRow {
                    seed,
                    subpaths: labels.len(),
                    good,
                    bad: labels.len() - good,
                })
            })
            .collect()
    })
}

/// Mean center distances for several rates, one Monte Carlo run each.
pub fn mc_campaign(net: &Network, v: NodeId, betas: &[f64], trials: u64, seed: u64) -> Result<Vec<(f64, Estimate)>> {
    crate::campaign::thread_pool().install(|| {
        betas
            .par_iter()
            .map(|&b| Ok((b, radionet::analysis::mc_center_distance(net, v, b, trials, seed)?)))
            .collect()
    })
}

/// CSV with columns `j,beta,mean_dist,stderr,bound,met`.
pub fn cprop_csv(rows: &[CpropRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(["j", "beta", "mean_dist", "stderr", "bound", "met"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn subpath_csv(rows: &[SubpathRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(["seed", "subpaths", "good", "bad"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}
