use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::netmodel::{Network, NodeId};
use crate::primitives::{shift, trial_seed};

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl Estimate {
    pub fn from_samples(xs: impl IntoIterator<Item = f64>) -> Estimate {
        let (mut n, mut mean, mut m2) = (0u64, 0.0, 0.0);
        for x in xs {
            n += 1;
            let d = x - mean;
            mean += d / n as f64;
            m2 += d * (x - mean);
        }
        let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        Estimate {
            mean,
            stderr: (var / n.max(1) as f64).sqrt(),
            trials: n,
        }
    }
}

pub const MIN_TRIALS: u64 = 100;

/// Distance from `v` to its center in the partition with seed `seed`,
/// computed from the shifts directly. `dist` holds BFS distances from `v`.
pub fn center_distance(dist: &[u32], beta: f64, seed: u64) -> u32 {
    let mut best = (f64::NEG_INFINITY, 0u32);
    for (u, &d) in dist.iter().enumerate() {
        let val = shift(seed, u, beta) - d as f64;
        if val > best.0 {
            best = (val, d);
        }
    }
    best.1
}

/// Mean distance from `v` to its cluster center over `trials` partitions
/// with seeds `trial_seed(seed, t)`.
pub fn mc_center_distance(net: &Network, v: NodeId, beta: f64, trials: u64, seed: u64) -> Result<Estimate> {
    net.check_node(v)?;
    if trials < MIN_TRIALS {
        return invalid(format!("need at least {MIN_TRIALS} trials, got {trials}"));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return invalid(format!("beta must lie in (0,1], got {beta}"));
    }
    let dist = net.bfs_distances(v);
    Ok(Estimate::from_samples(
        (0..trials).map(|t| center_distance(&dist, beta, trial_seed(seed, t)) as f64),
    ))
}

/// One scale of the center-distance experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpropRow {
    pub j: u32,
    pub beta: f64,
    pub mean_dist: f64,
    pub stderr: f64,
    /// `c_cp·2^j·log n/log D`.
    pub bound: f64,
    pub met: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpropReport {
    pub rows: Vec<CpropRow>,
    pub fraction: f64,
}

/// For each `j` in `[j_lo, j_hi]` estimates the mean center distance of `v`
/// at `β = 2^-j` and compares it to `c_cp·2^j·log n/log D`.
pub fn cprop_experiment(
    net: &Network,
    v: NodeId,
    j_lo: u32,
    j_hi: u32,
    trials_per_j: u64,
    c_cp: f64,
    seed: u64,
) -> Result<CpropReport> {
    if j_lo > j_hi || j_lo == 0 {
        return invalid(format!("j-range [{j_lo}, {j_hi}] is empty or starts at 0"));
    }
    let r = crate::log2_n(net.n()) / crate::log2_d(net.diameter());
    let mut rows = Vec::new();
    for j in j_lo..=j_hi {
        let beta = (-(j as f64)).exp2();
        let est = mc_center_distance(net, v, beta, trials_per_j, seed ^ j as u64)?;
        let bound = c_cp * (j as f64).exp2() * r;
        rows.push(CpropRow {
            j,
            beta,
            mean_dist: est.mean,
            stderr: est.stderr,
            bound,
            met: est.mean <= bound,
        });
    }
    let fraction = rows.iter().filter(|r| r.met).count() as f64 / rows.len() as f64;
    Ok(CpropReport { rows, fraction })
}
