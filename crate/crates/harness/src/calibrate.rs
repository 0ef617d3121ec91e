use radionet::analysis::mc_center_distance;
use radionet::netmodel::{build_topology, Network, NodeId, Topology};
use radionet::primitives::{decay_round, edge_cut_rate, partition};
use radionet::protocols::JRange;
use radionet::radio::{Fidelity, Trace};
use rayon::prelude::*;

use crate::analyze::subpath_campaign;
use crate::config::{Calibrated, Observed, SCHEMA_VERSION};
use crate::error::Result;

/// Widening applied to every observed worst case.
pub const MARGIN: f64 = 1.25;

/// First seed of the calibration battery. Acceptance runs use small seeds.
pub const BATTERY_SEED: u64 = 10_000;

const BETAS: [f64; 3] = [0.02, 0.05, 0.1];

fn partition_battery() -> Result<Vec<Network>> {
    let tops = [
        Topology::Path { n: 512 },
        Topology::Grid { rows: 16, cols: 32 },
        Topology::RandomTree { n: 512 },
        Topology::GnpConnected { n: 512, p: 0.02 },
    ];
    Ok(tops
        .iter()
        .map(|t| build_topology(t, BATTERY_SEED))
        .collect::<radionet::Result<_>>()?)
}

/// Worst `max strong diameter·β/log n` over the battery.
pub fn diam_ratio(nets: &[Network], seeds_per: u64) -> Result<f64> {
    let jobs: Vec<(usize, f64, u64)> = (0..nets.len())
        .flat_map(|i| {
            BETAS
                .iter()
                .flat_map(move |&b| (0..seeds_per).map(move |s| (i, b, BATTERY_SEED + s)))
        })
        .collect();
    let ratios = jobs
        .par_iter()
        .map(|&(i, b, s)| {
            let net = &nets[i];
            let c = partition(net, b, s)?;
            Ok(c.max_strong_diameter(net) as f64 * b / radionet::log2_n(net.n()))
        })
        .collect::<radionet::Result<Vec<f64>>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Worst `cut rate/β` over the battery.
pub fn cut_ratio(nets: &[Network], trials: u64) -> Result<f64> {
    let jobs: Vec<(usize, f64)> = (0..nets.len())
        .flat_map(|i| BETAS.iter().map(move |&b| (i, b)))
        .collect();
    let ratios = jobs
        .par_iter()
        .map(|&(i, b)| Ok(edge_cut_rate(&nets[i], b, trials, BATTERY_SEED)? / b))
        .collect::<radionet::Result<Vec<f64>>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Worst `mean center distance/(2^j·log n/log D)` over the desk j-range.
pub fn cp_ratio(cases: &[(Network, NodeId)], trials: u64) -> Result<f64> {
    let jobs: Vec<(usize, u32)> = cases
        .iter()
        .enumerate()
        .flat_map(|(i, (net, _))| JRange::Desk.resolve(net.diameter()).into_iter().map(move |j| (i, j)))
        .collect();
    let ratios = jobs
        .par_iter()
        .map(|&(i, j)| {
            let (net, v) = &cases[i];
            let r = radionet::log2_n(net.n()) / radionet::log2_d(net.diameter());
            let est = mc_center_distance(net, *v, (-(j as f64)).exp2(), trials, BATTERY_SEED + j as u64)?;
            Ok(est.mean / ((j as f64).exp2() * r))
        })
        .collect::<radionet::Result<Vec<f64>>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Worst `mean bad subpaths/D^0.63` over paths of the given sizes.
pub fn bad_ratio(sizes: &[usize], seeds: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &n in sizes {
        let net = build_topology(&Topology::Path { n }, 0)?;
        let path: Vec<NodeId> = (0..n).collect();
        let seeds: Vec<u64> = (BATTERY_SEED..BATTERY_SEED + seeds).collect();
        let rows = subpath_campaign(&net, &path, &seeds)?;
        let mean = rows.iter().map(|r| r.bad as f64).sum::<f64>() / rows.len() as f64;
        worst = worst.max(mean / (net.diameter() as f64).powf(0.63));
    }
    Ok(worst)
}

/// Lowest empirical Decay reception frequency at the center of a star
/// whose first `k` leaves participate.
pub fn decay_min(leaves: usize, trials: u64) -> Result<f64> {
    let net = build_topology(&Topology::Star { n: leaves + 1 }, 0)?;
    let ks: Vec<usize> = (0..=leaves.ilog2())
        .map(|e| 1usize << e)
        .chain([3, 5, 6, 7])
        .filter(|&k| k <= leaves)
        .collect();
    let freqs = ks
        .par_iter()
        .map(|&k| {
            let parts: Vec<(NodeId, u64)> = (1..=k).map(|v| (v, v as u64)).collect();
            let mut heard = 0u64;
            for t in 0..trials {
                let mut trace = Trace::new(Fidelity::Faithful);
                let out = decay_round(&net, &parts, &[0], BATTERY_SEED + k as u64, t, &mut trace)?;
                heard += out.heard.len() as u64;
            }
            Ok(heard as f64 / trials as f64)
        })
        .collect::<radionet::Result<Vec<f64>>>()?;
    Ok(freqs.into_iter().fold(1.0, f64::min))
}

/// Battery sizes; `quick` shrinks trial counts for smoke runs.
#[derive(Debug, Clone, Copy)]
pub struct BatterySize {
    pub partitions_per_beta: u64,
    pub cut_trials: u64,
    pub cp_trials: u64,
    pub bad_seeds: u64,
    pub decay_leaves: usize,
    pub decay_trials: u64,
}

impl BatterySize {
    pub fn full() -> Self {
        BatterySize {
            partitions_per_beta: 40,
            cut_trials: 400,
            cp_trials: 2000,
            bad_seeds: 100,
            decay_leaves: 1024,
            decay_trials: 5000,
        }
    }

    pub fn quick() -> Self {
        BatterySize {
            partitions_per_beta: 2,
            cut_trials: 10,
            cp_trials: 100,
            bad_seeds: 4,
            decay_leaves: 64,
            decay_trials: 200,
        }
    }
}

/// Runs the calibration battery and derives the frozen constants.
pub fn calibrate(size: BatterySize) -> Result<Calibrated> {
    crate::campaign::thread_pool().install(|| {
        let nets = partition_battery()?;
        let path = build_topology(&Topology::Path { n: 1024 }, 0)?;
        let grid = build_topology(&Topology::Grid { rows: 32, cols: 32 }, 0)?;
        let observed = Observed {
            diam_ratio: diam_ratio(&nets, size.partitions_per_beta)?,
            cut_ratio: cut_ratio(&nets, size.cut_trials)?,
            cp_ratio: cp_ratio(&[(path, 512), (grid, 0)], size.cp_trials)?,
            bad_ratio: bad_ratio(&[1024, 2048], size.bad_seeds)?,
            decay_min: decay_min(size.decay_leaves, size.decay_trials)?,
        };
        let battery = vec![
            format!(
                "c_diam: path512, grid16x32, random_tree512, gnp512 p=0.02 (topology seed {BATTERY_SEED}) x beta {BETAS:?} x {} partitions",
                size.partitions_per_beta
            ),
            format!("c_cut: same networks and rates, {} partitions each", size.cut_trials),
            format!(
                "c_cp: path1024 from node 512 and grid32x32 from node 0, desk j-range, {} trials per j",
                size.cp_trials
            ),
            format!("c_bad: path1024 and path2048, coarse rate D^-0.5, {} seeds each", size.bad_seeds),
            format!(
                "p0: star with {} leaves, k in powers of two and 3,5,6,7 participants, {} Decay rounds each",
                size.decay_leaves, size.decay_trials
            ),
            format!("seeds start at {BATTERY_SEED}; constants are worst ratios times {MARGIN}, p0 divided by it"),
        ];
        Ok(Calibrated {
            schema: SCHEMA_VERSION,
            c_diam: round_up(observed.diam_ratio * MARGIN),
            c_cut: round_up(observed.cut_ratio * MARGIN),
            c_cp: round_up(observed.cp_ratio * MARGIN),
            c_bad: round_up(observed.bad_ratio * MARGIN),
            p0: round_down(observed.decay_min / MARGIN),
            margin: MARGIN,
            observed,
            battery,
        })
    })
}

fn round_up(x: f64) -> f64 {
    (x * 1000.0).ceil() / 1000.0
}

fn round_down(x: f64) -> f64 {
    (x * 1000.0).floor() / 1000.0
}
