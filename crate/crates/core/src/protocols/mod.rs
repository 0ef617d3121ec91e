//! Intra-cluster propagation, Compete, broadcast, leader election, the Decay
//! broadcast baseline and subpath classification.

mod baseline;
mod compete;
mod config;
mod election;
mod icp;
mod subpaths;

pub use baseline::{decay_broadcast_baseline, BaselineOutcome};
pub use compete::{attachment_rate, broadcast, compete, precompute, CompeteOutcome, Plan};
pub use config::{CompeteConfig, Derived, JRange, Termination};
pub use election::{candidate_probability, elect_among, leader_election, ElectionOutcome, MAX_CANDIDATE_ROUNDS};
pub use icp::{intra_cluster_propagation, Fine, IcpParams, Layout};
pub use subpaths::{classify_subpaths, SubpathParams};
