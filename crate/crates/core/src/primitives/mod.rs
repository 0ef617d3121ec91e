//! Decay, exponential-shift partitions and per-cluster schedules.

mod decay;
mod packet;
mod partition;
mod schedule;

pub use decay::{decay_coin, decay_floor, decay_len, decay_round, decay_success_probability, DecayOutcome};
pub use packet::Packet;
pub use partition::{
    beats, cluster_distances, edge_cut_rate, partition, partition_with_shifts, partition_within, shift, trial_seed,
    Cluster, Clustering,
};
pub use schedule::{build_schedules, schedule_broadcast, Direction, ScheduleParams, Schedules};
