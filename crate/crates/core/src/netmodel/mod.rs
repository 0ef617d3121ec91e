//! Graphs, topology generators, BFS layers and keyed randomness.

mod network;
mod stream;
mod topology;

pub use network::{bfs_layers, LayerVector, Network, NodeId, UNREACHED};
pub use stream::{
    derive_seed, exponential_from_uniform, halving_coin, mix64, sample_exponential, Purpose, RandomStream,
};
pub use topology::{build_topology, Topology, GNP_RETRIES};
