//! Round-synchronous simulation of multi-hop radio networks without collision
//! detection.
//!
//! The crate is layered bottom-up:
//!
//! - [`netmodel`]: graphs, topology generators, BFS layers and keyed random streams.
//! - [`radio`]: the round engine, traces, charged costs and independent audits.
//! - [`primitives`]: Decay, exponential-shift partitions and per-cluster schedules.
//! - [`protocols`]: intra-cluster propagation, Compete, broadcast, leader election,
//!   the Decay broadcast baseline and subpath classification.
//! - [`analysis`]: layer-vector quantities, the f/g transforms, claim checkers and
//!   Monte Carlo estimators for distances to cluster centers.

pub mod analysis;
mod error;
pub mod netmodel;
pub mod primitives;
pub mod protocols;
pub mod radio;

pub use error::{Error, Result};

/// `⌈log2 n⌉`, at least 1. Used as the Decay length and as the schedule period unit.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 2 {
        1
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// `log2 n` as a real, clamped below at 1.
pub fn log2_n(n: usize) -> f64 {
    (n.max(2) as f64).log2()
}

/// `log2 D` as a real, clamped below at 1 so that ratios such as `log n / log D` stay finite.
pub fn log2_d(d: usize) -> f64 {
    (d.max(2) as f64).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_matches_definition() {
        assert_eq!(ceil_log2(1), 1);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(16), 4);
        assert_eq!(ceil_log2(17), 5);
        assert_eq!(ceil_log2(256), 8);
        assert_eq!(ceil_log2(1024), 10);
    }

    #[test]
    fn logs_are_clamped() {
        assert_eq!(log2_d(0), 1.0);
        assert_eq!(log2_d(1), 1.0);
        assert_eq!(log2_n(1024), 10.0);
    }
}
