//! Synchronous round engine, traces and trace audits.

pub mod audit;
mod engine;
mod run;
mod trace;

pub use engine::{step, Action, Medium};
pub use run::{run, Protocol, RunStatus};
pub use trace::{Charge, Fidelity, Lane, LaneOp, Learn, Message, Payload, RoundView, Trace, TraceSummary, Via};

/// Default round cap: `64·(D·log n/log D + log⁴ max(n, 64))`.
pub fn default_round_cap(n: usize, diameter: usize) -> u64 {
    let ln = crate::log2_n(n);
    let ld = crate::log2_d(diameter);
    let polylog = crate::log2_n(n.max(64)).powi(4);
    (64.0 * (diameter as f64 * ln / ld + polylog)).ceil() as u64
}
