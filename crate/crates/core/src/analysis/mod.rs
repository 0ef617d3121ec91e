//! Computable quantities behind the center-distance bound: T/B/S sums, the
//! f and g transformations, k-sequences, claim checkers with fuzzers, and
//! Monte Carlo center-distance experiments.

mod claims;
mod fuzz;
mod montecarlo;
mod squant;
mod transform;

pub use claims::{
    bad_j_limit, check_goodj, check_goodj_profile, check_trans1, check_trans2, count_bad_j, count_bad_j_k,
    paper_j_range, window_condition, window_start, Comparison, GoodJ, PowerProfile, GOODJ_CONSTANT, REL_TOL,
};
pub use fuzz::{fuzz_claim, Claim, FuzzReport};
pub use montecarlo::{
    center_distance, cprop_experiment, mc_center_distance, CpropReport, CpropRow, Estimate, MIN_TRIALS,
};
pub use squant::{s_quantities, Kahan, SQuantities};
pub use transform::{k_sequence, transform_f, transform_g, transform_gf, KSequence, K_TOL};
