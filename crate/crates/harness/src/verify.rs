use radionet::analysis::{fuzz_claim, Claim, FuzzReport};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

/// JSON report of a fuzzing campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub samples: u64,
    pub claims: Vec<FuzzReport>,
    pub violations: u64,
}

/// Parses a claim name; `goodjcond` is accepted for `goodj-cond`.
pub fn parse_claim(name: &str) -> Result<Claim> {
    let norm = name.trim().to_ascii_lowercase().replace(['-', '_'], "");
    match Claim::ALL.iter().find(|c| c.name().replace('-', "") == norm) {
        Some(&c) => Ok(c),
        None => config_err(format!(
            "unknown claim {name:?}; expected one of trans1, trans2, goodj, goodjcond"
        )),
    }
}

/// Fuzzes every claim with the same seed. Claims run in parallel; the
/// report keeps the requested order.
pub fn verify(claims: &[Claim], samples: u64, seed: u64) -> Result<VerifyReport> {
    use rayon::prelude::*;
    let reports = crate::campaign::thread_pool().install(|| {
        claims
            .par_iter()
            .map(|&c| fuzz_claim(c, samples, seed))
            .collect::<radionet::Result<Vec<_>>>()
    })?;
    let violations = reports.iter().map(|r| r.violations).sum();
    Ok(VerifyReport {
        seed,
        samples,
        claims: reports,
        violations,
    })
}
