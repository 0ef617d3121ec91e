use serde::{Deserialize, Serialize};

use super::claims::{
    bad_j_limit, check_goodj_profile, check_trans1, check_trans2, count_bad_j_k, paper_j_range, PowerProfile,
};
use crate::error::Result;
use crate::netmodel::{Purpose, RandomStream};

/// Claims checked by the fuzzers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    Trans1,
    Trans2,
    Goodj,
    GoodjCond,
}

impl Claim {
    pub const ALL: [Claim; 4] = [Claim::Trans1, Claim::Trans2, Claim::Goodj, Claim::GoodjCond];

    pub fn name(self) -> &'static str {
        match self {
            Claim::Trans1 => "trans1",
            Claim::Trans2 => "trans2",
            Claim::Goodj => "goodj",
            Claim::GoodjCond => "goodj-cond",
        }
    }
}

/// Aggregate result of fuzzing one claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub claim: Claim,
    pub samples: u64,
    pub violations: u64,
    /// Samples whose premise was false or vacuous.
    pub vacuous: u64,
    /// Smallest `1 - lhs/rhs` seen on a non-vacuous sample.
    pub worst_margin: f64,
}

impl FuzzReport {
    fn new(claim: Claim) -> Self {
        FuzzReport {
            claim,
            samples: 0,
            violations: 0,
            vacuous: 0,
            worst_margin: f64::INFINITY,
        }
    }

    fn record(&mut self, vacuous: bool, margin: f64) {
        self.samples += 1;
        if vacuous {
            self.vacuous += 1;
            return;
        }
        if margin < 0.0 {
            self.violations += 1;
        }
        self.worst_margin = self.worst_margin.min(margin);
    }
}

fn stream(seed: u64, claim: Claim, s: u64) -> RandomStream {
    RandomStream::new(seed, Purpose::Fuzz, claim as u64, s)
}

fn uniform_in(r: &mut RandomStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * r.uniform()
}

/// Random non-negative vector of length at most 1024 with entries up to
/// `1024`, drawn from several shapes.
fn dense_vector(r: &mut RandomStream) -> Vec<f64> {
    let len = 2 + r.below(1023) as usize;
    let cap = 1024.0;
    let mut x = vec![0.0; len];
    match r.below(5) {
        0 => x.iter_mut().for_each(|v| *v = r.below(cap as u64 + 1) as f64),
        1 => {
            for _ in 0..1 + r.below(4) {
                let i = r.below(len as u64) as usize;
                x[i] = 1.0 + r.below(cap as u64) as f64;
            }
        }
        2 => {
            let g = uniform_in(r, -0.05, 0.05);
            x.iter_mut()
                .enumerate()
                .for_each(|(i, v)| *v = (g * i as f64).exp().min(cap).round());
        }
        3 => x.iter_mut().for_each(|v| *v = uniform_in(r, 0.0, cap)),
        _ => {
            let peak = r.below(len as u64) as f64;
            let w = 1.0 + r.below(64) as f64;
            x.iter_mut()
                .enumerate()
                .for_each(|(i, v)| *v = (cap * (-((i as f64 - peak) / w).powi(2)).exp()).round());
        }
    }
    if x.iter().all(|&v| v == 0.0) {
        x[r.below(len as u64) as usize] = 1.0;
    }
    x
}

fn beta_in_range(r: &mut RandomStream, len: usize) -> f64 {
    let d = (len - 1).max(1) as f64;
    uniform_in(r, d.powf(-0.1), d.powf(-0.01))
}

/// Random k-sequence with `k_i ≥ -1` and all prefix sums at most `log_n`.
fn k_sequence(r: &mut RandomStream, len: usize, log_n: f64, ratio: f64) -> Vec<f64> {
    let mut k = vec![0.0; len];
    let mode = r.below(3);
    let p_neg = uniform_in(r, 0.0, 0.6);
    let mut prefix = 0.0;
    let spike = 256.0 * ratio;
    let packed_gap = 9 + r.below(8) as usize;
    let first = r.below(len as u64 / 4 + 1) as usize;
    for (i, ki) in k.iter_mut().enumerate() {
        let room = log_n - prefix;
        let v = match mode {
            0 => {
                if r.uniform() < p_neg {
                    -1.0
                } else if r.uniform() < 0.05 {
                    uniform_in(r, 0.0, room.max(0.0))
                } else {
                    uniform_in(r, -1.0, 1.0)
                }
            }
            1 => {
                if i >= first && (i - first).is_multiple_of(packed_gap) && room > spike {
                    spike * uniform_in(r, 1.0, 1.05)
                } else if i < first {
                    -1.0
                } else {
                    0.0
                }
            }
            _ => {
                if r.uniform() < p_neg {
                    -1.0
                } else {
                    room.max(0.0) * r.uniform() * r.uniform() * 0.5
                }
            }
        };
        let v = v.max(-1.0).min(room.max(-1.0));
        *ki = v;
        prefix += v;
    }
    k
}

/// `log D` and `log n` for a synthetic profile, large enough for windows of
/// length 9 and for spikes above `256·log n/log D`.
fn sizes(r: &mut RandomStream) -> (f64, f64) {
    let log_d = uniform_in(r, 10.0, 4000.0).floor();
    let log_n = log_d * uniform_in(r, 1.0, 4.0);
    (log_d, log_n)
}

/// Fuzzes one claim over `samples` generated inputs.
pub fn fuzz_claim(claim: Claim, samples: u64, seed: u64) -> Result<FuzzReport> {
    let mut rep = FuzzReport::new(claim);
    for s in 0..samples {
        let mut r = stream(seed, claim, s);
        match claim {
            Claim::Trans1 => {
                let x = dense_vector(&mut r);
                let beta = beta_in_range(&mut r, x.len());
                let c = check_trans1(&x, beta)?;
                rep.record(c.vacuous, c.margin(11.0));
            }
            Claim::Trans2 => {
                let mut x = dense_vector(&mut r);
                for (i, v) in x.iter_mut().enumerate() {
                    if !i.is_power_of_two() {
                        *v = 0.0;
                    }
                }
                if x.iter().all(|&v| v == 0.0) {
                    x[1] = 1.0;
                }
                let beta = beta_in_range(&mut r, x.len());
                let c = check_trans2(&x, beta)?;
                rep.record(c.vacuous, c.margin(2.0));
            }
            Claim::Goodj => {
                let (log_d, log_n) = sizes(&mut r);
                let len = log_d as usize;
                let k = k_sequence(&mut r, len, log_n, log_n / log_d);
                let max_prefix = k.iter().scan(0.0, |a, &v| {
                    *a += v;
                    Some(*a)
                });
                let top = max_prefix.fold(0.0f64, f64::max);
                let log_x1 = 1.0 + r.uniform() * (log_n - top).max(0.0);
                let p = PowerProfile::from_k(log_x1, &k, log_n, log_d)?;
                let j = 1 + r.below((0.1 * log_d) as u64 + 1) as u32;
                let g = check_goodj_profile(&p, j);
                rep.record(!g.condition || g.vacuous, 1.0 - g.s / g.limit);
            }
            Claim::GoodjCond => {
                let (log_d, log_n) = sizes(&mut r);
                let k = k_sequence(&mut r, log_d as usize, log_n, log_n / log_d);
                let (lo, hi) = paper_j_range(log_d).expect("log D >= 10");
                let count = count_bad_j_k(&k, log_n / log_d, lo, hi);
                rep.record(false, 1.0 - count as f64 / bad_j_limit(log_d));
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_k_sequences_are_valid() {
        for s in 0..200 {
            let mut r = stream(1, Claim::Goodj, s);
            let (log_d, log_n) = sizes(&mut r);
            let k = k_sequence(&mut r, log_d as usize, log_n, log_n / log_d);
            let mut prefix = 0.0;
            for &v in &k {
                assert!(v >= -1.0);
                prefix += v;
                assert!(prefix <= log_n + 1e-9);
            }
        }
    }

    #[test]
    fn small_fuzz_runs_clean() {
        for claim in Claim::ALL {
            let rep = fuzz_claim(claim, 200, 5).unwrap();
            assert_eq!(rep.samples, 200);
            assert_eq!(rep.violations, 0, "{rep:?}");
        }
    }
}
