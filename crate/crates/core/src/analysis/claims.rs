use serde::Serialize;

use super::squant::{s_quantities, Kahan};
use super::transform::{k_sequence, transform_f, transform_g};
use crate::error::{invalid, Result};

/// Relative slack allowed when comparing both sides of an inequality.
pub const REL_TOL: f64 = 1e-9;

/// Outcome of a two-sided S comparison `lhs ≤ factor·rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub holds: bool,
    /// True when the right side is undefined and the check is vacuous.
    pub vacuous: bool,
    pub lhs: f64,
    pub rhs: f64,
}

impl Comparison {
    /// `1 - lhs/(factor·rhs)`; negative exactly when the inequality fails.
    pub fn margin(&self, factor: f64) -> f64 {
        if self.vacuous || self.lhs == 0.0 {
            1.0
        } else {
            1.0 - self.lhs / (factor * self.rhs)
        }
    }
}

fn compare(lhs: f64, rhs: f64, factor: f64) -> Comparison {
    Comparison {
        holds: lhs <= factor * rhs * (1.0 + REL_TOL),
        vacuous: false,
        lhs,
        rhs,
    }
}

/// `S_{x,β} ≤ 11·S_{f(x),β}`; vacuous when `f(x) = 0`.
pub fn check_trans1(x: &[f64], beta: f64) -> Result<Comparison> {
    let lhs = s_quantities(x, beta)?.s;
    let fx = transform_f(x);
    if fx.iter().all(|&v| v == 0.0) {
        return Ok(Comparison {
            holds: true,
            vacuous: true,
            lhs,
            rhs: f64::NAN,
        });
    }
    Ok(compare(lhs, s_quantities(&fx, beta)?.s, 11.0))
}

/// `S_{x,β} ≤ 2·S_{g(x),β}` for `x` supported on powers of two.
pub fn check_trans2(x: &[f64], beta: f64) -> Result<Comparison> {
    let gx = transform_g(x)?;
    let lhs = s_quantities(x, beta)?.s;
    Ok(compare(lhs, s_quantities(&gx, beta)?.s, 2.0))
}

/// A vector supported on powers of two, stored as `log2 x'_{2^i}`, so that
/// profiles with astronomically large `n` can be evaluated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerProfile {
    pub log_n: f64,
    pub log_d: f64,
    /// `log_x[i] = log2 x'_{2^i}`.
    pub log_x: Vec<f64>,
}

impl PowerProfile {
    /// Profile of a dense transformed vector of length `D + 1`.
    pub fn from_dense(xp: &[f64], n: usize, d: usize) -> Result<Self> {
        k_sequence(xp, n)?;
        let log_x = (0..usize::BITS)
            .map(|k| 1usize << k)
            .take_while(|&i| i < xp.len())
            .map(|i| xp[i].log2())
            .collect();
        PowerProfile::new(crate::log2_n(n), crate::log2_d(d), log_x)
    }

    /// Profile `log2 x'_1 = log_x1` followed by the ratios `k`.
    pub fn from_k(log_x1: f64, k: &[f64], log_n: f64, log_d: f64) -> Result<Self> {
        let mut log_x = Vec::with_capacity(k.len() + 1);
        let mut acc = log_x1;
        log_x.push(acc);
        for &ki in k {
            acc += ki;
            log_x.push(acc);
        }
        PowerProfile::new(log_n, log_d, log_x)
    }

    fn new(log_n: f64, log_d: f64, log_x: Vec<f64>) -> Result<Self> {
        if !(log_d >= 1.0 && log_n >= log_d && log_n.is_finite()) {
            return invalid(format!(
                "need 1 <= log D <= log n, got log D = {log_d}, log n = {log_n}"
            ));
        }
        if log_x.is_empty() || log_x.iter().any(|v| !v.is_finite()) {
            return invalid("profile needs finite entries");
        }
        Ok(PowerProfile { log_n, log_d, log_x })
    }

    pub fn k(&self) -> Vec<f64> {
        self.log_x.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `S_{x',β}` evaluated in the log domain.
    pub fn s(&self, beta: f64) -> f64 {
        let ln2 = std::f64::consts::LN_2;
        let logw: Vec<f64> = self
            .log_x
            .iter()
            .enumerate()
            .map(|(i, &lx)| lx * ln2 - (i as f64).exp2() * beta)
            .collect();
        let m = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (mut t, mut b) = (Kahan::default(), Kahan::default());
        for (i, &lw) in logw.iter().enumerate() {
            let w = (lw - m).exp();
            t.add((i as f64).exp2() * w);
            b.add(w);
        }
        t.value() / b.value()
    }

    /// `log n / log D`.
    pub fn ratio(&self) -> f64 {
        self.log_n / self.log_d
    }
}

/// First index of the windows tested for scale `j`:
/// `j + round(log2(log n/log D))`.
pub fn window_start(j: u32, ratio: f64) -> usize {
    j as usize + ratio.log2().round() as usize
}

/// Whether every window `[a, a+m]`, `m ≥ 8`, lying inside `k` has sum at most
/// `2^m·ratio`. Windows cut off by the end of `k` are not tested.
pub fn window_condition(k: &[f64], start: usize, ratio: f64) -> bool {
    let mass: f64 = k.iter().skip(start).filter(|&&v| v > 0.0).sum();
    window_condition_within(k, start, ratio, mass)
}

/// As [`window_condition`], given an upper bound `mass` on any window sum.
fn window_condition_within(k: &[f64], start: usize, ratio: f64, mass: f64) -> bool {
    let mut sum = 0.0;
    for (m, &km) in k.iter().skip(start).enumerate() {
        sum += km;
        let limit = (m as f64).exp2() * ratio * (1.0 + REL_TOL);
        if m >= 8 {
            if sum > limit {
                return false;
            }
            if limit >= mass {
                break;
            }
        }
    }
    true
}

/// Premise and conclusion of the good-scale claim for one `j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GoodJ {
    pub j: u32,
    pub condition: bool,
    /// No window of length at least 9 fits, so the premise holds vacuously.
    pub vacuous: bool,
    pub s: f64,
    /// `258·2^j·log n/log D`.
    pub limit: f64,
    pub bound: bool,
}

impl GoodJ {
    /// The implication `condition ⇒ bound`.
    pub fn implication(&self) -> bool {
        !self.condition || self.bound
    }
}

pub const GOODJ_CONSTANT: f64 = 258.0;

pub fn check_goodj_profile(p: &PowerProfile, j: u32) -> GoodJ {
    let r = p.ratio();
    let k = p.k();
    let start = window_start(j, r);
    let s = p.s((-(j as f64)).exp2());
    let limit = GOODJ_CONSTANT * (j as f64).exp2() * r;
    GoodJ {
        j,
        condition: window_condition(&k, start, r),
        vacuous: start + 8 >= k.len(),
        s,
        limit,
        bound: s <= limit * (1.0 + REL_TOL),
    }
}

/// Good-scale check on a dense transformed vector of length `D + 1`.
pub fn check_goodj(xp: &[f64], j: u32, n: usize, d: usize) -> Result<GoodJ> {
    Ok(check_goodj_profile(&PowerProfile::from_dense(xp, n, d)?, j))
}

/// Number of `j` in `[j_lo, j_hi]` whose window condition fails.
pub fn count_bad_j_k(k: &[f64], ratio: f64, j_lo: u32, j_hi: u32) -> usize {
    let mass: f64 = k.iter().filter(|&&v| v > 0.0).sum();
    (j_lo..=j_hi)
        .filter(|&j| !window_condition_within(k, window_start(j, ratio), ratio, mass))
        .count()
}

pub fn count_bad_j(xp: &[f64], n: usize, d: usize, j_lo: u32, j_hi: u32) -> Result<usize> {
    let p = PowerProfile::from_dense(xp, n, d)?;
    Ok(count_bad_j_k(&p.k(), p.ratio(), j_lo, j_hi))
}

/// Integer scales in `[0.01·log D, 0.1·log D]`.
pub fn paper_j_range(log_d: f64) -> Option<(u32, u32)> {
    let lo = (0.01 * log_d).ceil().max(0.0) as u32;
    let hi = (0.1 * log_d + 1e-12).floor() as u32;
    (lo <= hi && hi >= 1).then_some((lo.max(1), hi))
}

/// `0.04·log2 D`.
pub fn bad_j_limit(log_d: f64) -> f64 {
    0.04 * log_d
}
