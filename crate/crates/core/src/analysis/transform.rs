use serde::Serialize;

use super::squant::check_vector;
use crate::error::{invalid, Result};

fn powers_of_two(len: usize) -> impl Iterator<Item = usize> {
    (0..usize::BITS).map(|k| 1usize << k).take_while(move |&i| i < len)
}

/// `f(x)_i = Σ_{ℓ=2i}^{4i-1} x_ℓ` at powers of two, zero elsewhere. Indices
/// past the end contribute nothing.
pub fn transform_f(x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for i in powers_of_two(x.len()) {
        let lo = (2 * i).min(x.len());
        let hi = (4 * i).min(x.len());
        out[i] = x[lo..hi].iter().sum();
    }
    out
}

/// `g(x)_i = Σ_{ℓ≤i} ℓ·x_ℓ / i` at powers of two, zero elsewhere. `x` must
/// vanish off the powers of two.
pub fn transform_g(x: &[f64]) -> Result<Vec<f64>> {
    check_vector(x)?;
    if let Some(i) = (0..x.len()).find(|&i| !i.is_power_of_two() && x[i] != 0.0) {
        return invalid(format!("x is non-zero at index {i}, which is not a power of two"));
    }
    let mut out = vec![0.0; x.len()];
    let mut acc = 0.0;
    let mut next = 1;
    for (i, &xi) in x.iter().enumerate() {
        acc += i as f64 * xi;
        if i == next {
            out[i] = acc / i as f64;
            next *= 2;
        }
    }
    Ok(out)
}

/// `g(f(x))`.
pub fn transform_gf(x: &[f64]) -> Result<Vec<f64>> {
    check_vector(x)?;
    transform_g(&transform_f(x))
}

/// Base-2 log ratios of consecutive power-of-two entries of a transformed
/// vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KSequence {
    /// `k[i] = log2(x'_{2^{i+1}} / x'_{2^i})`.
    pub k: Vec<f64>,
}

/// Tolerance on the `k ≥ -1` and `Σ k ≤ log n` checks.
pub const K_TOL: f64 = 1e-9;

/// Builds the k-sequence of `xp` and checks `k_i ≥ -1` and that every prefix
/// sum stays at most `log2 n`.
pub fn k_sequence(xp: &[f64], n: usize) -> Result<KSequence> {
    check_vector(xp)?;
    let idx: Vec<usize> = powers_of_two(xp.len()).collect();
    if let Some(&i) = idx.iter().find(|&&i| xp[i] <= 0.0) {
        return invalid(format!("x' has a zero entry at power-of-two index {i}"));
    }
    let k: Vec<f64> = idx.windows(2).map(|w| (xp[w[1]] / xp[w[0]]).log2()).collect();
    let log_n = crate::log2_n(n);
    let mut prefix = 0.0;
    for (i, &ki) in k.iter().enumerate() {
        if ki < -1.0 - K_TOL {
            return invalid(format!("k_{i} = {ki} is below -1"));
        }
        prefix += ki;
        if prefix > log_n + K_TOL {
            return invalid(format!("prefix sum {prefix} at {i} exceeds log2 n = {log_n}"));
        }
    }
    Ok(KSequence { k })
}
