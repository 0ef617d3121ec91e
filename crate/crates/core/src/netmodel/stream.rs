use rand_core::RngCore;

use crate::error::{invalid, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// What a stream of random draws is used for. Part of every stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Topology,
    Shift,
    DecayCoin,
    ClusterCoin,
    Sequence,
    Candidate,
    CandidateId,
    Trial,
    Fuzz,
    Derive,
}

impl Purpose {
    fn code(self) -> u64 {
        match self {
            Purpose::Topology => 1,
            Purpose::Shift => 2,
            Purpose::DecayCoin => 3,
            Purpose::ClusterCoin => 4,
            Purpose::Sequence => 5,
            Purpose::Candidate => 6,
            Purpose::CandidateId => 7,
            Purpose::Trial => 8,
            Purpose::Fuzz => 9,
            Purpose::Derive => 10,
        }
    }
}

/// Counter-based random stream keyed by `(seed, purpose, node, round)`.
///
/// Draws depend only on the key and the position within the stream, never on
/// the order in which streams are created or consumed.
#[derive(Debug, Clone)]
pub struct RandomStream {
    key: u64,
    counter: u64,
}

#[inline]
fn stream_key(seed: u64, purpose: Purpose, node: u64, round: u64) -> u64 {
    let mut k = mix64(seed ^ 0x6A09_E667_F3BC_C909);
    k = mix64(k ^ purpose.code().wrapping_mul(GOLDEN));
    k = mix64(k ^ node.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    mix64(k ^ round.wrapping_mul(0xA076_1D64_78BD_642F))
}

impl RandomStream {
    pub fn new(seed: u64, purpose: Purpose, node: u64, round: u64) -> Self {
        RandomStream {
            key: stream_key(seed, purpose, node, round),
            counter: 0,
        }
    }

    /// First 64-bit output of the stream with this label, without building it.
    #[inline]
    pub fn first(seed: u64, purpose: Purpose, node: u64, round: u64) -> u64 {
        mix64(stream_key(seed, purpose, node, round).wrapping_add(GOLDEN))
    }

    #[inline]
    pub fn next_word(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in `(0, 1]`.
    #[inline]
    pub fn uniform_open0(&mut self) -> f64 {
        ((self.next_word() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_word() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound`. `bound` must be positive.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = u64::MAX - (u64::MAX % bound + 1) % bound;
        loop {
            let w = self.next_word();
            if w <= zone {
                return w % bound;
            }
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        if p >= 1.0 {
            true
        } else if p <= 0.0 {
            false
        } else {
            self.uniform() < p
        }
    }
}

/// Exact coin with probability `2^-i`: the top `i` bits of a word are all zero.
#[inline]
pub fn halving_coin(word: u64, i: u32) -> bool {
    match i {
        0 => true,
        1..=63 => word >> (64 - i) == 0,
        _ => word == 0,
    }
}

/// Derives an independent sub-seed from a master seed and a label.
pub fn derive_seed(seed: u64, purpose: Purpose, a: u64, b: u64) -> u64 {
    RandomStream::first(seed, purpose, a, b ^ 0x5851_F42D_4C95_7F2D)
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        (self.next_word() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.next_word()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let w = self.next_word().to_le_bytes();
            chunk.copy_from_slice(&w[..chunk.len()]);
        }
    }
}

/// Inverse-CDF exponential draw for a given uniform `u ∈ (0, 1]`.
#[inline]
pub fn exponential_from_uniform(u: f64, beta: f64) -> f64 {
    let x = -u.ln() / beta;
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Draws `-ln(U)/beta` with `U` uniform in `(0, 1]`.
pub fn sample_exponential(stream: &mut RandomStream, beta: f64) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return invalid(format!("exponential rate must be positive, got {beta}"));
    }
    Ok(exponential_from_uniform(stream.uniform_open0(), beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_label_same_draws() {
        let mut a = RandomStream::new(7, Purpose::Shift, 3, 9);
        let mut b = RandomStream::new(7, Purpose::Shift, 3, 9);
        for _ in 0..100 {
            assert_eq!(a.next_word(), b.next_word());
        }
        assert_eq!(
            RandomStream::first(7, Purpose::Shift, 3, 9),
            RandomStream::new(7, Purpose::Shift, 3, 9).next_word()
        );
    }

    #[test]
    fn labels_separate_streams() {
        let base = RandomStream::first(1, Purpose::Shift, 0, 0);
        assert_ne!(base, RandomStream::first(2, Purpose::Shift, 0, 0));
        assert_ne!(base, RandomStream::first(1, Purpose::DecayCoin, 0, 0));
        assert_ne!(base, RandomStream::first(1, Purpose::Shift, 1, 0));
        assert_ne!(base, RandomStream::first(1, Purpose::Shift, 0, 1));
    }

    #[test]
    fn forced_uniforms_invert_the_cdf() {
        assert_eq!(exponential_from_uniform(1.0, 3.0), 0.0);
        assert!((exponential_from_uniform((-2.0f64).exp(), 1.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_positive_rate() {
        let mut s = RandomStream::new(0, Purpose::Shift, 0, 0);
        assert!(sample_exponential(&mut s, 0.0).is_err());
        assert!(sample_exponential(&mut s, -1.0).is_err());
        assert!(sample_exponential(&mut s, f64::NAN).is_err());
    }

    #[test]
    fn halving_coin_rates() {
        let mut s = RandomStream::new(11, Purpose::DecayCoin, 0, 0);
        let trials = 200_000;
        for i in 1..=4u32 {
            let hits = (0..trials).filter(|_| halving_coin(s.next_word(), i)).count();
            let p = hits as f64 / trials as f64;
            let expect = 0.5f64.powi(i as i32);
            assert!((p - expect).abs() < 0.005, "i={i}: {p}");
        }
        assert!(halving_coin(u64::MAX, 0));
        assert!(!halving_coin(u64::MAX, 64));
    }

    #[test]
    fn below_stays_in_range() {
        let mut s = RandomStream::new(5, Purpose::Fuzz, 0, 0);
        let mut seen = [0u32; 7];
        for _ in 0..7000 {
            seen[s.below(7) as usize] += 1;
        }
        assert!(seen.iter().all(|&c| c > 800));
    }
}
