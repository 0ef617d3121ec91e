use serde::Serialize;

use crate::error::{invalid, Result};

/// Compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// `T = Σ i·x_i·e^{-iβ}`, `B = Σ x_i·e^{-iβ}` and `S = T/B`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SQuantities {
    pub t: f64,
    pub b: f64,
    pub s: f64,
}

pub(crate) fn check_vector(x: &[f64]) -> Result<()> {
    if let Some(i) = x.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return invalid(format!("entry {i} is not a finite non-negative number: {}", x[i]));
    }
    Ok(())
}

/// Computes the T, B and S sums of `x` at rate `beta`. `S` is evaluated with
/// weights rescaled by the first non-zero index, so it stays finite even when
/// `T` and `B` underflow.
pub fn s_quantities(x: &[f64], beta: f64) -> Result<SQuantities> {
    check_vector(x)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return invalid(format!("beta must be positive, got {beta}"));
    }
    let Some(first) = x.iter().position(|&v| v > 0.0) else {
        return invalid("x has no positive entry");
    };
    let (mut t, mut b, mut ts, mut bs) = (Kahan::default(), Kahan::default(), Kahan::default(), Kahan::default());
    for (i, &xi) in x.iter().enumerate().skip(first) {
        if xi == 0.0 {
            continue;
        }
        let w = xi * (-(i as f64) * beta).exp();
        t.add(i as f64 * w);
        b.add(w);
        let ws = xi * (-((i - first) as f64) * beta).exp();
        ts.add(i as f64 * ws);
        bs.add(ws);
    }
    Ok(SQuantities {
        t: t.value(),
        b: b.value(),
        s: ts.value() / bs.value(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_at_zero_gives_zero() {
        let q = s_quantities(&[1.0, 0.0, 0.0, 0.0], 0.3).unwrap();
        assert_eq!(q.s, 0.0);
        assert_eq!(q.b, 1.0);
    }

    #[test]
    fn two_ones_at_ln2() {
        let q = s_quantities(&[1.0, 1.0], std::f64::consts::LN_2).unwrap();
        assert!((q.s - 1.0 / 3.0).abs() < 1e-15);
        assert!((q.t - 0.5).abs() < 1e-15);
        assert!((q.b - 1.5).abs() < 1e-15);
    }

    #[test]
    fn far_mass_does_not_underflow() {
        let mut x = vec![0.0; 5001];
        x[5000] = 1.0;
        let q = s_quantities(&x, 1.0).unwrap();
        assert_eq!(q.b, 0.0);
        assert_eq!(q.s, 5000.0);
    }

    #[test]
    fn all_ones_weight_lower_bound() {
        for d in [100usize, 1000, 10_000] {
            let x = vec![1.0; d + 1];
            let dd = d as f64;
            for beta in [dd.powf(-0.1), dd.powf(-0.05), dd.powf(-0.01)] {
                let q = s_quantities(&x, beta).unwrap();
                assert!(q.b >= 1.0 / (2.0 * beta));
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(s_quantities(&[0.0, 0.0], 1.0).is_err());
        assert!(s_quantities(&[1.0, -1.0], 1.0).is_err());
        assert!(s_quantities(&[1.0, f64::NAN], 1.0).is_err());
        assert!(s_quantities(&[1.0], 0.0).is_err());
    }

    #[test]
    fn kahan_beats_naive_sum() {
        let mut k = Kahan::default();
        let mut naive = 0.0;
        k.add(1.0);
        naive += 1.0;
        for _ in 0..1_000_000 {
            k.add(1e-16);
            naive += 1e-16;
        }
        assert_eq!(naive, 1.0);
        assert!((k.value() - (1.0 + 1e-10)).abs() < 1e-15);
    }
}
