//! Denominator multiplicities, the Euler totient and the zeta ratio that the
//! Knauf sum approaches above the transition.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::farey::{walk_unchecked, MediantFrame, NewPair};
use crate::sum::CompensatedSum;

pub const MAX_DIRICHLET_LEVEL: u32 = 30;
pub const MAX_DIRICHLET_DENOMINATOR: u64 = 1_000_000;

/// `phi_k(n)`: how many of the indices `1..=2^k` of level `k` carry
/// denominator `n`. The final fraction `1/1` is outside the summation range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirichletTable {
    pub level: u32,
    /// `counts[n]` for `n` in `0..=n_max`; `counts[0]` is always zero.
    pub counts: Vec<u64>,
}

impl DirichletTable {
    pub fn get(&self, n: u64) -> Option<u64> {
        self.counts.get(n as usize).copied()
    }

    pub fn n_max(&self) -> u64 {
        self.counts.len() as u64 - 1
    }
}

pub fn dirichlet_coefficients(k: u32, n_max: u64) -> Result<DirichletTable> {
    if k > MAX_DIRICHLET_LEVEL {
        return Err(Error::LevelTooLarge { level: k, max: MAX_DIRICHLET_LEVEL, hint: "" });
    }
    if n_max == 0 || n_max > MAX_DIRICHLET_DENOMINATOR {
        return Err(Error::Invalid("n_max must lie in 1..=1000000"));
    }
    let mut counts = alloc::vec![0u64; n_max as usize + 1];
    counts[1] = 1; // 0/1
    walk_unchecked(&MediantFrame::root(), 1, k, n_max, &mut |p: &NewPair| {
        counts[p.new.den as usize] += 1;
    });
    Ok(DirichletTable { level: k, counts })
}

/// Euler's totient by trial factorization.
pub fn euler_totient(n: u64) -> u64 {
    let mut n = n;
    let mut result = n;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Terms summed directly before the Euler–Maclaurin tail.
pub const ZETA_TERMS: u32 = 1_000_000;

/// Riemann zeta for real `s > 1`: direct series over `n < N` plus the
/// Euler–Maclaurin tail at `N`.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::Domain { what: "zeta argument (needs s > 1)", value: s });
    }
    if s.is_infinite() {
        return Ok(1.0);
    }
    let n = f64::from(ZETA_TERMS);
    let mut acc = CompensatedSum::new();
    // smallest terms first
    for i in (1..ZETA_TERMS).rev() {
        acc.add(libm::pow(f64::from(i), -s));
    }
    let ns = libm::pow(n, -s);
    acc.add(n * ns / (s - 1.0));
    acc.add(0.5 * ns);
    acc.add(s * ns / n / 12.0);
    acc.add(-s * (s + 1.0) * (s + 2.0) * ns / (n * n * n) / 720.0);
    Ok(acc.value())
}

/// `zeta(2 beta - 1) / zeta(2 beta)`, the `k -> infinity` limit of
/// `Z_k^K(2 beta)` for `beta > 1`.
pub fn zeta_ratio(beta: f64) -> Result<f64> {
    if !(beta > 1.0) {
        return Err(Error::Domain { what: "zeta_ratio beta (needs beta > 1)", value: beta });
    }
    if beta.is_infinite() {
        return Ok(1.0);
    }
    Ok(zeta(2.0 * beta - 1.0)? / zeta(2.0 * beta)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 { a } else { gcd(b, a % b) }
    }

    fn totient_by_gcd(n: u64) -> u64 {
        (1..=n).filter(|&m| gcd(m, n) == 1).count() as u64
    }

    #[test]
    fn totient_examples_and_oracle() {
        assert_eq!(euler_totient(1), 1);
        assert_eq!(euler_totient(12), 4);
        assert_eq!(euler_totient(7), 6);
        for n in 1..=500 {
            assert_eq!(euler_totient(n), totient_by_gcd(n), "n={n}");
        }
    }

    #[test]
    fn dirichlet_examples() {
        let t = dirichlet_coefficients(2, 10).unwrap();
        assert_eq!(&t.counts[..4], &[0, 1, 1, 2]);
        assert_eq!(t.counts[4..].iter().sum::<u64>(), 0);
        for k in 0..=12 {
            assert_eq!(dirichlet_coefficients(k, 5).unwrap().get(1), Some(1));
        }
        assert_eq!(dirichlet_coefficients(6, 5).unwrap().get(5), Some(4));
        assert!(dirichlet_coefficients(31, 5).is_err());
        assert!(dirichlet_coefficients(3, 0).is_err());
    }

    #[test]
    fn zeta_values() {
        // high-precision reference values
        assert!((zeta(2.0).unwrap() - core::f64::consts::PI * core::f64::consts::PI / 6.0).abs() < 1e-12);
        assert!((zeta(1.5).unwrap() - 2.612_375_348_685_488_3).abs() < 1e-11);
        assert!((zeta_ratio(2.0).unwrap() - 1.110_626_535_326_148_1).abs() < 1e-10);
        assert!((zeta_ratio(1.5).unwrap() - 1.368_432_777_620_205_9).abs() < 1e-10);
        assert!((zeta_ratio(40.0).unwrap() - 1.0).abs() < 1e-20);
        assert_eq!(zeta_ratio(f64::INFINITY).unwrap(), 1.0);
        assert!(zeta_ratio(1.0).is_err());
        assert!(zeta(0.5).is_err());
    }
}
