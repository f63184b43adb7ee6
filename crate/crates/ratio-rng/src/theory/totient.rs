//! Counting the ratio's attainable values via a totient sieve.

use super::TheoryError;

/// Euler's totient for every index in `0..=n`, by sieve.
pub fn totient_sieve(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for p in 2..=n {
        if phi[p] == p as u64 {
            // p prime: multiply in (1 - 1/p) for every multiple.
            for multiple in (p..=n).step_by(p) {
                phi[multiple] -= phi[multiple] / p as u64;
            }
        }
    }
    phi
}

/// Number of distinct values the ratio evaluation can attain for modulus
/// `M > 2`: `Σ_{k=2}^{M−1} φ(k) + 2` (the Farey set plus `ε₀` and `1−ε₁`).
pub fn value_count(m: u64) -> Result<u64, TheoryError> {
    if m <= 2 {
        return Err(TheoryError::ModulusTooSmall { m, min: 3 });
    }
    let phi = totient_sieve(m - 1);
    Ok(phi[2..].iter().sum::<u64>() + 2)
}

/// Large-`M` approximation `3(M−1)²/π²` of the totient sum.
pub fn value_count_asymptotic(m: u64) -> f64 {
    let n = (m - 1) as f64;
    3.0 * n * n / (std::f64::consts::PI * std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::farey::FareyIterator;

    #[test]
    fn sieve_matches_known_prefix() {
        let phi = totient_sieve(12);
        assert_eq!(&phi[1..], &[1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4]);
    }

    #[test]
    fn value_count_examples() {
        assert_eq!(value_count(10).unwrap(), 29);
        assert_eq!(value_count(3).unwrap(), 3);
        assert!(value_count(2).is_err());
    }

    #[test]
    fn value_count_matches_farey_cardinality() {
        for m in [3u64, 4, 10, 100, 1000] {
            let farey = FareyIterator::order(m - 1).count() as u64;
            assert_eq!(value_count(m).unwrap(), farey + 2, "M={m}");
        }
    }

    #[test]
    fn asymptotic_examples() {
        assert!((value_count_asymptotic(10) - 24.62104762508808).abs() < 1e-12);
        // Tiny M: the formula still evaluates; no accuracy claim.
        assert!((value_count_asymptotic(3) - 12.0 / (std::f64::consts::PI * std::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_is_close_at_ten_thousand() {
        let exact = value_count(10_000).unwrap() as f64;
        let approx = value_count_asymptotic(10_000);
        assert!(((exact - approx - 2.0) / approx).abs() < 0.01);
    }
}
