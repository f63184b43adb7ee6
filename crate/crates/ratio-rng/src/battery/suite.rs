//! The six tests: classical uniformity and independence checks in the
//! Knuth / TestU01 tradition, each reporting an upper-tail p-value. The
//! verdict bands then flag both extremes, so impossibly-good fits (p near
//! 1) fail just like gross misfits (p near 0).

use crate::stats::{chi2_sf, kolmogorov_p, ks_statistic_uniform, poisson_upper_tail};

use super::{make_outcome, BatteryError, TestOutcome};

pub const KS_TEST: &str = "ks_uniform";
pub const CHI2_TEST: &str = "chi2_equidist";
pub const SERIAL_TEST: &str = "serial_pairs";
pub const GAP_TEST: &str = "gap";
pub const BIRTHDAY_TEST: &str = "birthday_spacings";
pub const COLLISIONS_TEST: &str = "collisions";

fn need(test: &'static str, needed: usize, got: usize) -> Result<(), BatteryError> {
    if got < needed {
        return Err(BatteryError::InsufficientSamples { test, needed, got });
    }
    Ok(())
}

#[inline]
fn cell(u: f64, cells: usize) -> usize {
    ((u * cells as f64) as usize).min(cells - 1)
}

/// Two-sided Kolmogorov–Smirnov against `U(0,1)`.
pub fn test_ks_uniform(samples: &[f64]) -> Result<TestOutcome, BatteryError> {
    need(KS_TEST, 100, samples.len())?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples are finite"));
    let d = ks_statistic_uniform(&sorted);
    let p = kolmogorov_p(d, samples.len());
    make_outcome(KS_TEST, d, p, samples.len() as u64)
}

/// Pearson chi-square over `bins` equal cells.
pub fn test_chi2_equidistribution(samples: &[f64], bins: usize) -> Result<TestOutcome, BatteryError> {
    assert!(bins >= 2, "need at least two bins");
    need(CHI2_TEST, 5 * bins, samples.len())?;
    let mut counts = vec![0u64; bins];
    for &u in samples {
        counts[cell(u, bins)] += 1;
    }
    let expected = samples.len() as f64 / bins as f64;
    let stat: f64 = counts.iter().map(|&c| {
        let d = c as f64 - expected;
        d * d / expected
    }).sum();
    let p = chi2_sf(stat, bins as u64 - 1);
    make_outcome(CHI2_TEST, stat, p, samples.len() as u64)
}

/// Chi-square on non-overlapping pairs over a `cells_per_axis²` grid.
pub fn test_serial_pairs(samples: &[f64], cells_per_axis: usize) -> Result<TestOutcome, BatteryError> {
    assert!(cells_per_axis >= 2);
    let cells = cells_per_axis * cells_per_axis;
    need(SERIAL_TEST, 10 * cells, samples.len())?;
    let pairs = samples.len() / 2;
    let mut counts = vec![0u64; cells];
    for pair in samples.chunks_exact(2) {
        let i = cell(pair[0], cells_per_axis);
        let j = cell(pair[1], cells_per_axis);
        counts[i * cells_per_axis + j] += 1;
    }
    let expected = pairs as f64 / cells as f64;
    let stat: f64 = counts.iter().map(|&c| {
        let d = c as f64 - expected;
        d * d / expected
    }).sum();
    let p = chi2_sf(stat, cells as u64 - 1);
    make_outcome(SERIAL_TEST, stat, p, (pairs * 2) as u64)
}

/// Knuth's gap test on the window `[alpha, beta)`: lengths of runs outside
/// the window, chi-squared against the geometric law.
pub fn test_gap(samples: &[f64], alpha: f64, beta: f64, max_gap: usize) -> Result<TestOutcome, BatteryError> {
    assert!((0.0..1.0).contains(&alpha) && alpha < beta && beta <= 1.0);
    assert!(max_gap >= 1);
    let p_hit = beta - alpha;
    let q = 1.0 - p_hit;
    // Keep the pooled tail cell's expected count at 5 or more.
    let required = (5.0 / (p_hit * q.powi(max_gap as i32))).ceil() as usize;
    need(GAP_TEST, required, samples.len())?;

    let mut counts = vec![0u64; max_gap + 1];
    let mut gap = 0usize;
    for &u in samples {
        if u >= alpha && u < beta {
            counts[gap.min(max_gap)] += 1;
            gap = 0;
        } else {
            gap += 1;
        }
    }
    let n_gaps: u64 = counts.iter().sum();
    if n_gaps == 0 {
        return make_outcome(GAP_TEST, f64::INFINITY, 0.0, samples.len() as u64);
    }
    let mut stat = 0.0;
    for (k, &c) in counts.iter().enumerate() {
        let prob = if k < max_gap { p_hit * q.powi(k as i32) } else { q.powi(max_gap as i32) };
        let expected = n_gaps as f64 * prob;
        let d = c as f64 - expected;
        stat += d * d / expected;
    }
    let p = chi2_sf(stat, max_gap as u64);
    make_outcome(GAP_TEST, stat, p, samples.len() as u64)
}

/// Marsaglia's birthday spacings: `draws` birthdays in `days` days per
/// replication; duplicate spacings totalled over all replications are
/// Poisson with mean `reps·draws³/(4·days)`.
pub fn test_birthday_spacings(samples: &[f64], days: u64, draws: usize) -> Result<TestOutcome, BatteryError> {
    assert!(draws >= 8 && days >= 2);
    need(BIRTHDAY_TEST, draws, samples.len())?;
    let reps = samples.len() / draws;
    let mut total_dups: u64 = 0;
    let mut birthdays: Vec<u64> = Vec::with_capacity(draws);
    let mut spacings: Vec<u64> = Vec::with_capacity(draws.saturating_sub(1));
    for rep in 0..reps {
        birthdays.clear();
        let base = rep * draws;
        for &u in &samples[base..base + draws] {
            birthdays.push(((u * days as f64) as u64).min(days - 1));
        }
        birthdays.sort_unstable();
        spacings.clear();
        for w in birthdays.windows(2) {
            spacings.push(w[1] - w[0]);
        }
        spacings.sort_unstable();
        total_dups += spacings.windows(2).filter(|w| w[0] == w[1]).count() as u64;
    }
    let lambda = reps as f64 * (draws as f64).powi(3) / (4.0 * days as f64);
    let p = poisson_upper_tail(total_dups, lambda);
    make_outcome(BIRTHDAY_TEST, total_dups as f64, p, (reps * draws) as u64)
}

/// Expected collisions per replication when throwing `balls` into `urns`:
/// the exact occupancy mean, not the `n²/2m` shorthand (the difference is
/// visible at calibration scale).
pub fn collision_lambda(urns: usize, balls: usize) -> f64 {
    let m = urns as f64;
    let n = balls as f64;
    n - m * (-((1.0f64 - 1.0 / m).ln() * n).exp_m1())
}

/// Knuth's collision test: balls into urns, counting `balls − occupied`,
/// totalled over replications against a Poisson null.
pub fn test_collisions(samples: &[f64], urns: usize, balls: usize) -> Result<TestOutcome, BatteryError> {
    assert!(urns.is_power_of_two() && urns >= 64, "urn count should be a power of two");
    assert!(balls >= 2);
    need(COLLISIONS_TEST, balls, samples.len())?;
    let reps = samples.len() / balls;
    let mut occupancy = vec![0u64; urns / 64];
    let mut total_collisions: u64 = 0;
    for rep in 0..reps {
        occupancy.fill(0);
        let mut occupied = 0u64;
        let base = rep * balls;
        for &u in &samples[base..base + balls] {
            let urn = cell(u, urns);
            let (word, bit) = (urn / 64, urn % 64);
            if occupancy[word] & (1 << bit) == 0 {
                occupancy[word] |= 1 << bit;
                occupied += 1;
            }
        }
        total_collisions += balls as u64 - occupied;
    }
    let lambda = reps as f64 * collision_lambda(urns, balls);
    let p = poisson_upper_tail(total_collisions, lambda);
    make_outcome(COLLISIONS_TEST, total_collisions as f64, p, (reps * balls) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery::Verdict;
    use crate::generators::{GeneratorSpec, GeneratorState};
    use crate::transform::RawSource;

    fn reference_samples(n: usize, seed: u64) -> Vec<f64> {
        let mut g = GeneratorState::from_spec(&GeneratorSpec::parse("sm64", seed).unwrap()).unwrap();
        (0..n).map(|_| ((g.next_raw() >> 11) as f64 + 0.5) / (1u64 << 53) as f64).collect()
    }

    #[test]
    fn ks_constant_stream_fails() {
        let outcome = test_ks_uniform(&vec![0.5; 1000]).unwrap();
        assert!((outcome.statistic - 0.5).abs() < 1e-12);
        assert!(outcome.p_value < 1e-10);
        assert_eq!(outcome.verdict, Verdict::Fail);
    }

    #[test]
    fn chi2_impossibly_perfect_counts_fail_high() {
        // Exactly equal bin counts: statistic 0, p = 1, extreme by the band.
        let bins = 16;
        let samples: Vec<f64> = (0..bins * 100).map(|i| (i % bins) as f64 / bins as f64 + 0.5 / bins as f64).collect();
        let outcome = test_chi2_equidistribution(&samples, bins).unwrap();
        assert_eq!(outcome.statistic, 0.0);
        assert!(outcome.p_value > 1.0 - 1e-10);
        assert_eq!(outcome.verdict, Verdict::Fail);
    }

    #[test]
    fn reference_passes_everything() {
        let samples = reference_samples(400_000, 7);
        for outcome in [
            test_ks_uniform(&samples[..100_000]).unwrap(),
            test_chi2_equidistribution(&samples, 1 << 10).unwrap(),
            test_serial_pairs(&samples, 32).unwrap(),
            test_gap(&samples, 0.0, 0.0625, 64).unwrap(),
            test_birthday_spacings(&samples[..262_144], 1 << 32, 4096).unwrap(),
            test_collisions(&samples, 1 << 20, 1 << 14).unwrap(),
        ] {
            assert_eq!(outcome.verdict, Verdict::Pass, "{}: p={}", outcome.test_name, outcome.p_value);
        }
    }

    #[test]
    fn insufficient_samples_refused_with_count() {
        match test_chi2_equidistribution(&[0.5; 10], 1024) {
            Err(BatteryError::InsufficientSamples { test, needed, got: 10 }) => {
                assert_eq!(test, CHI2_TEST);
                assert_eq!(needed, 5 * 1024);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(test_gap(&[0.5; 100], 0.0, 0.0625, 64).is_err());
    }

    #[test]
    fn birthday_detects_grid_structure() {
        // Values on a coarse power-of-two grid collapse the spacings.
        let m31 = (1u64 << 31) as f64;
        let samples: Vec<f64> = reference_samples(262_144, 3)
            .iter()
            .map(|u| ((u * m31) as u64 as f64 + 0.5) / m31)
            .collect();
        let outcome = test_birthday_spacings(&samples, 1 << 32, 4096).unwrap();
        assert_eq!(outcome.verdict, Verdict::Fail, "total={} p={}", outcome.statistic, outcome.p_value);
    }

    #[test]
    fn collisions_detect_narrow_support() {
        // All mass in 1/64 of the urns: collisions explode.
        let samples: Vec<f64> = reference_samples(1 << 19, 5).iter().map(|u| u / 64.0).collect();
        let outcome = test_collisions(&samples, 1 << 20, 1 << 14).unwrap();
        assert_eq!(outcome.verdict, Verdict::Fail);
    }

    #[test]
    fn gap_detects_missing_window() {
        // A stream that never enters [0, 1/16): every sample shifted up.
        let samples: Vec<f64> = reference_samples(100_000, 11).iter().map(|u| 0.0625 + u * 0.9374).collect();
        let outcome = test_gap(&samples, 0.0, 0.0625, 64).unwrap();
        assert_eq!(outcome.verdict, Verdict::Fail);
    }

    #[test]
    fn collision_lambda_matches_exact_mean() {
        // 2^14 balls in 2^20 urns: 127.328238 per replication, not 128.
        let lam = collision_lambda(1 << 20, 1 << 14);
        assert!((lam - 127.32823799984921).abs() < 1e-9, "{lam}");
    }

    #[test]
    fn serial_detects_dependence() {
        // Perfectly correlated pairs concentrate on the diagonal.
        let base = reference_samples(100_000, 13);
        let mut samples = Vec::with_capacity(200_000);
        for u in base {
            samples.push(u);
            samples.push(u);
        }
        let outcome = test_serial_pairs(&samples, 32).unwrap();
        assert_eq!(outcome.verdict, Verdict::Fail);
    }
}
