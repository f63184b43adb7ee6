//! Monte-Carlo check that the ratio of two continuous uniforms is uniform.
//!
//! For independent `U(0,1)` variables the ratio `min/max` (with `0/0 := 0`)
//! is exactly `U(0,1)` again; this samples it from a caller-supplied source
//! and KS-tests the result. With a sound source the check fails with
//! probability equal to the significance level (1e-4 by default).

use crate::stats::{kolmogorov_p, ks_statistic_uniform};

pub const CONTINUOUS_TEST_LEVEL: f64 = 1e-4;

#[derive(Debug, Clone, Copy)]
pub struct ContinuousRatioCheck {
    pub n: usize,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub pass: bool,
}

/// Draw `n` pairs from `uniforms` (doubles in `[0,1)`), form `min/max`,
/// and KS-test against `U(0,1)` at the 1e-4 level.
pub fn continuous_ratio_property_test(
    n: usize,
    mut uniforms: impl FnMut() -> f64,
) -> ContinuousRatioCheck {
    assert!(n >= 1000, "need at least 1e3 pairs for a meaningful check");
    let mut ratios: Vec<f64> = Vec::with_capacity(n);
    for _ in 0..n {
        let u1 = uniforms();
        let u2 = uniforms();
        let hi = u1.max(u2);
        let z = if hi == 0.0 { 0.0 } else { u1.min(u2) / hi };
        ratios.push(z);
    }
    ratios.sort_by(|a, b| a.partial_cmp(b).expect("no NaNs from a uniform source"));
    let d = ks_statistic_uniform(&ratios);
    let p = kolmogorov_p(d, n);
    ContinuousRatioCheck { n, ks_statistic: d, p_value: p, pass: p > CONTINUOUS_TEST_LEVEL }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{GeneratorSpec, GeneratorState};
    use crate::transform::RawSource;

    fn splitmix_uniforms(seed: u64) -> impl FnMut() -> f64 {
        let mut g = GeneratorState::from_spec(&GeneratorSpec::parse("sm64", seed).unwrap()).unwrap();
        move || (g.next_raw() >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn strong_source_passes() {
        let check = continuous_ratio_property_test(100_000, splitmix_uniforms(42));
        assert!(check.pass, "D={} p={}", check.ks_statistic, check.p_value);
    }

    #[test]
    fn constant_source_fails() {
        let check = continuous_ratio_property_test(10_000, || 0.25);
        // All ratios are 1: a point mass at the far end.
        assert!(!check.pass);
        assert!(check.ks_statistic > 0.9);
    }

    #[test]
    fn zero_pairs_use_zero_convention() {
        // A source that sometimes emits exact zeros must not divide by zero.
        let mut i = 0u64;
        let check = continuous_ratio_property_test(1000, move || {
            i += 1;
            if i % 7 == 0 {
                0.0
            } else {
                (i % 101) as f64 / 101.0
            }
        });
        assert!(check.ks_statistic.is_finite());
    }
}
