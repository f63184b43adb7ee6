//! Exact-arithmetic engine for the ratio evaluation's distribution.
//!
//! All results in this module are exact rationals: Kolmogorov–Smirnov
//! suprema occur at jump points where floating-point ties would be
//! ambiguous, so nothing here rounds until a caller asks for a double.
//! Quadratic-cost operations carry explicit caps and refuse oversized
//! moduli instead of hanging.

pub mod cdf;
pub mod continuous;
pub mod farey;
pub mod fraction;
pub mod ks;
pub mod totient;

pub use cdf::{
    brute_force_cdf, brute_force_cdf_capped, eps0, eps1, ratio_cdf_by_walk, ratio_cdf_eval,
    BruteForceCdfTable, RatioCdf, DEFAULT_BRUTE_FORCE_CAP,
};
pub use continuous::{continuous_ratio_property_test, ContinuousRatioCheck};
pub use farey::{farey_enumerate, farey_enumerate_capped, FareyIterator};
pub use fraction::{ExactFraction, FractionError};
pub use ks::{
    ks_distance_direct, ks_distance_direct2, ks_distance_direct2_capped, ks_distance_direct_capped,
    ks_distance_ratio, ks_distance_ratio_capped, ks_interior_bound_check,
    ks_interior_bound_check_capped, ratio_ks_scan, ratio_ks_scan_capped, InteriorReport, KsReport,
    Side, DEFAULT_DIRECT2_KS_CAP, DEFAULT_DIRECT_KS_CAP, DEFAULT_KS_CAP,
};
pub use totient::{totient_sieve, value_count, value_count_asymptotic};

use thiserror::Error;

/// Exact arithmetic here stays within `u128` intermediates; this is the
/// largest modulus the engine accepts anywhere.
pub const MAX_THEORY_MODULUS: u64 = 1 << 32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TheoryError {
    #[error("modulus {m} too small: this operation needs M >= {min}")]
    ModulusTooSmall { m: u64, min: u64 },
    #[error("modulus {m} exceeds the exact engine's limit {limit}")]
    ModulusTooLarge { m: u64, limit: u64 },
    #[error("{what} refuses M={m}: above the cap {cap} (quadratic cost); raise the cap explicitly if you mean it")]
    CapExceeded { m: u64, cap: u64, what: &'static str },
    #[error("t={0} lies outside [0,1]")]
    OutsideUnitInterval(ExactFraction),
}
