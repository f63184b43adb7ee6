//! The exact distribution of the ratio evaluation under ideal inputs.
//!
//! For two independent uniforms on `{0,…,M−1}` the ratio output `Y` has a
//! purely atomic distribution supported on `{ε₀} ∪ D_M ∪ {1−ε₁}`:
//!
//! * `P(Y = ε₀) = 2ε₀` and `P(Y = 1−ε₁) = 2ε₁`;
//! * `P(Y = k/l) = 2⌊(M−1)/l⌋/M²` for each reduced `k/l` in `D_M`;
//! * on `[1/(M−1), 1−ε₁)` the CDF has the closed form
//!   `2ε₀ + (2/M²)·Σ_{k=1}^{M−1} ⌊tk⌋`.
//!
//! Everything here is exact rational arithmetic; `brute_force_cdf`
//! re-derives the same quantities by enumerating all `M²` input pairs and
//! acts as the independent oracle for the closed form.

use num::bigint::BigInt;
use num::integer::{gcd, Integer};
use num::rational::BigRational;
use num::{ToPrimitive, Zero};

use super::farey::FareyIterator;
use super::fraction::ExactFraction;
use super::TheoryError;
use crate::transform::{ratio_branch, RatioKind};

pub const DEFAULT_BRUTE_FORCE_CAP: u64 = 512;
pub const DEFAULT_CDF_MATERIALIZE_CAP: u64 = 1 << 12;

pub(crate) fn check_m(m: u64, min: u64) -> Result<(), TheoryError> {
    if m < min {
        return Err(TheoryError::ModulusTooSmall { m, min });
    }
    if m > super::MAX_THEORY_MODULUS {
        return Err(TheoryError::ModulusTooLarge { m, limit: super::MAX_THEORY_MODULUS });
    }
    Ok(())
}

fn check_unit_interval(t: &ExactFraction) -> Result<(), TheoryError> {
    if t < &ExactFraction::zero() || t > &ExactFraction::one() {
        return Err(TheoryError::OutsideUnitInterval(t.clone()));
    }
    Ok(())
}

/// `ε₀` and `ε₁` as exact fractions with numerators over `2M²`.
pub(crate) fn eps_numerators(m: u64) -> (u128, u128) {
    let m = m as u128;
    (m - 1 + m / 2, 2 * m - 1 - m / 2)
}

pub fn eps0(m: u64) -> ExactFraction {
    let (n0, _) = eps_numerators(m);
    ExactFraction::ratio_u128(n0, 2 * (m as u128) * (m as u128))
}

pub fn eps1(m: u64) -> ExactFraction {
    let (_, n1) = eps_numerators(m);
    ExactFraction::ratio_u128(n1, 2 * (m as u128) * (m as u128))
}

/// `Σ_{k=1}^{M−1} ⌊tk⌋` for `t = a/b ≥ 0`.
fn floor_sum(m: u64, t: &BigRational) -> BigInt {
    let a = t.numer();
    let b = t.denom();
    // Fast path keeps everything in u128.
    if let (Some(a), Some(b)) = (a.to_u64(), b.to_u64()) {
        if m <= 1 << 20 {
            let (a, b) = (a as u128, b as u128);
            let mut sum: u128 = 0;
            for k in 1..m as u128 {
                sum += a * k / b;
            }
            return BigInt::from(sum);
        }
    }
    let mut sum = BigInt::zero();
    for k in 1..m {
        sum += (a * BigInt::from(k)).div_floor(b);
    }
    sum
}

/// The four-branch closed form of `P(Y ≤ t)`.
pub fn ratio_cdf_eval(m: u64, t: &ExactFraction) -> Result<ExactFraction, TheoryError> {
    check_m(m, 3)?;
    check_unit_interval(t)?;
    let (e0n, e1n) = eps_numerators(m);
    let m2 = (m as u128) * (m as u128);
    let eps0 = ExactFraction::ratio_u128(e0n, 2 * m2);
    if t < &eps0 {
        return Ok(ExactFraction::zero());
    }
    let first_proper = ExactFraction::ratio_u128(1, m as u128 - 1);
    if t < &first_proper {
        return Ok(ExactFraction::ratio_u128(e0n, m2));
    }
    let upper = ExactFraction::ratio_u128(2 * m2 - e1n, 2 * m2);
    if t >= &upper {
        return Ok(ExactFraction::one());
    }
    let sum = floor_sum(m, t.as_rational());
    let numer = BigInt::from(e0n) + BigInt::from(2u8) * sum;
    Ok(ExactFraction::new(numer, BigInt::from(m2)).expect("nonzero denominator"))
}

/// `P(Y ≤ t)` rebuilt by walking the ordered jump set and accumulating
/// masses; same answer as [`ratio_cdf_eval`] through a different route.
pub fn ratio_cdf_by_walk(m: u64, t: &ExactFraction) -> Result<ExactFraction, TheoryError> {
    check_m(m, 3)?;
    check_unit_interval(t)?;
    let cap = super::ks::DEFAULT_KS_CAP;
    if m > cap {
        return Err(TheoryError::CapExceeded { m, cap, what: "ratio_cdf_by_walk" });
    }
    let (e0n, e1n) = eps_numerators(m);
    let m_ = m as u128;
    let m2 = m_ * m_;
    let mut cum: u128 = 0;
    let eps0 = ExactFraction::ratio_u128(e0n, 2 * m2);
    if t >= &eps0 {
        cum += e0n;
        for (k, l) in FareyIterator::order(m - 1) {
            if !leq_fraction(k as u128, l as u128, t) {
                break;
            }
            cum += 2 * ((m_ - 1) / l as u128);
        }
        if leq_fraction(2 * m2 - e1n, 2 * m2, t) {
            cum += e1n;
        }
    }
    Ok(ExactFraction::ratio_u128(cum, m2))
}

/// The exact output value for one input pair, as a reduced fraction over
/// machine integers.
pub(crate) fn exact_ratio_value(x1: u64, x2: u64, m: u64) -> (u128, u128) {
    let m_ = m as u128;
    let (e0n, e1n) = eps_numerators(m);
    let two_m2 = 2 * m_ * m_;
    let (num, den) = match ratio_branch(x1, x2, m_ / 2) {
        RatioKind::Eps0 => (e0n, two_m2),
        RatioKind::Eps1Complement => (two_m2 - e1n, two_m2),
        RatioKind::ProperRatio => (x1.min(x2) as u128, x1.max(x2) as u128),
    };
    let g = gcd(num, den);
    (num / g, den / g)
}

fn leq_fraction(num: u128, den: u128, t: &ExactFraction) -> bool {
    if let (Some(a), Some(b)) = (t.numer().to_u128(), t.denom().to_u128()) {
        if a < 1 << 64 && b < 1 << 64 {
            return num * b <= a * den;
        }
    }
    BigInt::from(num) * t.denom() <= t.numer() * BigInt::from(den)
}

/// Oracle: `#{(x₁,x₂) : h(x₁,x₂) ≤ t} / M²` by exhaustive enumeration with
/// exact comparisons. O(M²); refuses `m` above `cap`.
pub fn brute_force_cdf_capped(m: u64, t: &ExactFraction, cap: u64) -> Result<ExactFraction, TheoryError> {
    check_m(m, 3)?;
    check_unit_interval(t)?;
    if m > cap {
        return Err(TheoryError::CapExceeded { m, cap, what: "brute_force_cdf" });
    }
    let mut count: u128 = 0;
    for x1 in 0..m {
        for x2 in 0..m {
            let (num, den) = exact_ratio_value(x1, x2, m);
            if leq_fraction(num, den, t) {
                count += 1;
            }
        }
    }
    Ok(ExactFraction::ratio_u128(count, (m as u128) * (m as u128)))
}

pub fn brute_force_cdf(m: u64, t: &ExactFraction) -> Result<ExactFraction, TheoryError> {
    brute_force_cdf_capped(m, t, DEFAULT_BRUTE_FORCE_CAP)
}

/// All `M²` pair outputs bucketed into a sorted table of distinct values
/// with cumulative counts; a reusable form of the brute-force oracle.
pub struct BruteForceCdfTable {
    m: u64,
    // (value numerator, value denominator, cumulative pair count)
    entries: Vec<(u128, u128, u64)>,
}

impl BruteForceCdfTable {
    pub fn build(m: u64, cap: u64) -> Result<Self, TheoryError> {
        check_m(m, 3)?;
        if m > cap {
            return Err(TheoryError::CapExceeded { m, cap, what: "brute-force table" });
        }
        let mut values: Vec<(u128, u128)> = Vec::with_capacity((m * m) as usize);
        for x1 in 0..m {
            for x2 in 0..m {
                values.push(exact_ratio_value(x1, x2, m));
            }
        }
        values.sort_unstable_by(|&(an, ad), &(bn, bd)| (an * bd).cmp(&(bn * ad)));
        let mut entries: Vec<(u128, u128, u64)> = Vec::new();
        let mut cum = 0u64;
        for (num, den) in values {
            cum += 1;
            match entries.last_mut() {
                Some(last) if last.0 == num && last.1 == den => last.2 = cum,
                _ => entries.push((num, den, cum)),
            }
        }
        Ok(Self { m, entries })
    }

    pub fn distinct_values(&self) -> usize {
        self.entries.len()
    }

    /// Jump locations in increasing order.
    pub fn support(&self) -> impl Iterator<Item = ExactFraction> + '_ {
        self.entries.iter().map(|&(n, d, _)| ExactFraction::ratio_u128(n, d))
    }

    pub fn cdf_at(&self, t: &ExactFraction) -> ExactFraction {
        // Last entry with value <= t, by binary search.
        let mut lo = 0usize;
        let mut hi = self.entries.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            let (n, d, _) = self.entries[mid];
            if leq_fraction(n, d, t) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let count = if lo == 0 { 0 } else { self.entries[lo - 1].2 };
        ExactFraction::ratio_u128(count as u128, (self.m as u128) * (self.m as u128))
    }
}

/// Materialized jump list of the ratio CDF: ordered `(location, mass)`
/// covering `{ε₀} ∪ D_M ∪ {1−ε₁}`.
pub struct RatioCdf {
    m: u64,
    eps0: ExactFraction,
    eps1: ExactFraction,
    jumps: Vec<(ExactFraction, ExactFraction)>,
}

impl RatioCdf {
    pub fn build(m: u64) -> Result<Self, TheoryError> {
        Self::build_capped(m, DEFAULT_CDF_MATERIALIZE_CAP)
    }

    pub fn build_capped(m: u64, cap: u64) -> Result<Self, TheoryError> {
        check_m(m, 3)?;
        if m > cap {
            return Err(TheoryError::CapExceeded { m, cap, what: "RatioCdf" });
        }
        let (e0n, e1n) = eps_numerators(m);
        let m_ = m as u128;
        let m2 = m_ * m_;
        let mut jumps = Vec::new();
        jumps.push((ExactFraction::ratio_u128(e0n, 2 * m2), ExactFraction::ratio_u128(e0n, m2)));
        for (k, l) in FareyIterator::order(m - 1) {
            let mass = 2 * ((m_ - 1) / l as u128);
            jumps.push((
                ExactFraction::ratio_u128(k as u128, l as u128),
                ExactFraction::ratio_u128(mass, m2),
            ));
        }
        jumps.push((ExactFraction::ratio_u128(2 * m2 - e1n, 2 * m2), ExactFraction::ratio_u128(e1n, m2)));
        Ok(Self { m, eps0: eps0(m), eps1: eps1(m), jumps })
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn eps0(&self) -> &ExactFraction {
        &self.eps0
    }

    pub fn eps1(&self) -> &ExactFraction {
        &self.eps1
    }

    pub fn jumps(&self) -> &[(ExactFraction, ExactFraction)] {
        &self.jumps
    }

    pub fn total_mass(&self) -> ExactFraction {
        let mut sum = ExactFraction::zero();
        for (_, mass) in &self.jumps {
            sum = sum + mass.clone();
        }
        sum
    }
}
