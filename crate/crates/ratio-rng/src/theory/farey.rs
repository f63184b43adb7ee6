//! Farey-sequence enumeration: the proper values the ratio can attain.
//!
//! `D_M` is the set of reduced fractions `k/l` with `1 ≤ k < l ≤ M−1` —
//! the Farey sequence of order `M−1` restricted to the open interval
//! `(0,1)`. The standard next-term recurrence yields each fraction in
//! strictly increasing order in O(1).

use super::fraction::ExactFraction;
use super::TheoryError;

/// Ascending reduced fractions of the Farey sequence of order `n`,
/// restricted to `(0,1)`, as `(numerator, denominator)` pairs.
#[derive(Debug, Clone)]
pub struct FareyIterator {
    n: u64,
    // Two consecutive terms (a/b, c/d); the next term is produced from them.
    a: u64,
    b: u64,
    c: u64,
    d: u64,
}

impl FareyIterator {
    /// Farey order `n ≥ 2` (i.e. `M−1` for modulus `M ≥ 3`).
    pub fn order(n: u64) -> Self {
        assert!(n >= 2, "Farey order must be at least 2");
        // Seed with 0/1 and 1/n; iteration yields from 1/n onward.
        Self { n, a: 0, b: 1, c: 1, d: n }
    }
}

impl Iterator for FareyIterator {
    type Item = (u64, u64);

    #[inline]
    fn next(&mut self) -> Option<(u64, u64)> {
        if self.c >= self.d {
            return None; // reached 1/1
        }
        let out = (self.c, self.d);
        let k = (self.n + self.b) / self.d;
        let (e, f) = (k * self.c - self.a, k * self.d - self.b);
        self.a = self.c;
        self.b = self.d;
        self.c = e;
        self.d = f;
        Some(out)
    }
}

/// All of `D_M` in increasing order as exact fractions.
///
/// Materializes `~3(M−1)²/π²` entries; the default cap keeps that from
/// exhausting memory. Counting does not need materialization — use
/// [`FareyIterator`] directly.
pub const DEFAULT_FAREY_MATERIALIZE_CAP: u64 = 1 << 12;

pub fn farey_enumerate(m: u64) -> Result<Vec<ExactFraction>, TheoryError> {
    farey_enumerate_capped(m, DEFAULT_FAREY_MATERIALIZE_CAP)
}

pub fn farey_enumerate_capped(m: u64, cap: u64) -> Result<Vec<ExactFraction>, TheoryError> {
    if m < 3 {
        return Err(TheoryError::ModulusTooSmall { m, min: 3 });
    }
    if m > cap {
        return Err(TheoryError::CapExceeded { m, cap, what: "farey_enumerate" });
    }
    Ok(FareyIterator::order(m - 1)
        .map(|(k, l)| ExactFraction::ratio_u128(k as u128, l as u128))
        .collect())
}
