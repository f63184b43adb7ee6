//! Exact Kolmogorov–Smirnov distances against `U(0,1)`.
//!
//! For a step CDF `F` with jumps `t_1 < … < t_L` the supremum of
//! `|F(t)−t|` is realized at the jumps: it is the maximum over `i` of
//! `|F(t_i)−t_i|` and `|F(t_{i−1})−t_i|` (the left limit). The ratio scan
//! walks `{ε₀} ∪ D_M ∪ {1−ε₁}` via the Farey recurrence, accumulating the
//! jump masses `2⌊(M−1)/l⌋/M²` in O(1) per fraction; the `Σ⌊tk⌋` closed
//! form stays available in [`super::cdf`] as a cross-check. All
//! comparisons are integer cross-multiplications in `u128`, which the
//! caps keep far from overflow.

use serde::Serialize;

use super::cdf::{check_m, eps_numerators};
use super::farey::FareyIterator;
use super::fraction::ExactFraction;
use super::TheoryError;
use crate::transform::ModeKind;

/// Ratio-mode scans are O(M²) in the Farey walk.
pub const DEFAULT_KS_CAP: u64 = 1 << 14;
/// Direct mode walks M jump points.
pub const DEFAULT_DIRECT_KS_CAP: u64 = 1 << 24;
/// Direct-2 walks M² jump points.
pub const DEFAULT_DIRECT2_KS_CAP: u64 = 1 << 12;

/// Where a supremum candidate was evaluated relative to its jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    AtJump,
    LeftLimit,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::AtJump => "at-jump",
            Side::LeftLimit => "left-limit",
        })
    }
}

/// An exact KS distance, where it is attained, and the theorem bound it
/// was checked against.
#[derive(Debug, Clone, Serialize)]
pub struct KsReport {
    pub mode: ModeKind,
    pub m: u64,
    pub distance: ExactFraction,
    pub attained_at: ExactFraction,
    pub side: Side,
    pub bound: ExactFraction,
    pub within_bound: bool,
}

/// Maximum deviation over the interior Farey jumps `t_2 … t_{L−1}` only,
/// against the derived constant `0.671573/M + 2/M²`.
#[derive(Debug, Clone, Serialize)]
pub struct InteriorReport {
    pub m: u64,
    pub max_interior_deviation: ExactFraction,
    pub attained_at: ExactFraction,
    pub bound: ExactFraction,
    pub within: bool,
}

/// Running maximum of fractions `num/den`, compared exactly.
#[derive(Debug, Clone, Copy)]
struct MaxDev {
    num: u128,
    den: u128,
    at_num: u128,
    at_den: u128,
    side: Side,
}

impl MaxDev {
    fn zero() -> Self {
        MaxDev { num: 0, den: 1, at_num: 0, at_den: 1, side: Side::AtJump }
    }

    #[inline]
    fn offer(&mut self, num: u128, den: u128, at_num: u128, at_den: u128, side: Side) {
        // Strict improvement only: ties keep the earliest candidate.
        if num * self.den > self.num * den {
            *self = MaxDev { num, den, at_num, at_den, side };
        }
    }

    fn distance(&self) -> ExactFraction {
        ExactFraction::ratio_u128(self.num, self.den)
    }

    fn location(&self) -> ExactFraction {
        ExactFraction::ratio_u128(self.at_num, self.at_den)
    }

    /// `self <= other` for an `other` given as a fraction.
    fn le(&self, other_num: u128, other_den: u128) -> bool {
        self.num * other_den <= other_num * self.den
    }
}

/// One pass over the ratio CDF's jumps: full supremum and interior-only
/// supremum together.
pub fn ratio_ks_scan(m: u64) -> Result<(KsReport, InteriorReport), TheoryError> {
    ratio_ks_scan_capped(m, DEFAULT_KS_CAP)
}

pub fn ratio_ks_scan_capped(m: u64, cap: u64) -> Result<(KsReport, InteriorReport), TheoryError> {
    check_m(m, 3)?;
    if m > cap.min(super::MAX_THEORY_MODULUS) {
        return Err(TheoryError::CapExceeded { m, cap, what: "ratio KS scan" });
    }
    let m_ = m as u128;
    let m2 = m_ * m_;
    let (e0n, e1n) = eps_numerators(m);

    let mut full = MaxDev::zero();
    let mut interior = MaxDev::zero();
    let mut cum: u128 = 0; // CDF numerator over m2

    // Deviations |cum/m2 - a/b| enter as |cum*b - a*m2| / (m2*b). The jump
    // value is offered before the left limit so ties report AtJump.
    let visit = |dev: &mut MaxDev, cum_after: u128, cum_before: u128, a: u128, b: u128| {
        let q = m2 * b;
        let at = cum_after * b;
        let lim = a * m2;
        dev.offer(at.abs_diff(lim), q, a, b, Side::AtJump);
        dev.offer((cum_before * b).abs_diff(lim), q, a, b, Side::LeftLimit);
    };

    // eps0 jump.
    visit(&mut full, cum + e0n, cum, e0n, 2 * m2);
    cum += e0n;

    // Farey jumps; interior means the 2nd onward.
    let mut index = 0u64;
    for (k, l) in FareyIterator::order(m - 1) {
        index += 1;
        let mass = 2 * ((m_ - 1) / l as u128);
        visit(&mut full, cum + mass, cum, k as u128, l as u128);
        if index >= 2 {
            visit(&mut interior, cum + mass, cum, k as u128, l as u128);
        }
        cum += mass;
    }

    // 1 - eps1 jump.
    visit(&mut full, cum + e1n, cum, 2 * m2 - e1n, 2 * m2);
    cum += e1n;
    assert_eq!(cum, m2, "jump masses must sum to 1 exactly");

    // Theorem bound: max(eps0, eps1), both over 2m^2.
    let bound_num = e0n.max(e1n);
    let report = KsReport {
        mode: ModeKind::Ratio,
        m,
        distance: full.distance(),
        attained_at: full.location(),
        side: full.side,
        within_bound: full.le(bound_num, 2 * m2),
        bound: ExactFraction::ratio_u128(bound_num, 2 * m2),
    };

    // Appendix bound: 671573/(10^6 M) + 2/M^2 = (671573 M + 2*10^6)/(10^6 M^2),
    // a rational upper replacement for (7/2 - 2*sqrt(2))/M + 2/M^2.
    let ib_num = 671_573 * m_ + 2_000_000;
    let ib_den = 1_000_000 * m2;
    let interior_report = InteriorReport {
        m,
        max_interior_deviation: interior.distance(),
        attained_at: interior.location(),
        within: interior.le(ib_num, ib_den),
        bound: ExactFraction::ratio_u128(ib_num, ib_den),
    };
    Ok((report, interior_report))
}

/// Exact `Δ_Y = sup |F_Y(t) − t|`, checked against `max{ε₀, ε₁}`.
pub fn ks_distance_ratio(m: u64) -> Result<KsReport, TheoryError> {
    Ok(ratio_ks_scan(m)?.0)
}

pub fn ks_distance_ratio_capped(m: u64, cap: u64) -> Result<KsReport, TheoryError> {
    Ok(ratio_ks_scan_capped(m, cap)?.0)
}

/// Interior-jump deviation versus the derived appendix constant.
pub fn ks_interior_bound_check(m: u64) -> Result<InteriorReport, TheoryError> {
    Ok(ratio_ks_scan(m)?.1)
}

pub fn ks_interior_bound_check_capped(m: u64, cap: u64) -> Result<InteriorReport, TheoryError> {
    Ok(ratio_ks_scan_capped(m, cap)?.1)
}

/// KS distance of the uniform grid `(2j+1)/(2T)`, `j = 0..T`, each atom
/// carrying `1/T`: the shape of both direct evaluations.
fn uniform_grid_scan(points: u128) -> MaxDev {
    let mut best = MaxDev::zero();
    let den = 2 * points;
    for j in 0..points {
        // F((2j+1)/(2T)) = (j+1)/T; deviations over the common denominator 2T.
        let at = (2 * (j + 1)).abs_diff(2 * j + 1);
        let left = (2 * j).abs_diff(2 * j + 1);
        best.offer(at, den, 2 * j + 1, den, Side::AtJump);
        best.offer(left, den, 2 * j + 1, den, Side::LeftLimit);
    }
    best
}

/// Exact `Δ_V` for the direct evaluation `x/M + 1/(2M)`; bound `1/(2M)`.
pub fn ks_distance_direct(m: u64) -> Result<KsReport, TheoryError> {
    ks_distance_direct_capped(m, DEFAULT_DIRECT_KS_CAP)
}

pub fn ks_distance_direct_capped(m: u64, cap: u64) -> Result<KsReport, TheoryError> {
    check_m(m, 2)?;
    if m > cap {
        return Err(TheoryError::CapExceeded { m, cap, what: "direct KS" });
    }
    let best = uniform_grid_scan(m as u128);
    Ok(KsReport {
        mode: ModeKind::Direct,
        m,
        distance: best.distance(),
        attained_at: best.location(),
        side: best.side,
        within_bound: best.le(1, 2 * m as u128),
        bound: ExactFraction::ratio_u128(1, 2 * m as u128),
    })
}

/// Exact `Δ_W` for direct-2 `x1/M + x2/M² + 1/(2M²)`; bound `1/(2M²)`.
pub fn ks_distance_direct2(m: u64) -> Result<KsReport, TheoryError> {
    ks_distance_direct2_capped(m, DEFAULT_DIRECT2_KS_CAP)
}

pub fn ks_distance_direct2_capped(m: u64, cap: u64) -> Result<KsReport, TheoryError> {
    check_m(m, 2)?;
    if m > cap {
        return Err(TheoryError::CapExceeded { m, cap, what: "direct-2 KS" });
    }
    let m2 = (m as u128) * (m as u128);
    let best = uniform_grid_scan(m2);
    Ok(KsReport {
        mode: ModeKind::Direct2,
        m,
        distance: best.distance(),
        attained_at: best.location(),
        side: best.side,
        within_bound: best.le(1, 2 * m2),
        bound: ExactFraction::ratio_u128(1, 2 * m2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::cdf::RatioCdf;

    fn frac(n: u128, d: u128) -> ExactFraction {
        ExactFraction::ratio_u128(n, d)
    }

    #[test]
    fn ratio_ks_m10() {
        let r = ks_distance_ratio(10).unwrap();
        assert_eq!(r.distance, frac(7, 100));
        assert_eq!(r.attained_at, frac(7, 100)); // at eps0
        assert_eq!(r.side, Side::AtJump);
        assert_eq!(r.bound, frac(7, 100));
        assert!(r.within_bound);
    }

    #[test]
    fn ratio_ks_m3() {
        // eps0 = 3/18, eps1 = 4/18; the sup is eps1, at the 1-eps1 jump.
        let r = ks_distance_ratio(3).unwrap();
        assert_eq!(r.distance, frac(2, 9));
        assert_eq!(r.attained_at, frac(7, 9));
        assert_eq!(r.bound, frac(2, 9));
        assert!(r.within_bound);
    }

    #[test]
    fn ratio_ks_bound_holds_small_sweep() {
        for m in 4..=256 {
            let r = ks_distance_ratio(m).unwrap();
            assert!(r.within_bound, "M={m}: {} > {}", r.distance, r.bound);
        }
    }

    #[test]
    fn scan_agrees_with_bigrational_reference() {
        // Independent route: materialized jumps and BigRational arithmetic.
        for m in 3u64..=40 {
            let cdf = RatioCdf::build(m).unwrap();
            let mut cum = ExactFraction::zero();
            let mut best = ExactFraction::zero();
            for (t, mass) in cdf.jumps() {
                let after = cum.clone() + mass.clone();
                for dev in [(&after - t).abs(), (&cum - t).abs()] {
                    if dev > best {
                        best = dev;
                    }
                }
                cum = after;
            }
            let scan = ks_distance_ratio(m).unwrap();
            assert_eq!(scan.distance, best, "M={m}");
        }
    }

    #[test]
    fn interior_examples() {
        let i10 = ks_interior_bound_check(10).unwrap();
        assert_eq!(i10.max_interior_deviation, frac(2, 35));
        assert_eq!(i10.bound, frac(671_573 * 10 + 2_000_000, 100_000_000));
        assert!(i10.within);

        let i4 = ks_interior_bound_check(4).unwrap();
        assert_eq!(i4.max_interior_deviation, frac(5, 48));
        assert!(i4.within);

        let i100 = ks_interior_bound_check(100).unwrap();
        assert_eq!(i100.max_interior_deviation, frac(4697, 710_000));
        assert!(i100.within);
    }

    #[test]
    fn interior_empty_for_m3() {
        // D_3 = {1/2} has no interior jumps; the max is 0.
        let i = ks_interior_bound_check(3).unwrap();
        assert_eq!(i.max_interior_deviation, ExactFraction::zero());
        assert!(i.within);
    }

    #[test]
    fn direct_ks_examples() {
        let r = ks_distance_direct(10).unwrap();
        assert_eq!(r.distance, frac(1, 20));
        assert_eq!(r.bound, frac(1, 20));
        assert!(r.within_bound);
        assert_eq!(r.attained_at, frac(1, 20));

        let r2 = ks_distance_direct(2).unwrap();
        assert_eq!(r2.distance, frac(1, 4));
    }

    #[test]
    fn direct2_ks_examples() {
        let r = ks_distance_direct2(10).unwrap();
        assert_eq!(r.distance, frac(1, 200));
        assert!(r.within_bound);
    }

    #[test]
    fn direct_ks_brute_comparison() {
        // Reference: enumerate the direct grid with BigRational arithmetic.
        for m in 2u64..=64 {
            let mut best = ExactFraction::zero();
            for k in 0..m {
                let t = frac((2 * k + 1) as u128, 2 * m as u128);
                let after = frac((k + 1) as u128, m as u128);
                let before = frac(k as u128, m as u128);
                for dev in [(&after - &t).abs(), (&before - &t).abs()] {
                    if dev > best {
                        best = dev;
                    }
                }
            }
            assert_eq!(ks_distance_direct(m).unwrap().distance, best, "M={m}");
        }
    }

    #[test]
    fn caps_refuse_loudly() {
        assert!(matches!(
            ks_distance_ratio(DEFAULT_KS_CAP + 1),
            Err(TheoryError::CapExceeded { .. })
        ));
        assert!(matches!(
            ks_distance_direct2(DEFAULT_DIRECT2_KS_CAP + 1),
            Err(TheoryError::CapExceeded { .. })
        ));
        assert!(ks_distance_ratio_capped(DEFAULT_KS_CAP + 1, 1 << 15).is_ok());
    }

    #[test]
    fn ratio_distance_equals_max_eps_always() {
        // The sup is attained at the artificial extreme points.
        for m in [3u64, 4, 7, 10, 97, 256, 1000] {
            let r = ks_distance_ratio(m).unwrap();
            assert_eq!(r.distance, r.bound, "M={m}");
        }
    }
}
