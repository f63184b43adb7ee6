//! The three evaluations that turn base-generator integers into `(0,1)`.
//!
//! For a base range `{0, …, M−1}`:
//!
//! * **direct** — `x/M + 1/(2M)`, one input per output;
//! * **direct-2** — `x1/M + x2/M² + 1/(2M²)`, two inputs per output;
//! * **ratio** — `min(x1,x2)/max(x1,x2)`, two inputs per output, with the
//!   zero and tie cases split between two replacement values `ε₀` and
//!   `1−ε₁` so no output ever equals 0 or 1.
//!
//! The streaming path works in `f64`; `ε₀`/`ε₁` are derived once per
//! [`ModulusContext`] as exact rationals and rounded at a single site. The
//! [`crate::theory`] module recomputes everything exactly.

use thiserror::Error;

use crate::theory::ExactFraction;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("modulus {0} out of range: need 3 <= M <= 2^64")]
    BadModulus(u128),
    #[error("input {x} out of range for modulus {m} (inputs are never reduced mod M)")]
    OutOfRange { x: u64, m: u128 },
    #[error("mode {0:?} needs a second source with the same modulus")]
    MissingSecondSource(ModeKind),
    #[error("source range bound {got} does not match the mode's modulus {expected}")]
    SourceMismatch { got: u128, expected: u128 },
}

/// Largest double strictly below 1; upper clamp for the streaming path.
const ONE_BELOW: f64 = 1.0 - f64::EPSILON / 2.0;

#[inline]
fn unit_open(u: f64) -> f64 {
    u.min(ONE_BELOW)
}

/// Per-modulus constants shared by all three evaluations.
///
/// `ε₀ = (M−1+⌊M/2⌋)/(2M²)` and `ε₁ = (2M−1−⌊M/2⌋)/(2M²)`; both lie in
/// `(0, 1/(M−1))` and for large `M` both are about `0.75/M`.
#[derive(Debug, Clone)]
pub struct ModulusContext {
    m: u128,
    half: u128,
    eps0: ExactFraction,
    eps1: ExactFraction,
    eps0_f: f64,
    one_minus_eps1_f: f64,
    m_f: f64,
    m2_f: f64,
}

impl ModulusContext {
    pub fn new(m: u128) -> Result<Self, TransformError> {
        if m < 3 || m > (1u128 << 64) {
            return Err(TransformError::BadModulus(m));
        }
        let half = m / 2;
        let two_m2 = || {
            let m = num::BigInt::from(m);
            num::BigInt::from(2u8) * &m * &m
        };
        let eps0 = ExactFraction::new(num::BigInt::from(m - 1 + half), two_m2()).unwrap();
        let eps1 = ExactFraction::new(num::BigInt::from(2 * m - 1 - half), two_m2()).unwrap();
        let m_f = m as f64;
        Ok(Self {
            eps0_f: eps0.to_f64(),
            one_minus_eps1_f: (ExactFraction::one() - eps1.clone()).to_f64(),
            eps0,
            eps1,
            m,
            half,
            m_f,
            m2_f: m_f * m_f,
        })
    }

    pub fn modulus(&self) -> u128 {
        self.m
    }

    /// `⌊M/2⌋`, the tie-splitting threshold.
    pub fn half_threshold(&self) -> u128 {
        self.half
    }

    pub fn eps0(&self) -> &ExactFraction {
        &self.eps0
    }

    pub fn eps1(&self) -> &ExactFraction {
        &self.eps1
    }

    pub fn eps0_f64(&self) -> f64 {
        self.eps0_f
    }

    pub fn one_minus_eps1_f64(&self) -> f64 {
        self.one_minus_eps1_f
    }

    #[inline]
    fn check(&self, x: u64) -> Result<(), TransformError> {
        if (x as u128) < self.m {
            Ok(())
        } else {
            Err(TransformError::OutOfRange { x, m: self.m })
        }
    }
}

/// Which of the three ratio branches an input pair lands in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioKind {
    /// `x1=0<x2`, or a tie below the threshold: output `ε₀`.
    Eps0,
    /// `x2=0<x1`, or a tie at/above the threshold: output `1−ε₁`.
    Eps1Complement,
    /// Both positive and distinct: output `min/max`, a reduced fraction
    /// `k/l` with `1 ≤ k < l ≤ M−1`.
    ProperRatio,
}

/// One ratio output: the double value and the branch it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioOutput {
    pub value: f64,
    pub kind: RatioKind,
}

/// Branch selection only; shared by the streaming path and the exact engine.
#[inline]
pub fn ratio_branch(x1: u64, x2: u64, half_threshold: u128) -> RatioKind {
    if x1 == x2 {
        if (x1 as u128) < half_threshold {
            RatioKind::Eps0
        } else {
            RatioKind::Eps1Complement
        }
    } else if x1 == 0 {
        RatioKind::Eps0
    } else if x2 == 0 {
        RatioKind::Eps1Complement
    } else {
        RatioKind::ProperRatio
    }
}

/// Ratio evaluation of one input pair.
pub fn ratio_transform(x1: u64, x2: u64, ctx: &ModulusContext) -> Result<RatioOutput, TransformError> {
    ctx.check(x1)?;
    ctx.check(x2)?;
    let kind = ratio_branch(x1, x2, ctx.half);
    let value = match kind {
        RatioKind::Eps0 => ctx.eps0_f,
        RatioKind::Eps1Complement => ctx.one_minus_eps1_f,
        RatioKind::ProperRatio => unit_open(x1.min(x2) as f64 / x1.max(x2) as f64),
    };
    Ok(RatioOutput { value, kind })
}

/// Direct evaluation `x/M + 1/(2M)`, computed as `(x+½)/M` so the result
/// is a single correctly-rounded division.
pub fn direct_transform(x: u64, ctx: &ModulusContext) -> Result<f64, TransformError> {
    ctx.check(x)?;
    Ok(unit_open((x as f64 + 0.5) / ctx.m_f))
}

/// Direct-2 evaluation `x1/M + x2/M² + 1/(2M²)`, as `(x1·M + x2 + ½)/M²`.
pub fn direct2_transform(x1: u64, x2: u64, ctx: &ModulusContext) -> Result<f64, TransformError> {
    ctx.check(x1)?;
    ctx.check(x2)?;
    Ok(unit_open((x1 as f64 * ctx.m_f + x2 as f64 + 0.5) / ctx.m2_f))
}

/// The four evaluation modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    Direct,
    Direct2,
    Ratio,
    /// Ratio with `x1` and `x2` drawn from two different generators.
    RatioTwoSource,
}

impl ModeKind {
    /// Base values consumed per output.
    pub fn inputs_per_output(self) -> u32 {
        match self {
            ModeKind::Direct => 1,
            _ => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModeKind::Direct => "direct",
            ModeKind::Direct2 => "direct2",
            ModeKind::Ratio => "ratio",
            ModeKind::RatioTwoSource => "ratio2",
        }
    }
}

impl std::fmt::Display for ModeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// An evaluation mode bound to its modulus constants.
#[derive(Debug, Clone)]
pub struct EvaluationMode {
    pub kind: ModeKind,
    pub ctx: ModulusContext,
}

impl EvaluationMode {
    pub fn new(kind: ModeKind, ctx: ModulusContext) -> Self {
        Self { kind, ctx }
    }
}

/// Anything that emits base integers in `[0, M−1]`.
pub trait RawSource {
    fn next_raw(&mut self) -> u64;

    /// Exclusive upper bound on the emitted integers.
    fn range_bound(&self) -> u128;
}

/// A base source (plus an optional second source) driven through a mode.
#[derive(Debug, Clone)]
pub struct OutputStream<G> {
    mode: EvaluationMode,
    primary: G,
    secondary: Option<G>,
}

impl<G: RawSource> OutputStream<G> {
    /// Single-source stream; `kind` must not be [`ModeKind::RatioTwoSource`].
    pub fn new(kind: ModeKind, ctx: ModulusContext, primary: G) -> Result<Self, TransformError> {
        if kind == ModeKind::RatioTwoSource {
            return Err(TransformError::MissingSecondSource(kind));
        }
        if primary.range_bound() != ctx.modulus() {
            return Err(TransformError::SourceMismatch {
                got: primary.range_bound(),
                expected: ctx.modulus(),
            });
        }
        Ok(Self { mode: EvaluationMode::new(kind, ctx), primary, secondary: None })
    }

    /// Two-source ratio stream; both sources must share the context modulus.
    pub fn two_source(ctx: ModulusContext, primary: G, secondary: G) -> Result<Self, TransformError> {
        for bound in [primary.range_bound(), secondary.range_bound()] {
            if bound != ctx.modulus() {
                return Err(TransformError::SourceMismatch { got: bound, expected: ctx.modulus() });
            }
        }
        Ok(Self {
            mode: EvaluationMode::new(ModeKind::RatioTwoSource, ctx),
            primary,
            secondary: Some(secondary),
        })
    }

    pub fn mode(&self) -> &EvaluationMode {
        &self.mode
    }

    pub fn primary(&self) -> &G {
        &self.primary
    }

    pub fn secondary(&self) -> Option<&G> {
        self.secondary.as_ref()
    }

    /// Next output in `(0,1)`.
    ///
    /// Direct consumes one base value; the other modes consume two. Ratio
    /// uses non-overlapping consecutive pairs `(x_{2i}, x_{2i+1})`.
    #[inline]
    pub fn next_output(&mut self) -> f64 {
        let ctx = &self.mode.ctx;
        match self.mode.kind {
            ModeKind::Direct => {
                let x = self.primary.next_raw();
                direct_transform(x, ctx)
            }
            ModeKind::Direct2 => {
                let x1 = self.primary.next_raw();
                let x2 = self.primary.next_raw();
                direct2_transform(x1, x2, ctx)
            }
            ModeKind::Ratio => {
                let x1 = self.primary.next_raw();
                let x2 = self.primary.next_raw();
                ratio_transform(x1, x2, ctx).map(|r| r.value)
            }
            ModeKind::RatioTwoSource => {
                let x1 = self.primary.next_raw();
                let x2 = self.secondary.as_mut().expect("two-source stream").next_raw();
                ratio_transform(x1, x2, ctx).map(|r| r.value)
            }
        }
        .expect("source output within range by construction")
    }

    pub fn fill(&mut self, buf: &mut Vec<f64>, n: usize) {
        buf.clear();
        buf.reserve(n);
        for _ in 0..n {
            buf.push(self.next_output());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Replays a fixed script of raw values (cyclically) and counts draws.
    pub(crate) struct Scripted {
        values: Vec<u64>,
        pos: usize,
        pub draws: u64,
        bound: u128,
    }

    impl Scripted {
        pub fn new(values: Vec<u64>, bound: u128) -> Self {
            Self { values, pos: 0, draws: 0, bound }
        }
    }

    impl RawSource for &mut Scripted {
        fn next_raw(&mut self) -> u64 {
            let v = self.values[self.pos % self.values.len()];
            self.pos += 1;
            self.draws += 1;
            v
        }

        fn range_bound(&self) -> u128 {
            self.bound
        }
    }

    fn ctx(m: u128) -> ModulusContext {
        ModulusContext::new(m).unwrap()
    }

    #[test]
    fn eps_values_m10() {
        let c = ctx(10);
        assert_eq!(c.eps0(), &ExactFraction::ratio_u128(7, 100));
        assert_eq!(c.eps1(), &ExactFraction::ratio_u128(7, 100));
        assert_eq!(c.eps0_f64(), 0.07);
        assert_eq!(c.one_minus_eps1_f64(), 0.93);
    }

    #[test]
    fn eps_sum_identity() {
        // eps0 + eps1 = (3M-2)/(2M^2)
        for m in [3u128, 4, 7, 10, 97, 1024] {
            let c = ctx(m);
            let sum = c.eps0().clone() + c.eps1().clone();
            let expect = ExactFraction::ratio_u128(3 * m - 2, 2 * m * m);
            assert_eq!(sum, expect, "M={m}");
        }
    }

    #[test]
    fn eps_bounds() {
        // 0 < eps0, eps1 < 1/(M-1)
        for m in [3u128, 4, 5, 10, 11, 1 << 16] {
            let c = ctx(m);
            let cap = ExactFraction::ratio_u128(1, m - 1);
            assert!(c.eps0() > &ExactFraction::zero() && c.eps0() < &cap);
            assert!(c.eps1() > &ExactFraction::zero() && c.eps1() < &cap);
        }
    }

    #[test]
    fn ratio_examples_m10() {
        let c = ctx(10);
        let r = |a, b| ratio_transform(a, b, &c).unwrap();
        assert_eq!(r(0, 5).value, 0.07);
        assert_eq!(r(0, 5).kind, RatioKind::Eps0);
        assert_eq!(r(4, 4).value, 0.07);
        assert_eq!(r(5, 5).value, 0.93);
        assert_eq!(r(5, 5).kind, RatioKind::Eps1Complement);
        assert_eq!(r(2, 8).value, 0.25);
        assert_eq!(r(8, 2).value, 0.25);
        assert_eq!(r(2, 8).kind, RatioKind::ProperRatio);
        assert_eq!(r(7, 0).value, 0.93);
        assert_eq!(r(7, 0).kind, RatioKind::Eps1Complement);
    }

    #[test]
    fn direct_examples_m10() {
        let c = ctx(10);
        assert_eq!(direct_transform(3, &c).unwrap(), 0.35);
        assert_eq!(direct_transform(0, &c).unwrap(), 0.05);
        assert_eq!(direct_transform(9, &c).unwrap(), 0.95);
    }

    #[test]
    fn direct2_examples_m10() {
        let c = ctx(10);
        assert_eq!(direct2_transform(3, 7, &c).unwrap(), 0.375);
        assert_eq!(direct2_transform(0, 0, &c).unwrap(), 0.005);
        assert_eq!(direct2_transform(9, 9, &c).unwrap(), 0.995);
    }

    #[test]
    fn out_of_range_is_an_error_not_a_reduction() {
        let c = ctx(10);
        assert!(matches!(direct_transform(10, &c), Err(TransformError::OutOfRange { x: 10, m: 10 })));
        assert!(ratio_transform(3, 11, &c).is_err());
        assert!(direct2_transform(11, 3, &c).is_err());
    }

    #[test]
    fn modulus_bounds() {
        assert!(ModulusContext::new(2).is_err());
        assert!(ModulusContext::new(3).is_ok());
        assert!(ModulusContext::new(1u128 << 64).is_ok());
        assert!(ModulusContext::new((1u128 << 64) + 1).is_err());
    }

    #[test]
    fn zero_branch_asymmetry() {
        // The zero cases deliberately break min/max symmetry.
        let c = ctx(10);
        let a = ratio_transform(0, 7, &c).unwrap();
        let b = ratio_transform(7, 0, &c).unwrap();
        assert_ne!(a.value, b.value);
        assert_eq!(a.kind, RatioKind::Eps0);
        assert_eq!(b.kind, RatioKind::Eps1Complement);
    }

    #[test]
    fn branch_counts_exhaustive() {
        // Over all M^2 pairs: M-1+floor(M/2) map to eps0, M-1+ceil(M/2) to 1-eps1.
        for m in 3u64..=64 {
            let c = ctx(m as u128);
            let (mut n0, mut n1) = (0u64, 0u64);
            for x1 in 0..m {
                for x2 in 0..m {
                    match ratio_transform(x1, x2, &c).unwrap().kind {
                        RatioKind::Eps0 => n0 += 1,
                        RatioKind::Eps1Complement => n1 += 1,
                        RatioKind::ProperRatio => {}
                    }
                }
            }
            assert_eq!(n0, m - 1 + m / 2, "eps0 count, M={m}");
            assert_eq!(n1, m - 1 + m.div_ceil(2), "1-eps1 count, M={m}");
        }
    }

    #[test]
    fn extreme_modulus_outputs_stay_open() {
        let c = ctx(1u128 << 64);
        let top = u64::MAX;
        for v in [
            direct_transform(top, &c).unwrap(),
            direct_transform(0, &c).unwrap(),
            direct2_transform(top, top, &c).unwrap(),
            ratio_transform(top - 1, top, &c).unwrap().value,
            ratio_transform(7, 7, &c).unwrap().value,
        ] {
            assert!(v > 0.0 && v < 1.0, "{v}");
        }
    }

    #[test]
    fn stream_ratio_consumes_pairs() {
        let mut stub = Scripted::new(vec![0, 5, 4, 4, 3], 10);
        let mut s = OutputStream::new(ModeKind::Ratio, ctx(10), &mut stub).unwrap();
        assert_eq!(s.next_output(), 0.07);
        assert_eq!(s.next_output(), 0.07);
        assert_eq!(stub.draws, 4);
    }

    #[test]
    fn stream_direct_modes() {
        let mut stub = Scripted::new(vec![3], 10);
        let mut s = OutputStream::new(ModeKind::Direct, ctx(10), &mut stub).unwrap();
        assert_eq!(s.next_output(), 0.35);
        drop(s);

        let mut stub = Scripted::new(vec![3, 7], 10);
        let mut s = OutputStream::new(ModeKind::Direct2, ctx(10), &mut stub).unwrap();
        assert_eq!(s.next_output(), 0.375);
        assert_eq!(stub.draws, 2);
    }

    #[test]
    fn stream_two_source_draws_one_from_each() {
        let mut a = Scripted::new(vec![2], 10);
        let mut b = Scripted::new(vec![8], 10);
        let mut s = OutputStream::two_source(ctx(10), &mut a, &mut b).unwrap();
        assert_eq!(s.next_output(), 0.25);
        drop(s);
        assert_eq!(a.draws, 1);
        assert_eq!(b.draws, 1);
    }

    #[test]
    fn stream_rejects_modulus_mismatch() {
        let mut stub = Scripted::new(vec![1], 16);
        assert!(matches!(
            OutputStream::new(ModeKind::Direct, ctx(10), &mut stub),
            Err(TransformError::SourceMismatch { got: 16, expected: 10 })
        ));
        let mut a = Scripted::new(vec![1], 10);
        let mut b = Scripted::new(vec![1], 16);
        assert!(OutputStream::two_source(ctx(10), &mut a, &mut b).is_err());
    }

    #[test]
    fn two_source_requires_constructor() {
        let mut stub = Scripted::new(vec![1], 10);
        assert!(matches!(
            OutputStream::new(ModeKind::RatioTwoSource, ctx(10), &mut stub),
            Err(TransformError::MissingSecondSource(_))
        ));
    }

    proptest! {
        #[test]
        fn ratio_symmetric_for_positive_distinct(m in 3u64..5000, x1 in 1u64..5000, x2 in 1u64..5000) {
            prop_assume!(x1 < m && x2 < m && x1 != x2);
            let c = ctx(m as u128);
            let a = ratio_transform(x1, x2, &c).unwrap();
            let b = ratio_transform(x2, x1, &c).unwrap();
            prop_assert_eq!(a.value, b.value);
            prop_assert_eq!(a.kind, RatioKind::ProperRatio);
        }

        #[test]
        fn all_transforms_land_strictly_inside_unit(m in 3u64..10000, x1 in 0u64..10000, x2 in 0u64..10000) {
            prop_assume!(x1 < m && x2 < m);
            let c = ctx(m as u128);
            for v in [
                ratio_transform(x1, x2, &c).unwrap().value,
                direct_transform(x1, &c).unwrap(),
                direct2_transform(x1, x2, &c).unwrap(),
            ] {
                prop_assert!(v > 0.0 && v < 1.0);
            }
        }

        #[test]
        fn proper_ratio_is_reduced_fraction_value(m in 3u64..2000, x1 in 1u64..2000, x2 in 1u64..2000) {
            prop_assume!(x1 < m && x2 < m && x1 != x2);
            let c = ctx(m as u128);
            let out = ratio_transform(x1, x2, &c).unwrap();
            let (lo, hi) = (x1.min(x2), x1.max(x2));
            let g = num::integer::gcd(lo, hi);
            // Same real value after reduction, so the same double.
            prop_assert_eq!(out.value, (lo / g) as f64 / (hi / g) as f64);
            prop_assert!(hi / g <= m - 1 && lo / g >= 1);
        }
    }
}
