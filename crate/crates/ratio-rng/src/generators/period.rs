//! Cycle-length probes for miniature generators.
//!
//! For a base period `T`, non-overlapping pairs have period `T/2` (T even)
//! or `2T` (T odd); the ratio stream's period should divide that. The
//! divisor property is a conjecture, so [`detect_period`] measures it
//! empirically instead of assuming it.
//!
//! Detection runs Brent's cycle search on the *internal state* and then
//! refines to the output-sequence period, because the ratio collapses
//! distinct state pairs to equal outputs and a naive search on outputs
//! alone could report a false short cycle. Outputs are compared as exact
//! reduced rationals, never as doubles.

use num::integer::gcd;

use super::{GeneratorError, GeneratorSpec, GeneratorState};
use crate::transform::{ratio_branch, ModeKind, RatioKind, RawSource};

/// `T/2` for even `T`, `2T` for odd `T`: the period of non-overlapping
/// pairs drawn from a sequence of period `T`.
pub fn period_pair_length(t: u64) -> u64 {
    assert!(t >= 1, "period must be positive");
    if t % 2 == 0 {
        t / 2
    } else {
        2 * t
    }
}

/// Outcome of a capped cycle search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodResult {
    Period(u64),
    ExceededCap,
}

impl PeriodResult {
    pub fn period(self) -> Option<u64> {
        match self {
            PeriodResult::Period(p) => Some(p),
            PeriodResult::ExceededCap => None,
        }
    }
}

trait CycleStepper: Clone {
    type Out: Eq + Clone;

    /// Advance one output unit and return the output's exact key.
    fn advance(&mut self) -> Self::Out;

    fn same_state(&self, other: &Self) -> bool;
}

#[derive(Clone)]
struct RawStepper(GeneratorState);

impl CycleStepper for RawStepper {
    type Out = u64;

    fn advance(&mut self) -> u64 {
        self.0.next_raw()
    }

    fn same_state(&self, other: &Self) -> bool {
        self.0.state_key() == other.0.state_key()
    }
}

#[derive(Clone)]
struct ModeStepper {
    primary: GeneratorState,
    secondary: Option<GeneratorState>,
    kind: ModeKind,
    m: u128,
    half: u128,
}

impl ModeStepper {
    fn reduced(num: u128, den: u128) -> (u128, u128) {
        let g = gcd(num, den);
        (num / g, den / g)
    }

    fn ratio_key(&self, x1: u64, x2: u64) -> (u128, u128) {
        let two_m2 = 2 * self.m * self.m;
        match ratio_branch(x1, x2, self.half) {
            RatioKind::Eps0 => Self::reduced(self.m - 1 + self.half, two_m2),
            RatioKind::Eps1Complement => Self::reduced(two_m2 - (2 * self.m - 1 - self.half), two_m2),
            RatioKind::ProperRatio => {
                let (lo, hi) = (x1.min(x2) as u128, x1.max(x2) as u128);
                Self::reduced(lo, hi)
            }
        }
    }
}

impl CycleStepper for ModeStepper {
    type Out = (u128, u128);

    fn advance(&mut self) -> (u128, u128) {
        match self.kind {
            ModeKind::Direct => {
                let x = self.primary.next_raw() as u128;
                Self::reduced(2 * x + 1, 2 * self.m)
            }
            ModeKind::Direct2 => {
                let x1 = self.primary.next_raw() as u128;
                let x2 = self.primary.next_raw() as u128;
                Self::reduced(2 * (x1 * self.m + x2) + 1, 2 * self.m * self.m)
            }
            ModeKind::Ratio => {
                let x1 = self.primary.next_raw();
                let x2 = self.primary.next_raw();
                self.ratio_key(x1, x2)
            }
            ModeKind::RatioTwoSource => {
                let x1 = self.primary.next_raw();
                let x2 = self.secondary.as_mut().expect("two-source stepper").next_raw();
                self.ratio_key(x1, x2)
            }
        }
    }

    fn same_state(&self, other: &Self) -> bool {
        self.primary.state_key() == other.primary.state_key()
            && match (&self.secondary, &other.secondary) {
                (None, None) => true,
                (Some(a), Some(b)) => a.state_key() == b.state_key(),
                _ => false,
            }
    }
}

/// Brent's search for the state-cycle length, then the smallest divisor of
/// it under which the output sequence repeats.
fn find_period<S: CycleStepper>(start: S, cap: u64) -> PeriodResult {
    if cap == 0 {
        return PeriodResult::ExceededCap;
    }

    // Phase 1: state-cycle length lambda (Brent).
    let mut power: u64 = 1;
    let mut lam: u64 = 1;
    let mut tortoise = start.clone();
    let mut hare = start.clone();
    hare.advance();
    let mut budget = cap.saturating_mul(6).saturating_add(64);
    while !tortoise.same_state(&hare) {
        if power == lam {
            tortoise = hare.clone();
            power = power.saturating_mul(2);
            lam = 0;
        }
        hare.advance();
        lam += 1;
        budget -= 1;
        if lam > cap || budget == 0 {
            return PeriodResult::ExceededCap;
        }
    }

    // Phase 2: tail length mu.
    let mut front = start.clone();
    for _ in 0..lam {
        front.advance();
    }
    let mut back = start.clone();
    let mut mu: u64 = 0;
    while !back.same_state(&front) {
        back.advance();
        front.advance();
        mu += 1;
        if mu > cap {
            return PeriodResult::ExceededCap;
        }
    }

    // Phase 3: inside the cycle, the output period is the least divisor d
    // of lambda with o[i+d] = o[i] for all i.
    let mut runner = start;
    for _ in 0..mu {
        runner.advance();
    }
    let outputs: Vec<S::Out> = (0..lam).map(|_| runner.advance()).collect();
    let mut divisors: Vec<u64> = Vec::new();
    let mut d = 1;
    while d * d <= lam {
        if lam % d == 0 {
            divisors.push(d);
            if d != lam / d {
                divisors.push(lam / d);
            }
        }
        d += 1;
    }
    divisors.sort_unstable();
    for d in divisors {
        let d = d as usize;
        if (0..outputs.len()).all(|i| outputs[i] == outputs[(i + d) % outputs.len()]) {
            return PeriodResult::Period(d as u64);
        }
    }
    PeriodResult::Period(lam)
}

/// Cycle length of the internal state sequence under raw stepping.
pub fn detect_state_period(spec: &GeneratorSpec, cap: u64) -> Result<PeriodResult, GeneratorError> {
    let state = GeneratorState::from_spec(spec)?;
    Ok(find_period(RawStepper(state), cap))
}

/// Cycle length of the output stream under the given evaluation mode.
///
/// Intended for small-modulus generators; the search gives up (returning
/// [`PeriodResult::ExceededCap`]) once the cycle cannot be confirmed within
/// `cap` outputs.
pub fn detect_period(spec: &GeneratorSpec, kind: ModeKind, cap: u64) -> Result<PeriodResult, GeneratorError> {
    detect_period_two_source(spec, None, kind, cap)
}

/// As [`detect_period`], drawing `x2` from `second` when the mode is
/// [`ModeKind::RatioTwoSource`].
pub fn detect_period_two_source(
    spec: &GeneratorSpec,
    second: Option<&GeneratorSpec>,
    kind: ModeKind,
    cap: u64,
) -> Result<PeriodResult, GeneratorError> {
    let primary = GeneratorState::from_spec(spec)?;
    let secondary = match (kind, second) {
        (ModeKind::RatioTwoSource, Some(s)) => Some(GeneratorState::from_spec(s)?),
        _ => None,
    };
    let m = spec.range_bound();
    let stepper = ModeStepper { primary, secondary, kind, m, half: m / 2 };
    Ok(find_period(stepper, cap))
}
