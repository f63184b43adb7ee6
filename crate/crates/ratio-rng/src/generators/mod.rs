//! Base generator zoo: the recursions that feed the evaluation modes.
//!
//! Families: power-of-two LCGs, prime-modulus (64-bit) LCGs, Marsaglia's
//! 64-bit xorshift, lagged Fibonacci mod a power of two, and SplitMix64 as
//! a strong reference for battery calibration.
//!
//! Seeding is deterministic per family from a single 64-bit seed:
//!
//! * `lcg` — state = seed mod 2^k; forced odd when c = 0 (multiplicative
//!   generators need an odd state for full period on the odd residues);
//! * `lcgp` — state = seed mod m, bumped to 1 if that is 0;
//! * `xor64` — state = seed; a zero seed is rejected;
//! * `lfib` — the 64-bit expander LCG(2^64, 6364136223846793003,
//!   1442695040888963407) is stepped once per lag slot, keeping the top 31
//!   bits; an all-zero buffer is rejected;
//! * `sm64` — state = seed.

pub mod period;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::transform::RawSource;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("cannot parse generator spec `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("modulus {0} is not a power of two")]
    NotPowerOfTwo(u128),
    #[error("modulus {0} out of range for this family")]
    BadModulus(u128),
    #[error("xorshift shift amounts must lie in 1..=63, got {0}")]
    BadShift(u32),
    #[error("lags must satisfy long > short >= 1, got ({0}, {1})")]
    BadLags(usize, usize),
    #[error("seed 0 leaves the xorshift state zero, which is a fixed point")]
    ZeroXorshiftState,
    #[error("lag buffer expanded to all zeros; pick another seed")]
    AllZeroLagBuffer,
}

/// Lagged-Fibonacci combination operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfibOp {
    Add,
    Sub,
}

/// Family plus its constants; the seed lives in [`GeneratorSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyParams {
    /// `s ← (a·s + c) mod 2^k`, modulus a power of two, 4 ≤ 2^k ≤ 2^64.
    LcgPow2 { modulus: u128, a: u64, c: u64 },
    /// `s ← (a·s) mod m`, m < 2^64, multiplication through a 128-bit
    /// intermediate.
    LcgPrimeMod { modulus: u64, a: u64 },
    /// `s ^= s<<l1; s ^= s>>r; s ^= s<<l2` on a nonzero 64-bit state.
    Xorshift64 { l1: u32, r: u32, l2: u32 },
    /// `x_i = (x_{i−long} op x_{i−short}) mod 2^bits`.
    LaggedFibonacci { bits: u32, long: usize, short: usize, op: LfibOp },
    /// SplitMix64; the calibration reference.
    SplitMix64,
}

impl FamilyParams {
    /// Exclusive upper bound on emitted integers (the `M` of the evaluation).
    pub fn range_bound(&self) -> u128 {
        match self {
            FamilyParams::LcgPow2 { modulus, .. } => *modulus,
            FamilyParams::LcgPrimeMod { modulus, .. } => *modulus as u128,
            FamilyParams::Xorshift64 { .. } | FamilyParams::SplitMix64 => 1u128 << 64,
            FamilyParams::LaggedFibonacci { bits, .. } => 1u128 << bits,
        }
    }

    fn validate(&self) -> Result<(), GeneratorError> {
        match *self {
            FamilyParams::LcgPow2 { modulus, .. } => {
                if !modulus.is_power_of_two() {
                    return Err(GeneratorError::NotPowerOfTwo(modulus));
                }
                if modulus < 4 || modulus > 1u128 << 64 {
                    return Err(GeneratorError::BadModulus(modulus));
                }
            }
            FamilyParams::LcgPrimeMod { modulus, .. } => {
                if modulus < 3 {
                    return Err(GeneratorError::BadModulus(modulus as u128));
                }
            }
            FamilyParams::Xorshift64 { l1, r, l2 } => {
                for s in [l1, r, l2] {
                    if s == 0 || s > 63 {
                        return Err(GeneratorError::BadShift(s));
                    }
                }
            }
            FamilyParams::LaggedFibonacci { bits, long, short, .. } => {
                if bits == 0 || bits > 63 {
                    return Err(GeneratorError::BadModulus(1u128 << bits));
                }
                if short == 0 || short >= long {
                    return Err(GeneratorError::BadLags(long, short));
                }
            }
            FamilyParams::SplitMix64 => {}
        }
        Ok(())
    }
}

/// A parameterized base generator with its seed: everything needed to
/// reproduce a stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub params: FamilyParams,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(params: FamilyParams, seed: u64) -> Result<Self, GeneratorError> {
        params.validate()?;
        Ok(Self { params, seed })
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { params: self.params.clone(), seed }
    }

    pub fn range_bound(&self) -> u128 {
        self.params.range_bound()
    }

    /// Parse the compact CLI form, e.g. `lcg:m=2p48,a=25214903917,c=11`,
    /// `lcgp:m=2p31-1,a=16807`, `xor64:13,7,17`, `lfib:2p31,55,24,+`,
    /// `sm64`. Integers accept decimal, `2pK` and `2pK-D`.
    pub fn parse(input: &str, seed: u64) -> Result<Self, GeneratorError> {
        let err = |reason: &str| GeneratorError::Parse { input: input.to_string(), reason: reason.to_string() };
        let (head, rest) = match input.split_once(':') {
            Some((h, r)) => (h, r),
            None => (input, ""),
        };
        let params = match head {
            "lcg" | "lcgp" => {
                let mut m = None;
                let mut a = None;
                let mut c = None;
                for field in rest.split(',').filter(|f| !f.is_empty()) {
                    let (key, value) = field.split_once('=').ok_or_else(|| err("expected key=value fields"))?;
                    let v = parse_int(value).ok_or_else(|| err(&format!("bad integer `{value}`")))?;
                    match key {
                        "m" => m = Some(v),
                        "a" => a = Some(v),
                        "c" => c = Some(v),
                        _ => return Err(err(&format!("unknown field `{key}`"))),
                    }
                }
                let m = m.ok_or_else(|| err("missing m"))?;
                let a = a.ok_or_else(|| err("missing a"))?;
                let a = u64::try_from(a).map_err(|_| err("a must fit in 64 bits"))?;
                if head == "lcg" {
                    let c = u64::try_from(c.unwrap_or(0)).map_err(|_| err("c must fit in 64 bits"))?;
                    FamilyParams::LcgPow2 { modulus: m, a, c }
                } else {
                    if c.is_some() {
                        return Err(err("lcgp is multiplicative; it takes no c"));
                    }
                    let m = u64::try_from(m).map_err(|_| err("lcgp modulus must fit in 64 bits"))?;
                    FamilyParams::LcgPrimeMod { modulus: m, a }
                }
            }
            "xor64" => {
                let shifts: Vec<_> = rest.split(',').map(parse_int).collect();
                match shifts.as_slice() {
                    [Some(l1), Some(r), Some(l2)] => FamilyParams::Xorshift64 {
                        l1: *l1 as u32,
                        r: *r as u32,
                        l2: *l2 as u32,
                    },
                    _ => return Err(err("expected xor64:<l1>,<r>,<l2>")),
                }
            }
            "lfib" => {
                let parts: Vec<_> = rest.split(',').collect();
                if parts.len() != 4 {
                    return Err(err("expected lfib:<modulus>,<long>,<short>,<+|->"));
                }
                let m = parse_int(parts[0]).ok_or_else(|| err("bad modulus"))?;
                if !m.is_power_of_two() {
                    return Err(GeneratorError::NotPowerOfTwo(m));
                }
                let bits = m.trailing_zeros();
                let long = parse_int(parts[1]).ok_or_else(|| err("bad long lag"))? as usize;
                let short = parse_int(parts[2]).ok_or_else(|| err("bad short lag"))? as usize;
                let op = match parts[3] {
                    "+" => LfibOp::Add,
                    "-" => LfibOp::Sub,
                    other => return Err(err(&format!("bad operator `{other}`"))),
                };
                FamilyParams::LaggedFibonacci { bits, long, short, op }
            }
            "sm64" => {
                if !rest.is_empty() {
                    return Err(err("sm64 takes no parameters"));
                }
                FamilyParams::SplitMix64
            }
            other => return Err(err(&format!("unknown family `{other}`"))),
        };
        Self::new(params, seed)
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.params {
            FamilyParams::LcgPow2 { modulus, a, c } => write!(f, "lcg:m={modulus},a={a},c={c}"),
            FamilyParams::LcgPrimeMod { modulus, a } => write!(f, "lcgp:m={modulus},a={a}"),
            FamilyParams::Xorshift64 { l1, r, l2 } => write!(f, "xor64:{l1},{r},{l2}"),
            FamilyParams::LaggedFibonacci { bits, long, short, op } => {
                let op = if *op == LfibOp::Add { '+' } else { '-' };
                write!(f, "lfib:2p{bits},{long},{short},{op}")
            }
            FamilyParams::SplitMix64 => write!(f, "sm64"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = GeneratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s, 1)
    }
}

/// Accepts decimal, `2pK`, or `2pK-D`.
fn parse_int(s: &str) -> Option<u128> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("2p") {
        let (exp, sub) = match rest.split_once('-') {
            Some((e, d)) => (e, d.parse::<u128>().ok()?),
            None => (rest, 0),
        };
        let exp: u32 = exp.parse().ok()?;
        if exp > 64 {
            return None;
        }
        (1u128 << exp).checked_sub(sub)
    } else {
        s.parse().ok()
    }
}

const LFIB_EXPANDER_MUL: u64 = 6364136223846793003;
const LFIB_EXPANDER_INC: u64 = 1442695040888963407;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum StateInner {
    Lcg { s: u64, a: u64, c: u64, mask: u64 },
    LcgPrime { s: u64, a: u64, m: u64 },
    Xorshift { s: u64, l1: u32, r: u32, l2: u32 },
    Lfib { buf: Vec<u64>, j: usize, gap: usize, mask: u64, op: LfibOp },
    SplitMix { s: u64 },
}

/// A live generator: spec, current state, and a step counter.
#[derive(Debug, Clone)]
pub struct GeneratorState {
    spec: GeneratorSpec,
    inner: StateInner,
    steps: u64,
}

impl GeneratorState {
    pub fn from_spec(spec: &GeneratorSpec) -> Result<Self, GeneratorError> {
        spec.params.validate()?;
        let seed = spec.seed;
        let inner = match spec.params {
            FamilyParams::LcgPow2 { modulus, a, c } => {
                let mask = (modulus - 1) as u64;
                let mut s = seed & mask;
                if c == 0 {
                    s |= 1;
                }
                StateInner::Lcg { s, a, c, mask }
            }
            FamilyParams::LcgPrimeMod { modulus, a } => {
                let mut s = seed % modulus;
                if s == 0 {
                    s = 1;
                }
                StateInner::LcgPrime { s, a, m: modulus }
            }
            FamilyParams::Xorshift64 { l1, r, l2 } => {
                if seed == 0 {
                    return Err(GeneratorError::ZeroXorshiftState);
                }
                StateInner::Xorshift { s: seed, l1, r, l2 }
            }
            FamilyParams::LaggedFibonacci { bits, long, short, op } => {
                let mask = (1u64 << bits) - 1;
                let mut x = seed;
                let mut buf = Vec::with_capacity(long);
                for _ in 0..long {
                    x = x.wrapping_mul(LFIB_EXPANDER_MUL).wrapping_add(LFIB_EXPANDER_INC);
                    buf.push((x >> 33) & mask);
                }
                if buf.iter().all(|&v| v == 0) {
                    return Err(GeneratorError::AllZeroLagBuffer);
                }
                StateInner::Lfib { buf, j: 0, gap: long - short, mask, op }
            }
            FamilyParams::SplitMix64 => StateInner::SplitMix { s: seed },
        };
        Ok(Self { spec: spec.clone(), inner, steps: 0 })
    }

    /// Build a lagged-Fibonacci generator from an explicit lag buffer
    /// (oldest value first). Rejects an all-zero buffer.
    pub fn lagged_fibonacci_from_buffer(
        bits: u32,
        short: usize,
        op: LfibOp,
        buf: Vec<u64>,
    ) -> Result<Self, GeneratorError> {
        let long = buf.len();
        let params = FamilyParams::LaggedFibonacci { bits, long, short, op };
        params.validate()?;
        if buf.iter().all(|&v| v == 0) {
            return Err(GeneratorError::AllZeroLagBuffer);
        }
        let mask = (1u64 << bits) - 1;
        if buf.iter().any(|&v| v > mask) {
            return Err(GeneratorError::BadModulus(1u128 << bits));
        }
        Ok(Self {
            spec: GeneratorSpec { params, seed: 0 },
            inner: StateInner::Lfib { buf, j: 0, gap: long - short, mask, op },
            steps: 0,
        })
    }

    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps
    }

    /// Internal state configuration, for cycle detection. Equal keys mean
    /// the streams continue identically.
    pub(crate) fn state_key(&self) -> &StateInner {
        &self.inner
    }

    #[inline]
    fn step(&mut self) -> u64 {
        self.steps += 1;
        match &mut self.inner {
            StateInner::Lcg { s, a, c, mask } => {
                *s = s.wrapping_mul(*a).wrapping_add(*c) & *mask;
                *s
            }
            StateInner::LcgPrime { s, a, m } => {
                *s = ((*s as u128 * *a as u128) % *m as u128) as u64;
                *s
            }
            StateInner::Xorshift { s, l1, r, l2 } => {
                *s ^= *s << *l1;
                *s ^= *s >> *r;
                *s ^= *s << *l2;
                *s
            }
            StateInner::Lfib { buf, j, gap, mask, op } => {
                let other = buf[(*j + *gap) % buf.len()];
                let v = match op {
                    LfibOp::Add => buf[*j].wrapping_add(other) & *mask,
                    LfibOp::Sub => buf[*j].wrapping_sub(other) & *mask,
                };
                buf[*j] = v;
                *j = (*j + 1) % buf.len();
                v
            }
            StateInner::SplitMix { s } => {
                *s = s.wrapping_add(0x9E3779B97F4A7C15);
                let mut z = *s;
                z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
                z ^ (z >> 31)
            }
        }
    }
}

impl RawSource for GeneratorState {
    #[inline]
    fn next_raw(&mut self) -> u64 {
        self.step()
    }

    fn range_bound(&self) -> u128 {
        self.spec.range_bound()
    }
}

impl RawSource for &mut GeneratorState {
    #[inline]
    fn next_raw(&mut self) -> u64 {
        self.step()
    }

    fn range_bound(&self) -> u128 {
        self.spec.range_bound()
    }
}

/// The nine shipped parameterizations the battery compares, spanning rows
/// that become excellent under the ratio and rows that keep failing.
pub fn table1_specs(seed: u64) -> Vec<(&'static str, GeneratorSpec)> {
    let parse = |s: &str| GeneratorSpec::parse(s, seed).expect("shipped spec parses");
    vec![
        ("LCG(2^46,5^13,0)", parse("lcg:m=2p46,a=1220703125,c=0")),
        ("LCG(2^48,25214903917,11)", parse("lcg:m=2p48,a=25214903917,c=11")),
        ("LCG(2^48,5^19,0)", parse("lcg:m=2p48,a=19073486328125,c=0")),
        ("LCG(2^63,5^19,1)", parse("lcg:m=2p63,a=19073486328125,c=1")),
        ("LCG(2^31-1,16807,0)", parse("lcgp:m=2p31-1,a=16807")),
        ("LCG(2^61-1,2^30-2^19,0)", parse("lcgp:m=2p61-1,a=1073217536")),
        ("Marsa-xor64(13,7,17)", parse("xor64:13,7,17")),
        ("LFib(2^31,55,24,+)", parse("lfib:2p31,55,24,+")),
        ("LFib(2^31,55,24,-)", parse("lfib:2p31,55,24,-")),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigUint;

    fn state(spec: &str, seed: u64) -> GeneratorState {
        GeneratorState::from_spec(&GeneratorSpec::parse(spec, seed).unwrap()).unwrap()
    }

    #[test]
    fn minstd_first_step() {
        let mut g = state("lcgp:m=2p31-1,a=16807", 1);
        assert_eq!(g.next_raw(), 16807);
        assert_eq!(g.steps_taken(), 1);
    }

    #[test]
    fn minstd_ten_thousandth_matches_bigint_loop() {
        // Independent oracle: rerun the recursion in arbitrary precision.
        let m = BigUint::from((1u64 << 31) - 1);
        let a = BigUint::from(16807u64);
        let mut s = BigUint::from(1u64);
        for _ in 0..10_000 {
            s = (&s * &a) % &m;
        }
        let mut g = state("lcgp:m=2p31-1,a=16807", 1);
        let mut last = 0;
        for _ in 0..10_000 {
            last = g.next_raw();
        }
        assert_eq!(BigUint::from(last), s);
        assert_eq!(last, 1_043_618_065);
    }

    #[test]
    fn java_lcg_first_step_from_zero_seed() {
        // c odd, so seed 0 is a valid state: first step is a*0 + c = 11.
        let mut g = state("lcg:m=2p48,a=25214903917,c=11", 0);
        assert_eq!(g.next_raw(), 11);
    }

    #[test]
    fn pow2_lcg_matches_bigint_loop() {
        let m = BigUint::from(1u128 << 46);
        let a = BigUint::from(1220703125u64);
        let mut s = BigUint::from(12345u64 | 1);
        let mut g = state("lcg:m=2p46,a=1220703125,c=0", 12345);
        for _ in 0..10_000 {
            s = (&s * &a) % &m;
            assert_eq!(BigUint::from(g.next_raw()), s);
        }
    }

    #[test]
    fn multiplicative_pow2_seed_forced_odd() {
        let g = state("lcg:m=2p46,a=1220703125,c=0", 4);
        match g.inner {
            StateInner::Lcg { s, .. } => assert_eq!(s, 5),
            _ => unreachable!(),
        }
    }

    #[test]
    fn xorshift_first_steps_match_bit_trace() {
        // Hand-expanded: s=1 -> s^=s<<13 gives 0x2001; s^=s>>7 gives
        // 0x2041; s^=s<<17 gives 0x40822041 = 1082269761.
        let mut g = state("xor64:13,7,17", 1);
        assert_eq!(g.next_raw(), 1_082_269_761);
        assert_eq!(g.next_raw(), 1_152_992_998_833_853_505);
    }

    #[test]
    fn xorshift_never_hits_zero() {
        let mut g = state("xor64:13,7,17", 0xDEADBEEF);
        for _ in 0..100_000 {
            assert_ne!(g.next_raw(), 0);
        }
    }

    #[test]
    fn xorshift_two_steps_compose() {
        let mut g = state("xor64:13,7,17", 1);
        g.next_raw();
        let two = g.next_raw();
        let mut h = state("xor64:13,7,17", 1_082_269_761);
        assert_eq!(h.next_raw(), two);
    }

    #[test]
    fn xorshift_zero_seed_rejected() {
        let spec = GeneratorSpec::parse("xor64:13,7,17", 0).unwrap();
        assert!(matches!(GeneratorState::from_spec(&spec), Err(GeneratorError::ZeroXorshiftState)));
    }

    #[test]
    fn lfib_all_ones_buffer_first_output_two() {
        let mut g = GeneratorState::lagged_fibonacci_from_buffer(31, 24, LfibOp::Add, vec![1; 55]).unwrap();
        assert_eq!(g.next_raw(), 2);
    }

    #[test]
    fn lfib_all_zero_buffer_rejected() {
        assert!(matches!(
            GeneratorState::lagged_fibonacci_from_buffer(31, 24, LfibOp::Add, vec![0; 55]),
            Err(GeneratorError::AllZeroLagBuffer)
        ));
    }

    #[test]
    fn lfib_matches_scalar_reimplementation() {
        // Independent scalar loop over the same seeded buffer.
        let seed = 12345u64;
        let mut x = seed;
        let mut hist: Vec<u64> = (0..55)
            .map(|_| {
                x = x.wrapping_mul(LFIB_EXPANDER_MUL).wrapping_add(LFIB_EXPANDER_INC);
                (x >> 33) & ((1 << 31) - 1)
            })
            .collect();
        let mut g = state("lfib:2p31,55,24,+", seed);
        for i in 0..20_000 {
            let expected = (hist[i] + hist[i + 55 - 24]) & ((1 << 31) - 1);
            hist.push(expected);
            assert_eq!(g.next_raw(), expected, "step {i}");
        }
        // The subtraction variant needs its own history past the seed block.
        let mut sub_hist = hist[..55].to_vec();
        let mut g = state("lfib:2p31,55,24,-", seed);
        for i in 0..1000 {
            let expected = sub_hist[i].wrapping_sub(sub_hist[i + 55 - 24]) & ((1 << 31) - 1);
            sub_hist.push(expected);
            assert_eq!(g.next_raw(), expected, "sub step {i}");
        }
    }

    #[test]
    fn parse_rejects_malformed_specs() {
        for bad in [
            "lcg:m=10,a=5,c=1",      // not a power of two
            "lcg:m=2p65,a=5,c=1",    // too wide
            "lcgp:m=2p31-1,a=16807,c=3", // lcgp takes no c
            "xor64:13,7",
            "xor64:0,7,17",
            "lfib:2p31,24,55,+",     // lags swapped
            "lfib:2p31,55,24,*",
            "nope:1",
            "lcg:m=,a=5,c=1",
        ] {
            assert!(GeneratorSpec::parse(bad, 1).is_err(), "{bad} should fail");
        }
    }

    #[test]
    fn parse_power_notation() {
        assert_eq!(parse_int("2p31-1"), Some((1 << 31) - 1));
        assert_eq!(parse_int("2p64"), Some(1u128 << 64));
        assert_eq!(parse_int("2p65"), None);
        assert_eq!(parse_int("1024"), Some(1024));
    }

    #[test]
    fn display_round_trips_through_parse() {
        for (_, spec) in table1_specs(7) {
            let again = GeneratorSpec::parse(&spec.to_string(), 7).unwrap();
            assert_eq!(spec, again);
        }
    }

    #[test]
    fn table1_specs_all_construct() {
        for (name, spec) in table1_specs(12345) {
            let mut g = GeneratorState::from_spec(&spec).unwrap_or_else(|e| panic!("{name}: {e}"));
            let bound = spec.range_bound();
            for _ in 0..1000 {
                assert!((g.next_raw() as u128) < bound, "{name} emitted out of range");
            }
        }
    }

    #[test]
    fn splitmix_reference_values() {
        // First outputs for seed 0, per the published reference sequence.
        let mut g = state("sm64", 0);
        assert_eq!(g.next_raw(), 0xE220A8397B1DCDAF);
        assert_eq!(g.next_raw(), 0x6E789E6AA1B965F4);
    }
}
