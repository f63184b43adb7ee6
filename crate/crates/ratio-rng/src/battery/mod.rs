//! Desk-scale statistical battery with the fail/suspicious/pass bands.
//!
//! A test is **failed** when its p-value lies outside
//! `[1e-10, 1−1e-10]` and **suspicious** when it lies in
//! `[1e-10, 1e-4] ∪ [1−1e-4, 1−1e-10]`. The battery runs six tests, each
//! on a fresh contiguous segment of the output stream, so a report is a
//! deterministic function of (generator, mode, budget, seed).
//!
//! Per-test sizing at budget `n`: KS uses `min(n, 1e6)` samples, the
//! chi-square and gap tests use `n`, serial uses `⌊n/2⌋` pairs, and the
//! birthday-spacings (256 × 4096 draws) and collision (32 × 2¹⁴ balls)
//! tests are fixed-size. The shipped defaults assume `n = 1e7`.

pub mod suite;

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::generators::{GeneratorError, GeneratorSpec, GeneratorState};
use crate::transform::{ModeKind, ModulusContext, OutputStream, TransformError};

pub use suite::{
    collision_lambda, test_birthday_spacings, test_chi2_equidistribution, test_collisions,
    test_gap, test_ks_uniform, test_serial_pairs,
};

#[derive(Debug, Error)]
pub enum BatteryError {
    #[error("{test} needs at least {needed} samples, got {got}")]
    InsufficientSamples { test: &'static str, needed: usize, got: usize },
    #[error("p-value {0} outside [0,1]")]
    BadPValue(f64),
    #[error("battery budget n={n} too small; need n >= {min}")]
    BudgetTooSmall { n: u64, min: u64 },
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Verdict bands on the p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Suspicious,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Suspicious => "suspicious",
            Verdict::Fail => "fail",
        })
    }
}

pub const FAIL_BAND: f64 = 1e-10;
pub const SUSPICIOUS_BAND: f64 = 1e-4;

/// Band classification: fail outside `[1e-10, 1−1e-10]`, suspicious in
/// `[1e-10, 1e-4] ∪ [1−1e-4, 1−1e-10]`, pass otherwise.
pub fn classify_p(p: f64) -> Result<Verdict, BatteryError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(BatteryError::BadPValue(p));
    }
    let tail = p.min(1.0 - p);
    if tail < FAIL_BAND {
        Ok(Verdict::Fail)
    } else if tail <= SUSPICIOUS_BAND {
        Ok(Verdict::Suspicious)
    } else {
        Ok(Verdict::Pass)
    }
}

/// One test's result.
#[derive(Debug, Clone, Serialize)]
pub struct TestOutcome {
    pub test_name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub verdict: Verdict,
    pub n_used: u64,
}

pub(crate) fn make_outcome(name: &str, statistic: f64, p: f64, n_used: u64) -> Result<TestOutcome, BatteryError> {
    Ok(TestOutcome {
        test_name: name.to_string(),
        statistic,
        p_value: p,
        verdict: classify_p(p)?,
        n_used,
    })
}

/// A full battery run over one generator and mode.
#[derive(Debug, Clone, Serialize)]
pub struct BatteryReport {
    pub generator: String,
    pub mode: ModeKind,
    pub n: u64,
    pub seed: u64,
    pub outcomes: Vec<TestOutcome>,
    pub failed: usize,
    pub suspicious: usize,
    pub elapsed_seconds: f64,
}

impl BatteryReport {
    /// Table-1 style `F(S)` cell: failure count, suspicious count in
    /// parentheses when nonzero — `0`, `12(5)`, `(1)`.
    pub fn failure_cell(&self) -> String {
        format_failure_cell(self.failed, self.suspicious)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("test\tstatistic\tp\tverdict\tn\n");
        for o in &self.outcomes {
            out.push_str(&format!(
                "{}\t{}\t{:e}\t{}\t{}\n",
                o.test_name, o.statistic, o.p_value, o.verdict, o.n_used
            ));
        }
        out
    }
}

pub fn format_failure_cell(failed: usize, suspicious: usize) -> String {
    match (failed, suspicious) {
        (0, 0) => "0".to_string(),
        (f, 0) => f.to_string(),
        (0, s) => format!("({s})"),
        (f, s) => format!("{f}({s})"),
    }
}

/// Budget floor: below this the fixed-size tests dominate and the battery
/// loses its meaning.
pub const MIN_BATTERY_BUDGET: u64 = 100_000;

const KS_CAP: usize = 1_000_000;
const CHI2_BINS: usize = 1 << 10;
const SERIAL_CELLS_PER_AXIS: usize = 1 << 5;
const GAP_WINDOW: (f64, f64) = (0.0, 0.0625);
const GAP_MAX: usize = 64;
const BIRTHDAY_DAYS: u64 = 1 << 32;
const BIRTHDAY_DRAWS: usize = 4096;
// 256 replications put grid-structured streams ~16 sigma out; 64 leave
// them straddling the 1e-10 band.
const BIRTHDAY_REPS: usize = 256;
const COLLISION_URNS: usize = 1 << 20;
const COLLISION_BALLS: usize = 1 << 14;
const COLLISION_REPS: usize = 32;

/// Deterministic single-source battery run.
pub fn run_battery(spec: &GeneratorSpec, kind: ModeKind, n: u64, seed: u64) -> Result<BatteryReport, BatteryError> {
    let spec = spec.with_seed(seed);
    let ctx = ModulusContext::new(spec.range_bound())?;
    let state = GeneratorState::from_spec(&spec)?;
    let mut stream = OutputStream::new(kind, ctx, state)?;
    let label = spec.to_string();
    battery_over_stream(&mut stream, label, kind, n, seed)
}

/// Derives the second source's seed from the battery seed; one SplitMix64
/// output keeps the two streams decorrelated while staying reproducible.
pub fn derive_secondary_seed(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Two-source ratio battery run; both specs must share one modulus.
pub fn run_battery_two_source(
    spec: &GeneratorSpec,
    second: &GeneratorSpec,
    n: u64,
    seed: u64,
) -> Result<BatteryReport, BatteryError> {
    let spec = spec.with_seed(seed);
    let second = second.with_seed(derive_secondary_seed(seed));
    let ctx = ModulusContext::new(spec.range_bound())?;
    let primary = GeneratorState::from_spec(&spec)?;
    let secondary = GeneratorState::from_spec(&second)?;
    let mut stream = OutputStream::two_source(ctx, primary, secondary)?;
    let label = format!("{spec}+{second}");
    battery_over_stream(&mut stream, label, ModeKind::RatioTwoSource, n, seed)
}

fn battery_over_stream(
    stream: &mut OutputStream<GeneratorState>,
    generator: String,
    mode: ModeKind,
    n: u64,
    seed: u64,
) -> Result<BatteryReport, BatteryError> {
    if n < MIN_BATTERY_BUDGET {
        return Err(BatteryError::BudgetTooSmall { n, min: MIN_BATTERY_BUDGET });
    }
    let start = Instant::now();
    let n_usize = n as usize;
    let mut buf: Vec<f64> = Vec::new();
    let mut outcomes = Vec::with_capacity(6);

    stream.fill(&mut buf, n_usize.min(KS_CAP));
    outcomes.push(test_ks_uniform(&buf)?);

    stream.fill(&mut buf, n_usize);
    outcomes.push(test_chi2_equidistribution(&buf, CHI2_BINS)?);

    stream.fill(&mut buf, n_usize / 2 * 2);
    outcomes.push(test_serial_pairs(&buf, SERIAL_CELLS_PER_AXIS)?);

    stream.fill(&mut buf, n_usize);
    outcomes.push(test_gap(&buf, GAP_WINDOW.0, GAP_WINDOW.1, GAP_MAX)?);

    stream.fill(&mut buf, BIRTHDAY_DRAWS * BIRTHDAY_REPS);
    outcomes.push(test_birthday_spacings(&buf, BIRTHDAY_DAYS, BIRTHDAY_DRAWS)?);

    stream.fill(&mut buf, COLLISION_BALLS * COLLISION_REPS);
    outcomes.push(test_collisions(&buf, COLLISION_URNS, COLLISION_BALLS)?);

    let failed = outcomes.iter().filter(|o| o.verdict == Verdict::Fail).count();
    let suspicious = outcomes.iter().filter(|o| o.verdict == Verdict::Suspicious).count();
    Ok(BatteryReport {
        generator,
        mode,
        n,
        seed,
        outcomes,
        failed,
        suspicious,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}
