//! Command-line surface: stream generation (including raw little-endian
//! words for external test suites), exact-distribution queries, battery
//! comparisons, throughput benchmarks, and period probes.
//!
//! Exit codes: 0 success; 1 when a checked bound is violated (e.g. a KS
//! distance above its theorem bound); 2 for usage errors.

use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::battery::{run_battery, run_battery_two_source, BatteryError, BatteryReport};
use crate::generators::period::{detect_period_two_source, detect_state_period, period_pair_length};
use crate::generators::{GeneratorError, GeneratorSpec, GeneratorState};
use crate::theory::{
    ks_distance_direct_capped, ks_distance_direct2_capped, ratio_cdf_eval, ratio_ks_scan_capped,
    value_count, value_count_asymptotic, ExactFraction, FractionError, KsReport, TheoryError,
    DEFAULT_DIRECT2_KS_CAP, DEFAULT_DIRECT_KS_CAP, DEFAULT_KS_CAP,
};
use crate::transform::{ModeKind, ModulusContext, OutputStream, TransformError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Battery(#[from] BatteryError),
    #[error(transparent)]
    Fraction(#[from] FractionError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

const SPEC_GRAMMAR: &str = "spec grammar: lcg:m=<int>,a=<int>,c=<int> | lcgp:m=<int>,a=<int> | \
     xor64:<l1>,<r>,<l2> | lfib:<2pK>,<long>,<short>,<+|-> | sm64; integers accept decimal, 2pK, 2pK-D";

/// Evaluation mode argument; `ratio2:<spec>` names the second source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModeArg {
    Direct,
    Direct2,
    Ratio,
    RatioTwoSource(String),
}

impl ModeArg {
    pub fn kind(&self) -> ModeKind {
        match self {
            ModeArg::Direct => ModeKind::Direct,
            ModeArg::Direct2 => ModeKind::Direct2,
            ModeArg::Ratio => ModeKind::Ratio,
            ModeArg::RatioTwoSource(_) => ModeKind::RatioTwoSource,
        }
    }
}

impl FromStr for ModeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(ModeArg::Direct),
            "direct2" => Ok(ModeArg::Direct2),
            "ratio" => Ok(ModeArg::Ratio),
            other => match other.strip_prefix("ratio2:") {
                Some(spec) if !spec.is_empty() => Ok(ModeArg::RatioTwoSource(spec.to_string())),
                _ => Err(format!("unknown mode `{other}` (expected direct, direct2, ratio, ratio2:<spec>)")),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// One decimal per line, 17 significant digits.
    #[value(name = "f64-text")]
    F64Text,
    /// `floor(u * 2^32)` as little-endian words, clamped to the range.
    #[value(name = "u32-le")]
    U32LittleEndian,
    /// `floor(u * 2^64)` as little-endian words, clamped to the range.
    #[value(name = "u64-le")]
    U64LittleEndian,
}

#[derive(Parser, Debug)]
#[command(name = "rngratio", version, about = "Ratio evaluation for RNGs: streams, exact theory, battery, benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit outputs from a generator under an evaluation mode.
    Gen(GenArgs),
    /// Exact distribution queries (CDF, KS distances, value counts).
    Theory(TheoryArgs),
    /// Run the six-test battery over one or more modes.
    Battery(BatteryArgs),
    /// Time raw output generation.
    Bench(BenchArgs),
    /// Probe stream periods of miniature generators.
    Period(PeriodArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Generator spec string.
    spec: String,
    #[arg(long, default_value = "direct")]
    mode: ModeArg,
    #[arg(long)]
    count: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "f64-text")]
    format: OutputFormat,
}

#[derive(Args, Debug)]
struct TheoryArgs {
    #[command(subcommand)]
    cmd: TheoryCmd,
}

#[derive(Subcommand, Debug)]
enum TheoryCmd {
    /// Exact CDF of the ratio evaluation at a point.
    Cdf {
        #[arg(long)]
        m: u64,
        /// Query point as a rational `a/b` (or integer).
        #[arg(long)]
        t: String,
        #[arg(long)]
        json: bool,
    },
    /// Exact KS distance for a mode, checked against its theorem bound.
    Ks {
        #[arg(long)]
        m: u64,
        #[arg(long, default_value = "ratio")]
        mode: ModeArg,
        /// Override the quadratic-cost cap.
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Interior-jump deviation versus the derived appendix constant.
    Interior {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Number of attainable values, exact and asymptotic.
    Count {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
struct BatteryArgs {
    spec: String,
    /// Comma-separated subset of direct, direct2, ratio, ratio2:<spec>.
    #[arg(long, default_value = "direct,ratio")]
    modes: String,
    #[arg(long, default_value_t = 10_000_000)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct BenchArgs {
    spec: String,
    #[arg(long, default_value = "direct")]
    mode: ModeArg,
    #[arg(long)]
    count: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct PeriodArgs {
    spec: String,
    #[arg(long, default_value = "ratio")]
    mode: ModeArg,
    /// Give up once the cycle cannot be confirmed within this many outputs.
    #[arg(long)]
    cap: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

/// Wall-clock timing of pure generation into a blackhole sink.
#[derive(Debug, Clone, Serialize)]
pub struct BenchResult {
    pub generator: String,
    pub mode: ModeKind,
    pub count: u64,
    pub elapsed_seconds: f64,
    pub nanos_per_output: f64,
}

pub const BENCH_MIN_COUNT: u64 = 1_000_000;
pub const BENCH_REPS: u32 = 3;

fn build_stream(spec: &GeneratorSpec, mode: &ModeArg, seed: u64) -> Result<OutputStream<GeneratorState>, CliError> {
    let spec = spec.with_seed(seed);
    let ctx = ModulusContext::new(spec.range_bound())?;
    let primary = GeneratorState::from_spec(&spec)?;
    match mode {
        ModeArg::RatioTwoSource(second) => {
            let second = GeneratorSpec::parse(second, crate::battery::derive_secondary_seed(seed))?;
            let secondary = GeneratorState::from_spec(&second)?;
            Ok(OutputStream::two_source(ctx, primary, secondary)?)
        }
        other => Ok(OutputStream::new(other.kind(), ctx, primary)?),
    }
}

/// Time `count` outputs, repeated `reps` times, keeping the fastest run.
pub fn measure_throughput(
    spec: &GeneratorSpec,
    mode: &ModeArg,
    count: u64,
    seed: u64,
    reps: u32,
) -> Result<BenchResult, CliError> {
    let mut best = f64::INFINITY;
    for _ in 0..reps.max(1) {
        let mut stream = build_stream(spec, mode, seed)?;
        let start = Instant::now();
        for _ in 0..count {
            std::hint::black_box(stream.next_output());
        }
        best = best.min(start.elapsed().as_secs_f64());
    }
    Ok(BenchResult {
        generator: spec.to_string(),
        mode: mode.kind(),
        count,
        elapsed_seconds: best,
        nanos_per_output: best * 1e9 / count as f64,
    })
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    match dispatch(cli, &mut out) {
        Ok(code) => {
            let _ = out.flush();
            code
        }
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cli: Cli, out: &mut impl Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args, out),
        Command::Theory(args) => cmd_theory(args.cmd, out),
        Command::Battery(args) => cmd_battery(args, out),
        Command::Bench(args) => cmd_bench(args, out),
        Command::Period(args) => cmd_period(args, out),
    }
}

fn parse_spec(input: &str, seed: u64) -> Result<GeneratorSpec, CliError> {
    GeneratorSpec::parse(input, seed).map_err(|e| CliError::Usage(format!("{e}; {SPEC_GRAMMAR}")))
}

/// Comma-separated mode list. A `ratio2:<spec>` entry may itself contain
/// commas, so tokens that are not modes extend the preceding ratio2 spec.
fn parse_mode_list(input: &str) -> Result<Vec<ModeArg>, CliError> {
    let mut modes: Vec<ModeArg> = Vec::new();
    for token in input.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match ModeArg::from_str(token) {
            Ok(mode) => modes.push(mode),
            Err(e) => match modes.last_mut() {
                Some(ModeArg::RatioTwoSource(spec)) => {
                    spec.push(',');
                    spec.push_str(token);
                }
                _ => return Err(CliError::Usage(e)),
            },
        }
    }
    if modes.is_empty() {
        return Err(CliError::Usage("--modes must name at least one mode".into()));
    }
    Ok(modes)
}

fn cmd_gen(args: GenArgs, out: &mut impl Write) -> Result<i32, CliError> {
    if args.count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let spec = parse_spec(&args.spec, args.seed)?;
    let mut stream = build_stream(&spec, &args.mode, args.seed)?;
    match args.format {
        OutputFormat::F64Text => {
            for _ in 0..args.count {
                writeln!(out, "{:.16e}", stream.next_output())?;
            }
        }
        OutputFormat::U32LittleEndian => {
            for _ in 0..args.count {
                let w = (stream.next_output() * 4294967296.0) as u32;
                out.write_all(&w.to_le_bytes())?;
            }
        }
        OutputFormat::U64LittleEndian => {
            for _ in 0..args.count {
                let w = (stream.next_output() * 18446744073709551616.0) as u64;
                out.write_all(&w.to_le_bytes())?;
            }
        }
    }
    Ok(0)
}

fn write_ks_report(r: &KsReport, json: bool, out: &mut impl Write) -> Result<i32, CliError> {
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(r).expect("serializable"))?;
    } else {
        writeln!(out, "mode\tm\tdistance\tdecimal\tattained_at\tside\tbound\twithin_bound")?;
        writeln!(
            out,
            "{}\t{}\t{}\t{:.6e}\t{}\t{}\t{}\t{}",
            r.mode,
            r.m,
            r.distance,
            r.distance.to_f64(),
            r.attained_at,
            r.side,
            r.bound,
            r.within_bound
        )?;
    }
    Ok(if r.within_bound { 0 } else { 1 })
}

fn cmd_theory(cmd: TheoryCmd, out: &mut impl Write) -> Result<i32, CliError> {
    match cmd {
        TheoryCmd::Cdf { m, t, json } => {
            let t: ExactFraction = t.parse()?;
            let value = ratio_cdf_eval(m, &t)?;
            if json {
                #[derive(Serialize)]
                struct CdfRow<'a> {
                    m: u64,
                    t: &'a ExactFraction,
                    cdf: &'a ExactFraction,
                    decimal: f64,
                }
                let row = CdfRow { m, t: &t, cdf: &value, decimal: value.to_f64() };
                writeln!(out, "{}", serde_json::to_string_pretty(&row).expect("serializable"))?;
            } else {
                writeln!(out, "cdf\tdecimal")?;
                writeln!(out, "{}\t{}", value, value.to_f64())?;
            }
            Ok(0)
        }
        TheoryCmd::Ks { m, mode, cap, json } => {
            let report = match mode.kind() {
                ModeKind::Ratio | ModeKind::RatioTwoSource => {
                    ratio_ks_scan_capped(m, cap.unwrap_or(DEFAULT_KS_CAP))?.0
                }
                ModeKind::Direct => ks_distance_direct_capped(m, cap.unwrap_or(DEFAULT_DIRECT_KS_CAP))?,
                ModeKind::Direct2 => ks_distance_direct2_capped(m, cap.unwrap_or(DEFAULT_DIRECT2_KS_CAP))?,
            };
            write_ks_report(&report, json, out)
        }
        TheoryCmd::Interior { m, cap, json } => {
            let report = ratio_ks_scan_capped(m, cap.unwrap_or(DEFAULT_KS_CAP))?.1;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"))?;
            } else {
                writeln!(out, "m\tmax_interior\tdecimal\tattained_at\tbound\twithin")?;
                writeln!(
                    out,
                    "{}\t{}\t{:.6e}\t{}\t{}\t{}",
                    report.m,
                    report.max_interior_deviation,
                    report.max_interior_deviation.to_f64(),
                    report.attained_at,
                    report.bound,
                    report.within
                )?;
            }
            Ok(if report.within { 0 } else { 1 })
        }
        TheoryCmd::Count { m, json } => {
            let exact = value_count(m)?;
            let asymptotic = value_count_asymptotic(m);
            if json {
                #[derive(Serialize)]
                struct CountRow {
                    m: u64,
                    count: u64,
                    asymptotic: f64,
                }
                let row = CountRow { m, count: exact, asymptotic };
                writeln!(out, "{}", serde_json::to_string_pretty(&row).expect("serializable"))?;
            } else {
                writeln!(out, "m\tcount\tasymptotic")?;
                writeln!(out, "{m}\t{exact}\t{asymptotic:.4}")?;
            }
            Ok(0)
        }
    }
}

fn cmd_battery(args: BatteryArgs, out: &mut impl Write) -> Result<i32, CliError> {
    let spec = parse_spec(&args.spec, args.seed)?;
    let modes = parse_mode_list(&args.modes)?;
    let mut reports: Vec<BatteryReport> = Vec::new();
    for mode in &modes {
        let report = match mode {
            ModeArg::RatioTwoSource(second) => {
                let second = parse_spec(second, args.seed)?;
                run_battery_two_source(&spec, &second, args.n, args.seed)?
            }
            other => run_battery(&spec, other.kind(), args.n, args.seed)?,
        };
        reports.push(report);
    }
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&reports).expect("serializable"))?;
        return Ok(0);
    }
    writeln!(out, "generator\tmode\ttest\tstatistic\tp\tverdict\tn")?;
    for r in &reports {
        for o in &r.outcomes {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:e}\t{}\t{}",
                r.generator, r.mode, o.test_name, o.statistic, o.p_value, o.verdict, o.n_used
            )?;
        }
    }
    writeln!(out)?;
    writeln!(out, "generator\tmode\tfailures\telapsed_s")?;
    for r in &reports {
        writeln!(out, "{}\t{}\t{}\t{:.2}", r.generator, r.mode, r.failure_cell(), r.elapsed_seconds)?;
    }
    Ok(0)
}

fn cmd_bench(args: BenchArgs, out: &mut impl Write) -> Result<i32, CliError> {
    if args.count < BENCH_MIN_COUNT {
        return Err(CliError::Usage(format!(
            "--count must be at least {BENCH_MIN_COUNT} for stable timing"
        )));
    }
    let spec = parse_spec(&args.spec, args.seed)?;
    let result = measure_throughput(&spec, &args.mode, args.count, args.seed, BENCH_REPS)?;
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&result).expect("serializable"))?;
    } else {
        writeln!(out, "generator\tmode\tcount\telapsed_s\tns_per_output")?;
        writeln!(
            out,
            "{}\t{}\t{}\t{:.4}\t{:.2}",
            result.generator, result.mode, result.count, result.elapsed_seconds, result.nanos_per_output
        )?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct PeriodReport {
    generator: String,
    mode: ModeKind,
    base_period: Option<u64>,
    pair_period_bound: Option<u64>,
    mode_period: Option<u64>,
    divides_bound: Option<bool>,
}

fn cmd_period(args: PeriodArgs, out: &mut impl Write) -> Result<i32, CliError> {
    let spec = parse_spec(&args.spec, args.seed)?;
    let second = match &args.mode {
        ModeArg::RatioTwoSource(s) => Some(parse_spec(s, crate::battery::derive_secondary_seed(args.seed))?),
        _ => None,
    };
    let base = detect_state_period(&spec, args.cap)?;
    let mode_period = detect_period_two_source(&spec, second.as_ref(), args.mode.kind(), args.cap)?;

    let base_period = base.period();
    let pair_bound = base_period.map(period_pair_length);
    // Direct keeps the base period; the pair-consuming modes answer to T1.
    let bound = match args.mode.kind() {
        ModeKind::Direct => base_period,
        _ => pair_bound,
    };
    let report = PeriodReport {
        generator: spec.to_string(),
        mode: args.mode.kind(),
        base_period,
        pair_period_bound: pair_bound,
        mode_period: mode_period.period(),
        divides_bound: match (bound, mode_period.period()) {
            (Some(b), Some(p)) => Some(b % p == 0),
            _ => None,
        },
    };
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"))?;
    } else {
        let show = |v: Option<u64>| v.map_or_else(|| "exceeded-cap".to_string(), |x| x.to_string());
        writeln!(out, "generator\tmode\tbase_period\tpair_period\tmode_period\tdivides_bound")?;
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            report.generator,
            report.mode,
            show(report.base_period),
            show(report.pair_period_bound),
            show(report.mode_period),
            report.divides_bound.map_or_else(|| "exceeded-cap".to_string(), |b| b.to_string()),
        )?;
    }
    Ok(0)
}
