//! Ratio evaluation for integer random number generators.
//!
//! A base generator produces integers in `{0, …, M−1}`. Instead of the usual
//! `x/M` evaluation, the *ratio* evaluation consumes two consecutive integers
//! and returns `min(x1,x2)/max(x1,x2)`, with the zero and tie cases mapped to
//! two replacement values `ε₀` and `1−ε₁` so that the output stays strictly
//! inside `(0,1)`. The ratio is far less regular than the direct grid and
//! empirically repairs many mediocre generators.
//!
//! The crate has four library layers plus a CLI:
//!
//! * [`transform`] — the direct, direct-2 and ratio evaluations themselves;
//! * [`generators`] — a small zoo of base generators (LCGs, xorshift,
//!   lagged Fibonacci, a SplitMix64 reference) and period probes;
//! * [`theory`] — an exact-rational engine for the ratio's distribution:
//!   CDF, Kolmogorov–Smirnov distances, Farey enumeration, value counts;
//! * [`battery`] — a six-test statistical battery with the
//!   fail/suspicious/pass p-value bands, for comparing evaluation modes.
//!
//! The `rngratio` binary exposes all of it: `gen`, `theory`, `battery`,
//! `bench` and `period` subcommands.

pub mod battery;
pub mod cli;
pub mod generators;
pub mod stats;
pub mod theory;
pub mod transform;
