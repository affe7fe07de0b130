//! Exhaustive comparisons over the type universe.

use super::oracle::DeclarativeOracle;
use crate::syntax::{print_type, Type};
use crate::typecheck::{encode_to_split, subtype, Context, Mode, SubtypeResult};
use rayon::prelude::*;
use serde::Serialize;

/// Disagreements kept in a report.
const KEEP: usize = 20;

/// Fuel for algorithmic queries during sweeps; far above what any universe
/// pair needs.
pub const SWEEP_FUEL: u64 = 100_000;

/// Result of comparing the algorithm with the declarative oracle.
#[derive(Clone, Debug, Default, Serialize)]
pub struct OracleSweep {
    pub types: usize,
    pub pairs: u64,
    pub agree: u64,
    pub yes: u64,
    pub unknown: u64,
    /// `(a, b, oracle, algorithm)` for the first disagreements.
    pub mismatches: Vec<(String, String, bool, String)>,
}

impl OracleSweep {
    pub fn passed(&self) -> bool {
        self.agree == self.pairs && self.unknown == 0
    }
}

/// Result of pushing every variance-mode `Yes` through the split encoding.
#[derive(Clone, Debug, Default, Serialize)]
pub struct EncodingSweep {
    pub variance_yes: u64,
    pub split_yes: u64,
    /// Pairs where split mode says yes and variance mode does not.
    pub split_only: u64,
    pub failures: Vec<(String, String, String)>,
}

impl EncodingSweep {
    pub fn passed(&self) -> bool {
        self.variance_yes == self.split_yes && self.failures.is_empty()
    }
}

fn merge<T>(mut a: Vec<T>, b: Vec<T>) -> Vec<T> {
    a.extend(b);
    a.truncate(KEEP);
    a
}

/// Compares `subtype` in variance mode with the oracle on every ordered pair.
pub fn oracle_sweep(oracle: &DeclarativeOracle) -> OracleSweep {
    let types = oracle.universe();
    let ctx = Context::new();
    let mut report = (0..types.len())
        .into_par_iter()
        .map(|i| {
            let mut r = OracleSweep::default();
            for (j, b) in types.iter().enumerate() {
                let expected = oracle.holds_at(i, j);
                let got = subtype(&ctx, &types[i], b, Mode::Variance, SWEEP_FUEL);
                r.pairs += 1;
                r.yes += expected as u64;
                if matches!(got, SubtypeResult::Unknown(_)) {
                    r.unknown += 1;
                }
                if got.is_yes() == expected && !matches!(got, SubtypeResult::Unknown(_)) {
                    r.agree += 1;
                } else if r.mismatches.len() < KEEP {
                    r.mismatches.push((print_type(&types[i]), print_type(b), expected, got.to_string()));
                }
            }
            r
        })
        .reduce(OracleSweep::default, |a, b| OracleSweep {
            types: 0,
            pairs: a.pairs + b.pairs,
            agree: a.agree + b.agree,
            yes: a.yes + b.yes,
            unknown: a.unknown + b.unknown,
            mismatches: merge(a.mismatches, b.mismatches),
        });
    report.types = types.len();
    report
}

/// Checks that the encoding preserves every variance-mode `Yes`.
pub fn encoding_sweep(types: &[Type]) -> EncodingSweep {
    let ctx = Context::new();
    let encoded: Vec<Type> = types.iter().map(encode_to_split).collect();
    (0..types.len())
        .into_par_iter()
        .map(|i| {
            let mut r = EncodingSweep::default();
            for (j, b) in types.iter().enumerate() {
                let var = subtype(&ctx, &types[i], b, Mode::Variance, SWEEP_FUEL).is_yes();
                let split = subtype(&ctx, &encoded[i], &encoded[j], Mode::Split, SWEEP_FUEL);
                if var {
                    r.variance_yes += 1;
                    if split.is_yes() {
                        r.split_yes += 1;
                    } else if r.failures.len() < KEEP {
                        r.failures.push((print_type(&types[i]), print_type(b), split.to_string()));
                    }
                } else if split.is_yes() {
                    r.split_only += 1;
                }
            }
            r
        })
        .reduce(EncodingSweep::default, |a, b| EncodingSweep {
            variance_yes: a.variance_yes + b.variance_yes,
            split_yes: a.split_yes + b.split_yes,
            split_only: a.split_only + b.split_only,
            failures: merge(a.failures, b.failures),
        })
}
