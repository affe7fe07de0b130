//! Safety fuzzing: generate well-typed programs, run them, count outcomes.

use super::gen::{gen_well_typed, GenConfig, GenError};
use crate::eval::{execute, safe_k, Allocator, Config, Outcome};
use crate::syntax::print_term;
use rayon::prelude::*;
use serde::Serialize;

/// Seed of the `i`-th program of a run.
pub fn program_seed(base: u64, i: u64) -> u64 {
    base.wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// One program that did not pass, with what is needed to replay it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzFailure {
    pub seed: u64,
    pub kind: String,
    pub program: Option<String>,
    pub ty: Option<String>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OutcomeCounts {
    pub value: u64,
    pub fuel_exhausted: u64,
    pub stuck: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FuzzReport {
    pub generated: u64,
    pub typechecked: u64,
    pub outcomes: OutcomeCounts,
    /// Programs that needed more than one attempt are not counted here;
    /// only seeds where generation gave up entirely.
    pub gave_up: u64,
    pub failures: Vec<FuzzFailure>,
}

impl FuzzReport {
    /// Associative merge of two partial reports.
    pub fn merge(mut self, other: FuzzReport) -> FuzzReport {
        self.generated += other.generated;
        self.typechecked += other.typechecked;
        self.outcomes.value += other.outcomes.value;
        self.outcomes.fuel_exhausted += other.outcomes.fuel_exhausted;
        self.outcomes.stuck += other.outcomes.stuck;
        self.gave_up += other.gave_up;
        self.failures.extend(other.failures);
        self.failures.sort_by_key(|f| f.seed);
        self
    }

    /// No stuck run, no invalid program, no abandoned seed.
    pub fn passed(&self) -> bool {
        self.outcomes.stuck == 0 && self.failures.is_empty()
    }
}

/// Generates and runs a single program.
pub fn fuzz_one(cfg: &GenConfig, seed: u64) -> FuzzReport {
    let cfg = GenConfig { seed, ..cfg.clone() };
    let mut r = FuzzReport { generated: 1, ..FuzzReport::default() };
    let (t, ty) = match gen_well_typed(&cfg) {
        Ok(p) => p,
        Err(e) => {
            if matches!(e, GenError::GaveUp(_)) {
                r.gave_up += 1;
            }
            r.failures.push(FuzzFailure {
                seed,
                kind: "generation".into(),
                program: None,
                ty: None,
                detail: e.to_string(),
            });
            return r;
        }
    };
    r.typechecked = 1;
    let start = Config::program(t.clone());
    let exec = execute(start.clone(), cfg.fuel, &mut Allocator::canonical());
    match exec.outcome {
        Outcome::Value => r.outcomes.value += 1,
        Outcome::FuelExhausted => r.outcomes.fuel_exhausted += 1,
        Outcome::Stuck(_) => r.outcomes.stuck += 1,
    }
    if exec.outcome.is_stuck() || !safe_k(&start, cfg.fuel) {
        r.failures.push(FuzzFailure {
            seed,
            kind: "stuck".into(),
            program: Some(print_term(&t)),
            ty: Some(ty.to_string()),
            detail: format!("{} after {} steps", exec.outcome, exec.steps),
        });
    }
    r
}

/// Runs `n` programs with seeds derived from `cfg.seed`.
pub fn fuzz_safety(cfg: &GenConfig, n: u64) -> FuzzReport {
    (0..n)
        .into_par_iter()
        .map(|i| fuzz_one(cfg, program_seed(cfg.seed, i)))
        .reduce(FuzzReport::default, FuzzReport::merge)
}
