//! Fueled execution, recorded traces and the safe-for-k-steps judgment.

use super::machine::{classify, step_in_place, Allocator, Config, Heap, Irreducible, Rule, StuckReason};
use crate::syntax::{alpha_eq_term, rename_locs, Loc};
use serde::Serialize;
use std::collections::HashMap;
use std::fmt;

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    Value,
    Stuck(StuckReason),
    FuelExhausted,
}

impl Outcome {
    pub fn is_stuck(self) -> bool {
        matches!(self, Outcome::Stuck(_))
    }
}

impl From<Irreducible> for Outcome {
    fn from(i: Irreducible) -> Outcome {
        match i {
            Irreducible::Value => Outcome::Value,
            Irreducible::Stuck(r) => Outcome::Stuck(r),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Value => f.write_str("value"),
            Outcome::Stuck(r) => write!(f, "stuck({r})"),
            Outcome::FuelExhausted => f.write_str("fuel-exhausted"),
        }
    }
}

/// One recorded step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: Rule,
    pub config: Config,
    /// Locations allocated by this step, in allocation order.
    pub fresh: Vec<Loc>,
}

/// A recorded reduction sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub initial: Config,
    pub steps: Vec<TraceStep>,
    pub outcome: Outcome,
}

impl Trace {
    pub fn final_config(&self) -> &Config {
        self.steps.last().map(|s| &s.config).unwrap_or(&self.initial)
    }

    pub fn rules(&self) -> Vec<Rule> {
        self.steps.iter().map(|s| s.rule).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let outcome = match self.outcome {
            Outcome::Value => serde_json::json!({ "kind": "value" }),
            Outcome::Stuck(r) => serde_json::json!({ "kind": "stuck", "reason": r.name() }),
            Outcome::FuelExhausted => serde_json::json!({ "kind": "fuel-exhausted" }),
        };
        serde_json::json!({
            "initial": self.initial.to_json(),
            "steps": self.steps.iter().map(|s| serde_json::json!({
                "rule": s.rule.name(),
                "config": s.config.to_json(),
            })).collect::<Vec<_>>(),
            "step_count": self.steps.len(),
            "outcome": outcome,
        })
    }
}

/// One line per configuration followed by the outcome; the golden format.
impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "0 start {}", self.initial)?;
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "{} {} {}", i + 1, s.rule, s.config)?;
        }
        writeln!(f, "outcome {}", self.outcome)
    }
}

/// Runs at most `fuel` steps, recording every configuration.
pub fn run(c: &Config, fuel: usize, alloc: &mut Allocator) -> Trace {
    let mut cur = c.clone();
    let mut steps = Vec::new();
    let outcome = loop {
        if let Err(irr) = classify(&cur) {
            break irr.into();
        }
        if steps.len() == fuel {
            break Outcome::FuelExhausted;
        }
        let stepped = step_in_place(&mut cur, alloc).expect("classified as reducible");
        steps.push(TraceStep { rule: stepped.rule, config: cur.clone(), fresh: stepped.fresh });
    };
    Trace { initial: c.clone(), steps, outcome }
}

/// Result of an unrecorded run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub config: Config,
    pub steps: usize,
    pub outcome: Outcome,
}

/// Like [`run`] but keeps only the final configuration.
pub fn execute(c: Config, fuel: usize, alloc: &mut Allocator) -> Execution {
    let mut cur = c;
    let mut steps = 0;
    let outcome = loop {
        if let Err(irr) = classify(&cur) {
            break irr.into();
        }
        if steps == fuel {
            break Outcome::FuelExhausted;
        }
        step_in_place(&mut cur, alloc).expect("classified as reducible");
        steps += 1;
    };
    Execution { config: cur, steps, outcome }
}

/// Whether no configuration reachable in fewer than `k` steps is stuck.
pub fn safe_k(c: &Config, k: usize) -> bool {
    if k == 0 {
        return true;
    }
    !execute(c.clone(), k - 1, &mut Allocator::canonical()).outcome.is_stuck()
}

/// Whether two configurations are equal after renaming the locations of the
/// first through `map`.
pub fn config_equiv_under(a: &Config, b: &Config, map: &HashMap<Loc, Loc>) -> bool {
    let rename = |l: &Loc| *map.get(l).unwrap_or(l);
    let renamed: Heap = a.heap.iter().map(|(l, v)| (rename(l), rename_locs(v, map))).collect();
    renamed.len() == b.heap.len()
        && renamed.iter().all(|(l, v)| b.heap.get(l).is_some_and(|w| alpha_eq_term(v, w)))
        && alpha_eq_term(&rename_locs(&a.term, map), &b.term)
}

/// Trace equivalence up to a bijective renaming of allocated locations.
pub fn traces_equivalent(a: &Trace, b: &Trace) -> bool {
    if a.steps.len() != b.steps.len() || a.outcome != b.outcome || a.initial != b.initial {
        return false;
    }
    let mut map: HashMap<Loc, Loc> = HashMap::new();
    for (sa, sb) in a.steps.iter().zip(&b.steps) {
        if sa.rule != sb.rule || sa.fresh.len() != sb.fresh.len() {
            return false;
        }
        map.extend(sa.fresh.iter().copied().zip(sb.fresh.iter().copied()));
        if !config_equiv_under(&sa.config, &sb.config, &map) {
            return false;
        }
    }
    true
}
