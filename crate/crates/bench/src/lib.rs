//! Workloads shared by the pipeline benchmarks.

use objcalc::harness::{gen_well_typed, program_seed, GenConfig};
use objcalc::syntax::{parse_term, Term, Type};

/// Source text exercising every reduction rule.
pub const SOURCE: &str = "\
let o : [m:inv Top, n:inv Top] = obj [m:inv Top, n:inv Top] {
  m = self(s:[m:inv Top, n:inv Top]) s.n,
  n = self(s:[m:inv Top, n:inv Top]) (Fun(X<:Top) \\(x:X) x)[Top] s
} in
let c : [m:inv Top, n:inv Top] = clone(o) in
(c.m := self(s:[m:inv Top, n:inv Top]) s).m";

pub fn source_term() -> Term {
    parse_term(SOURCE).expect("benchmark source parses")
}

/// `n` generated programs with their types, from a fixed seed.
pub fn generated(n: u64) -> Vec<(Term, Type)> {
    (0..n)
        .map(|i| gen_well_typed(&GenConfig { seed: program_seed(1, i), ..GenConfig::default() }).expect("generator"))
        .collect()
}
