//! Executable, budgeted renditions of the step-indexed model: type codes,
//! approximation, state extension, heap typing, membership of values and
//! terms, self-type exposure, and a lemma falsifier.

mod budget;
mod code;
mod model;
mod lemma;
mod verdict;

pub use budget::{
    code_m, code_p, code_q, code_stream, fixture_extensions, hash_of, omega, standard_values, standard_witnesses,
    Budget, BudgetError, Extension, FIXTURE_BASE,
};
pub use code::{
    alpha_eq_code, approx_code, approx_env, interp, interp_self_direct, CodeEnv, CodeMethod, CodeSplit,
    HeapTypingApprox, InterpError, TypeCode,
};
pub use model::{term_locs, value_for, Gauge, Member, Model, RELABEL_BASE, SYNTH_BASE};
pub use verdict::{all_of, Reason, Stats, Verdict, Witness};
pub use lemma::{
    check_lemma, instances, mutation_suite, replay, stock_suite, Claim, Falsifier, Flip, Instance, LemmaError, LemmaId,
    LemmaReport, Range, Record, RefCode, Status,
};
