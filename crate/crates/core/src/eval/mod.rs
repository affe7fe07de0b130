//! Small-step heap semantics.

mod machine;
mod trace;

pub use machine::{
    classify, decompose, step, step_in_place, Allocator, Config, Decomposition, EvalContext, Frame, Heap,
    Irreducible, Rule, StepResult, Stepped, StuckReason,
};
pub use trace::{config_equiv_under, execute, run, safe_k, traces_equivalent, Execution, Outcome, Trace, TraceStep};
