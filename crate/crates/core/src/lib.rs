//! Imperative object calculus with variance-annotated object types.

pub mod eval;
pub mod harness;
pub mod syntax;
pub mod stepmodel;
pub mod typecheck;

pub use eval::{Config, Outcome, Rule, Trace};
pub use syntax::{Loc, Term, Type, Variance};
