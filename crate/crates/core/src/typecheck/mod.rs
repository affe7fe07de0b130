//! Well-formedness, subtyping and term typing in two modes.
//!
//! Variance mode uses object types with `inv`/`cov`/`con` annotations;
//! split mode first rewrites every annotation into `(write, read)` pairs
//! and uses the single generalized object rule. Self types are handled
//! only through their recursive-existential encoding.

mod context;
mod encode;
mod subtype;
mod typing;

pub use context::{wf_context, wf_type, Binding, Context};
pub use encode::encode_term_to_split;
pub use subtype::SubtypeResult;
pub use typing::{Checker, TypeError, TypeErrorKind};

use crate::syntax::{Term, Type};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Default fuel for a single subtyping query.
pub const DEFAULT_FUEL: u64 = 10_000;

/// Which object-type discipline a check uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    Variance,
    Split,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Variance => "variance",
            Mode::Split => "split",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "variance" => Ok(Mode::Variance),
            "split" => Ok(Mode::Split),
            other => Err(format!("unknown mode {other:?} (expected variance or split)")),
        }
    }
}

/// Deliberately broken variants of typing rules, used to show that the
/// fuzzer and the lemma falsifier detect unsoundness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Mutation {
    /// Invocation ignores the variance annotation.
    DropInvVariance,
    /// Update ignores the variance annotation.
    DropUpdVariance,
    /// The update body is compared to the method type in the wrong direction.
    CovariantUpdBody,
    /// Object width subtyping runs backwards.
    WidthReversed,
    /// Update-only methods are read at their payload type instead of Top.
    ConReadAtPayload,
}

impl Mutation {
    pub const ALL: [Mutation; 5] = [
        Mutation::DropInvVariance,
        Mutation::DropUpdVariance,
        Mutation::CovariantUpdBody,
        Mutation::WidthReversed,
        Mutation::ConReadAtPayload,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::DropInvVariance => "drop-inv-variance",
            Mutation::DropUpdVariance => "drop-upd-variance",
            Mutation::CovariantUpdBody => "covariant-upd-body",
            Mutation::WidthReversed => "width-reversed",
            Mutation::ConReadAtPayload => "con-read-at-payload",
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mutation {
    type Err = String;

    fn from_str(s: &str) -> Result<Mutation, String> {
        Mutation::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mutation {s:?}"))
    }
}

/// Rewrites variance-annotated object types into split form.
pub fn encode_to_split(ty: &Type) -> Type {
    encode::encode_to_split(ty, None)
}

pub fn subtype(ctx: &Context, a: &Type, b: &Type, mode: Mode, fuel: u64) -> SubtypeResult {
    Checker::new(mode, fuel).subtype(ctx, a, b)
}

pub fn type_of(ctx: &Context, t: &Term, mode: Mode, fuel: u64) -> Result<Type, TypeError> {
    Checker::new(mode, fuel).type_of(ctx, t)
}

pub fn check(ctx: &Context, t: &Term, ty: &Type, mode: Mode, fuel: u64) -> Result<(), TypeError> {
    Checker::new(mode, fuel).check(ctx, t, ty)
}
