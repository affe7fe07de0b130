//! Finite catalogs standing in for unbounded quantifiers.

use super::code::{HeapTypingApprox, TypeCode};
use crate::eval::Heap;
use crate::syntax::{Loc, Term, Type, Variance};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::hash::{Hash, Hasher};
use thiserror::Error;

/// First location used by catalog fixtures.
pub const FIXTURE_BASE: u64 = 900;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BudgetError {
    /// A catalog the model samples from is empty.
    #[error("the {0} catalog is empty")]
    EmptyCatalog(&'static str),
    /// Sampling with zero samples per quantifier checks nothing.
    #[error("samples per quantifier must be at least 1")]
    NoSamples,
    /// A catalog code has free variables.
    #[error("catalog code {0} is not closed")]
    OpenCode(String),
    /// A catalog value is not a closed value.
    #[error("catalog entry {0} is not a closed value")]
    NotAValue(String),
}

/// A heap-typing delta together with heap contents conforming to it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Extension {
    pub typing: HeapTypingApprox,
    #[serde(skip)]
    pub heap: Heap,
}

impl Extension {
    pub fn empty() -> Extension {
        Extension { typing: HeapTypingApprox::new(), heap: Heap::new() }
    }

    fn of(entries: Vec<(u64, TypeCode, Term)>) -> Extension {
        let mut ext = Extension::empty();
        for (l, code, content) in entries {
            ext.typing.insert(Loc(l), code);
            ext.heap.insert(Loc(l), content);
        }
        ext
    }
}

#[derive(Clone, Debug)]
pub struct Budget {
    pub k_max: u32,
    pub values: Vec<Term>,
    pub extensions: Vec<Extension>,
    pub witnesses: Vec<TypeCode>,
    /// Samples drawn per quantifier.
    pub samples: usize,
    pub seed: u64,
}

/// `[p:inv Top]`.
pub fn code_p() -> TypeCode {
    TypeCode::obj([("p", Variance::Inv, TypeCode::Top)])
}

/// `[q:inv Top]`.
pub fn code_q() -> TypeCode {
    TypeCode::obj([("q", Variance::Inv, TypeCode::Top)])
}

/// `[m:ν Top]`.
pub fn code_m(v: Variance) -> TypeCode {
    TypeCode::obj([("m", v, TypeCode::Top)])
}

/// `mu X. [m:cov X]`.
pub fn code_stream() -> TypeCode {
    TypeCode::mu("X", TypeCode::obj([("m", Variance::Cov, TypeCode::Var { name: "X".into() })]))
}

/// `(λx. x x)(λx. x x)`.
pub fn omega() -> Term {
    let half = Term::lam("x", Type::Top, Term::app(Term::var("x"), Term::var("x")));
    Term::app(half.clone(), half)
}

fn lam(body: Term) -> Term {
    Term::lam("s", Type::Top, body)
}

/// Fixture heap typings and contents at locations from [`FIXTURE_BASE`].
pub fn fixture_extensions() -> Vec<Extension> {
    let b = FIXTURE_BASE;
    let stream = code_stream();
    let stream_ty = Type::mu("X", Type::obj([("m", Variance::Cov, Type::var("X"))]));
    let stream_body = stream.unroll().expect("mu code");
    vec![
        Extension::empty(),
        Extension::of(vec![(
            b,
            TypeCode::arrow(code_m(Variance::Inv), TypeCode::Top),
            lam(Term::rt_obj(Vec::<(&str, Loc)>::new())),
        )]),
        Extension::of(vec![
            (b + 2, TypeCode::arrow(code_q(), TypeCode::Top), lam(Term::var("s"))),
            (b + 3, TypeCode::arrow(code_p(), code_p()), lam(Term::var("s"))),
        ]),
        Extension::of(vec![(
            b + 6,
            TypeCode::arrow(stream_body, stream),
            lam(Term::fold(stream_ty, Term::var("s"))),
        )]),
    ]
}

/// The standard value catalog: location-free values plus objects over
/// the fixture locations.
pub fn standard_values() -> Vec<Term> {
    let b = FIXTURE_BASE;
    let x = || Term::var("x");
    let stream_ty = Type::mu("X", Type::obj([("m", Variance::Cov, Type::var("X"))]));
    let empty = || Term::rt_obj(Vec::<(&str, Loc)>::new());
    vec![
        Term::lam("x", Type::Top, x()),
        Term::lam("x", Type::Top, empty()),
        Term::lam("x", Type::Top, Term::invoke(x(), "m")),
        Term::lam("x", Type::Top, omega()),
        Term::lam("x", Type::Top, Term::lam("y", Type::Top, x())),
        Term::lam("x", Type::Top, Term::invoke(x(), "p")),
        Term::lam("x", Type::Top, Term::clone_of(x())),
        empty(),
        Term::rt_obj([("m", Loc(b))]),
        Term::rt_obj([("p", Loc(b + 3))]),
        Term::rt_obj([("q", Loc(b + 2))]),
        Term::rt_obj([("m", Loc(b + 6))]),
        Term::rt_obj([("m", Loc(b)), ("p", Loc(b + 3))]),
        Term::fold(stream_ty.clone(), Term::rt_obj([("m", Loc(b + 6))])),
        Term::fold(stream_ty, empty()),
        Term::Pack {
            var: "X".into(),
            bound: Type::Top,
            witness: Type::Top,
            payload: Box::new(empty()),
            body_ty: Type::var("X"),
        },
        Term::Pack {
            var: "X".into(),
            bound: Type::Top,
            witness: Type::obj([("p", Variance::Inv, Type::Top)]),
            payload: Box::new(Term::rt_obj([("p", Loc(b + 3))])),
            body_ty: Type::var("X"),
        },
        Term::tlam("X", Type::Top, Term::lam("x", Type::var("X"), x())),
        Term::tlam("X", Type::Top, empty()),
        Term::tlam("X", Type::Top, omega()),
        Term::lam("x", Type::Top, Term::app(x(), empty())),
    ]
}

/// The standard witness catalog.
pub fn standard_witnesses() -> Vec<TypeCode> {
    let top = || TypeCode::Top;
    vec![
        TypeCode::Top,
        TypeCode::Bot,
        TypeCode::obj(Vec::<(&str, Variance, TypeCode)>::new()),
        code_m(Variance::Inv),
        code_m(Variance::Cov),
        code_m(Variance::Con),
        TypeCode::arrow(top(), top()),
        TypeCode::arrow(TypeCode::Bot, top()),
        TypeCode::arrow(code_m(Variance::Inv), top()),
        code_stream(),
        code_p(),
        code_q(),
        TypeCode::exists("X", top(), TypeCode::Var { name: "X".into() }),
        TypeCode::all("X", top(), TypeCode::arrow(TypeCode::Var { name: "X".into() }, TypeCode::Var { name: "X".into() })),
    ]
}

impl Budget {
    /// Catalogs of the standard size at the given maximal index.
    pub fn standard(k_max: u32, seed: u64) -> Budget {
        Budget {
            k_max,
            values: standard_values(),
            extensions: fixture_extensions(),
            witnesses: standard_witnesses(),
            samples: 3,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), BudgetError> {
        if self.values.is_empty() {
            return Err(BudgetError::EmptyCatalog("value"));
        }
        if self.extensions.is_empty() {
            return Err(BudgetError::EmptyCatalog("extension"));
        }
        if self.witnesses.is_empty() {
            return Err(BudgetError::EmptyCatalog("witness"));
        }
        if self.samples == 0 {
            return Err(BudgetError::NoSamples);
        }
        if let Some(c) = self.witnesses.iter().find(|c| !c.is_closed()) {
            return Err(BudgetError::OpenCode(c.to_string()));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_value() || !crate::syntax::free_vars(v).terms.is_empty()) {
            return Err(BudgetError::NotAValue(crate::syntax::print_term(v)));
        }
        Ok(())
    }

    /// Deterministic choice of at most `n` items, keyed by `salt`.
    pub fn pick<T: Clone>(&self, items: &[T], n: usize, salt: impl Hash) -> Vec<T> {
        if items.len() <= n {
            return items.to_vec();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ hash_of(salt));
        let mut idx = sample(&mut rng, items.len(), n).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| items[i].clone()).collect()
    }
}

/// Stable hash used to derive per-query random streams.
pub fn hash_of(x: impl Hash) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    x.hash(&mut h);
    h.finish()
}
