//! Algorithmic subtyping.
//!
//! Reflexivity is alpha-equivalence, transitivity is replaced by promotion
//! of a type variable to its bound, and the two object rules are merged:
//! a target method `e` accepts a source annotation equal to its own or
//! `inv`, and depth is then checked in the direction the target annotation
//! allows. Recursive types use the context-extending rule with fresh names
//! `Y <: Top, X <: Y`.

use super::context::Context;
use super::encode::encode_to_split;
use super::{Mode, Mutation};
use crate::syntax::{alpha_eq_type, desugar_self, free_type_vars, fresh_name, subst_type, Type, Variance};
use serde::Serialize;
use std::cell::Cell;
use std::fmt;

/// Verdict of a subtyping query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SubtypeResult {
    Yes,
    /// The chain of failing premises, outermost first.
    No(Vec<String>),
    /// The fuel that ran out.
    Unknown(u64),
}

impl SubtypeResult {
    pub fn is_yes(&self) -> bool {
        matches!(self, SubtypeResult::Yes)
    }
}

impl fmt::Display for SubtypeResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubtypeResult::Yes => f.write_str("yes"),
            SubtypeResult::No(chain) => write!(f, "no: {}", chain.join(" / ")),
            SubtypeResult::Unknown(fuel) => write!(f, "unknown (fuel {fuel} exhausted)"),
        }
    }
}

pub(crate) enum Fail {
    No(Vec<String>),
    Fuel,
}

impl Fail {
    fn no(msg: impl Into<String>) -> Fail {
        Fail::No(vec![msg.into()])
    }

    fn within(self, premise: impl Into<String>) -> Fail {
        match self {
            Fail::No(mut chain) => {
                chain.insert(0, premise.into());
                Fail::No(chain)
            }
            Fail::Fuel => Fail::Fuel,
        }
    }
}

pub(crate) struct Subtyper {
    pub mode: Mode,
    pub mutation: Option<Mutation>,
    pub fuel: u64,
    remaining: Cell<u64>,
}

impl Subtyper {
    pub fn new(mode: Mode, fuel: u64, mutation: Option<Mutation>) -> Subtyper {
        Subtyper { mode, mutation, fuel, remaining: Cell::new(fuel) }
    }

    /// Brings a type into the form the rules compare.
    pub fn normalize(&self, ty: &Type) -> Type {
        let ty = desugar_self(ty);
        match self.mode {
            Mode::Variance => ty,
            Mode::Split => encode_to_split(&ty, self.mutation),
        }
    }

    pub fn query(&self, ctx: &Context, a: &Type, b: &Type) -> SubtypeResult {
        self.remaining.set(self.fuel);
        let mut ctx = ctx.clone();
        match self.sub(&mut ctx, &self.normalize(a), &self.normalize(b)) {
            Ok(()) => SubtypeResult::Yes,
            Err(Fail::No(chain)) => SubtypeResult::No(chain),
            Err(Fail::Fuel) => SubtypeResult::Unknown(self.fuel),
        }
    }

    fn sub(&self, ctx: &mut Context, a: &Type, b: &Type) -> Result<(), Fail> {
        let left = self.remaining.get();
        if left == 0 {
            return Err(Fail::Fuel);
        }
        self.remaining.set(left - 1);

        if alpha_eq_type(a, b) || matches!(b, Type::Top) || matches!(a, Type::Bot) {
            return Ok(());
        }
        match (a, b) {
            (Type::Var { name }, _) => match ctx.bound(name).cloned() {
                Some(bound) => self.sub(ctx, &bound, b).map_err(|f| f.within(format!("SubVar: bound of {name}"))),
                None => Err(Fail::no(format!("unbound type variable {name}"))),
            },
            (Type::Arrow { dom: d1, cod: c1 }, Type::Arrow { dom: d2, cod: c2 }) => {
                self.sub(ctx, d2, d1).map_err(|f| f.within("SubProc: domain"))?;
                self.sub(ctx, c1, c2).map_err(|f| f.within("SubProc: codomain"))
            }
            (Type::Obj { methods: src }, Type::Obj { methods: tgt }) => {
                let reversed = self.mutation == Some(Mutation::WidthReversed);
                if reversed {
                    if let Some(m) = src.iter().find(|m| !tgt.iter().any(|t| t.name == m.name)) {
                        return Err(Fail::no(format!("SubObj: method {} not in target", m.name)));
                    }
                }
                for t in tgt {
                    let Some(s) = src.iter().find(|s| s.name == t.name) else {
                        if reversed {
                            continue;
                        }
                        return Err(Fail::no(format!("SubObj: method {} missing", t.name)));
                    };
                    if s.variance != t.variance && s.variance != Variance::Inv {
                        return Err(Fail::no(format!(
                            "SubObjVar: method {} is {} and cannot become {}",
                            t.name, s.variance, t.variance
                        )));
                    }
                    if t.variance.readable() {
                        self.sub(ctx, &s.ty, &t.ty).map_err(|f| f.within(format!("SubObj: method {} (read)", t.name)))?;
                    }
                    if t.variance.writable() {
                        self.sub(ctx, &t.ty, &s.ty)
                            .map_err(|f| f.within(format!("SubObj: method {} (write)", t.name)))?;
                    }
                }
                Ok(())
            }
            (Type::Split { methods: src }, Type::Split { methods: tgt }) => {
                for t in tgt {
                    let Some(s) = src.iter().find(|s| s.name == t.name) else {
                        return Err(Fail::no(format!("SubObj-Gen: method {} missing", t.name)));
                    };
                    self.sub(ctx, &t.write, &s.write)
                        .map_err(|f| f.within(format!("SubObj-Gen: method {} write", t.name)))?;
                    self.sub(ctx, &s.read, &t.read)
                        .map_err(|f| f.within(format!("SubObj-Gen: method {} read", t.name)))?;
                }
                Ok(())
            }
            (Type::Mu { var: x, body: a_body }, Type::Mu { var: y, body: b_body }) => {
                let avoid = self.avoid(ctx, a, b);
                let y2 = fresh_name(y, &|c| avoid.contains(c));
                let x2 = fresh_name(x, &|c| avoid.contains(c) || c == y2);
                let a_body = subst_type(a_body, x, &Type::var(x2.clone()));
                let b_body = subst_type(b_body, y, &Type::var(y2.clone()));
                let mark = ctx.len();
                ctx.push_type(y2.clone(), Type::Top);
                ctx.push_type(x2, Type::var(y2));
                let r = self.sub(ctx, &a_body, &b_body);
                ctx.truncate(mark);
                r.map_err(|f| f.within("SubRec"))
            }
            (
                Type::All { var: x, bound: a_bound, body: a_body },
                Type::All { var: y, bound: b_bound, body: b_body },
            ) => {
                self.sub(ctx, b_bound, a_bound).map_err(|f| f.within("SubUniv: bound"))?;
                self.under_common_binder(ctx, a, b, (x, a_body), (y, b_body), b_bound)
                    .map_err(|f| f.within("SubUniv: body"))
            }
            (
                Type::Exists { var: x, bound: a_bound, body: a_body },
                Type::Exists { var: y, bound: b_bound, body: b_body },
            ) => {
                self.sub(ctx, a_bound, b_bound).map_err(|f| f.within("SubExist: bound"))?;
                self.under_common_binder(ctx, a, b, (x, a_body), (y, b_body), a_bound)
                    .map_err(|f| f.within("SubExist: body"))
            }
            _ => Err(Fail::no(format!("no rule relates {a} to {b}"))),
        }
    }

    fn avoid(&self, ctx: &Context, a: &Type, b: &Type) -> std::collections::BTreeSet<String> {
        let mut avoid = ctx.type_names();
        avoid.extend(free_type_vars(a));
        avoid.extend(free_type_vars(b));
        avoid
    }

    fn under_common_binder(
        &self,
        ctx: &mut Context,
        a: &Type,
        b: &Type,
        (x, a_body): (&String, &Type),
        (y, b_body): (&String, &Type),
        bound: &Type,
    ) -> Result<(), Fail> {
        let avoid = self.avoid(ctx, a, b);
        let z = fresh_name(x, &|c| avoid.contains(c));
        let a_body = subst_type(a_body, x, &Type::var(z.clone()));
        let b_body = subst_type(b_body, y, &Type::var(z.clone()));
        let mark = ctx.len();
        ctx.push_type(z, bound.clone());
        let r = self.sub(ctx, &a_body, &b_body);
        ctx.truncate(mark);
        r
    }
}
