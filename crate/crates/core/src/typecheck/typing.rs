//! Minimal-type synthesis with subsumption at elimination sites.

use super::context::{wf_type, Context};
use super::encode::encode_term_to_split;
use super::subtype::{Subtyper, SubtypeResult};
use super::{Mode, Mutation};
use crate::syntax::{
    alpha_eq_type, desugar_self_in_term, free_vars, fresh_name, print_term, subst_term1, subst_type, subst_type_in_term,
    Term, Type, Variance,
};
use thiserror::Error;

/// What went wrong, independent of where.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeErrorKind {
    /// A term variable has no binding.
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    /// An annotation mentions an unbound type variable or repeats a method.
    #[error("ill-formed type {0}")]
    IllFormedType(Type),
    /// The type offered where an object type is required.
    #[error("expected an object type, found {0}")]
    NotAnObject(Type),
    /// The type offered where a procedure type is required.
    #[error("expected a procedure type, found {0}")]
    NotAProcedure(Type),
    /// The type offered where a universal type is required.
    #[error("expected a universal type, found {0}")]
    NotUniversal(Type),
    /// A fold or unfold annotation that is not a recursive type.
    #[error("expected a recursive type, found {0}")]
    NotRecursive(Type),
    /// The method is absent from the object type.
    #[error("method {0} not in type")]
    MissingMethod(String),
    /// The method's annotation forbids the operation.
    #[error("method {method} is {variance}")]
    Variance { method: String, variance: Variance },
    /// Object literal and annotation disagree on the method set.
    #[error("methods of the literal do not match its annotation {0}")]
    MethodSetMismatch(Type),
    /// A method's self annotation differs from the object's annotation.
    #[error("self annotation {found} differs from object annotation {expected}")]
    SelfAnnotation { found: Type, expected: Type },
    /// Object creation in split mode needs equal write and read types.
    #[error("split object annotation {0} has a method with different write and read types")]
    UnevenSplitAnnotation(Type),
    /// A subsumption premise failed.
    #[error("{actual} is not a subtype of {expected} ({reason})")]
    NotSubtype { actual: Type, expected: Type, reason: String },
    /// Run-time objects are not typed by the syntactic system.
    #[error("locations cannot be typed")]
    RuntimeObject,
    /// A subtyping query ran out of fuel.
    #[error("subtyping fuel exhausted checking {actual} <: {expected}")]
    FuelExhausted { actual: Type, expected: Type },
}

/// A typing failure: the rule, the subterm and the reason.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{rule}: {kind} in `{subterm}`")]
pub struct TypeError {
    pub rule: &'static str,
    pub subterm: String,
    pub kind: TypeErrorKind,
}

impl TypeError {
    pub fn is_fuel(&self) -> bool {
        matches!(self.kind, TypeErrorKind::FuelExhausted { .. })
    }

    /// The failing subtyping premises, when the error is a subtype failure.
    pub fn explanation(&self) -> Vec<String> {
        match &self.kind {
            TypeErrorKind::NotSubtype { reason, .. } => reason.split(" / ").map(str::to_string).collect(),
            other => vec![other.to_string()],
        }
    }
}

type Res<T> = Result<T, TypeError>;

/// Term typing under one mode, fuel and optional rule mutation.
pub struct Checker {
    pub mode: Mode,
    pub fuel: u64,
    pub mutation: Option<Mutation>,
}

impl Checker {
    pub fn new(mode: Mode, fuel: u64) -> Checker {
        Checker { mode, fuel, mutation: None }
    }

    pub fn with_mutation(mut self, mutation: Option<Mutation>) -> Checker {
        self.mutation = mutation;
        self
    }

    fn subtyper(&self) -> Subtyper {
        Subtyper::new(self.mode, self.fuel, self.mutation)
    }

    pub fn subtype(&self, ctx: &Context, a: &Type, b: &Type) -> SubtypeResult {
        self.subtyper().query(ctx, a, b)
    }

    /// Brings every annotation of `t` into the form of the current mode.
    pub fn normalize_term(&self, t: &Term) -> Term {
        let t = desugar_self_in_term(t);
        match self.mode {
            Mode::Variance => t,
            Mode::Split => encode_term_to_split(&t, self.mutation),
        }
    }

    fn normalize_ctx(&self, ctx: &Context) -> Context {
        let sub = self.subtyper();
        let mut out = Context::new();
        for b in ctx.entries() {
            match b {
                super::Binding::Term { name, ty } => out.push_term(name.clone(), sub.normalize(ty)),
                super::Binding::Type { name, bound } => out.push_type(name.clone(), sub.normalize(bound)),
            }
        }
        out
    }

    /// Synthesizes the minimal type of `t`.
    pub fn type_of(&self, ctx: &Context, t: &Term) -> Res<Type> {
        let mut ctx = self.normalize_ctx(ctx);
        let t = self.normalize_term(t);
        Synth { checker: self, sub: self.subtyper() }.synth(&mut ctx, &t)
    }

    /// `type_of` followed by one subtyping query against `expected`.
    pub fn check(&self, ctx: &Context, t: &Term, expected: &Type) -> Res<()> {
        let actual = self.type_of(ctx, t)?;
        let nctx = self.normalize_ctx(ctx);
        let expected = self.subtyper().normalize(expected);
        if !wf_type(&nctx, &expected) {
            return Err(error("Sub", t, TypeErrorKind::IllFormedType(expected)));
        }
        subsume(&self.subtyper(), &nctx, "Sub", t, &actual, &expected)
    }
}

fn error(rule: &'static str, t: &Term, kind: TypeErrorKind) -> TypeError {
    TypeError { rule, subterm: print_term(t), kind }
}

fn subsume(sub: &Subtyper, ctx: &Context, rule: &'static str, t: &Term, actual: &Type, expected: &Type) -> Res<()> {
    match sub.query(ctx, actual, expected) {
        SubtypeResult::Yes => Ok(()),
        SubtypeResult::No(chain) => Err(error(
            rule,
            t,
            TypeErrorKind::NotSubtype { actual: actual.clone(), expected: expected.clone(), reason: chain.join(" / ") },
        )),
        SubtypeResult::Unknown(_) => {
            Err(error(rule, t, TypeErrorKind::FuelExhausted { actual: actual.clone(), expected: expected.clone() }))
        }
    }
}

struct Synth<'a> {
    checker: &'a Checker,
    sub: Subtyper,
}

/// The shape a type exposes at an elimination site.
enum Exposed {
    Bot,
    Shape(Type),
}

impl Synth<'_> {
    fn mutation(&self) -> Option<Mutation> {
        self.checker.mutation
    }

    fn split(&self) -> bool {
        self.checker.mode == Mode::Split
    }

    fn wf(&self, ctx: &Context, rule: &'static str, t: &Term, ty: &Type) -> Res<()> {
        if wf_type(ctx, ty) {
            Ok(())
        } else {
            Err(error(rule, t, TypeErrorKind::IllFormedType(ty.clone())))
        }
    }

    /// Follows type-variable bounds until a non-variable appears.
    fn expose(&self, ctx: &Context, ty: &Type) -> Exposed {
        let mut cur = ty.clone();
        for _ in 0..=ctx.len() {
            match cur {
                Type::Bot => return Exposed::Bot,
                Type::Var { ref name } => match ctx.bound(name) {
                    Some(b) => cur = b.clone(),
                    None => return Exposed::Shape(cur),
                },
                _ => return Exposed::Shape(cur),
            }
        }
        Exposed::Shape(cur)
    }

    fn check(&self, ctx: &mut Context, rule: &'static str, t: &Term, expected: &Type) -> Res<()> {
        let actual = self.synth(ctx, t)?;
        subsume(&self.sub, ctx, rule, t, &actual, expected)
    }

    /// Binds a term variable, renaming it when the name is already taken.
    fn bind_term(&self, ctx: &mut Context, var: &str, ty: Type, body: &Term) -> Term {
        let (name, body) = if ctx.has_term(var) {
            let fv = free_vars(body).terms;
            let name = fresh_name(var, &|c| ctx.has_term(c) || fv.contains(c));
            let body = subst_term1(body, var, &Term::var(name.clone()));
            (name, body)
        } else {
            (var.to_string(), body.clone())
        };
        ctx.push_term(name, ty);
        body
    }

    /// Picks a name for a type binder that is free in `ctx`.
    fn type_binder(&self, ctx: &Context, var: &str, avoid: &[&Type], body: &Term) -> String {
        if !ctx.has_type(var) {
            return var.to_string();
        }
        let mut fv = free_vars(body).types;
        for a in avoid {
            fv.extend(crate::syntax::free_type_vars(a));
        }
        fresh_name(var, &|c| ctx.has_type(c) || fv.contains(c))
    }

    fn object_methods<'t>(&self, ty: &'t Type) -> Option<Vec<(&'t str, Option<Variance>, &'t Type, &'t Type)>> {
        match ty {
            Type::Obj { methods } if !self.split() => {
                Some(methods.iter().map(|m| (m.name.as_str(), Some(m.variance), &m.ty, &m.ty)).collect())
            }
            Type::Split { methods } if self.split() => {
                Some(methods.iter().map(|m| (m.name.as_str(), None, &m.write, &m.read)).collect())
            }
            _ => None,
        }
    }

    fn synth(&self, ctx: &mut Context, t: &Term) -> Res<Type> {
        match t {
            Term::Var { name } => {
                ctx.term(name).cloned().ok_or_else(|| error("Var", t, TypeErrorKind::UnboundVariable(name.clone())))
            }
            Term::RtObj { .. } => Err(error("Obj", t, TypeErrorKind::RuntimeObject)),
            Term::Obj { annot, methods } => {
                let rule = if self.split() { "Obj-Gen" } else { "Obj" };
                self.wf(ctx, rule, t, annot)?;
                let Some(types) = self.object_methods(annot) else {
                    return Err(error(rule, t, TypeErrorKind::NotAnObject(annot.clone())));
                };
                if self.split() && types.iter().any(|(_, _, w, r)| !alpha_eq_type(w, r)) {
                    return Err(error(rule, t, TypeErrorKind::UnevenSplitAnnotation(annot.clone())));
                }
                let same_set = types.len() == methods.len()
                    && methods.iter().all(|m| types.iter().any(|(n, ..)| *n == m.name));
                if !same_set {
                    return Err(error(rule, t, TypeErrorKind::MethodSetMismatch(annot.clone())));
                }
                for m in methods {
                    if !alpha_eq_type(&m.self_annot, annot) {
                        return Err(error(
                            rule,
                            t,
                            TypeErrorKind::SelfAnnotation { found: m.self_annot.clone(), expected: annot.clone() },
                        ));
                    }
                    let (_, _, _, result) = types.iter().find(|(n, ..)| *n == m.name).expect("same method set");
                    let mark = ctx.len();
                    let body = self.bind_term(ctx, &m.self_var, annot.clone(), &m.body);
                    let r = self.check(ctx, rule, &body, result);
                    ctx.truncate(mark);
                    r?;
                }
                Ok(annot.clone())
            }
            Term::Invoke { recv, method } => {
                let rule = if self.split() { "Inv-Gen" } else { "Inv" };
                let recv_ty = self.synth(ctx, recv)?;
                let shape = match self.expose(ctx, &recv_ty) {
                    Exposed::Bot => return Ok(Type::Bot),
                    Exposed::Shape(s) => s,
                };
                let Some(types) = self.object_methods(&shape) else {
                    return Err(error(rule, t, TypeErrorKind::NotAnObject(shape.clone())));
                };
                let Some(&(_, variance, _, read)) = types.iter().find(|(n, ..)| n == method) else {
                    return Err(error(rule, t, TypeErrorKind::MissingMethod(method.clone())));
                };
                if let Some(v) = variance {
                    if !v.readable() && self.mutation() != Some(Mutation::DropInvVariance) {
                        return Err(error(rule, t, TypeErrorKind::Variance { method: method.clone(), variance: v }));
                    }
                }
                Ok(read.clone())
            }
            Term::Update { recv, method, self_var, self_annot, body } => {
                let rule = if self.split() { "Upd-Gen" } else { "Upd" };
                self.wf(ctx, rule, t, self_annot)?;
                self.check(ctx, rule, recv, self_annot)?;
                let Some(types) = self.object_methods(self_annot) else {
                    return Err(error(rule, t, TypeErrorKind::NotAnObject(self_annot.clone())));
                };
                let Some(&(_, variance, write, _)) = types.iter().find(|(n, ..)| n == method) else {
                    return Err(error(rule, t, TypeErrorKind::MissingMethod(method.clone())));
                };
                if let Some(v) = variance {
                    if !v.writable() && self.mutation() != Some(Mutation::DropUpdVariance) {
                        return Err(error(rule, t, TypeErrorKind::Variance { method: method.clone(), variance: v }));
                    }
                }
                let write = write.clone();
                let mark = ctx.len();
                let body = self.bind_term(ctx, self_var, self_annot.clone(), body);
                let r = if self.mutation() == Some(Mutation::CovariantUpdBody) {
                    self.synth(ctx, &body).and_then(|actual| subsume(&self.sub, ctx, rule, &body, &write, &actual))
                } else {
                    self.check(ctx, rule, &body, &write)
                };
                ctx.truncate(mark);
                r?;
                Ok(self_annot.clone())
            }
            Term::Clone { arg } => {
                let rule = if self.split() { "Clone-Gen" } else { "Clone" };
                let ty = self.synth(ctx, arg)?;
                match self.expose(ctx, &ty) {
                    Exposed::Bot => Ok(Type::Bot),
                    Exposed::Shape(s) if self.object_methods(&s).is_some() => Ok(s),
                    Exposed::Shape(s) => Err(error(rule, t, TypeErrorKind::NotAnObject(s))),
                }
            }
            Term::Lam { var, annot, body } => {
                self.wf(ctx, "Lam", t, annot)?;
                let mark = ctx.len();
                let body = self.bind_term(ctx, var, annot.clone(), body);
                let r = self.synth(ctx, &body);
                ctx.truncate(mark);
                Ok(Type::arrow(annot.clone(), r?))
            }
            Term::App { fun, arg } => {
                let fun_ty = self.synth(ctx, fun)?;
                match self.expose(ctx, &fun_ty) {
                    Exposed::Bot => {
                        self.synth(ctx, arg)?;
                        Ok(Type::Bot)
                    }
                    Exposed::Shape(Type::Arrow { dom, cod }) => {
                        self.check(ctx, "App", arg, &dom)?;
                        Ok(*cod)
                    }
                    Exposed::Shape(s) => Err(error("App", t, TypeErrorKind::NotAProcedure(s))),
                }
            }
            Term::Fold { annot, arg } => {
                self.wf(ctx, "Fold", t, annot)?;
                let Type::Mu { var, body } = annot else {
                    return Err(error("Fold", t, TypeErrorKind::NotRecursive(annot.clone())));
                };
                self.check(ctx, "Fold", arg, &subst_type(body, var, annot))?;
                Ok(annot.clone())
            }
            Term::Unfold { annot, arg } => {
                self.wf(ctx, "Unfold", t, annot)?;
                let Type::Mu { var, body } = annot else {
                    return Err(error("Unfold", t, TypeErrorKind::NotRecursive(annot.clone())));
                };
                self.check(ctx, "Unfold", arg, annot)?;
                Ok(subst_type(body, var, annot))
            }
            Term::TLam { var, bound, body } => {
                self.wf(ctx, "TAbs", t, bound)?;
                let name = self.type_binder(ctx, var, &[], body);
                let body = if &name == var { (**body).clone() } else { subst_type_in_term(body, var, &Type::var(name.clone())) };
                let mark = ctx.len();
                ctx.push_type(name.clone(), bound.clone());
                let r = self.synth(ctx, &body);
                ctx.truncate(mark);
                Ok(Type::all(name, bound.clone(), r?))
            }
            Term::TApp { fun, arg } => {
                self.wf(ctx, "TApp", t, arg)?;
                let fun_ty = self.synth(ctx, fun)?;
                match self.expose(ctx, &fun_ty) {
                    Exposed::Bot => Ok(Type::Bot),
                    Exposed::Shape(Type::All { var, bound, body }) => {
                        subsume(&self.sub, ctx, "TApp", t, arg, &bound)?;
                        Ok(subst_type(&body, &var, arg))
                    }
                    Exposed::Shape(s) => Err(error("TApp", t, TypeErrorKind::NotUniversal(s))),
                }
            }
            Term::Pack { var, bound, witness, payload, body_ty } => {
                self.wf(ctx, "Pack", t, bound)?;
                self.wf(ctx, "Pack", t, witness)?;
                let result = Type::exists(var.clone(), bound.clone(), body_ty.clone());
                self.wf(ctx, "Pack", t, &result)?;
                subsume(&self.sub, ctx, "Pack", t, witness, bound)?;
                let payload = subst_type_in_term(payload, var, witness);
                self.check(ctx, "Pack", &payload, &subst_type(body_ty, var, witness))?;
                Ok(result)
            }
            Term::Open { arg, tvar, bound, var, var_ty, body, result_ty } => {
                self.wf(ctx, "Open", t, bound)?;
                self.wf(ctx, "Open", t, result_ty)?;
                let package = Type::exists(tvar.clone(), bound.clone(), var_ty.clone());
                self.wf(ctx, "Open", t, &package)?;
                self.check(ctx, "Open", arg, &package)?;
                let name = self.type_binder(ctx, tvar, &[var_ty], body);
                let (var_ty, body) = if &name == tvar {
                    (var_ty.clone(), (**body).clone())
                } else {
                    let fresh = Type::var(name.clone());
                    (subst_type(var_ty, tvar, &fresh), subst_type_in_term(body, tvar, &fresh))
                };
                let mark = ctx.len();
                ctx.push_type(name, bound.clone());
                let body = self.bind_term(ctx, var, var_ty, &body);
                let r = self.check(ctx, "Open", &body, result_ty);
                ctx.truncate(mark);
                r?;
                Ok(result_ty.clone())
            }
        }
    }
}
