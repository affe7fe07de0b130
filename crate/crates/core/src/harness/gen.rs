//! Type-directed generation of closed well-typed programs.
//!
//! A goal type is drawn first; a term is then built by choosing, at each
//! node, a typing rule whose conclusion can produce the goal and recursing
//! on its premises. Every emitted program is re-checked before it leaves
//! the generator.

use crate::syntax::{desugar_self, free_type_vars, subst_type, MethodType, Term, Type, Variance};
use crate::typecheck::{Checker, Context, Mode, Mutation, DEFAULT_FUEL};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Which optional type formers the generator may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Features {
    pub quantifiers: bool,
    pub recursion: bool,
    pub self_types: bool,
}

impl Default for Features {
    fn default() -> Features {
        Features { quantifiers: true, recursion: true, self_types: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GenConfig {
    pub max_term_depth: usize,
    pub max_type_size: usize,
    pub method_pool: Vec<String>,
    pub fuel: usize,
    pub seed: u64,
    pub mode: Mode,
    pub features: Features,
    /// A broken typing rule the generator and its validating checker share.
    pub mutation: Option<Mutation>,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig {
            max_term_depth: 6,
            max_type_size: 4,
            method_pool: ["m", "n", "p"].map(String::from).to_vec(),
            fuel: 500,
            seed: 0,
            mode: Mode::Variance,
            features: Features::default(),
            mutation: None,
        }
    }
}

impl GenConfig {
    /// Rejects zero bounds and an empty method pool.
    pub fn validate(&self) -> Result<(), GenError> {
        if self.max_term_depth == 0 || self.max_type_size == 0 || self.fuel == 0 || self.method_pool.is_empty() {
            return Err(GenError::BadConfig);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GenError {
    /// A bound is zero or the method pool is empty.
    #[error("generator bounds must be at least 1 and the method pool non-empty")]
    BadConfig,
    /// No attempt produced a program within the depth bound.
    #[error("no program found after {0} attempts")]
    GaveUp(usize),
    /// A produced program failed its own type check; this is a generator bug.
    #[error("generated program failed validation: {0}")]
    Invalid(String),
}

/// Attempts per program before giving up.
pub const MAX_ATTEMPTS: usize = 200;
/// Production tries per attempt.
const WORK_LIMIT: usize = 4_000;

/// Generates one program for `cfg.seed`.
pub fn gen_well_typed(cfg: &GenConfig) -> Result<(Term, Type), GenError> {
    cfg.validate()?;
    let mut g = Generator::new(cfg);
    g.program()
}

/// Generator state for one seed.
pub struct Generator<'a> {
    cfg: &'a GenConfig,
    rng: ChaCha8Rng,
    checker: Checker,
    names: usize,
    work: usize,
    /// `(self variable, method)` pairs whose bodies are being built.
    defining: Vec<(String, String)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Rule {
    Var,
    Intro,
    Project,
    App,
    Let,
    Invoke,
    Update,
    AliasUpdate,
    Clone,
    TApp,
    Open,
    Unfold,
    Exploit,
}

const RULES: [(Rule, u32); 13] = [
    (Rule::Var, 6),
    (Rule::Intro, 6),
    (Rule::Project, 5),
    (Rule::App, 2),
    (Rule::Let, 3),
    (Rule::Invoke, 3),
    (Rule::Update, 2),
    (Rule::AliasUpdate, 2),
    (Rule::Clone, 1),
    (Rule::TApp, 1),
    (Rule::Open, 1),
    (Rule::Unfold, 1),
    (Rule::Exploit, 2),
];

impl<'a> Generator<'a> {
    pub fn new(cfg: &'a GenConfig) -> Generator<'a> {
        Generator {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            checker: Checker::new(cfg.mode, DEFAULT_FUEL).with_mutation(cfg.mutation),
            names: 0,
            work: 0,
            defining: Vec::new(),
        }
    }

    fn program(&mut self) -> Result<(Term, Type), GenError> {
        for _ in 0..MAX_ATTEMPTS {
            self.work = 0;
            let goal = self.gen_type(self.cfg.max_type_size, &[]);
            let Some(t) = self.term(&Context::new(), &goal, self.cfg.max_term_depth) else {
                continue;
            };
            debug_assert!(t.depth() <= self.cfg.max_term_depth);
            match self.checker.check(&Context::new(), &t, &goal) {
                Ok(()) => return Ok((t, goal)),
                // A broken rule makes the generator's guesses unreliable; retry.
                Err(_) if self.cfg.mutation.is_some() => continue,
                Err(e) => return Err(GenError::Invalid(format!("{t} : {goal}: {e}"))),
            }
        }
        Err(GenError::GaveUp(MAX_ATTEMPTS))
    }

    fn fresh(&mut self, stem: &str) -> String {
        self.names += 1;
        format!("{stem}{}", self.names)
    }

    fn method_name(&mut self) -> String {
        self.cfg.method_pool.choose(&mut self.rng).expect("non-empty pool").clone()
    }

    fn variance(&mut self) -> Variance {
        *Variance::ALL.choose(&mut self.rng).expect("three variances")
    }

    /// A random well-formed type of at most `size` nodes over `scope`.
    pub fn gen_type(&mut self, size: usize, scope: &[String]) -> Type {
        let f = self.cfg.features;
        if size <= 1 {
            let mut leaves = vec![Type::Top, Type::Top, Type::Obj { methods: Vec::new() }];
            if self.rng.gen_ratio(1, 8) {
                leaves.push(Type::Bot);
            }
            leaves.extend(scope.iter().map(Type::var));
            return leaves.choose(&mut self.rng).expect("non-empty").clone();
        }
        let mut kinds = vec![1, 1, 1];
        if size >= 3 {
            kinds.push(0);
        }
        if f.recursion && size >= 3 {
            kinds.push(2);
        }
        if f.quantifiers && size >= 3 {
            kinds.extend([3, 4]);
        }
        if f.self_types && size >= 2 {
            kinds.push(5);
        }
        match *kinds.choose(&mut self.rng).expect("non-empty") {
            0 => {
                let d = self.rng.gen_range(1..size - 1);
                let dom = self.gen_type(d, scope);
                let cod = self.gen_type((size - 1 - d).max(1), scope);
                Type::arrow(dom, cod)
            }
            1 => Type::Obj { methods: self.gen_methods(size - 1, scope) },
            2 => {
                let x = self.fresh("X");
                let inner = [scope, std::slice::from_ref(&x)].concat();
                // Keep the recursion guarded by an object type.
                Type::mu(x, Type::Obj { methods: self.gen_methods(size - 2, &inner) })
            }
            k @ (3 | 4) => {
                let x = self.fresh("X");
                let b = self.rng.gen_range(1..size - 1);
                let bound = self.gen_type(b, scope);
                let inner = [scope, std::slice::from_ref(&x)].concat();
                let body = self.gen_type((size - 1 - b).max(1), &inner);
                if k == 3 {
                    Type::all(x, bound, body)
                } else {
                    Type::exists(x, bound, body)
                }
            }
            _ => {
                let x = self.fresh("X");
                let inner = [scope, std::slice::from_ref(&x)].concat();
                Type::SelfObj { var: x, methods: self.gen_methods(size - 1, &inner) }
            }
        }
    }

    fn gen_methods(&mut self, budget: usize, scope: &[String]) -> Vec<MethodType> {
        let want = self.rng.gen_range(1..=budget.clamp(1, 3));
        let mut names = self.cfg.method_pool.clone();
        names.shuffle(&mut self.rng);
        names.truncate(want);
        let per = (budget / names.len().max(1)).max(1);
        names
            .into_iter()
            .map(|name| {
                let size = self.rng.gen_range(1..=per);
                MethodType { name, variance: self.variance(), ty: self.gen_type(size, scope) }
            })
            .collect()
    }

    fn sub(&self, ctx: &Context, a: &Type, b: &Type) -> bool {
        self.checker.subtype(ctx, a, b).is_yes()
    }

    /// A term of type `goal` in `ctx` whose tree height is at most `depth`.
    pub fn term(&mut self, ctx: &Context, goal: &Type, depth: usize) -> Option<Term> {
        if depth == 0 || self.work > WORK_LIMIT {
            return None;
        }
        self.work += 1;
        let goal = desugar_self(goal);
        let mut rules: Vec<(Rule, u32)> = RULES.to_vec();
        let mut order = Vec::new();
        while !rules.is_empty() {
            let total: u32 = rules.iter().map(|r| r.1).sum();
            let mut pick = self.rng.gen_range(0..total);
            let i = rules
                .iter()
                .position(|r| {
                    if pick < r.1 {
                        true
                    } else {
                        pick -= r.1;
                        false
                    }
                })
                .expect("weights cover the range");
            order.push(rules.remove(i).0);
        }
        if depth == 1 {
            order.retain(|r| matches!(r, Rule::Var | Rule::Intro));
        }
        for rule in order {
            if let Some(t) = self.apply(rule, ctx, &goal, depth) {
                return Some(t);
            }
        }
        None
    }

    fn apply(&mut self, rule: Rule, ctx: &Context, goal: &Type, depth: usize) -> Option<Term> {
        match rule {
            Rule::Var => {
                let mut vars: Vec<String> = term_vars(ctx)
                    .into_iter()
                    .filter(|(_, ty)| self.sub(ctx, ty, goal))
                    .map(|(x, _)| x)
                    .collect();
                vars.shuffle(&mut self.rng);
                vars.pop().map(Term::var)
            }
            Rule::Intro => self.intro(ctx, goal, depth),
            Rule::Project => self.project(ctx, goal, depth),
            Rule::App => {
                let dom = self.gen_type(2, &type_vars(ctx));
                let fun = self.term(ctx, &Type::arrow(dom.clone(), goal.clone()), depth - 1)?;
                let arg = self.term(ctx, &dom, depth - 1)?;
                Some(Term::app(fun, arg))
            }
            Rule::Let if depth >= 3 => {
                let ty = self.gen_type(self.cfg.max_type_size, &type_vars(ctx));
                let x = self.fresh("x");
                let bound = self.term(ctx, &ty, depth - 1)?;
                let body = self.term(&ctx.clone().with_term(x.clone(), ty.clone()), goal, depth - 2)?;
                Some(Term::let_in(x, ty, bound, body))
            }
            Rule::Invoke => {
                let m = self.method_name();
                let v = if self.rng.gen_bool(0.5) { Variance::Cov } else { Variance::Inv };
                let recv = self.term(ctx, &Type::obj([(m.clone(), v, goal.clone())]), depth - 1)?;
                if let Term::Var { name } = &recv {
                    if self.defining.contains(&(name.clone(), m.clone())) {
                        return None;
                    }
                }
                Some(Term::invoke(recv, m))
            }
            Rule::Update => {
                let Type::Obj { methods } = goal else { return None };
                let writable: Vec<&MethodType> = methods.iter().filter(|m| self.may_update(m.variance)).collect();
                let m = (*writable.choose(&mut self.rng)?).clone();
                let recv = self.term(ctx, goal, depth - 1)?;
                let s = self.fresh("s");
                self.defining.push((s.clone(), m.name.clone()));
                let body = self.term(&ctx.clone().with_term(s.clone(), goal.clone()), &m.ty, depth - 1);
                self.defining.pop();
                let body = body?;
                Some(Term::update(recv, m.name, s, goal.clone(), body))
            }
            Rule::AliasUpdate => self.alias_update(ctx, goal, depth),
            Rule::Exploit => self.exploit(ctx, goal, depth),
            Rule::Clone => {
                if !matches!(goal, Type::Obj { .. }) {
                    return None;
                }
                Some(Term::clone_of(self.term(ctx, goal, depth - 1)?))
            }
            Rule::TApp => {
                if !self.cfg.features.quantifiers {
                    return None;
                }
                let x = self.fresh("X");
                let bound = self.gen_type(2, &type_vars(ctx));
                let f = self.term(ctx, &Type::all(x, bound.clone(), goal.clone()), depth - 1)?;
                Some(Term::tapp(f, bound))
            }
            Rule::Open => {
                if !self.cfg.features.quantifiers {
                    return None;
                }
                let x = self.fresh("X");
                let bound = self.gen_type(2, &type_vars(ctx));
                let inner = [type_vars(ctx), vec![x.clone()]].concat();
                let var_ty = self.gen_type(3, &inner);
                let pkg_ty = Type::exists(x.clone(), bound.clone(), var_ty.clone());
                let arg = self.term(ctx, &pkg_ty, depth - 1)?;
                let y = self.fresh("y");
                let inner_ctx = ctx.clone().with_type(x.clone(), bound.clone()).with_term(y.clone(), var_ty.clone());
                let body = self.term(&inner_ctx, goal, depth - 1)?;
                Some(Term::Open {
                    arg: Box::new(arg),
                    tvar: x,
                    bound,
                    var: y,
                    var_ty,
                    body: Box::new(body),
                    result_ty: goal.clone(),
                })
            }
            Rule::Unfold => {
                if !self.cfg.features.recursion {
                    return None;
                }
                let x = self.fresh("X");
                let mu = Type::mu(x, goal.clone());
                let arg = self.term(ctx, &mu, depth - 1)?;
                Some(Term::unfold(mu, arg))
            }
            Rule::Let => None,
        }
    }

    fn may_update(&self, v: Variance) -> bool {
        v.writable() || self.cfg.mutation == Some(Mutation::DropUpdVariance)
    }

    fn intro(&mut self, ctx: &Context, goal: &Type, depth: usize) -> Option<Term> {
        match goal {
            Type::Top => {
                if depth >= 3 && self.rng.gen_bool(0.5) {
                    let ty = self.gen_type(self.cfg.max_type_size, &type_vars(ctx));
                    return self.term(ctx, &ty, depth);
                }
                Some(Term::obj(Type::Obj { methods: Vec::new() }, Vec::<(String, String, Term)>::new()))
            }
            Type::Arrow { dom, cod } => {
                let x = self.fresh("x");
                let body = self.term(&ctx.clone().with_term(x.clone(), (**dom).clone()), cod, depth - 1)?;
                Some(Term::lam(x, (**dom).clone(), body))
            }
            Type::Obj { methods } => {
                let mut annot = methods.clone();
                // Sometimes build a strictly richer object and rely on subsumption.
                if self.rng.gen_bool(0.3) {
                    for m in annot.iter_mut() {
                        if self.rng.gen_bool(0.5) {
                            m.variance = Variance::Inv;
                        }
                    }
                    let extra = self.method_name();
                    if !annot.iter().any(|m| m.name == extra) {
                        let ty = self.gen_type(2, &type_vars(ctx));
                        annot.push(MethodType { name: extra, variance: self.variance(), ty });
                    }
                }
                if self.cfg.mode == Mode::Split {
                    // Split-mode literals need equal write and read types.
                    for m in annot.iter_mut() {
                        m.variance = Variance::Inv;
                    }
                }
                let annot = Type::Obj { methods: annot };
                let Type::Obj { methods: ms } = &annot else { unreachable!() };
                if depth == 1 && !ms.is_empty() {
                    return None;
                }
                let mut bodies = Vec::new();
                for (i, m) in ms.iter().enumerate() {
                    let s = self.fresh("s");
                    // A body may only invoke earlier methods on its own self, so
                    // literals never loop through self alone.
                    let mark = self.defining.len();
                    self.defining.extend(ms[i..].iter().map(|later| (s.clone(), later.name.clone())));
                    let body = self.term(&ctx.clone().with_term(s.clone(), annot.clone()), &m.ty, depth - 1);
                    self.defining.truncate(mark);
                    let body = body?;
                    bodies.push((m.name.clone(), s, body));
                }
                let t = Term::obj(annot.clone(), bodies);
                self.sub(ctx, &annot, goal).then_some(t)
            }
            Type::Mu { var, body } => {
                let unrolled = subst_type(body, var, goal);
                Some(Term::fold(goal.clone(), self.term(ctx, &unrolled, depth - 1)?))
            }
            Type::All { var, bound, body } => {
                let x = if ctx.has_type(var) || free_type_vars(goal).contains(var) { self.fresh("X") } else { var.clone() };
                let body = subst_type(body, var, &Type::var(x.clone()));
                let inner = ctx.clone().with_type(x.clone(), (**bound).clone());
                Some(Term::tlam(x, (**bound).clone(), self.term(&inner, &body, depth - 1)?))
            }
            Type::Exists { var, bound, body } => {
                let witness = if matches!(**bound, Type::Top) && self.rng.gen_bool(0.5) {
                    self.gen_type(3, &type_vars(ctx))
                } else {
                    (**bound).clone()
                };
                let payload = self.term(ctx, &subst_type(body, var, &witness), depth - 1)?;
                Some(Term::Pack {
                    var: var.clone(),
                    bound: (**bound).clone(),
                    witness,
                    payload: Box::new(payload),
                    body_ty: (**body).clone(),
                })
            }
            Type::Bot | Type::Var { .. } => {
                // Only a diverging self-invocation inhabits these without a variable.
                if depth < 4 {
                    return None;
                }
                let m = self.method_name();
                let annot = Type::obj([(m.clone(), Variance::Inv, goal.clone())]);
                let s = self.fresh("s");
                let body = Term::invoke(Term::var(s.clone()), m.clone());
                Some(Term::invoke(Term::obj(annot, [(m.clone(), s, body)]), m))
            }
            Type::Split { .. } | Type::SelfObj { .. } => None,
        }
    }

    /// One elimination applied to a variable in scope.
    fn project(&mut self, ctx: &Context, goal: &Type, depth: usize) -> Option<Term> {
        let mut vars = term_vars(ctx);
        vars.shuffle(&mut self.rng);
        for (x, ty) in vars {
            match &ty {
                Type::Obj { methods } => {
                    let readable: Vec<&MethodType> = methods
                        .iter()
                        .filter(|m| m.variance.readable() || self.cfg.mutation == Some(Mutation::DropInvVariance))
                        .filter(|m| !self.defining.contains(&(x.clone(), m.name.clone())))
                        .filter(|m| self.sub(ctx, &m.ty, goal))
                        .collect();
                    if let Some(m) = readable.choose(&mut self.rng) {
                        return Some(Term::invoke(Term::var(x), m.name.clone()));
                    }
                }
                Type::Arrow { dom, cod } if depth >= 2 && self.sub(ctx, cod, goal) => {
                    if let Some(arg) = self.term(ctx, dom, depth - 1) {
                        return Some(Term::app(Term::var(x), arg));
                    }
                }
                Type::Mu { var, body } if self.sub(ctx, &subst_type(body, var, &ty), goal) => {
                    return Some(Term::unfold(ty.clone(), Term::var(x)));
                }
                Type::All { var, bound, body } if self.sub(ctx, &subst_type(body, var, bound), goal) => {
                    return Some(Term::tapp(Term::var(x), (**bound).clone()));
                }
                Type::Exists { var, bound, body } if depth >= 2 => {
                    let tv = self.fresh("X");
                    let y = self.fresh("y");
                    let var_ty = subst_type(body, var, &Type::var(tv.clone()));
                    let inner = ctx.clone().with_type(tv.clone(), (**bound).clone()).with_term(y.clone(), var_ty.clone());
                    if let Some(b) = self.term(&inner, goal, depth - 1) {
                        return Some(Term::Open {
                            arg: Box::new(Term::var(x)),
                            tvar: tv,
                            bound: (**bound).clone(),
                            var: y,
                            var_ty,
                            body: Box::new(b),
                            result_ty: goal.clone(),
                        });
                    }
                }
                _ => {}
            }
        }
        None
    }

    /// `let x = e in let _ = (x seen at a supertype).m := b in rest`: an
    /// update through a wider view of an object that stays reachable.
    fn alias_update(&mut self, ctx: &Context, goal: &Type, depth: usize) -> Option<Term> {
        if depth < 5 {
            return None;
        }
        let scope = type_vars(ctx);
        let ty = Type::Obj { methods: self.gen_methods(self.cfg.max_type_size, &scope) };
        let Type::Obj { methods } = &ty else { unreachable!() };
        let mut view = Vec::new();
        for m in methods {
            let variance = match (m.variance, self.rng.gen_range(0..3)) {
                (Variance::Inv, 1) => Variance::Cov,
                (Variance::Inv, 2) => Variance::Con,
                (v, _) => v,
            };
            let wider = if variance == Variance::Cov && self.rng.gen_bool(0.5) { Type::Top } else { m.ty.clone() };
            view.push(MethodType { name: m.name.clone(), variance, ty: wider });
        }
        let candidates: Vec<MethodType> = view.iter().filter(|m| self.may_update(m.variance)).cloned().collect();
        let target = candidates.choose(&mut self.rng)?.clone();
        let view = Type::Obj { methods: view };
        let x = self.fresh("x");
        let bound = self.term(ctx, &ty, depth - 1)?;
        let inner = ctx.clone().with_term(x.clone(), ty.clone());
        let s = self.fresh("s");
        let upd_ctx = inner.clone().with_term(s.clone(), view.clone());
        self.defining.push((s.clone(), target.name.clone()));
        let new_body = self.term(&upd_ctx, &target.ty, depth - 4);
        self.defining.pop();
        let new_body = new_body?;
        let upd = Term::update(Term::var(x.clone()), target.name, s, view.clone(), new_body);
        let rest = self.term(&inner, goal, depth - 4)?;
        let ignored = self.fresh("u");
        Some(Term::let_in(x, ty, bound, Term::let_in(ignored, view, upd, rest)))
    }
}

impl Generator<'_> {
    /// Under a mutation, a program shape that only the broken rule admits.
    fn exploit(&mut self, ctx: &Context, goal: &Type, depth: usize) -> Option<Term> {
        let mutation = self.cfg.mutation?;
        let (m, k, p) = ("m", "n", "p");
        let empty = || Term::obj(Type::Obj { methods: Vec::new() }, Vec::<(String, String, Term)>::new());
        let inner = Type::obj([(k, Variance::Inv, goal.clone())]);
        match mutation {
            // `(obj{m = .., p = s.m.k}.m := []).p` with the update allowed
            // through a view that either hides or ignores the method type.
            Mutation::DropUpdVariance | Mutation::CovariantUpdBody if depth >= 6 => {
                let host = Type::obj([(m, Variance::Inv, inner.clone()), (p, Variance::Inv, goal.clone())]);
                let view = if mutation == Mutation::DropUpdVariance {
                    Type::obj([(m, Variance::Cov, Type::Top), (p, Variance::Inv, goal.clone())])
                } else {
                    host.clone()
                };
                let (s1, s2, s3) = (self.fresh("s"), self.fresh("s"), self.fresh("s"));
                let lit = Term::obj(
                    host,
                    [
                        (m, s1.clone(), Term::invoke(Term::var(s1), m)),
                        (p, s2.clone(), Term::invoke(Term::invoke(Term::var(s2), m), k)),
                    ],
                );
                Some(Term::invoke(Term::update(lit, m, s3, view, empty()), p))
            }
            // A write-only method read at the type it accepts.
            Mutation::DropInvVariance if depth >= 5 => {
                let y = self.fresh("y");
                let view = Type::obj([(m, Variance::Con, inner)]);
                let s = self.fresh("s");
                let lit = Term::obj(Type::obj([(m, Variance::Inv, Type::Top)]), [(m, s, empty())]);
                let body = Term::invoke(Term::invoke(Term::var(y.clone()), m), k);
                Some(Term::app(Term::lam(y, view, body), lit))
            }
            // A method missing from the object, admitted by reversed width.
            Mutation::WidthReversed if depth >= 4 => {
                let y = self.fresh("y");
                let view = Type::obj([(m, Variance::Inv, goal.clone())]);
                Some(Term::app(Term::lam(y.clone(), view, Term::invoke(Term::var(y), m)), empty()))
            }
            _ => {
                let _ = ctx;
                None
            }
        }
    }
}

fn term_vars(ctx: &Context) -> Vec<(String, Type)> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for b in ctx.entries().iter().rev() {
        if let crate::typecheck::Binding::Term { name, ty } = b {
            if seen.insert(name.clone()) {
                out.push((name.clone(), desugar_self(ty)));
            }
        }
    }
    out
}

fn type_vars(ctx: &Context) -> Vec<String> {
    ctx.type_names().into_iter().collect()
}
