//! Heap configurations, evaluation contexts and one-step reduction.

use crate::syntax::{
    erase_annotations, print_term, subst_term1, subst_term_and_type, subst_type_in_term, Field, Loc, Term, Type,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Finite map from locations to closed values.
pub type Heap = BTreeMap<Loc, Term>;

/// A heap paired with a closed term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub heap: Heap,
    pub term: Term,
}

impl Config {
    pub fn new(heap: Heap, term: Term) -> Config {
        Config { heap, term }
    }

    /// A program started on the empty heap.
    pub fn program(term: Term) -> Config {
        Config { heap: Heap::new(), term }
    }

    /// Erases annotations of the term and of every stored value.
    pub fn erase(&self) -> Config {
        Config {
            heap: self.heap.iter().map(|(l, v)| (*l, erase_annotations(v))).collect(),
            term: erase_annotations(&self.term),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let heap: serde_json::Map<String, serde_json::Value> =
            self.heap.iter().map(|(l, v)| (l.to_string(), print_term(v).into())).collect();
        serde_json::json!({ "heap": heap, "term": print_term(&self.term) })
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<{")?;
        for (i, (l, v)) in self.heap.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{l} := {v}")?;
        }
        write!(f, "}} | {}>", self.term)
    }
}

/// The eight reduction rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rule {
    Obj,
    Inv,
    Upd,
    Clone,
    Beta,
    Unfold,
    TBeta,
    Open,
}

impl Rule {
    pub const ALL: [Rule; 8] =
        [Rule::Obj, Rule::Inv, Rule::Upd, Rule::Clone, Rule::Beta, Rule::Unfold, Rule::TBeta, Rule::Open];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Obj => "Red-Obj",
            Rule::Inv => "Red-Inv",
            Rule::Upd => "Red-Upd",
            Rule::Clone => "Red-Clone",
            Rule::Beta => "Red-Beta",
            Rule::Unfold => "Red-Unfold",
            Rule::TBeta => "Red-TBeta",
            Rule::Open => "Red-Open",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Why an irreducible term is not a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum StuckReason {
    InvokeOnNonObject,
    MissingMethod,
    UpdateOnNonObject,
    CloneNonObject,
    ApplyNonLambda,
    UnfoldNonFold,
    TypeApplyNonTlam,
    OpenNonPack,
    DanglingLocation,
    FreeVariable,
}

impl StuckReason {
    pub fn name(self) -> &'static str {
        match self {
            StuckReason::InvokeOnNonObject => "invoke-on-non-object",
            StuckReason::MissingMethod => "missing-method",
            StuckReason::UpdateOnNonObject => "update-on-non-object",
            StuckReason::CloneNonObject => "clone-non-object",
            StuckReason::ApplyNonLambda => "apply-non-lambda",
            StuckReason::UnfoldNonFold => "unfold-non-fold",
            StuckReason::TypeApplyNonTlam => "type-apply-non-tlam",
            StuckReason::OpenNonPack => "open-non-pack",
            StuckReason::DanglingLocation => "dangling-location",
            StuckReason::FreeVariable => "free-variable",
        }
    }
}

impl fmt::Display for StuckReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Source of fresh locations.
#[derive(Clone, Debug)]
pub enum Allocator {
    /// Numbers locations upwards from a counter, skipping occupied ones.
    Canonical { next: u64 },
    /// Draws locations at random from a seeded stream.
    Randomized { seed: u64, rng: ChaCha8Rng },
}

impl Allocator {
    pub fn canonical() -> Allocator {
        Allocator::Canonical { next: 0 }
    }

    pub fn randomized(seed: u64) -> Allocator {
        Allocator::Randomized { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// A location outside `dom(heap)` and distinct from all earlier results.
    pub fn fresh(&mut self, heap: &Heap) -> Loc {
        match self {
            Allocator::Canonical { next } => {
                while heap.contains_key(&Loc(*next)) {
                    *next += 1;
                }
                let l = Loc(*next);
                *next += 1;
                l
            }
            Allocator::Randomized { rng, .. } => loop {
                let l = Loc(rng.gen_range(0..1u64 << 32));
                if !heap.contains_key(&l) {
                    return l;
                }
            },
        }
    }
}

/// One frame of an evaluation context; the hole is the omitted subterm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Frame {
    InvokeRecv { method: String },
    UpdateRecv { method: String, self_var: String, self_annot: Type, body: Term },
    CloneArg,
    AppFun { arg: Term },
    AppArg { fun: Term },
    FoldArg { annot: Type },
    UnfoldArg { annot: Type },
    TAppFun { arg: Type },
    PackPayload { var: String, bound: Type, witness: Type, body_ty: Type },
    OpenArg { tvar: String, bound: Type, var: String, var_ty: Type, body: Term, result_ty: Type },
}

/// An evaluation context, outermost frame first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EvalContext {
    pub frames: Vec<Frame>,
}

impl EvalContext {
    pub fn is_hole(&self) -> bool {
        self.frames.is_empty()
    }

    /// `C[t]`.
    pub fn plug(&self, t: Term) -> Term {
        self.frames.iter().rev().fold(t, |inner, frame| plug_frame(frame, inner))
    }
}

fn plug_frame(frame: &Frame, t: Term) -> Term {
    let t = Box::new(t);
    match frame.clone() {
        Frame::InvokeRecv { method } => Term::Invoke { recv: t, method },
        Frame::UpdateRecv { method, self_var, self_annot, body } => {
            Term::Update { recv: t, method, self_var, self_annot, body: Box::new(body) }
        }
        Frame::CloneArg => Term::Clone { arg: t },
        Frame::AppFun { arg } => Term::App { fun: t, arg: Box::new(arg) },
        Frame::AppArg { fun } => Term::App { fun: Box::new(fun), arg: t },
        Frame::FoldArg { annot } => Term::Fold { annot, arg: t },
        Frame::UnfoldArg { annot } => Term::Unfold { annot, arg: t },
        Frame::TAppFun { arg } => Term::TApp { fun: t, arg },
        Frame::PackPayload { var, bound, witness, body_ty } => Term::Pack { var, bound, witness, payload: t, body_ty },
        Frame::OpenArg { tvar, bound, var, var_ty, body, result_ty } => {
            Term::Open { arg: t, tvar, bound, var, var_ty, body: Box::new(body), result_ty }
        }
    }
}

/// Result of splitting a closed term at its unique redex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decomposition {
    ValueForm,
    RedexInContext { ctx: EvalContext, redex: Term },
    StuckForm(StuckReason),
}

/// Splits `t` into evaluation context and redex.
pub fn decompose(t: &Term) -> Decomposition {
    let mut path = Vec::new();
    match locate(t, &mut path) {
        Located::Value => Decomposition::ValueForm,
        Located::Stuck(r) => Decomposition::StuckForm(r),
        Located::Redex(redex) => Decomposition::RedexInContext { ctx: context_of(t, &path), redex: redex.clone() },
    }
}

pub(crate) enum Located<'a> {
    Value,
    Redex(&'a Term),
    Stuck(StuckReason),
}

/// Finds the unique redex along the left-to-right call-by-value spine.
/// `path` receives the child slots leading to it: 0 for the first evaluated
/// subterm, 1 for the argument of an application.
pub(crate) fn locate<'a>(t: &'a Term, path: &mut Vec<u8>) -> Located<'a> {
    let sub = |slot: u8, child: &'a Term, path: &mut Vec<u8>| -> Option<Located<'a>> {
        path.push(slot);
        match locate(child, path) {
            Located::Value => {
                path.pop();
                None
            }
            found => Some(found),
        }
    };
    let has = |recv: &Term, method: &str| match recv {
        Term::RtObj { fields } => Some(fields.iter().any(|f| f.name == method)),
        _ => None,
    };
    match t {
        Term::RtObj { .. } | Term::Lam { .. } | Term::TLam { .. } => Located::Value,
        Term::Var { .. } => Located::Stuck(StuckReason::FreeVariable),
        Term::Obj { .. } => Located::Redex(t),
        Term::Invoke { recv, method } => sub(0, recv, path).unwrap_or_else(|| match has(recv, method) {
            Some(true) => Located::Redex(t),
            Some(false) => Located::Stuck(StuckReason::MissingMethod),
            None => Located::Stuck(StuckReason::InvokeOnNonObject),
        }),
        Term::Update { recv, method, .. } => sub(0, recv, path).unwrap_or_else(|| match has(recv, method) {
            Some(true) => Located::Redex(t),
            Some(false) => Located::Stuck(StuckReason::MissingMethod),
            None => Located::Stuck(StuckReason::UpdateOnNonObject),
        }),
        Term::Clone { arg } => sub(0, arg, path).unwrap_or(match &**arg {
            Term::RtObj { .. } => Located::Redex(t),
            _ => Located::Stuck(StuckReason::CloneNonObject),
        }),
        Term::App { fun, arg } => sub(0, fun, path).or_else(|| sub(1, arg, path)).unwrap_or(match &**fun {
            Term::Lam { .. } => Located::Redex(t),
            _ => Located::Stuck(StuckReason::ApplyNonLambda),
        }),
        Term::Fold { arg, .. } => sub(0, arg, path).unwrap_or(Located::Value),
        Term::Unfold { arg, .. } => sub(0, arg, path).unwrap_or(match &**arg {
            Term::Fold { .. } => Located::Redex(t),
            _ => Located::Stuck(StuckReason::UnfoldNonFold),
        }),
        Term::TApp { fun, .. } => sub(0, fun, path).unwrap_or(match &**fun {
            Term::TLam { .. } => Located::Redex(t),
            _ => Located::Stuck(StuckReason::TypeApplyNonTlam),
        }),
        Term::Pack { payload, .. } => sub(0, payload, path).unwrap_or(Located::Value),
        Term::Open { arg, .. } => sub(0, arg, path).unwrap_or(match &**arg {
            Term::Pack { .. } => Located::Redex(t),
            _ => Located::Stuck(StuckReason::OpenNonPack),
        }),
    }
}

fn child(t: &Term, slot: u8) -> &Term {
    match (t, slot) {
        (Term::Invoke { recv, .. } | Term::Update { recv, .. }, 0) => recv,
        (Term::Clone { arg } | Term::Fold { arg, .. } | Term::Unfold { arg, .. }, 0) => arg,
        (Term::App { fun, .. } | Term::TApp { fun, .. }, 0) => fun,
        (Term::App { arg, .. }, 1) => arg,
        (Term::Pack { payload, .. }, 0) => payload,
        (Term::Open { arg, .. }, 0) => arg,
        _ => unreachable!("paths come from locate"),
    }
}

fn frame_of(t: &Term, slot: u8) -> Frame {
    match (t.clone(), slot) {
        (Term::Invoke { method, .. }, 0) => Frame::InvokeRecv { method },
        (Term::Update { method, self_var, self_annot, body, .. }, 0) => {
            Frame::UpdateRecv { method, self_var, self_annot, body: *body }
        }
        (Term::Clone { .. }, 0) => Frame::CloneArg,
        (Term::App { arg, .. }, 0) => Frame::AppFun { arg: *arg },
        (Term::App { fun, .. }, 1) => Frame::AppArg { fun: *fun },
        (Term::Fold { annot, .. }, 0) => Frame::FoldArg { annot },
        (Term::Unfold { annot, .. }, 0) => Frame::UnfoldArg { annot },
        (Term::TApp { arg, .. }, 0) => Frame::TAppFun { arg },
        (Term::Pack { var, bound, witness, body_ty, .. }, 0) => Frame::PackPayload { var, bound, witness, body_ty },
        (Term::Open { tvar, bound, var, var_ty, body, result_ty, .. }, 0) => {
            Frame::OpenArg { tvar, bound, var, var_ty, body: *body, result_ty }
        }
        _ => unreachable!("paths come from locate"),
    }
}

fn context_of(t: &Term, path: &[u8]) -> EvalContext {
    let mut frames = Vec::with_capacity(path.len());
    let mut cur = t;
    for &slot in path {
        frames.push(frame_of(cur, slot));
        cur = child(cur, slot);
    }
    EvalContext { frames }
}

/// Rebuilds `t` with the subterm at `path` replaced by `new`.
pub(crate) fn replace_at(t: &mut Term, path: &[u8], new: Term) {
    let Some((&slot, rest)) = path.split_first() else {
        *t = new;
        return;
    };
    let next: &mut Term = match (t, slot) {
        (Term::Invoke { recv, .. } | Term::Update { recv, .. }, 0) => recv,
        (Term::Clone { arg } | Term::Fold { arg, .. } | Term::Unfold { arg, .. }, 0) => arg,
        (Term::App { fun, .. } | Term::TApp { fun, .. }, 0) => fun,
        (Term::App { arg, .. }, 1) => arg,
        (Term::Pack { payload, .. }, 0) => payload,
        (Term::Open { arg, .. }, 0) => arg,
        _ => unreachable!("paths come from locate"),
    };
    replace_at(next, rest, new)
}

fn subterm_at<'a>(t: &'a Term, path: &[u8]) -> &'a Term {
    path.iter().fold(t, |cur, &slot| child(cur, slot))
}

/// Outcome of a single step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Stepped(Config, Rule),
    Irreducible(Irreducible),
}

/// Why a configuration does not step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Irreducible {
    Value,
    Stuck(StuckReason),
}

/// One step of reduction, returning a new configuration.
pub fn step(c: &Config, alloc: &mut Allocator) -> StepResult {
    let mut next = c.clone();
    match step_in_place(&mut next, alloc) {
        Ok(stepped) => StepResult::Stepped(next, stepped.rule),
        Err(irr) => StepResult::Irreducible(irr),
    }
}

/// What one in-place step did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stepped {
    pub rule: Rule,
    /// Locations allocated by the step, in allocation order.
    pub fresh: Vec<Loc>,
}

/// Classifies the configuration without changing it.
pub fn classify(c: &Config) -> Result<Rule, Irreducible> {
    let mut path = Vec::new();
    match locate(&c.term, &mut path) {
        Located::Value => Err(Irreducible::Value),
        Located::Stuck(r) => Err(Irreducible::Stuck(r)),
        Located::Redex(redex) => check_redex(&c.heap, redex).map_err(Irreducible::Stuck),
    }
}

/// The rule a redex matches, or why it is stuck given the heap.
fn check_redex(heap: &Heap, redex: &Term) -> Result<Rule, StuckReason> {
    let field = |recv: &Term, method: &str| -> Result<Loc, StuckReason> {
        let Term::RtObj { fields } = recv else { unreachable!("checked by locate") };
        let loc = fields.iter().find(|f| f.name == method).map(|f| f.loc).ok_or(StuckReason::MissingMethod)?;
        if heap.contains_key(&loc) {
            Ok(loc)
        } else {
            Err(StuckReason::DanglingLocation)
        }
    };
    match redex {
        Term::Obj { .. } => Ok(Rule::Obj),
        Term::Invoke { recv, method } => field(recv, method).map(|_| Rule::Inv),
        Term::Update { recv, method, .. } => field(recv, method).map(|_| Rule::Upd),
        Term::Clone { arg } => {
            let Term::RtObj { fields } = &**arg else { unreachable!("checked by locate") };
            if fields.iter().all(|f| heap.contains_key(&f.loc)) {
                Ok(Rule::Clone)
            } else {
                Err(StuckReason::DanglingLocation)
            }
        }
        Term::App { .. } => Ok(Rule::Beta),
        Term::Unfold { .. } => Ok(Rule::Unfold),
        Term::TApp { .. } => Ok(Rule::TBeta),
        Term::Open { .. } => Ok(Rule::Open),
        _ => unreachable!("locate only reports redex shapes"),
    }
}

/// One step of reduction applied to `c` in place.
pub fn step_in_place(c: &mut Config, alloc: &mut Allocator) -> Result<Stepped, Irreducible> {
    let mut path = Vec::new();
    let redex = match locate(&c.term, &mut path) {
        Located::Value => return Err(Irreducible::Value),
        Located::Stuck(r) => return Err(Irreducible::Stuck(r)),
        Located::Redex(_) => subterm_at(&c.term, &path),
    };
    let rule = check_redex(&c.heap, redex).map_err(Irreducible::Stuck)?;
    let mut fresh = Vec::new();
    let result = match redex {
        Term::Obj { methods, .. } => {
            let mut order: Vec<usize> = (0..methods.len()).collect();
            order.sort_by(|&a, &b| methods[a].name.cmp(&methods[b].name));
            let mut locs = vec![Loc(0); methods.len()];
            for i in order {
                let m = &methods[i];
                let l = alloc.fresh(&c.heap);
                c.heap.insert(l, Term::lam(m.self_var.clone(), m.self_annot.clone(), m.body.clone()));
                locs[i] = l;
                fresh.push(l);
            }
            Term::RtObj {
                fields: methods.iter().zip(locs).map(|(m, loc)| Field { name: m.name.clone(), loc }).collect(),
            }
        }
        Term::Invoke { recv, method } => {
            let loc = field_loc(recv, method);
            Term::app(c.heap[&loc].clone(), (**recv).clone())
        }
        Term::Update { recv, method, self_var, self_annot, body } => {
            let loc = field_loc(recv, method);
            c.heap.insert(loc, Term::lam(self_var.clone(), self_annot.clone(), (**body).clone()));
            (**recv).clone()
        }
        Term::Clone { arg } => {
            let Term::RtObj { fields } = &**arg else { unreachable!() };
            let mut order: Vec<usize> = (0..fields.len()).collect();
            order.sort_by(|&a, &b| fields[a].name.cmp(&fields[b].name));
            let mut locs = vec![Loc(0); fields.len()];
            for i in order {
                let l = alloc.fresh(&c.heap);
                let content = c.heap[&fields[i].loc].clone();
                c.heap.insert(l, content);
                locs[i] = l;
                fresh.push(l);
            }
            Term::RtObj {
                fields: fields.iter().zip(locs).map(|(f, loc)| Field { name: f.name.clone(), loc }).collect(),
            }
        }
        Term::App { fun, arg } => {
            let Term::Lam { var, body, .. } = &**fun else { unreachable!() };
            subst_term1(body, var, arg)
        }
        Term::Unfold { arg, .. } => {
            let Term::Fold { arg: inner, .. } = &**arg else { unreachable!() };
            (**inner).clone()
        }
        Term::TApp { fun, arg } => {
            let Term::TLam { var, body, .. } = &**fun else { unreachable!() };
            subst_type_in_term(body, var, arg)
        }
        Term::Open { arg, tvar, var, body, .. } => {
            let Term::Pack { var: hidden, witness, payload, .. } = &**arg else { unreachable!() };
            let payload = subst_type_in_term(payload, hidden, witness);
            subst_term_and_type(body, var, &payload, tvar, witness)
        }
        _ => unreachable!(),
    };
    replace_at(&mut c.term, &path, result);
    Ok(Stepped { rule, fresh })
}

fn field_loc(recv: &Term, method: &str) -> Loc {
    let Term::RtObj { fields } = recv else { unreachable!() };
    fields.iter().find(|f| f.name == method).map(|f| f.loc).expect("checked by check_redex")
}
