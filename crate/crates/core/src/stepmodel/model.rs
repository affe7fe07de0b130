//! Bounded membership in the step-indexed model.
//!
//! Every universally quantified heap typing, value or index is drawn from
//! the budget; existential witnesses are searched in the witness catalog.
//! A counterexample is only reported when it does not depend on a
//! finitized existential choice.

use super::budget::{omega, Budget, BudgetError};
use super::code::{alpha_eq_code, approx_code, interp, interp_self_direct, CodeEnv, HeapTypingApprox, TypeCode};
use super::verdict::{all_of, Reason, Verdict};
use crate::eval::{decompose, step_in_place, Allocator, Config, Decomposition, Heap, Irreducible};
use crate::syntax::{map_subterms, subst_term1, subst_type_in_term, Field, Loc, Term, Type, Variance};
use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

/// First location handed out to synthesized members.
pub const SYNTH_BASE: u64 = 5000;
/// First location used for relabelled copies of an object.
pub const RELABEL_BASE: u64 = 20_000;

const SYNTH_DEPTH: u32 = 2;

/// Which recursive check is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Frame {
    Value(u32),
    Term(u32),
}

/// Runtime record of the index discipline: nested checks must run at
/// strictly smaller indices, except a term check handing its result value
/// to a value check at the same index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Gauge {
    pub calls: u64,
    pub max_depth: usize,
    pub violations: u64,
    stack: Vec<Frame>,
}

impl Gauge {
    fn push(&mut self, f: Frame) {
        if let Some(top) = self.stack.last() {
            let ok = match (*top, f) {
                (Frame::Value(k), Frame::Value(j)) | (Frame::Value(k), Frame::Term(j)) => j < k,
                (Frame::Term(k), Frame::Value(j)) => j <= k,
                (Frame::Term(k), Frame::Term(j)) => j < k,
            };
            if !ok {
                self.violations += 1;
            }
        }
        self.calls += 1;
        self.stack.push(f);
        self.max_depth = self.max_depth.max(self.stack.len());
    }

    fn pop(&mut self) {
        self.stack.pop();
    }
}

/// A value together with the heap-typing entries it relies on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Member {
    pub typing: HeapTypingApprox,
    pub value: Term,
}

type Key = (u32, HeapTypingApprox, Term, TypeCode);

/// A membership engine over one budget, with memo tables.
pub struct Model {
    budget: Budget,
    values: RefCell<HashMap<Key, Verdict>>,
    terms: RefCell<HashMap<Key, Verdict>>,
    subsets: RefCell<HashMap<(u32, TypeCode, TypeCode, HeapTypingApprox), Verdict>>,
    heaps: RefCell<HashMap<(u32, HeapTypingApprox), Rc<Vec<Heap>>>>,
    synth: RefCell<HashMap<TypeCode, Rc<Vec<Member>>>>,
    contents: RefCell<BTreeMap<Loc, Term>>,
    next_loc: Cell<u64>,
    gauge: RefCell<Gauge>,
}

/// Locations occurring in a term.
pub fn term_locs(t: &Term) -> BTreeSet<Loc> {
    let out = RefCell::new(BTreeSet::new());
    fn go(t: &Term, out: &RefCell<BTreeSet<Loc>>) -> Term {
        if let Term::RtObj { fields } = t {
            out.borrow_mut().extend(fields.iter().map(|f| f.loc));
        }
        map_subterms(t, &|s| go(s, out))
    }
    go(t, &out);
    out.into_inner()
}

fn mentions(t: &Term, locs: &BTreeSet<Loc>) -> bool {
    !locs.is_empty() && term_locs(t).iter().any(|l| locs.contains(l))
}

fn lam_s(body: Term) -> Term {
    Term::lam("s", Type::Top, body)
}

/// A closed, location-free value of the code, when one is easy to build.
pub fn value_for(code: &TypeCode) -> Option<Term> {
    value_at(code, SYNTH_DEPTH)
}

fn value_at(code: &TypeCode, depth: u32) -> Option<Term> {
    let empty = || Term::rt_obj(Vec::<(&str, Loc)>::new());
    match code.strip() {
        TypeCode::Top => Some(empty()),
        TypeCode::Bot | TypeCode::Var { .. } | TypeCode::Approx { .. } => None,
        TypeCode::Arrow { cod, .. } => Some(Term::lam("x", Type::Top, body_at(cod, depth))),
        TypeCode::Obj { methods } | TypeCode::SelfObj { methods, .. } | TypeCode::Rec { methods, .. } => {
            methods.is_empty().then(empty)
        }
        TypeCode::Split { methods } => methods.is_empty().then(empty),
        TypeCode::Mu { .. } if depth == 0 => None,
        c @ TypeCode::Mu { .. } => {
            Some(Term::fold(c.to_type_lossy(), value_at(&c.unroll().expect("mu"), depth - 1)?))
        }
        TypeCode::All { var, bound, body } => Some(Term::tlam(
            var.clone(),
            bound.to_type_lossy(),
            body_at(&body.subst(var, bound), depth.saturating_sub(1)),
        )),
        TypeCode::Exists { var, bound, body } => {
            let payload = value_at(&body.subst(var, bound), depth.saturating_sub(1))?;
            Some(Term::Pack {
                var: var.clone(),
                bound: bound.to_type_lossy(),
                witness: bound.to_type_lossy(),
                payload: Box::new(payload),
                body_ty: TypeCode::Exists { var: var.clone(), bound: bound.clone(), body: body.clone() }
                    .to_type_lossy()
                    .exists_body(),
            })
        }
    }
}

fn body_at(code: &TypeCode, depth: u32) -> Term {
    if depth == 0 {
        return omega();
    }
    value_at(code, depth - 1).unwrap_or_else(omega)
}

trait ExistsBody {
    fn exists_body(self) -> Type;
}

impl ExistsBody for Type {
    fn exists_body(self) -> Type {
        match self {
            Type::Exists { body, .. } => *body,
            other => other,
        }
    }
}

/// How synthesized objects type their method locations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    /// Exactly the slot's procedure type.
    Plain,
    /// Update-only slots accept any result and store the identity.
    Loose,
    /// Invoke-only slots promise no result and store a diverging body.
    Narrow,
}

/// How a method slot of an object code constrains its location.
#[derive(Clone, Debug)]
enum Slot {
    Var(Variance, TypeCode),
    Gen(TypeCode, TypeCode),
}

/// The method slots of an object-like code for a given witness `alpha1`.
fn slots(tau: &TypeCode, alpha1: &TypeCode) -> Vec<(String, Slot)> {
    match tau.strip() {
        TypeCode::Obj { methods } => methods
            .iter()
            .map(|m| (m.name.clone(), Slot::Var(m.variance, TypeCode::arrow(alpha1.clone(), m.ty.clone()))))
            .collect(),
        TypeCode::SelfObj { var, methods } | TypeCode::Rec { var, methods } => methods
            .iter()
            .map(|m| {
                (m.name.clone(), Slot::Var(m.variance, TypeCode::arrow(alpha1.clone(), m.ty.subst(var, alpha1))))
            })
            .collect(),
        TypeCode::Split { methods } => methods
            .iter()
            .map(|m| {
                (
                    m.name.clone(),
                    Slot::Gen(
                        TypeCode::arrow(alpha1.clone(), m.write.clone()),
                        TypeCode::arrow(alpha1.clone(), m.read.clone()),
                    ),
                )
            })
            .collect(),
        _ => Vec::new(),
    }
}

/// The code a freshly allocated method location receives from its
/// object's annotation.
fn slot_code(slot: &Slot) -> TypeCode {
    match slot {
        Slot::Var(_, c) => c.clone(),
        Slot::Gen(_, r) => r.clone(),
    }
}

/// The natural witness of an object-like code: the recursive record for
/// self types, the code itself otherwise.
fn natural_witness(tau: &TypeCode) -> TypeCode {
    match tau.strip() {
        c @ (TypeCode::SelfObj { .. } | TypeCode::Rec { .. }) => c.rec_of().expect("self code"),
        c => c.clone(),
    }
}

fn annotation_code(annot: &Type) -> Option<TypeCode> {
    match annot {
        Type::SelfObj { .. } => interp_self_direct(annot, &CodeEnv::new()).ok(),
        _ => interp(annot, &CodeEnv::new()).ok(),
    }
}

fn catchall() -> TypeCode {
    TypeCode::arrow(TypeCode::Bot, TypeCode::Top)
}

impl Model {
    pub fn new(budget: Budget) -> Result<Model, BudgetError> {
        budget.validate()?;
        let mut contents = BTreeMap::new();
        for ext in &budget.extensions {
            contents.extend(ext.heap.iter().map(|(l, t)| (*l, t.clone())));
        }
        Ok(Model {
            budget,
            values: RefCell::default(),
            terms: RefCell::default(),
            subsets: RefCell::default(),
            heaps: RefCell::default(),
            synth: RefCell::default(),
            contents: RefCell::new(contents),
            next_loc: Cell::new(SYNTH_BASE),
            gauge: RefCell::default(),
        })
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge.borrow().clone()
    }

    /// Known heap contents for fixture and synthesized locations.
    pub fn content_of(&self, l: Loc) -> Option<Term> {
        self.contents.borrow().get(&l).cloned()
    }

    fn fresh_loc(&self) -> Loc {
        let l = self.next_loc.get();
        self.next_loc.set(l + 1);
        Loc(l)
    }

    fn guarded<F: FnOnce() -> Verdict>(&self, frame: Frame, f: F) -> Verdict {
        self.gauge.borrow_mut().push(frame);
        let r = f();
        self.gauge.borrow_mut().pop();
        r
    }

    // ---------------------------------------------------------------- values

    /// `(k, Ψ, v) ∈ τ`.
    pub fn mem_value(&self, k: u32, psi: &HeapTypingApprox, v: &Term, tau: &TypeCode) -> Verdict {
        let key = (k, psi.trim(k), v.clone(), tau.trim(k + 1));
        if let Some(r) = self.values.borrow().get(&key) {
            return r.clone();
        }
        let r = self.guarded(Frame::Value(k), || self.value_clause(k, &key.1, v, &key.3));
        self.values.borrow_mut().insert(key, r.clone());
        r
    }

    fn value_clause(&self, k: u32, psi: &HeapTypingApprox, v: &Term, tau: &TypeCode) -> Verdict {
        let wrong = |what: &str| Verdict::counterexample(Reason::WrongForm, k, v, tau, format!("expected {what}"));
        match tau {
            TypeCode::Approx { ceiling, body } => {
                if k >= *ceiling {
                    Verdict::counterexample(Reason::Empty, k, v, tau, format!("approximation {ceiling} is empty at {k}"))
                } else {
                    self.value_clause(k, psi, v, body)
                }
            }
            TypeCode::Top => Verdict::holds(),
            TypeCode::Bot => Verdict::counterexample(Reason::Empty, k, v, tau, "the empty type"),
            TypeCode::Var { name } => Verdict::Inconclusive(format!("open code mentions {name}")),
            TypeCode::Arrow { dom, cod } => match v {
                Term::Lam { var, body, .. } => self.arrow_clause(k, psi, var, body, dom, cod),
                _ => wrong("a procedure"),
            },
            TypeCode::Mu { .. } => match v {
                Term::Fold { arg, .. } => {
                    let unrolled = tau.unroll().expect("mu code");
                    all_of(0..k, |j| self.mem_value(j, psi, arg, &unrolled).within(|| format!("unfold at {j}")))
                }
                _ => wrong("a folded value"),
            },
            TypeCode::All { var, bound, body } => match v {
                Term::TLam { var: x, body: b, .. } => self.all_clause(k, psi, x, b, var, bound, body),
                _ => wrong("a type abstraction"),
            },
            TypeCode::Exists { var, bound, body } => match v {
                Term::Pack { var: hidden, witness, payload, .. } => {
                    self.exists_clause(k, psi, hidden, witness, payload, var, bound, body)
                }
                _ => wrong("a package"),
            },
            TypeCode::Obj { .. } | TypeCode::Split { .. } | TypeCode::SelfObj { .. } => {
                self.object_clause(k, psi, v, tau)
            }
            TypeCode::Rec { .. } => self.rec_clause(k, psi, v, tau),
        }
    }

    /// Heap typings reached from `(k, Ψ)` at index `j`: `⌊Ψ⌋_j`, plus
    /// sampled catalog deltas when `extend` is set.
    pub fn extensions(&self, psi: &HeapTypingApprox, j: u32, extend: bool) -> Vec<HeapTypingApprox> {
        let mut out = vec![psi.approx(j)];
        if extend {
            let deltas: Vec<_> = self
                .budget
                .extensions
                .iter()
                .filter(|e| !e.typing.is_empty() && psi.disjoint(&e.typing))
                .map(|e| e.typing.clone())
                .collect();
            let n = self.budget.samples.saturating_sub(1).max(1);
            for d in self.budget.pick(&deltas, n, ("ext", psi, j)) {
                out.push(psi.extended(&d).approx(j));
            }
        }
        out
    }

    /// Sampled members of `code` at `(j, Ψ)`: catalog values and
    /// synthesized members that check as members.
    pub fn members(&self, j: u32, psi: &HeapTypingApprox, code: &TypeCode) -> Vec<Member> {
        let mut cands: Vec<Member> = self
            .budget
            .pick(&self.budget.values, self.budget.samples, ("arg", code, j))
            .into_iter()
            .map(|value| Member { typing: psi.clone(), value })
            .collect();
        for ext in &self.budget.extensions {
            for (l, c) in &ext.typing.entries {
                if alpha_eq_code(&c.trim(j + 1), &code.trim(j + 1)) {
                    cands.push(Member { typing: psi.clone(), value: ext.heap[l].clone() });
                }
            }
        }
        for m in self.synth_members(code).iter() {
            cands.push(Member { typing: psi.extended(&m.typing), value: m.value.clone() });
        }
        cands.retain(|m| self.mem_value(j, &m.typing, &m.value, code).is_holds());
        cands
    }

    fn arrow_clause(
        &self,
        k: u32,
        psi: &HeapTypingApprox,
        x: &str,
        body: &Term,
        dom: &TypeCode,
        cod: &TypeCode,
    ) -> Verdict {
        all_of(1..k, |j| {
            all_of(self.extensions(psi, j, j + 1 == k), |ext| {
                all_of(self.members(j, &ext, dom), |arg| {
                    let inst = subst_term1(body, x, &arg.value);
                    self.mem_term(j, &arg.typing, &inst, cod)
                        .within(|| format!("argument {} at index {j} under {}", arg.value, arg.typing))
                })
            })
        })
        .mark_sampled()
    }

    #[allow(clippy::too_many_arguments)]
    fn all_clause(
        &self,
        k: u32,
        psi: &HeapTypingApprox,
        x: &str,
        b: &Term,
        var: &str,
        bound: &TypeCode,
        body: &TypeCode,
    ) -> Verdict {
        let cands = self.witness_candidates(bound, None, ("all", bound, k));
        all_of(cands, |tau| {
            // The largest index at which the witness is admissible covers
            // every smaller one.
            let Some(j) = (1..=k).rev().find(|&j| self.subset_below(&tau, bound, j, psi).is_holds()) else {
                return Verdict::holds();
            };
            let inst = subst_type_in_term(b, x, &tau.to_type_lossy());
            let target = body.subst(var, &tau);
            all_of(self.extensions(psi, j, true), |ext| {
                all_of(0..j, |i| {
                    self.mem_term(i, &ext.approx(i), &inst, &target)
                        .within(|| format!("instance {tau} at index {i}"))
                })
            })
        })
        .mark_sampled()
    }

    #[allow(clippy::too_many_arguments)]
    fn exists_clause(
        &self,
        k: u32,
        psi: &HeapTypingApprox,
        hidden: &str,
        witness: &Type,
        payload: &Term,
        var: &str,
        bound: &TypeCode,
        body: &TypeCode,
    ) -> Verdict {
        let annotated = interp(witness, &CodeEnv::new()).ok();
        let payload = subst_type_in_term(payload, hidden, witness);
        let cands = self.witness_candidates(bound, annotated.as_ref(), ("exists", bound, k));
        let mut undecided = None;
        for tau in cands {
            let verdict = self.subset_below(&tau, bound, k, psi).and(all_of(0..k, |j| {
                self.mem_value(j, &psi.approx(j), &payload, &body.subst(var, &tau))
            }));
            match verdict {
                Verdict::Holds(_) => return verdict,
                Verdict::Inconclusive(r) => undecided = Some(r),
                Verdict::Counterexample(_) => {}
            }
        }
        Verdict::Inconclusive(
            undecided.unwrap_or_else(|| format!("no existential witness for {payload} in the catalog")),
        )
    }

    /// Candidate witnesses: an annotation, the bound, then catalog codes.
    fn witness_candidates(
        &self,
        bound: &TypeCode,
        annotated: Option<&TypeCode>,
        salt: impl std::hash::Hash,
    ) -> Vec<TypeCode> {
        let mut out: Vec<TypeCode> = Vec::new();
        let mut push = |c: TypeCode| {
            if !out.iter().any(|o| alpha_eq_code(o, &c)) {
                out.push(c);
            }
        };
        if let Some(a) = annotated {
            push(a.clone());
        }
        push(bound.clone());
        for c in self.budget.pick(&self.budget.witnesses, self.budget.samples, salt) {
            push(c);
        }
        out
    }

    /// Fields of a run-time object, checked against the methods a code
    /// requires; returns the slot locations.
    fn object_shape(
        &self,
        k: u32,
        psi: &HeapTypingApprox,
        v: &Term,
        tau: &TypeCode,
        exact: bool,
    ) -> Result<Vec<Field>, Verdict> {
        let Term::RtObj { fields } = v else {
            return Err(Verdict::counterexample(Reason::WrongForm, k, v, tau, "expected an object"));
        };
        let required: Vec<String> = slots(tau, tau).into_iter().map(|(n, _)| n).collect();
        for name in &required {
            let Some(f) = fields.iter().find(|f| &f.name == name) else {
                return Err(Verdict::counterexample(Reason::MissingMethod, k, v, tau, format!("no method {name}")));
            };
            if !psi.contains(f.loc) {
                return Err(Verdict::counterexample(
                    Reason::UntypedLocation,
                    k,
                    v,
                    tau,
                    format!("method {name} at untyped {}", f.loc),
                ));
            }
        }
        if let Some(f) = fields.iter().find(|f| !psi.contains(f.loc)) {
            return Err(Verdict::counterexample(
                Reason::UntypedLocation,
                k,
                v,
                tau,
                format!("method {} at untyped {}", f.name, f.loc),
            ));
        }
        if exact {
            if let Some(extra) = fields.iter().find(|f| !required.contains(&f.name)) {
                return Err(Verdict::counterexample(
                    Reason::ExtraMethod,
                    k,
                    v,
                    tau,
                    format!("unexpected method {}", extra.name),
                ));
            }
        }
        Ok(fields.clone())
    }

    fn object_clause(&self, k: u32, psi: &HeapTypingApprox, v: &Term, tau: &TypeCode) -> Verdict {
        let fields = match self.object_shape(k, psi, v, tau, false) {
            Ok(f) => f,
            Err(ce) => return ce,
        };
        let mut cands = vec![natural_witness(tau), tau.clone()];
        for f in &fields {
            if let Some(TypeCode::Arrow { dom, .. }) = psi.get(f.loc).map(|c| c.strip()) {
                cands.push((**dom).clone());
            }
        }
        cands.extend(self.budget.pick(&self.budget.witnesses, self.budget.samples, ("obj", tau, k)));
        let mut seen: Vec<TypeCode> = Vec::new();
        let mut undecided = None;
        let mut first_failure = None;
        for alpha1 in cands {
            if seen.iter().any(|s| alpha_eq_code(s, &alpha1)) {
                continue;
            }
            seen.push(alpha1.clone());
            let verdict = self
                .subset_below(&alpha1, tau, k, psi)
                .within(|| format!("witness {alpha1} is not below the type"))
                .and(self.witness_conditions(k, psi, &fields, tau, &alpha1));
            match verdict {
                Verdict::Holds(_) => return verdict,
                Verdict::Inconclusive(r) => undecided = Some(r),
                Verdict::Counterexample(w) => {
                    first_failure.get_or_insert(w);
                }
            }
        }
        Verdict::Inconclusive(undecided.unwrap_or_else(|| {
            let detail = first_failure.map(|w| w.detail).unwrap_or_default();
            format!("no object witness among {} candidates ({detail})", seen.len())
        }))
    }

    fn rec_clause(&self, k: u32, psi: &HeapTypingApprox, v: &Term, tau: &TypeCode) -> Verdict {
        match self.object_shape(k, psi, v, tau, true) {
            Ok(fields) => self.witness_conditions(k, psi, &fields, tau, tau),
            Err(ce) => ce,
        }
    }

    /// The method-location and relabelling conditions for witness `alpha1`.
    fn witness_conditions(
        &self,
        k: u32,
        psi: &HeapTypingApprox,
        fields: &[Field],
        tau: &TypeCode,
        alpha1: &TypeCode,
    ) -> Verdict {
        let refs = all_of(slots(tau, alpha1), |(name, slot)| {
            let l = fields.iter().find(|f| f.name == name).expect("shape checked").loc;
            let r = match &slot {
                Slot::Var(var, code) => self.mem_ref(k, psi, l, *var, code),
                Slot::Gen(w, r) => self.mem_ref_gen(k, psi, l, w, r),
            };
            r.within(|| format!("method {name} at {l}"))
        });
        if refs.is_counterexample() {
            return refs;
        }
        refs.and(all_of(0..k, |j| {
            all_of(self.relabelings(psi, fields, j), |(psi1, obj)| {
                self.mem_value(j, &psi1, &obj, alpha1).within(|| format!("relabelled {obj} at index {j}"))
            })
        }))
    }

    /// The object itself at `⌊Ψ⌋_j`, and a copy at fresh locations whose
    /// codes repeat the originals.
    fn relabelings(&self, psi: &HeapTypingApprox, fields: &[Field], j: u32) -> Vec<(HeapTypingApprox, Term)> {
        let base = psi.approx(j);
        let mut out = vec![(base.clone(), Term::RtObj { fields: fields.to_vec() })];
        if fields.iter().all(|f| psi.contains(f.loc)) && !fields.is_empty() {
            let mut ext = base.clone();
            let mut copy = Vec::new();
            for (next, f) in (psi.next_free(RELABEL_BASE)..).zip(fields) {
                let l = Loc(next);
                ext.insert(l, approx_code(psi.get(f.loc).expect("typed"), j));
                copy.push(Field { name: f.name.clone(), loc: l });
            }
            out.push((ext, Term::RtObj { fields: copy }));
        }
        out
    }

    // ------------------------------------------------------------ references

    /// `(k, Ψ, l) ∈ ref_ν(τ)`.
    pub fn mem_ref(&self, k: u32, psi: &HeapTypingApprox, l: Loc, variance: Variance, code: &TypeCode) -> Verdict {
        let Some(stored) = psi.get(l) else {
            return Verdict::counterexample(Reason::UntypedLocation, k, l, code, "location not typed");
        };
        match variance {
            Variance::Inv => self.approx_eq_in(stored, code, k, psi),
            Variance::Cov => self.subset_below(stored, code, k, psi),
            Variance::Con => self.subset_below(code, stored, k, psi),
        }
        .within(|| format!("{l} : {stored} against ref {variance} {code}"))
    }

    /// `(k, Ψ, l) ∈ ref(write, read)`.
    pub fn mem_ref_gen(&self, k: u32, psi: &HeapTypingApprox, l: Loc, write: &TypeCode, read: &TypeCode) -> Verdict {
        let Some(stored) = psi.get(l) else {
            return Verdict::counterexample(Reason::UntypedLocation, k, l, read, "location not typed");
        };
        self.subset_below(write, stored, k, psi)
            .and(self.subset_below(stored, read, k, psi))
            .within(|| format!("{l} : {stored} against ref({write}, {read})"))
    }

    // ------------------------------------------------------------ inclusions

    /// `⌊a⌋_k = ⌊b⌋_k`, sampling from heap typings around `psi`.
    pub fn approx_eq_in(&self, a: &TypeCode, b: &TypeCode, k: u32, psi: &HeapTypingApprox) -> Verdict {
        if alpha_eq_code(&a.trim(k), &b.trim(k)) {
            return Verdict::holds();
        }
        self.subset_below(a, b, k, psi).and(self.subset_below(b, a, k, psi)).mark_sampled()
    }

    /// `⌊a⌋_k = ⌊b⌋_k` over the catalogs alone.
    pub fn approx_eq(&self, a: &TypeCode, b: &TypeCode, k: u32) -> Verdict {
        self.approx_eq_in(a, b, k, &HeapTypingApprox::new())
    }

    /// `⌊a⌋_k ⊆ ⌊b⌋_k`.
    pub fn subset_below(&self, a: &TypeCode, b: &TypeCode, k: u32, psi: &HeapTypingApprox) -> Verdict {
        if k == 0 {
            return Verdict::holds();
        }
        let (ta, tb) = (a.trim(k), b.trim(k));
        if alpha_eq_code(&ta, &tb) || *ta.strip() == TypeCode::Bot || *tb.strip() == TypeCode::Top {
            return Verdict::holds();
        }
        if let TypeCode::Approx { ceiling, body } = &ta {
            if *ceiling < k {
                return self.subset_below(body, &tb, *ceiling, psi);
            }
        }
        let key = (k, ta.clone(), tb.clone(), psi.trim(k));
        if let Some(r) = self.subsets.borrow().get(&key) {
            return r.clone();
        }
        let r = all_of((0..k).rev(), |j| {
            all_of(self.extensions(psi, j, j + 1 == k), |ext| {
                all_of(self.members(j, &ext, &ta), |m| match self.mem_value(j, &m.typing, &m.value, &tb) {
                    Verdict::Counterexample(w) => Verdict::Counterexample(Box::new(super::verdict::Witness {
                        reason: Reason::Disagreement,
                        detail: format!(
                            "{} is in {ta} but not in {tb} at index {j} under {}: {}",
                            m.value, m.typing, w.detail
                        ),
                        ..*w
                    })),
                    _ => Verdict::sampled(),
                })
            })
        })
        .mark_sampled();
        self.subsets.borrow_mut().insert(key, r.clone());
        r
    }

    /// Semantic inclusion `a ⊆ b` at every index up to the budget.
    pub fn sem_subset(&self, a: &TypeCode, b: &TypeCode) -> Verdict {
        self.subset_below(a, b, self.budget.k_max + 1, &HeapTypingApprox::new())
    }

    /// `alpha1 ⊑self alpha`: inclusion, and every sampled member of
    /// `alpha1` satisfies the method and relabelling conditions of `alpha`
    /// with `alpha1` as its witness.
    pub fn tsubself_check(&self, alpha1: &TypeCode, alpha: &TypeCode) -> Verdict {
        let inclusion = self.sem_subset(alpha1, alpha);
        if inclusion.is_counterexample() {
            return inclusion;
        }
        let psi = HeapTypingApprox::new();
        inclusion.and(all_of(0..=self.budget.k_max, |k| {
            all_of(self.members(k, &psi, alpha1), |m| match self.object_shape(k, &m.typing, &m.value, alpha, false) {
                Ok(fields) => self
                    .witness_conditions(k, &m.typing, &fields, alpha, alpha1)
                    .within(|| format!("member {} at index {k}", m.value)),
                Err(ce) => ce,
            })
        }))
    }

    // ----------------------------------------------------------------- terms

    /// `a :_{k,Ψ} τ`.
    pub fn mem_term(&self, k: u32, psi: &HeapTypingApprox, a: &Term, tau: &TypeCode) -> Verdict {
        if k == 0 {
            return Verdict::holds();
        }
        let key = (k, psi.trim(k), a.clone(), tau.trim(k + 1));
        if let Some(r) = self.terms.borrow().get(&key) {
            return r.clone();
        }
        let r = self.guarded(Frame::Term(k), || {
            let heaps = self.gen_heaps(k, &key.1);
            if heaps.is_empty() {
                return Verdict::Inconclusive(format!("no heap conforms to {} at {k}", key.1));
            }
            all_of(heaps.iter(), |h| self.run_from(k, &key.1, h, a, &key.3))
        });
        self.terms.borrow_mut().insert(key, r.clone());
        r
    }

    /// Heaps `h` with `h :_k Ψ`, assembled from per-location candidates.
    pub fn gen_heaps(&self, k: u32, psi: &HeapTypingApprox) -> Rc<Vec<Heap>> {
        let key = (k, psi.trim(k));
        if let Some(r) = self.heaps.borrow().get(&key) {
            return r.clone();
        }
        let mut per_loc: Vec<(Loc, Vec<Term>)> = Vec::new();
        let mut complete = true;
        for (l, code) in &psi.entries {
            let mut cands = Vec::new();
            if let Some(t) = self.content_of(*l) {
                cands.push(t);
            }
            cands.push(lam_s(Term::var("s")));
            if let TypeCode::Arrow { cod, .. } = code.strip() {
                if let Some(v) = value_for(cod) {
                    cands.push(lam_s(v));
                }
            }
            if let Some(v) = value_for(code) {
                cands.push(v);
            }
            cands.push(lam_s(omega()));
            let mut ok: Vec<Term> = Vec::new();
            for t in cands {
                if ok.contains(&t) {
                    continue;
                }
                if all_of(0..k, |i| self.mem_value(i, &psi.approx(i), &t, code)).is_holds() {
                    ok.push(t);
                }
            }
            if ok.is_empty() {
                complete = false;
                break;
            }
            per_loc.push((*l, ok));
        }
        let heaps = if complete {
            let widest = per_loc.iter().map(|(_, c)| c.len()).max().unwrap_or(1).min(self.budget.samples);
            let mut out: Vec<Heap> = Vec::new();
            for i in 0..widest.max(1) {
                let h: Heap = per_loc.iter().map(|(l, c)| (*l, c[i.min(c.len() - 1)].clone())).collect();
                if !out.contains(&h) {
                    out.push(h);
                }
            }
            out
        } else {
            Vec::new()
        };
        let heaps = Rc::new(heaps);
        self.heaps.borrow_mut().insert(key, heaps.clone());
        heaps
    }

    /// Runs `a` from `h` for fewer than `k` steps and checks the outcome.
    fn run_from(&self, k: u32, psi: &HeapTypingApprox, h: &Heap, a: &Term, tau: &TypeCode) -> Verdict {
        let mut cfg = Config::new(h.clone(), a.clone());
        let mut alloc = Allocator::canonical();
        let mut inferred: BTreeMap<Loc, TypeCode> = BTreeMap::new();
        for j in 0..k {
            let redex = match decompose(&cfg.term) {
                Decomposition::ValueForm => return self.at_value(k, j, psi, h, &cfg, tau, inferred),
                Decomposition::StuckForm(r) => {
                    return Verdict::counterexample(Reason::Stuck, k, a, tau, format!("stuck after {j} steps: {}", r.name()))
                }
                Decomposition::RedexInContext { redex, .. } => redex,
            };
            if j + 1 == k {
                return Verdict::holds();
            }
            match step_in_place(&mut cfg, &mut alloc) {
                Ok(stepped) => self.infer_fresh(&redex, &stepped.fresh, psi, &mut inferred),
                Err(Irreducible::Stuck(r)) => {
                    return Verdict::counterexample(Reason::Stuck, k, a, tau, format!("stuck after {j} steps: {}", r.name()))
                }
                Err(Irreducible::Value) => unreachable!("decomposed as a redex"),
            }
        }
        Verdict::holds()
    }

    /// Codes for locations allocated by one step, read off the object's
    /// annotation or copied from the cloned location.
    fn infer_fresh(&self, redex: &Term, fresh: &[Loc], psi: &HeapTypingApprox, inferred: &mut BTreeMap<Loc, TypeCode>) {
        match redex {
            Term::Obj { annot, methods } => {
                let Some(alpha) = annotation_code(annot) else { return };
                let alpha = alpha.strip().clone();
                let witness = natural_witness(&alpha);
                let table = slots(&alpha, &witness);
                let mut names: Vec<&str> = methods.iter().map(|m| m.name.as_str()).collect();
                names.sort_unstable();
                for (name, l) in names.into_iter().zip(fresh) {
                    if let Some((_, slot)) = table.iter().find(|(n, _)| n == name) {
                        inferred.insert(*l, slot_code(slot));
                    }
                }
            }
            Term::Clone { arg } => {
                let Term::RtObj { fields } = &**arg else { return };
                let mut sorted: Vec<&Field> = fields.iter().collect();
                sorted.sort_by(|a, b| a.name.cmp(&b.name));
                for (f, l) in sorted.into_iter().zip(fresh) {
                    if let Some(c) = inferred.get(&f.loc).or_else(|| psi.get(f.loc)).cloned() {
                        inferred.insert(*l, c);
                    }
                }
            }
            _ => {}
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn at_value(
        &self,
        k: u32,
        j: u32,
        psi: &HeapTypingApprox,
        h: &Heap,
        cfg: &Config,
        tau: &TypeCode,
        mut inferred: BTreeMap<Loc, TypeCode>,
    ) -> Verdict {
        let rem = k - j;
        let b = &cfg.term;
        let mut guessed = BTreeSet::new();
        for l in cfg.heap.keys().filter(|l| !h.contains_key(l)) {
            if inferred.contains_key(l) {
                continue;
            }
            guessed.insert(*l);
            let directed = match b {
                Term::RtObj { fields } => fields.iter().find(|f| f.loc == *l).and_then(|f| {
                    slots(tau, &natural_witness(tau)).into_iter().find(|(n, _)| *n == f.name).map(|(_, s)| slot_code(&s))
                }),
                _ => None,
            };
            inferred.insert(*l, directed.unwrap_or_else(catchall));
        }
        let mut psi2 = psi.approx(rem);
        for (l, c) in inferred {
            psi2.insert(l, approx_code(&c, rem));
        }
        let heap_ok = all_of(psi2.entries.iter(), |(l, code)| {
            let content = &cfg.heap[l];
            let r = all_of(0..rem, |i| self.mem_value(i, &psi2.approx(i), content, code))
                .within(|| format!("heap location {l} after {j} steps"));
            if guessed.contains(l) || mentions(content, &guessed) {
                r.soften(|| format!("location {l} depends on a guessed heap typing"))
            } else {
                r
            }
        });
        let value_ok = {
            let r = self.mem_value(rem, &psi2, b, tau);
            let structural = r
                .witness()
                .is_some_and(|w| w.path.is_empty() && matches!(w.reason, Reason::WrongForm | Reason::MissingMethod));
            if !structural && mentions(b, &guessed) {
                r.soften(|| "result depends on a guessed heap typing".to_string())
            } else {
                r
            }
        };
        heap_ok.and(value_ok).within(|| format!("value {b} after {j} steps"))
    }

    /// `h :_k Ψ`.
    pub fn heap_typed(&self, h: &Heap, k: u32, psi: &HeapTypingApprox) -> Verdict {
        if let Some(l) = psi.locs().find(|l| !h.contains_key(l)) {
            return Verdict::counterexample(Reason::HeapDomain, k, l, psi.get(l).expect("typed"), "no heap cell");
        }
        all_of(psi.entries.iter(), |(l, code)| {
            all_of(0..k, |i| self.mem_value(i, &psi.approx(i), &h[l], code)).within(|| format!("heap location {l}"))
        })
    }

    /// `(k, Ψ) ⊑ (j, Ψ′)`.
    pub fn state_extends(&self, k: u32, psi: &HeapTypingApprox, j: u32, psi2: &HeapTypingApprox) -> Verdict {
        if j > k {
            return Verdict::counterexample(Reason::IndexOrder, j, psi2, psi, format!("index {j} exceeds {k}"));
        }
        if let Some(l) = psi.locs().find(|l| !psi2.contains(*l)) {
            return Verdict::counterexample(Reason::ExtensionDomain, j, l, psi, "location dropped by the extension");
        }
        all_of(psi.entries.iter(), |(l, c)| {
            self.approx_eq_in(psi2.get(*l).expect("checked"), c, j, psi).within(|| format!("location {l}"))
        })
    }

    // ------------------------------------------------------------ synthesis

    /// Members of `code` built from fresh locations, with the heap typing
    /// entries and heap contents they need.
    pub fn synth_members(&self, code: &TypeCode) -> Rc<Vec<Member>> {
        let key = code.strip().clone();
        if let Some(r) = self.synth.borrow().get(&key) {
            return r.clone();
        }
        let r = Rc::new(self.synth_at(&key, SYNTH_DEPTH));
        self.synth.borrow_mut().insert(key, r.clone());
        r
    }

    fn plain(value: Term) -> Member {
        Member { typing: HeapTypingApprox::new(), value }
    }

    fn synth_at(&self, code: &TypeCode, depth: u32) -> Vec<Member> {
        let code = code.strip();
        match code {
            TypeCode::Top => {
                vec![Self::plain(Term::rt_obj(Vec::<(&str, Loc)>::new())), Self::plain(Term::lam("x", Type::Top, Term::var("x")))]
            }
            TypeCode::Bot | TypeCode::Var { .. } | TypeCode::Approx { .. } => Vec::new(),
            TypeCode::Arrow { cod, .. } => {
                let mut out = vec![Self::plain(Term::lam("x", Type::Top, body_at(cod, depth)))];
                out.push(Self::plain(Term::lam("x", Type::Top, omega())));
                out
            }
            TypeCode::Obj { .. } | TypeCode::Split { .. } | TypeCode::SelfObj { .. } | TypeCode::Rec { .. } => {
                let witness = natural_witness(code);
                let table = slots(code, &witness);
                let mut out = vec![self.build_object(&table, &witness, Shape::Plain)];
                if table.iter().any(|(_, s)| matches!(s, Slot::Var(Variance::Con, _))) {
                    out.push(self.build_object(&table, &witness, Shape::Loose));
                }
                if table.iter().any(|(_, s)| matches!(s, Slot::Var(Variance::Cov, _))) {
                    out.push(self.build_object(&table, &witness, Shape::Narrow));
                }
                out
            }
            TypeCode::Mu { .. } => {
                if depth == 0 {
                    return Vec::new();
                }
                let ty = code.to_type_lossy();
                self.synth_at(&code.unroll().expect("mu"), depth - 1)
                    .into_iter()
                    .map(|m| Member { typing: m.typing, value: Term::fold(ty.clone(), m.value) })
                    .collect()
            }
            TypeCode::All { var, bound, body } => {
                let inst = body.subst(var, bound);
                vec![
                    Self::plain(Term::tlam(var.clone(), bound.to_type_lossy(), omega())),
                    Self::plain(Term::tlam(var.clone(), bound.to_type_lossy(), body_at(&inst, depth))),
                ]
            }
            TypeCode::Exists { var, bound, body } => {
                if depth == 0 {
                    return Vec::new();
                }
                let body_ty = code.to_type_lossy().exists_body();
                self.synth_at(&body.subst(var, bound), depth - 1)
                    .into_iter()
                    .map(|m| Member {
                        typing: m.typing,
                        value: Term::Pack {
                            var: var.clone(),
                            bound: bound.to_type_lossy(),
                            witness: bound.to_type_lossy(),
                            payload: Box::new(m.value),
                            body_ty: body_ty.clone(),
                        },
                    })
                    .collect()
            }
        }
    }

    /// An object with one fresh location per slot.
    fn build_object(&self, table: &[(String, Slot)], witness: &TypeCode, shape: Shape) -> Member {
        let mut typing = HeapTypingApprox::new();
        let mut fields = Vec::new();
        for (name, slot) in table {
            let l = self.fresh_loc();
            let (code, content) = match slot {
                Slot::Var(Variance::Con, _) if shape == Shape::Loose => {
                    (TypeCode::arrow(witness.clone(), TypeCode::Top), lam_s(Term::var("s")))
                }
                Slot::Var(Variance::Cov, _) if shape == Shape::Narrow => {
                    (TypeCode::arrow(witness.clone(), TypeCode::Bot), lam_s(omega()))
                }
                _ => {
                    let code = slot_code(slot);
                    let cod = match &code {
                        TypeCode::Arrow { cod, .. } => (**cod).clone(),
                        other => other.clone(),
                    };
                    let body = if alpha_eq_code(&cod, witness) { Term::var("s") } else { body_at(&cod, SYNTH_DEPTH) };
                    (code, lam_s(body))
                }
            };
            typing.insert(l, code);
            self.contents.borrow_mut().insert(l, content);
            fields.push(Field { name: name.clone(), loc: l });
        }
        Member { typing, value: Term::RtObj { fields } }
    }
}
