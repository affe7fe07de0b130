//! Sampled falsification of the semantic typing lemmas.
//!
//! Each lemma is a list of concrete instances `premises ⇒ conclusion`.
//! An instance is refuted only when every premise holds within the budget
//! and the conclusion has a counterexample. A flip replaces the instances
//! by ones mirroring a broken typing rule, which the suite must refute.

use super::budget::{Budget, BudgetError};
use super::code::{approx_env, interp_self_direct, CodeEnv, HeapTypingApprox, TypeCode};
use super::model::Model;
use super::verdict::{all_of, Reason, Verdict};
use crate::syntax::{parse_term, parse_type, print_term, subst_term, subst_type_in_term, Loc, Term, ValueEnv, Variance};
use crate::typecheck::Mutation;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Location used when sampling reference-type membership.
const PROBE: Loc = Loc(800);

const P: &str = "[p:inv Top]";
const Q: &str = "[q:inv Top]";
const MI: &str = "[m:inv Top]";
const MCV: &str = "[m:cov Top]";
const MCN: &str = "[m:con Top]";
const STREAM: &str = "mu X. [m:cov X]";
const OMEGA: &str = "(\\(x:Top) x x) (\\(x:Top) x x)";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LemmaError {
    /// The lemma name is not in the catalog.
    #[error("unknown lemma {0}")]
    UnknownLemma(String),
    /// The flip name is neither a rule mutation nor `inverted-premise`.
    #[error("unknown mutation {0}")]
    UnknownFlip(String),
    /// The lemma has no instances mirroring the requested flip.
    #[error("lemma {lemma} has no {flip} instances")]
    NoMutant { lemma: String, flip: String },
    /// The budget fails validation.
    #[error(transparent)]
    Budget(#[from] BudgetError),
}

macro_rules! lemma_ids {
    ($($id:ident => $name:literal,)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
        pub enum LemmaId { $($id,)* }

        impl LemmaId {
            pub const ALL: &'static [LemmaId] = &[$(LemmaId::$id,)*];

            pub fn name(self) -> &'static str {
                match self { $(LemmaId::$id => $name,)* }
            }
        }
    };
}

lemma_ids! {
    SemLam => "SemLam",
    SemApp => "SemApp",
    SemSubProc => "SemSubProc",
    SemSubCovRef => "SemSubCovRef",
    SemSubConRef => "SemSubConRef",
    SemSubVarRef => "SemSubVarRef",
    SemObj => "SemObj",
    SemInv => "SemInv",
    SemUpd => "SemUpd",
    SemClone => "SemClone",
    SemSubObj => "SemSubObj",
    SemSubObjVar => "SemSubObjVar",
    SemTAbs => "SemTAbs",
    SemTApp => "SemTApp",
    SemPack => "SemPack",
    SemOpen => "SemOpen",
    SemSubUniv => "SemSubUniv",
    SemSubExist => "SemSubExist",
    SemUnfold => "SemUnfold",
    SemFold => "SemFold",
    SemSubRec => "SemSubRec",
    SemObjSelf => "SemObj-Self",
    SemInvSelf => "SemInv-Self",
    SemUpdSelf => "SemUpd-Self",
    SemCloneSelf => "SemClone-Self",
    SemSubObjSelf => "SemSubObj-Self",
    SemSubObjVarSelf => "SemSubObjVar-Self",
    SemObjStr => "SemObj-Str",
    SemInvStr => "SemInv-Str",
    SemUpdStr => "SemUpd-Str",
    SemCloneStr => "SemClone-Str",
    SemLetStr => "SemLet-Str",
    SemObjGen => "SemObj-Gen",
    SemInvGen => "SemInv-Gen",
    SemUpdGen => "SemUpd-Gen",
    SemCloneGen => "SemClone-Gen",
    SemSubObjGen => "SemSubObj-Gen",
    SemSubRefGen => "SemSubRef-Gen",
    Subsumption => "subsumption",
    ClosureUnderExtension => "closure-under-extension",
    NonExpansiveness => "non-expansiveness",
    MuFixedPoint => "mu-fixed-point",
    Preorder => "extension-preorder",
    InformationForgetting => "information-forgetting",
    ValueTerm => "value-term",
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaId {
    type Err = LemmaError;

    fn from_str(s: &str) -> Result<LemmaId, LemmaError> {
        LemmaId::ALL
            .iter()
            .copied()
            .find(|l| l.name().eq_ignore_ascii_case(s) || format!("{l:?}").eq_ignore_ascii_case(s))
            .ok_or_else(|| LemmaError::UnknownLemma(s.to_string()))
    }
}

/// A deliberate weakening of a lemma's statement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Flip {
    /// The semantic counterpart of a broken typing rule.
    Rule(Mutation),
    /// A subtyping premise read in the wrong direction.
    InvertedPremise,
}

impl Flip {
    pub fn all() -> Vec<Flip> {
        Mutation::ALL.iter().map(|m| Flip::Rule(*m)).chain([Flip::InvertedPremise]).collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            Flip::Rule(m) => m.name(),
            Flip::InvertedPremise => "inverted-premise",
        }
    }

    /// Lemmas with instances for this flip.
    pub fn targets(self) -> &'static [LemmaId] {
        match self {
            Flip::Rule(Mutation::DropInvVariance) => &[LemmaId::SemInv],
            Flip::Rule(Mutation::DropUpdVariance) => &[LemmaId::SemUpd],
            Flip::Rule(Mutation::CovariantUpdBody) => &[LemmaId::SemUpd],
            Flip::Rule(Mutation::WidthReversed) => &[LemmaId::SemSubObj],
            Flip::Rule(Mutation::ConReadAtPayload) => &[LemmaId::SemInvGen],
            Flip::InvertedPremise => &[LemmaId::SemSubProc, LemmaId::SemSubCovRef, LemmaId::SemSubConRef],
        }
    }
}

impl fmt::Display for Flip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Flip {
    type Err = LemmaError;

    fn from_str(s: &str) -> Result<Flip, LemmaError> {
        if s == "inverted-premise" {
            return Ok(Flip::InvertedPremise);
        }
        s.parse::<Mutation>().map(Flip::Rule).map_err(|_| LemmaError::UnknownFlip(s.to_string()))
    }
}

/// A reference type over one location.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefCode {
    Var(Variance, TypeCode),
    Gen(TypeCode, TypeCode),
}

impl RefCode {
    fn subst(&self, var: &str, c: &TypeCode) -> RefCode {
        match self {
            RefCode::Var(v, t) => RefCode::Var(*v, t.subst(var, c)),
            RefCode::Gen(w, r) => RefCode::Gen(w.subst(var, c), r.subst(var, c)),
        }
    }

    fn payloads(&self) -> Vec<TypeCode> {
        match self {
            RefCode::Var(_, t) => vec![t.clone()],
            RefCode::Gen(w, r) => vec![w.clone(), r.clone()],
        }
    }
}

impl fmt::Display for RefCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefCode::Var(v, t) => write!(f, "ref {v} {t}"),
            RefCode::Gen(w, r) => write!(f, "ref({w}, {r})"),
        }
    }
}

/// Where a quantified type variable ranges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Range {
    /// Semantic subsets of the code.
    Below(TypeCode),
    /// Types exposing the self code.
    SelfBelow(TypeCode),
}

/// A checkable statement about the model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Claim {
    /// `Σ ⊨ a : τ`.
    Judgement { env: Vec<(String, TypeCode)>, term: Term, code: TypeCode },
    Subset(TypeCode, TypeCode),
    RefSubset(RefCode, RefCode),
    SelfExposed(TypeCode, TypeCode),
    ApproxEq { left: TypeCode, right: TypeCode, k: u32 },
    Extends { k: u32, psi: HeapTypingApprox, j: u32, psi2: HeapTypingApprox },
    MemValue { k: u32, psi: HeapTypingApprox, value: Term, code: TypeCode },
    MemTerm { k: u32, psi: HeapTypingApprox, term: Term, code: TypeCode },
    /// Some heap is well typed with respect to the heap typing.
    HeapExists { k: u32, psi: HeapTypingApprox },
    Forall { var: String, range: Range, claim: Box<Claim> },
    /// For all pairs `left ⊆ right`.
    ForallPair { left: String, right: String, claim: Box<Claim> },
    Iff(Box<Claim>, Box<Claim>),
    All(Vec<Claim>),
}

impl Claim {
    fn judge(env: &[(&str, &TypeCode)], term: Term, code: TypeCode) -> Claim {
        Claim::Judgement { env: env.iter().map(|(x, c)| (x.to_string(), (*c).clone())).collect(), term, code }
    }

    fn forall(var: &str, range: Range, claim: Claim) -> Claim {
        Claim::Forall { var: var.to_string(), range, claim: Box::new(claim) }
    }

    /// Substitutes a closed code for a free type variable.
    pub fn subst(&self, var: &str, c: &TypeCode) -> Claim {
        let ty = c.to_type_lossy();
        match self {
            Claim::Judgement { env, term, code } => Claim::Judgement {
                env: env.iter().map(|(x, t)| (x.clone(), t.subst(var, c))).collect(),
                term: subst_type_in_term(term, var, &ty),
                code: code.subst(var, c),
            },
            Claim::Subset(a, b) => Claim::Subset(a.subst(var, c), b.subst(var, c)),
            Claim::RefSubset(a, b) => Claim::RefSubset(a.subst(var, c), b.subst(var, c)),
            Claim::SelfExposed(a, b) => Claim::SelfExposed(a.subst(var, c), b.subst(var, c)),
            Claim::ApproxEq { left, right, k } => {
                Claim::ApproxEq { left: left.subst(var, c), right: right.subst(var, c), k: *k }
            }
            Claim::MemValue { k, psi, value, code } => {
                Claim::MemValue { k: *k, psi: psi.clone(), value: value.clone(), code: code.subst(var, c) }
            }
            Claim::MemTerm { k, psi, term, code } => Claim::MemTerm {
                k: *k,
                psi: psi.clone(),
                term: subst_type_in_term(term, var, &ty),
                code: code.subst(var, c),
            },
            Claim::Extends { .. } | Claim::HeapExists { .. } => self.clone(),
            Claim::Forall { var: v, range, claim } => {
                let range = match range {
                    Range::Below(b) => Range::Below(b.subst(var, c)),
                    Range::SelfBelow(b) => Range::SelfBelow(b.subst(var, c)),
                };
                let claim = if v == var { claim.clone() } else { Box::new(claim.subst(var, c)) };
                Claim::Forall { var: v.clone(), range, claim }
            }
            Claim::ForallPair { left, right, claim } => {
                let claim = if left == var || right == var { claim.clone() } else { Box::new(claim.subst(var, c)) };
                Claim::ForallPair { left: left.clone(), right: right.clone(), claim }
            }
            Claim::Iff(a, b) => Claim::Iff(Box::new(a.subst(var, c)), Box::new(b.subst(var, c))),
            Claim::All(cs) => Claim::All(cs.iter().map(|x| x.subst(var, c)).collect()),
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Claim::Judgement { env, term, code } => {
                let env: Vec<String> = env.iter().map(|(x, c)| format!("{x}:{c}")).collect();
                write!(f, "[{}] |= {} : {code}", env.join(", "), print_term(term))
            }
            Claim::Subset(a, b) => write!(f, "{a} <= {b}"),
            Claim::RefSubset(a, b) => write!(f, "{a} <= {b}"),
            Claim::SelfExposed(a, b) => write!(f, "{a} exposes {b}"),
            Claim::ApproxEq { left, right, k } => write!(f, "approx[{k}]({left}) = approx[{k}]({right})"),
            Claim::Extends { k, psi, j, psi2 } => write!(f, "({k}, {psi}) extends to ({j}, {psi2})"),
            Claim::MemValue { k, psi, value, code } => {
                write!(f, "({k}, {psi}, {}) in {code}", print_term(value))
            }
            Claim::MemTerm { k, psi, term, code } => write!(f, "{} :({k}, {psi}) {code}", print_term(term)),
            Claim::HeapExists { k, psi } => write!(f, "some heap is well typed for ({k}, {psi})"),
            Claim::Forall { var, range: Range::Below(b), claim } => write!(f, "forall {var} <= {b}. {claim}"),
            Claim::Forall { var, range: Range::SelfBelow(b), claim } => {
                write!(f, "forall {var} exposing {b}. {claim}")
            }
            Claim::ForallPair { left, right, claim } => write!(f, "forall {left} <= {right}. {claim}"),
            Claim::Iff(a, b) => write!(f, "({a}) iff ({b})"),
            Claim::All(cs) => {
                let parts: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
                write!(f, "{}", parts.join(" and "))
            }
        }
    }
}

/// One sampled instance of a lemma.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub label: String,
    pub premises: Vec<Claim>,
    pub conclusion: Claim,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// The conclusion holds within the budget.
    Holds,
    /// A premise is refuted, so the instance says nothing.
    Vacuous,
    /// The premises hold and the conclusion is refuted.
    Counterexample,
    /// Some check could not be settled.
    Inconclusive,
}

/// The outcome of one instance, as a JSON line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Record {
    pub lemma: String,
    pub instance: String,
    pub mutation: Option<String>,
    pub seed: u64,
    pub k_max: u32,
    pub status: Status,
    pub claim: String,
    pub premises: Vec<String>,
    pub verdict: Verdict,
}

/// All records of one lemma under one flip.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub lemma: LemmaId,
    pub flip: Option<Flip>,
    pub records: Vec<Record>,
}

impl LemmaReport {
    pub fn count(&self, status: Status) -> usize {
        self.records.iter().filter(|r| r.status == status).count()
    }

    pub fn counterexamples(&self) -> usize {
        self.count(Status::Counterexample)
    }
}

// ------------------------------------------------------------------ parsing

fn open_env() -> CodeEnv {
    ["X", "Y", "A", "B", "Xi"].iter().map(|x| (x.to_string(), TypeCode::Var { name: x.to_string() })).collect()
}

/// A code from concrete type syntax; the variables `X`, `Y`, `A`, `B`
/// and `Xi` may occur free.
fn code(src: &str) -> TypeCode {
    let ty = parse_type(src).unwrap_or_else(|e| panic!("catalog type {src}: {e}"));
    interp_self_direct(&ty, &open_env()).unwrap_or_else(|e| panic!("catalog type {src}: {e}"))
}

fn term(src: &str) -> Term {
    parse_term(src).unwrap_or_else(|e| panic!("catalog term {src}: {e}"))
}

fn inst(label: impl Into<String>, premises: Vec<Claim>, conclusion: Claim) -> Instance {
    Instance { label: label.into(), premises, conclusion }
}

/// Method entries of an object-like code, with the self variable, if any.
fn method_table(c: &TypeCode) -> (Option<String>, Vec<(String, Variance, TypeCode)>) {
    match c {
        TypeCode::Obj { methods } => (None, methods.iter().map(|m| (m.name.clone(), m.variance, m.ty.clone())).collect()),
        TypeCode::SelfObj { var, methods } | TypeCode::Rec { var, methods } => {
            (Some(var.clone()), methods.iter().map(|m| (m.name.clone(), m.variance, m.ty.clone())).collect())
        }
        _ => (None, Vec::new()),
    }
}

/// The method type of `m` with the self variable replaced by `at`.
fn method_at(c: &TypeCode, m: &str, at: &TypeCode) -> TypeCode {
    let (var, table) = method_table(c);
    let (_, _, ty) = table.into_iter().find(|(n, _, _)| n == m).unwrap_or_else(|| panic!("no method {m} in {c}"));
    match var {
        Some(v) => ty.subst(&v, at),
        None => ty,
    }
}

fn split_table(c: &TypeCode) -> Vec<(String, TypeCode, TypeCode)> {
    match c {
        TypeCode::Split { methods } => methods.iter().map(|m| (m.name.clone(), m.write.clone(), m.read.clone())).collect(),
        _ => Vec::new(),
    }
}

fn obj_term(annot: &str, methods: &[(&str, &str)]) -> Term {
    let body: Vec<String> = methods.iter().map(|(m, b)| format!("{m} = self(s:{annot}) {b}")).collect();
    term(&format!("obj {annot} {{ {} }}", body.join(", ")))
}

// ---------------------------------------------------------------- instances

/// The instances of a lemma, stock or under a flip.
pub fn instances(id: LemmaId, flip: Option<Flip>, budget: &Budget) -> Result<Vec<Instance>, LemmaError> {
    let out = match flip {
        None => stock(id, budget),
        Some(f) => mutant(id, f),
    };
    if out.is_empty() {
        return Err(LemmaError::NoMutant { lemma: id.name().to_string(), flip: flip.map_or("stock", |f| f.name()).to_string() });
    }
    Ok(out)
}

fn stock(id: LemmaId, budget: &Budget) -> Vec<Instance> {
    use LemmaId::*;
    match id {
        SemLam => [("Top", "x", "Top"), (P, "x", P), (P, "x.p", "Top"), (MI, "x.m", "Top"), ("Top", "\\(y:Top) x", "Top -> Top")]
            .iter()
            .map(|(a, b, r)| {
                let (a, r) = (code(a), code(r));
                inst(
                    format!("x:{a} |- {b} : {r}"),
                    vec![Claim::judge(&[("x", &a)], term(b), r.clone())],
                    Claim::judge(&[], term(&format!("\\(x:{}) {b}", a.to_type_lossy_str())), TypeCode::arrow(a, r)),
                )
            })
            .collect(),
        SemApp => {
            let mut out: Vec<Instance> = [("Top", "Top"), (P, P), (MI, "Top"), (STREAM, MCV)]
                .iter()
                .map(|(b, a)| {
                    let (a, b) = (code(a), code(b));
                    let f = TypeCode::arrow(b.clone(), a.clone());
                    let env: [(&str, &TypeCode); 2] = [("f", &f), ("y", &b)];
                    inst(
                        format!("f:{f}, y:{b}"),
                        vec![Claim::judge(&env, term("f"), f.clone()), Claim::judge(&env, term("y"), b.clone())],
                        Claim::judge(&env, term("f y"), a),
                    )
                })
                .collect();
            let p = code(P);
            let arg = obj_term(P, &[("p", "s")]);
            out.push(inst(
                "identity on a fresh object",
                vec![
                    Claim::judge(&[], term(&format!("\\(x:{P}) x")), TypeCode::arrow(p.clone(), p.clone())),
                    Claim::judge(&[], arg.clone(), p.clone()),
                ],
                Claim::judge(&[], Term::app(term(&format!("\\(x:{P}) x")), arg), p),
            ));
            out
        }
        SemSubProc => [("Top", P, P, "Top"), (MI, MI, "Bot", "Top"), (P, P, STREAM, "Top"), ("Top", "Bot", MI, MCV)]
            .iter()
            .map(|(a, a1, b, b1)| sub_proc(code(a), code(a1), code(b), code(b1), false))
            .collect(),
        SemSubCovRef => [(P, "Top"), ("Bot", Q), (MI, MCV), (STREAM, "Top")]
            .iter()
            .map(|(a, b)| ref_sub(Variance::Cov, code(a), code(b), false))
            .collect(),
        SemSubConRef => [(P, "Top"), ("Bot", Q), (MI, MCN), (STREAM, "Top")]
            .iter()
            .map(|(a, b)| ref_sub(Variance::Con, code(a), code(b), false))
            .collect(),
        SemSubVarRef => ["Top", P, "[m:inv Top] -> Top", STREAM, "Bot"]
            .iter()
            .map(|a| {
                let a = code(a);
                inst(
                    format!("ref inv {a}"),
                    vec![],
                    Claim::All(vec![
                        Claim::RefSubset(RefCode::Var(Variance::Inv, a.clone()), RefCode::Var(Variance::Cov, a.clone())),
                        Claim::RefSubset(RefCode::Var(Variance::Inv, a.clone()), RefCode::Var(Variance::Con, a)),
                    ]),
                )
            })
            .collect(),
        SemObj => {
            let cases: [(&str, &[(&str, &str)]); 5] = [
                (MCV, &[("m", "s.m")]),
                (MI, &[("m", "{}")]),
                (P, &[("p", "s")]),
                (MCN, &[("m", "s")]),
                ("[m:cov Top, p:inv Top]", &[("m", "s.p"), ("p", "{}")]),
            ];
            cases.iter().map(|(a, ms)| sem_obj(a, ms, |alpha, m| method_at(alpha, m, alpha))).collect()
        }
        SemInv => [(MI, "m"), (MCV, "m"), ("[m:cov [p:inv Top]]", "m"), (P, "p"), ("[m:inv Top -> Top, n:con Top]", "m")]
            .iter()
            .map(|(a, m)| {
                let a = code(a);
                let r = method_at(&a, m, &a);
                sem_inv(&a, m, r)
            })
            .collect(),
        SemUpd => [(MI, "m", "{}"), (MCN, "m", "x"), (P, "p", "{}"), ("[m:con Top, n:cov Top]", "m", "x.n")]
            .iter()
            .map(|(a, m, b)| {
                let a = code(a);
                let r = method_at(&a, m, &a);
                sem_upd(&a, m, b, r, vec![])
            })
            .collect(),
        SemClone => [MI, MCV, P, "[m:cov Top, p:inv Top]", MCN].iter().map(|a| sem_clone(&code(a))).collect(),
        SemSubObj => [("[m:cov [p:inv Top], n:inv Top]", MCV), ("[m:con Top]", "[m:con [p:inv Top]]"), ("[m:inv [p:inv Top], n:cov Top]", "[m:inv [p:inv Top]]")]
            .iter()
            .map(|(a, b)| sub_obj(&code(a), &code(b)))
            .collect(),
        SemSubObjVar => [(P, "[p:cov Top]"), (P, "[p:con Top]"), ("[m:inv Top, n:cov Top]", "[m:cov Top, n:cov Top]"), ("[m:inv [p:inv Top]]", "[m:con [p:inv Top]]")]
            .iter()
            .map(|(a, b)| {
                let (a, b) = (code(a), code(b));
                inst(format!("{a} <= {b}"), vec![], Claim::Subset(a, b))
            })
            .collect(),
        SemTAbs => [("Top", "\\(x:X) x", "X -> X"), (MI, "\\(x:X) x.m", "X -> Top"), ("Top", "\\(x:X) {}", "X -> Top")]
            .iter()
            .map(|(a, body, f)| {
                let (a, f) = (code(a), code(f));
                let body = term(body);
                inst(
                    format!("X <: {a} |- {} : {f}", print_term(&body)),
                    vec![Claim::forall("X", Range::Below(a.clone()), Claim::judge(&[], body.clone(), f.clone()))],
                    Claim::judge(&[], Term::tlam("X", a.to_type_lossy(), body), TypeCode::all("X", a, f)),
                )
            })
            .collect(),
        SemTApp => [("Top", "X -> X", P), (MCV, "X -> Top", MI), ("Top", "X", STREAM), (P, "X -> X", "Bot")]
            .iter()
            .map(|(a, f, t)| {
                let (a, f, t) = (code(a), code(f), code(t));
                let poly = TypeCode::all("X", a.clone(), f.clone());
                let env: [(&str, &TypeCode); 1] = [("g", &poly)];
                inst(
                    format!("g:{poly} at {t}"),
                    vec![Claim::judge(&env, term("g"), poly.clone()), Claim::Subset(t.clone(), a)],
                    Claim::judge(&env, Term::tapp(term("g"), t.to_type_lossy()), f.subst("X", &t)),
                )
            })
            .collect(),
        SemPack => {
            let cases = [
                ("Top", P, obj_term(P, &[("p", "s")]), "X"),
                ("Top", P, term(&format!("\\(x:{P}) x")), "X -> X"),
                (MCV, MI, obj_term(MI, &[("m", "{}")]), "X"),
                ("Top", "Top", term("{}"), "X"),
            ];
            cases
                .into_iter()
                .map(|(a, t, payload, f)| {
                    let (a, t, f) = (code(a), code(t), code(f));
                    let packed = Term::Pack {
                        var: "X".into(),
                        bound: a.to_type_lossy(),
                        witness: t.to_type_lossy(),
                        payload: Box::new(payload.clone()),
                        body_ty: f.to_type_lossy(),
                    };
                    inst(
                        format!("pack {t} as {f}"),
                        vec![Claim::Subset(t.clone(), a.clone()), Claim::judge(&[], payload, f.subst("X", &t))],
                        Claim::judge(&[], packed, TypeCode::exists("X", a, f)),
                    )
                })
                .collect()
        }
        SemOpen => [("Top", "X", "x", "Top"), (MI, "X", "x.m", "Top"), ("Top", "X -> X", "x", "Top"), (MCV, "X", "x.m", "Top")]
            .iter()
            .map(|(a, f, b, r)| {
                let (a, f, r) = (code(a), code(f), code(r));
                let ex = TypeCode::exists("X", a.clone(), f.clone());
                let env: [(&str, &TypeCode); 1] = [("p", &ex)];
                let body = term(b);
                let opened = Term::Open {
                    arg: Box::new(term("p")),
                    tvar: "X".into(),
                    bound: a.to_type_lossy(),
                    var: "x".into(),
                    var_ty: f.to_type_lossy(),
                    body: Box::new(body.clone()),
                    result_ty: r.to_type_lossy(),
                };
                inst(
                    format!("open {ex} in {b}"),
                    vec![
                        Claim::judge(&env, term("p"), ex.clone()),
                        Claim::forall("X", Range::Below(a.clone()), Claim::judge(&[("p", &ex), ("x", &f)], body, r.clone())),
                    ],
                    Claim::judge(&env, opened, r),
                )
            })
            .collect(),
        SemSubUniv => [("Top", MI, "X -> X", "X -> Top"), ("Top", "Top", "X", "Top"), (MCV, MI, "Top -> X", "Top -> X")]
            .iter()
            .map(|(a, b, f, g)| {
                let (a, b, f, g) = (code(a), code(b), code(f), code(g));
                inst(
                    format!("All {a} {f} <= All {b} {g}"),
                    vec![Claim::Subset(b.clone(), a.clone()), Claim::forall("X", Range::Below(b.clone()), Claim::Subset(f.clone(), g.clone()))],
                    Claim::Subset(TypeCode::all("X", a, f), TypeCode::all("X", b, g)),
                )
            })
            .collect(),
        SemSubExist => [(MI, "Top", "X", "Top"), (P, "Top", "X -> X", "Bot -> Top"), (MI, MCV, "X", "X")]
            .iter()
            .map(|(a, b, f, g)| {
                let (a, b, f, g) = (code(a), code(b), code(f), code(g));
                inst(
                    format!("Some {a} {f} <= Some {b} {g}"),
                    vec![Claim::Subset(a.clone(), b.clone()), Claim::forall("X", Range::Below(a.clone()), Claim::Subset(f.clone(), g.clone()))],
                    Claim::Subset(TypeCode::exists("X", a, f), TypeCode::exists("X", b, g)),
                )
            })
            .collect(),
        SemUnfold => [STREAM, "mu X. [m:inv Top, n:cov X]", "mu X. X -> Top"]
            .iter()
            .map(|m| {
                let mu = code(m);
                let env: [(&str, &TypeCode); 1] = [("r", &mu)];
                inst(
                    format!("unfold {mu}"),
                    vec![Claim::judge(&env, term("r"), mu.clone())],
                    Claim::judge(&env, Term::unfold(mu.to_type_lossy(), term("r")), mu.unroll().expect("mu")),
                )
            })
            .collect(),
        SemFold => [STREAM, "mu X. [m:inv Top, n:cov X]", "mu X. X -> Top"]
            .iter()
            .map(|m| {
                let mu = code(m);
                let body = mu.unroll().expect("mu");
                let env: [(&str, &TypeCode); 1] = [("o", &body)];
                inst(
                    format!("fold {mu}"),
                    vec![Claim::judge(&env, term("o"), body.clone())],
                    Claim::judge(&env, Term::fold(mu.to_type_lossy(), term("o")), mu),
                )
            })
            .collect(),
        SemSubRec => [("[m:cov X, n:inv Top]", "[m:cov X]"), ("Top -> X", "Bot -> X"), ("[m:cov X]", "[m:cov X]")]
            .iter()
            .map(|(f, g)| {
                let (f, g) = (code(f), code(g));
                let premise = Claim::Subset(f.subst("X", &TypeCode::Var { name: "A".into() }), g.subst("X", &TypeCode::Var { name: "B".into() }));
                inst(
                    format!("mu {f} <= mu {g}"),
                    vec![Claim::ForallPair { left: "A".into(), right: "B".into(), claim: Box::new(premise) }],
                    Claim::Subset(TypeCode::mu("X", f), TypeCode::mu("X", g)),
                )
            })
            .collect(),
        SemObjSelf => {
            let cases: [(&str, &[(&str, &str)]); 3] = [
                ("Obj(X)[m:cov X]", &[("m", "s")]),
                ("Obj(X)[m:inv Top]", &[("m", "{}")]),
                ("Obj(X)[m:cov X, n:inv Top]", &[("m", "s"), ("n", "{}")]),
            ];
            cases.iter().map(|(a, ms)| sem_obj(a, ms, |alpha, m| method_at(alpha, m, alpha))).collect()
        }
        SemInvSelf => [("Obj(X)[m:cov X]", "m"), ("Obj(X)[m:inv Top]", "m"), ("Obj(X)[m:inv X -> Top]", "m")]
            .iter()
            .map(|(a, m)| {
                let a = code(a);
                let r = method_at(&a, m, &a);
                sem_inv(&a, m, r)
            })
            .collect(),
        SemUpdSelf => [("Obj(X)[m:inv X]", "m", "x"), ("Obj(X)[m:con Top]", "m", "{}"), ("Obj(X)[m:inv Top, n:cov X]", "m", "x.n")]
            .iter()
            .map(|(a, m, b)| {
                let a = code(a);
                let xi = TypeCode::Var { name: "Xi".into() };
                let body = Claim::forall(
                    "Xi",
                    Range::Below(a.clone()),
                    Claim::judge(&[("o", &a), ("x", &xi)], term(b), method_at(&a, m, &xi)),
                );
                let o = term("o");
                inst(
                    format!("o:{a} |- o.{m} := {b}"),
                    vec![Claim::judge(&[("o", &a)], o.clone(), a.clone()), body],
                    Claim::judge(&[("o", &a)], Term::update(o, *m, "x", a.to_type_lossy(), term(b)), a.clone()),
                )
            })
            .collect(),
        SemCloneSelf => ["Obj(X)[m:cov X]", "Obj(X)[m:inv Top]", "Obj(X)[m:inv X]"].iter().map(|a| sem_clone(&code(a))).collect(),
        SemSubObjSelf => [("Obj(X)[m:cov X, n:inv Top]", "Obj(X)[m:cov X]"), ("Obj(X)[m:con Top]", "Obj(X)[m:con [p:inv Top]]"), ("Obj(X)[m:cov X -> X]", "Obj(X)[m:cov Bot -> X]")]
            .iter()
            .map(|(a, b)| {
                let (a, b) = (code(a), code(b));
                let xi = TypeCode::Var { name: "Xi".into() };
                let (_, table) = method_table(&b);
                let premises = table
                    .iter()
                    .map(|(m, v, _)| {
                        let (fa, gb) = (method_at(&a, m, &xi), method_at(&b, m, &xi));
                        let mut parts = Vec::new();
                        if v.readable() {
                            parts.push(Claim::Subset(fa.clone(), gb.clone()));
                        }
                        if v.writable() {
                            parts.push(Claim::Subset(gb, fa));
                        }
                        Claim::forall("Xi", Range::Below(a.clone()), Claim::All(parts))
                    })
                    .collect();
                inst(format!("{a} <= {b}"), premises, Claim::Subset(a, b))
            })
            .collect(),
        SemSubObjVarSelf => [("Obj(X)[m:inv X]", "Obj(X)[m:cov X]"), ("Obj(X)[m:inv Top]", "Obj(X)[m:con Top]"), ("Obj(X)[m:inv X, n:cov Top]", "Obj(X)[m:cov X, n:cov Top]")]
            .iter()
            .map(|(a, b)| {
                let (a, b) = (code(a), code(b));
                inst(format!("{a} <= {b}"), vec![], Claim::Subset(a, b))
            })
            .collect(),
        SemObjStr => {
            let cases: [(&str, &[(&str, &str)]); 2] = [("Obj(X)[m:cov X]", &[("m", "s")]), ("Obj(X)[m:inv Top]", &[("m", "{}")])];
            cases
                .iter()
                .map(|(a, ms)| {
                    let alpha = code(a);
                    let xi = TypeCode::Var { name: "Xi".into() };
                    let premises = ms
                        .iter()
                        .map(|(m, b)| {
                            Claim::forall(
                                "Xi",
                                Range::SelfBelow(alpha.clone()),
                                Claim::judge(&[("s", &xi)], term(b), method_at(&alpha, m, &xi)),
                            )
                        })
                        .collect();
                    inst(format!("obj {alpha}"), premises, Claim::judge(&[], obj_term(a, ms), alpha.clone()))
                })
                .collect()
        }
        SemInvStr => ["Obj(X)[m:cov X]", "Obj(X)[m:inv Top]"]
            .iter()
            .map(|a| {
                let alpha = code(a);
                let rec = alpha.rec_of().expect("self code");
                let r = method_at(&alpha, "m", &rec);
                let mut i = sem_inv(&rec, "m", r);
                i.premises.insert(0, Claim::SelfExposed(rec, alpha));
                i
            })
            .collect(),
        SemUpdStr => [("Obj(X)[m:inv X]", "x"), ("Obj(X)[m:inv Top]", "{}")]
            .iter()
            .map(|(a, b)| {
                let alpha = code(a);
                let rec = alpha.rec_of().expect("self code");
                let r = method_at(&alpha, "m", &rec);
                sem_upd(&rec, "m", b, r, vec![Claim::SelfExposed(rec.clone(), alpha)])
            })
            .collect(),
        SemCloneStr => ["Obj(X)[m:cov X]", "Obj(X)[m:inv X]"]
            .iter()
            .map(|a| {
                let alpha = code(a);
                let rec = alpha.rec_of().expect("self code");
                let mut i = sem_clone(&rec);
                i.premises.insert(0, Claim::SelfExposed(rec, alpha));
                i
            })
            .collect(),
        SemLetStr => [("Obj(X)[m:cov X]", "m", "s", "x.m", "Top"), ("Obj(X)[m:inv Top]", "m", "{}", "x.m", "Top")]
            .iter()
            .map(|(a, m, mb, b, r)| {
                let (alpha, r) = (code(a), code(r));
                let bound = obj_term(a, &[(m, mb)]);
                let xi = TypeCode::Var { name: "Xi".into() };
                inst(
                    format!("let x = obj {alpha} in {b}"),
                    vec![
                        Claim::judge(&[], bound.clone(), alpha.clone()),
                        Claim::forall("Xi", Range::SelfBelow(alpha.clone()), Claim::judge(&[("x", &xi)], term(b), r.clone())),
                    ],
                    Claim::judge(&[], Term::let_in("x", alpha.to_type_lossy(), bound, term(b)), r),
                )
            })
            .collect(),
        SemObjGen => {
            let cases: [(&str, &[(&str, &str)]); 3] = [
                ("[m:(Top, Top)]", &[("m", "{}")]),
                ("[m:([p:inv Top], [p:inv Top]), p:(Top, Top)]", &[("m", "s.m"), ("p", "{}")]),
                ("[m:(Top, Top), n:(Top, Top)]", &[("m", "s.n"), ("n", "s")]),
            ];
            cases
                .iter()
                .map(|(a, ms)| {
                    sem_obj(a, ms, |alpha, m| {
                        split_table(alpha).into_iter().find(|(n, _, _)| n == m).map(|(_, _, r)| r).expect("method")
                    })
                })
                .collect()
        }
        SemInvGen => [("[m:(Bot, Top)]", "m"), ("[m:([p:inv Top], [p:inv Top])]", "m"), ("[m:(Bot, [p:inv Top]), n:(Top, Top)]", "m")]
            .iter()
            .map(|(a, m)| {
                let a = code(a);
                let r = split_table(&a).into_iter().find(|(n, _, _)| n == m).map(|(_, _, r)| r).expect("method");
                sem_inv(&a, m, r)
            })
            .collect(),
        SemUpdGen => [("[m:(Top, Top)]", "m", "{}".to_string()), ("[m:([p:inv Top], Top)]", "m", print_term(&obj_term(P, &[("p", "s")]))), ("[m:(Top, [p:inv Top])]", "m", OMEGA.to_string())]
            .iter()
            .map(|(a, m, b)| {
                let a = code(a);
                let w = split_table(&a).into_iter().find(|(n, _, _)| n == m).map(|(_, w, _)| w).expect("method");
                sem_upd(&a, m, b, w, vec![])
            })
            .collect(),
        SemCloneGen => ["[m:(Top, Top)]", "[m:(Bot, [p:inv Top])]", "[m:([p:inv Top], Top)]"].iter().map(|a| sem_clone(&code(a))).collect(),
        SemSubObjGen => [("[m:([q:inv Top], Top), n:(Top, Top)]", "[m:(Bot, Top)]"), ("[m:(Top, [p:inv Top])]", "[m:([p:inv Top], Top)]"), ("[m:(Top, Bot)]", "[m:(Bot, Top)]")]
            .iter()
            .map(|(a, b)| {
                let (a, b) = (code(a), code(b));
                let ta = split_table(&a);
                let premises = split_table(&b)
                    .into_iter()
                    .flat_map(|(m, bw, br)| {
                        let (_, aw, ar) = ta.iter().find(|(n, _, _)| *n == m).cloned().expect("width");
                        [Claim::Subset(bw, aw), Claim::Subset(ar, br)]
                    })
                    .collect();
                inst(format!("{a} <= {b}"), premises, Claim::Subset(a, b))
            })
            .collect(),
        SemSubRefGen => [(("Top", "Top"), (P, "Top")), ((P, P), ("Bot", "Top")), (("Top", MI), ("Top", MCV))]
            .iter()
            .map(|((aw, ar), (bw, br))| {
                let (aw, ar, bw, br) = (code(aw), code(ar), code(bw), code(br));
                inst(
                    format!("ref({aw}, {ar}) <= ref({bw}, {br})"),
                    vec![Claim::Subset(bw.clone(), aw.clone()), Claim::Subset(ar.clone(), br.clone())],
                    Claim::RefSubset(RefCode::Gen(aw, ar), RefCode::Gen(bw, br)),
                )
            })
            .collect(),
        Subsumption => [(MI, MCV), (P, "Top"), ("[m:cov [p:inv Top]]", MCV), ("Top -> [p:inv Top]", "[p:inv Top] -> Top")]
            .iter()
            .map(|(a, b)| {
                let (a, b) = (code(a), code(b));
                let env: [(&str, &TypeCode); 1] = [("o", &a)];
                inst(
                    format!("{a} <= {b}"),
                    vec![Claim::judge(&env, term("o"), a.clone()), Claim::Subset(a.clone(), b.clone())],
                    Claim::judge(&env, term("o"), b),
                )
            })
            .collect(),
        ClosureUnderExtension => closure_instances(budget),
        NonExpansiveness => non_expansive_instances(budget),
        MuFixedPoint => fixed_point_instances(budget),
        Preorder => preorder_instances(budget),
        InformationForgetting => base_typings(budget)
            .iter()
            .flat_map(|psi| {
                (0..=budget.k_max).flat_map(move |k| {
                    (0..=k).map(move |j| {
                        inst(
                            format!("forget {psi} from {k} to {j}"),
                            vec![],
                            Claim::Extends { k, psi: psi.clone(), j, psi2: psi.approx(j) },
                        )
                    })
                })
            })
            .collect(),
        ValueTerm => value_term_instances(budget),
    }
}

fn mutant(id: LemmaId, flip: Flip) -> Vec<Instance> {
    use LemmaId::*;
    if !flip.targets().contains(&id) {
        return Vec::new();
    }
    match (id, flip) {
        (SemInv, Flip::Rule(Mutation::DropInvVariance)) => [("[m:con [q:inv Top]]", "m"), ("[m:con [p:inv Top]]", "m")]
            .iter()
            .map(|(a, m)| {
                let a = code(a);
                let r = method_at(&a, m, &a);
                sem_inv(&a, m, r)
            })
            .collect(),
        (SemUpd, Flip::Rule(Mutation::DropUpdVariance)) => [(MCV, "m", "{}"), ("[m:cov [p:inv Top]]", "m", "x")]
            .iter()
            .map(|(a, m, b)| {
                let a = code(a);
                sem_upd(&a, m, b, TypeCode::Top, vec![])
            })
            .collect(),
        (SemUpd, Flip::Rule(Mutation::CovariantUpdBody)) => [("[m:inv [q:inv Top]]", "m", "{}", "Top"), ("[m:inv [p:inv Top] -> [p:inv Top]]", "m", "\\(y:Top) y", "Top -> Top")]
            .iter()
            .map(|(a, m, b, wider)| {
                let a = code(a);
                let wider = code(wider);
                let declared = method_at(&a, m, &a);
                sem_upd(&a, m, b, wider.clone(), vec![Claim::Subset(declared, wider)])
            })
            .collect(),
        (SemSubObj, Flip::Rule(Mutation::WidthReversed)) => [(MI, "[m:inv Top, n:cov Top]"), ("[p:inv Top]", "[p:inv Top, q:inv Top]")]
            .iter()
            .map(|(a, b)| {
                let (a, b) = (code(a), code(b));
                let (_, ta) = method_table(&a);
                let (_, tb) = method_table(&b);
                let premises = ta
                    .iter()
                    .filter_map(|(m, _, ty)| tb.iter().find(|(n, _, _)| n == m).map(|(_, _, u)| (ty.clone(), u.clone())))
                    .flat_map(|(x, y)| [Claim::Subset(x.clone(), y.clone()), Claim::Subset(y, x)])
                    .collect();
                inst(format!("{a} <= {b}"), premises, Claim::Subset(a, b))
            })
            .collect(),
        (SemInvGen, Flip::Rule(Mutation::ConReadAtPayload)) => [("[m:([q:inv Top], Top)]", "m"), ("[m:([p:inv Top], Top)]", "m")]
            .iter()
            .map(|(a, m)| {
                let a = code(a);
                let w = split_table(&a).into_iter().find(|(n, _, _)| n == m).map(|(_, w, _)| w).expect("method");
                sem_inv(&a, m, w)
            })
            .collect(),
        (SemSubProc, Flip::InvertedPremise) => {
            [(P, "Top", "Top", "Top"), (MI, "Top", "Top", "Top")].iter().map(|(a, a1, b, b1)| sub_proc(code(a), code(a1), code(b), code(b1), true)).collect()
        }
        (SemSubCovRef, Flip::InvertedPremise) => {
            [(Q, "Top"), (P, "Top")].iter().map(|(a, b)| ref_sub(Variance::Cov, code(a), code(b), true)).collect()
        }
        (SemSubConRef, Flip::InvertedPremise) => {
            [(Q, "Top"), (P, "Top")].iter().map(|(a, b)| ref_sub(Variance::Con, code(a), code(b), true)).collect()
        }
        _ => Vec::new(),
    }
}

trait LossyStr {
    fn to_type_lossy_str(&self) -> String;
}

impl LossyStr for TypeCode {
    fn to_type_lossy_str(&self) -> String {
        crate::syntax::print_type(&self.to_type_lossy())
    }
}

/// `α' ⊆ α ∧ β ⊆ β' ⇒ α→β ⊆ α'→β'`; inverted reads the domain premise
/// the other way round.
fn sub_proc(a: TypeCode, a1: TypeCode, b: TypeCode, b1: TypeCode, inverted: bool) -> Instance {
    let dom = if inverted { Claim::Subset(a.clone(), a1.clone()) } else { Claim::Subset(a1.clone(), a.clone()) };
    inst(
        format!("{a} -> {b} <= {a1} -> {b1}"),
        vec![dom, Claim::Subset(b.clone(), b1.clone())],
        Claim::Subset(TypeCode::arrow(a, b), TypeCode::arrow(a1, b1)),
    )
}

/// Reference inclusion from `α ⊆ β`, covariant or contravariant; inverted
/// concludes the opposite inclusion.
fn ref_sub(v: Variance, a: TypeCode, b: TypeCode, inverted: bool) -> Instance {
    let (small, large) = match (v, inverted) {
        (Variance::Con, false) | (Variance::Cov, true) => (b.clone(), a.clone()),
        _ => (a.clone(), b.clone()),
    };
    inst(
        format!("{a} <= {b} gives ref {v} {small} <= ref {v} {large}"),
        vec![Claim::Subset(a, b)],
        Claim::RefSubset(RefCode::Var(v, small), RefCode::Var(v, large)),
    )
}

fn sem_obj(annot: &str, methods: &[(&str, &str)], result: impl Fn(&TypeCode, &str) -> TypeCode) -> Instance {
    let alpha = code(annot);
    let premises = methods
        .iter()
        .map(|(m, b)| Claim::judge(&[("s", &alpha)], term(b), result(&alpha, m)))
        .collect();
    inst(format!("obj {alpha}"), premises, Claim::judge(&[], obj_term(annot, methods), alpha.clone()))
}

fn sem_inv(alpha: &TypeCode, m: &str, result: TypeCode) -> Instance {
    let env: [(&str, &TypeCode); 1] = [("o", alpha)];
    inst(
        format!("o:{alpha} |- o.{m} : {result}"),
        vec![Claim::judge(&env, term("o"), alpha.clone())],
        Claim::judge(&env, Term::invoke(term("o"), m), result),
    )
}

fn sem_upd(alpha: &TypeCode, m: &str, body: &str, body_code: TypeCode, mut extra: Vec<Claim>) -> Instance {
    let o = term("o");
    let mut premises = vec![
        Claim::judge(&[("o", alpha)], o.clone(), alpha.clone()),
        Claim::judge(&[("o", alpha), ("x", alpha)], term(body), body_code),
    ];
    premises.append(&mut extra);
    inst(
        format!("o:{alpha} |- o.{m} := {body}"),
        premises,
        Claim::judge(&[("o", alpha)], Term::update(o, m, "x", alpha.to_type_lossy(), term(body)), alpha.clone()),
    )
}

fn sem_clone(alpha: &TypeCode) -> Instance {
    let env: [(&str, &TypeCode); 1] = [("o", alpha)];
    inst(
        format!("clone o:{alpha}"),
        vec![Claim::judge(&env, term("o"), alpha.clone())],
        Claim::judge(&env, Term::clone_of(term("o")), alpha.clone()),
    )
}

/// Width and variance-directed depth premises for object inclusion.
fn sub_obj(a: &TypeCode, b: &TypeCode) -> Instance {
    let (_, ta) = method_table(a);
    let (_, tb) = method_table(b);
    let premises = tb
        .iter()
        .flat_map(|(m, v, tb_e)| {
            let (_, _, ta_e) = ta.iter().find(|(n, _, _)| n == m).cloned().expect("width");
            let mut out = Vec::new();
            if v.readable() {
                out.push(Claim::Subset(ta_e.clone(), tb_e.clone()));
            }
            if v.writable() {
                out.push(Claim::Subset(tb_e.clone(), ta_e));
            }
            out
        })
        .collect();
    inst(format!("{a} <= {b}"), premises, Claim::Subset(a.clone(), b.clone()))
}

/// The heap typings every judgement is sampled under.
fn base_typings(budget: &Budget) -> Vec<HeapTypingApprox> {
    budget.extensions.iter().map(|e| e.typing.clone()).collect()
}

fn model_codes() -> Vec<TypeCode> {
    [MI, MCV, P, STREAM, "Top -> Top", "[m:inv Top] -> Top", "Obj(X)[m:cov X]", "[m:(Bot, Top)]"].iter().map(|c| code(c)).collect()
}

fn closure_instances(budget: &Budget) -> Vec<Instance> {
    let typings = base_typings(budget);
    let mut out = Vec::new();
    for tau in model_codes() {
        for v in budget.pick(&budget.values, 6, ("closure", &tau)) {
            for psi in &typings {
                let k = budget.k_max;
                for j in [k.saturating_sub(1), 1] {
                    let mut psi2 = psi.approx(j);
                    if let Some(d) = typings.iter().find(|d| !d.is_empty() && psi.disjoint(d)) {
                        psi2 = psi2.extended(&d.approx(j));
                    }
                    out.push(inst(
                        format!("{} in {tau} from ({k}, {psi}) to ({j}, {psi2})", print_term(&v)),
                        vec![
                            Claim::MemValue { k, psi: psi.clone(), value: v.clone(), code: tau.clone() },
                            Claim::Extends { k, psi: psi.clone(), j, psi2: psi2.clone() },
                        ],
                        Claim::MemValue { k: j, psi: psi2, value: v.clone(), code: tau.clone() },
                    ));
                }
            }
        }
    }
    out
}

fn non_expansive_instances(budget: &Budget) -> Vec<Instance> {
    let shapes = ["X -> X", "[m:inv X]", "[m:cov X, n:con X]", "mu Y. [m:cov Y, n:inv X]", "All(Y<:X) Y -> X", "Some(Y<:Top) X -> Y", "Obj(Y)[m:cov Y, n:inv X]", "[m:(X, Top)]"];
    let mut out = Vec::new();
    for shape in shapes {
        let ty = parse_type(shape).expect("shape");
        for c in budget.pick(&budget.witnesses, budget.samples, ("eta", shape)) {
            let eta: CodeEnv = [("X".to_string(), c.clone())].into_iter().collect();
            let full = interp_self_direct(&ty, &eta).expect("closed");
            for k in 0..=budget.k_max {
                let cut = interp_self_direct(&ty, &approx_env(&eta, k)).expect("closed");
                out.push(inst(format!("{shape} at X = {c}, k = {k}"), vec![], Claim::ApproxEq { left: full.clone(), right: cut, k }));
            }
        }
    }
    out
}

fn fixed_point_instances(budget: &Budget) -> Vec<Instance> {
    let typings = base_typings(budget);
    let mut out = Vec::new();
    for m in [STREAM, "mu X. [m:inv Top, n:cov X]", "mu X. X -> Top"] {
        let mu = code(m);
        let body = mu.unroll().expect("mu");
        for v in budget.pick(&budget.values, 6, ("fix", m)) {
            for psi in &typings {
                for k in 1..=budget.k_max {
                    let folded = Term::fold(mu.to_type_lossy(), v.clone());
                    let below = (0..k).map(|j| Claim::MemValue { k: j, psi: psi.clone(), value: v.clone(), code: body.clone() }).collect();
                    out.push(inst(
                        format!("fold {} in {mu} at ({k}, {psi})", print_term(&v)),
                        vec![],
                        Claim::Iff(
                            Box::new(Claim::MemValue { k, psi: psi.clone(), value: folded, code: mu.clone() }),
                            Box::new(Claim::All(below)),
                        ),
                    ));
                }
            }
        }
    }
    out
}

fn preorder_instances(budget: &Budget) -> Vec<Instance> {
    let typings = base_typings(budget);
    let mut out = Vec::new();
    for psi in &typings {
        for k in 0..=budget.k_max {
            out.push(inst(format!("({k}, {psi}) reflexive"), vec![], Claim::Extends { k, psi: psi.clone(), j: k, psi2: psi.clone() }));
            for d in typings.iter().filter(|d| psi.disjoint(d)) {
                for j in 0..=k {
                    let psi1 = psi.extended(d).approx(j);
                    for i in [0, j / 2, j] {
                        let psi2 = psi1.approx(i);
                        out.push(inst(
                            format!("({k}, {psi}) to ({j}, {psi1}) to ({i}, {psi2})"),
                            vec![
                                Claim::Extends { k, psi: psi.clone(), j, psi2: psi1.clone() },
                                Claim::Extends { k: j, psi: psi1.clone(), j: i, psi2: psi2.clone() },
                            ],
                            Claim::Extends { k, psi: psi.clone(), j: i, psi2 },
                        ));
                    }
                }
            }
        }
    }
    out
}

fn value_term_instances(budget: &Budget) -> Vec<Instance> {
    let typings = base_typings(budget);
    let mut out = Vec::new();
    for tau in model_codes() {
        for v in budget.pick(&budget.values, 5, ("value-term", &tau)) {
            for psi in &typings {
                for k in 1..=budget.k_max {
                    let value = Claim::MemValue { k, psi: psi.clone(), value: v.clone(), code: tau.clone() };
                    let as_term = Claim::MemTerm { k, psi: psi.clone(), term: v.clone(), code: tau.clone() };
                    out.push(inst(format!("{} in {tau} at ({k}, {psi}) as a term", print_term(&v)), vec![value.clone()], as_term.clone()));
                    out.push(inst(
                        format!("{} :{tau} at ({k}, {psi}) as a value", print_term(&v)),
                        vec![as_term, Claim::HeapExists { k, psi: psi.clone() }],
                        value,
                    ));
                }
            }
        }
    }
    out
}

// --------------------------------------------------------------- evaluation

/// Evaluates claims against one model.
pub struct Falsifier<'m> {
    model: &'m Model,
}

impl<'m> Falsifier<'m> {
    pub fn new(model: &'m Model) -> Falsifier<'m> {
        Falsifier { model }
    }

    fn budget(&self) -> &Budget {
        self.model.budget()
    }

    pub fn eval(&self, claim: &Claim) -> Verdict {
        let m = self.model;
        match claim {
            Claim::Judgement { env, term, code } => self.judgement(env, term, code),
            Claim::Subset(a, b) => closed2(a, b, || m.sem_subset(a, b)),
            Claim::RefSubset(a, b) => self.ref_subset(a, b),
            Claim::SelfExposed(a, b) => closed2(a, b, || m.tsubself_check(a, b)),
            Claim::ApproxEq { left, right, k } => closed2(left, right, || m.approx_eq(left, right, *k)),
            Claim::Extends { k, psi, j, psi2 } => m.state_extends(*k, psi, *j, psi2),
            Claim::MemValue { k, psi, value, code } => closed2(code, code, || m.mem_value(*k, psi, value, code)),
            Claim::MemTerm { k, psi, term, code } => closed2(code, code, || m.mem_term(*k, psi, term, code)),
            Claim::HeapExists { k, psi } => {
                let heaps = m.gen_heaps(*k, psi);
                if heaps.iter().any(|h| m.heap_typed(h, *k, psi).is_holds()) {
                    Verdict::holds()
                } else {
                    Verdict::Inconclusive(format!("no sampled heap is well typed for ({k}, {psi})"))
                }
            }
            Claim::Forall { var, range, claim } => {
                all_of(self.range(range), |c| self.eval(&claim.subst(var, &c)).within(|| format!("{var} = {c}")))
            }
            Claim::ForallPair { left, right, claim } => all_of(self.pairs(), |(a, b)| {
                self.eval(&claim.subst(left, &a).subst(right, &b)).within(|| format!("{left} = {a}, {right} = {b}"))
            }),
            Claim::Iff(a, b) => {
                let (va, vb) = (self.eval(a), self.eval(b));
                match (&va, &vb) {
                    (Verdict::Holds(_), Verdict::Counterexample(w)) | (Verdict::Counterexample(w), Verdict::Holds(_)) => {
                        Verdict::counterexample(Reason::Disagreement, w.index, &w.subject, &w.code, format!("sides disagree: {va} versus {vb}"))
                    }
                    _ => Verdict::holds(),
                }
            }
            Claim::All(cs) => all_of(cs, |c| self.eval(c)),
        }
    }

    fn judgement(&self, env: &[(String, TypeCode)], term: &Term, code: &TypeCode) -> Verdict {
        if !code.is_closed() || env.iter().any(|(_, c)| !c.is_closed()) {
            return Verdict::Inconclusive("open judgement".into());
        }
        let budget = self.budget();
        all_of(1..=budget.k_max, |k| {
            all_of(base_typings(budget), |psi| {
                all_of(self.environments(k, &psi, env), |(typing, sigma)| {
                    let closed = subst_term(term, &sigma);
                    self.model.mem_term(k, &typing, &closed, code).within(|| {
                        let shown: Vec<String> = sigma.iter().map(|(x, v)| format!("{x} = {}", print_term(v))).collect();
                        format!("at index {k} under {typing} with {}", shown.join(", "))
                    })
                })
            })
        })
        .mark_sampled()
    }

    /// Sampled value environments for `env` at `(k, psi)`.
    fn environments(&self, k: u32, psi: &HeapTypingApprox, env: &[(String, TypeCode)]) -> Vec<(HeapTypingApprox, ValueEnv)> {
        let mut acc = vec![(psi.clone(), ValueEnv::new())];
        for (x, c) in env {
            let members = self.model.members(k, psi, c);
            let mut next = Vec::new();
            for (typing, sigma) in &acc {
                for m in &members {
                    let mut s = sigma.clone();
                    s.insert(x.clone(), m.value.clone());
                    next.push((typing.extended(&m.typing), s));
                }
            }
            let cap = self.budget().samples * self.budget().samples + 2;
            if next.len() > cap {
                let idx: Vec<usize> = (0..next.len()).collect();
                let keep = self.budget().pick(&idx, cap, ("env", x, c, k));
                next = keep.into_iter().map(|i| next[i].clone()).collect();
            }
            acc = next;
        }
        acc
    }

    fn candidates(&self, salt: &str, extra: Vec<TypeCode>) -> Vec<TypeCode> {
        let mut out = extra;
        for c in self.budget().pick(&self.budget().witnesses, self.budget().samples, salt) {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }

    fn range(&self, range: &Range) -> Vec<TypeCode> {
        match range {
            Range::Below(b) => self
                .candidates("below", vec![TypeCode::Bot, b.clone()])
                .into_iter()
                .filter(|c| self.model.sem_subset(c, b).is_holds())
                .collect(),
            Range::SelfBelow(b) => {
                let mut extra = vec![TypeCode::Bot];
                extra.extend(b.rec_of());
                self.candidates("self-below", extra)
                    .into_iter()
                    .filter(|c| self.model.tsubself_check(c, b).is_holds())
                    .collect()
            }
        }
    }

    fn pairs(&self) -> Vec<(TypeCode, TypeCode)> {
        let cands = self.candidates("pairs", vec![TypeCode::Bot, TypeCode::Top]);
        let all: Vec<(TypeCode, TypeCode)> = cands
            .iter()
            .flat_map(|a| cands.iter().map(move |b| (a.clone(), b.clone())))
            .filter(|(a, b)| a != b || *a == TypeCode::Top)
            .filter(|(a, b)| self.model.sem_subset(a, b).is_holds())
            .collect();
        self.budget().pick(&all, 2 * self.budget().samples + 2, "pair-pick")
    }

    /// Every sampled location typing in the left reference type is in the
    /// right one.
    fn ref_subset(&self, a: &RefCode, b: &RefCode) -> Verdict {
        let mut extra = vec![TypeCode::Top, TypeCode::Bot];
        for c in a.payloads().into_iter().chain(b.payloads()) {
            if !extra.contains(&c) {
                extra.push(c);
            }
        }
        if extra.iter().any(|c| !c.is_closed()) {
            return Verdict::Inconclusive("open reference payload".into());
        }
        let stored = self.candidates("stored", extra);
        let m = self.model;
        let member = |k: u32, psi: &HeapTypingApprox, r: &RefCode| match r {
            RefCode::Var(v, t) => m.mem_ref(k, psi, PROBE, *v, t),
            RefCode::Gen(w, rd) => m.mem_ref_gen(k, psi, PROBE, w, rd),
        };
        all_of(1..=self.budget().k_max, |k| {
            all_of(&stored, |c| {
                let psi = HeapTypingApprox::from_entries([(PROBE, c.clone())]);
                if !member(k, &psi, a).is_holds() {
                    return Verdict::holds();
                }
                member(k, &psi, b).within(|| format!("{PROBE} stores {c} at index {k}, inside {a}"))
            })
        })
        .mark_sampled()
    }

    /// Evaluates an instance: premises first, then the conclusion.
    pub fn instance(&self, i: &Instance) -> (Status, Vec<Verdict>, Verdict) {
        let mut premises = Vec::new();
        for p in &i.premises {
            let v = self.eval(p);
            let refuted = v.is_counterexample();
            premises.push(v);
            if refuted {
                return (Status::Vacuous, premises, Verdict::Inconclusive("premise refuted".into()));
            }
        }
        let conclusion = self.eval(&i.conclusion);
        let settled = premises.iter().all(|p| p.is_holds());
        let status = match &conclusion {
            Verdict::Holds(_) => Status::Holds,
            Verdict::Counterexample(_) if settled => Status::Counterexample,
            _ => Status::Inconclusive,
        };
        (status, premises, conclusion)
    }
}

fn closed2(a: &TypeCode, b: &TypeCode, f: impl FnOnce() -> Verdict) -> Verdict {
    if a.is_closed() && b.is_closed() {
        f()
    } else {
        Verdict::Inconclusive(format!("open code {a} or {b}"))
    }
}

// ------------------------------------------------------------------ drivers

/// Checks every instance of one lemma against a fresh model.
pub fn check_lemma(id: LemmaId, flip: Option<Flip>, budget: &Budget) -> Result<LemmaReport, LemmaError> {
    let model = Model::new(budget.clone())?;
    let falsifier = Falsifier::new(&model);
    let records = instances(id, flip, budget)?
        .iter()
        .map(|i| {
            let (status, premises, verdict) = falsifier.instance(i);
            Record {
                lemma: id.name().to_string(),
                instance: i.label.clone(),
                mutation: flip.map(|f| f.name().to_string()),
                seed: budget.seed,
                k_max: budget.k_max,
                status,
                claim: if i.premises.is_empty() {
                    i.conclusion.to_string()
                } else {
                    let ps: Vec<String> = i.premises.iter().map(|p| p.to_string()).collect();
                    format!("{} implies {}", ps.join(" and "), i.conclusion)
                },
                premises: premises.iter().map(|p| p.kind().to_string()).collect(),
                verdict,
            }
        })
        .collect();
    Ok(LemmaReport { lemma: id, flip, records })
}

/// Every stock lemma, in parallel.
pub fn stock_suite(budget: &Budget) -> Result<Vec<LemmaReport>, LemmaError> {
    LemmaId::ALL.par_iter().map(|id| check_lemma(*id, None, budget)).collect()
}

/// Every lemma targeted by the flip, in parallel.
pub fn mutation_suite(flip: Flip, budget: &Budget) -> Result<Vec<LemmaReport>, LemmaError> {
    flip.targets().par_iter().map(|id| check_lemma(*id, Some(flip), budget)).collect()
}

/// Re-runs the instance a record came from and reports whether the same
/// status and verdict come out.
pub fn replay(record: &Record, budget: &Budget) -> Result<bool, LemmaError> {
    let id: LemmaId = record.lemma.parse()?;
    let flip = record.mutation.as_deref().map(Flip::from_str).transpose()?;
    let budget = Budget { k_max: record.k_max, seed: record.seed, ..budget.clone() };
    let report = check_lemma(id, flip, &budget)?;
    Ok(report.records.iter().any(|r| r.instance == record.instance && r.status == record.status && r.verdict == record.verdict))
}
