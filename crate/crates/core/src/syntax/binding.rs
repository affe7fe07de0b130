//! Free variables, capture-avoiding substitution and alpha-equivalence.

use super::ast::{Field, Loc, Method, MethodType, SplitMethod, Term, Type};
use std::collections::{BTreeSet, HashMap};

/// Free term variables, free type variables and locations of a term.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreeVars {
    pub terms: BTreeSet<String>,
    pub types: BTreeSet<String>,
    pub locs: BTreeSet<Loc>,
}

impl FreeVars {
    pub fn is_closed(&self) -> bool {
        self.terms.is_empty() && self.types.is_empty()
    }
}

/// A value environment: term variable to closed value.
pub type ValueEnv = HashMap<String, Term>;

/// Returns `base` if it is not in `avoid`, otherwise `base` with the
/// smallest numeric suffix that is.
pub fn fresh_name(base: &str, avoid: &dyn Fn(&str) -> bool) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    if !avoid(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|c| !avoid(c))
        .expect("unbounded search")
}

pub fn free_type_vars(ty: &Type) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_type_fv(ty, &mut Vec::new(), &mut out);
    out
}

fn collect_type_fv(ty: &Type, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match ty {
        Type::Var { name } => {
            if !bound.contains(name) {
                out.insert(name.clone());
            }
        }
        Type::Top | Type::Bot => {}
        Type::Arrow { dom, cod } => {
            collect_type_fv(dom, bound, out);
            collect_type_fv(cod, bound, out);
        }
        Type::Obj { methods } => methods.iter().for_each(|m| collect_type_fv(&m.ty, bound, out)),
        Type::Split { methods } => methods.iter().for_each(|m| {
            collect_type_fv(&m.write, bound, out);
            collect_type_fv(&m.read, bound, out);
        }),
        Type::Mu { var, body } => {
            bound.push(var.clone());
            collect_type_fv(body, bound, out);
            bound.pop();
        }
        Type::All { var, bound: b, body } | Type::Exists { var, bound: b, body } => {
            collect_type_fv(b, bound, out);
            bound.push(var.clone());
            collect_type_fv(body, bound, out);
            bound.pop();
        }
        Type::SelfObj { var, methods } => {
            bound.push(var.clone());
            methods.iter().for_each(|m| collect_type_fv(&m.ty, bound, out));
            bound.pop();
        }
    }
}

pub fn free_vars(t: &Term) -> FreeVars {
    let mut fv = FreeVars::default();
    collect_term_fv(t, &mut Vec::new(), &mut Vec::new(), &mut fv);
    fv
}

fn ty_fv_into(ty: &Type, tbound: &[String], fv: &mut FreeVars) {
    for v in free_type_vars(ty) {
        if !tbound.contains(&v) {
            fv.types.insert(v);
        }
    }
}

fn collect_term_fv(t: &Term, bound: &mut Vec<String>, tbound: &mut Vec<String>, fv: &mut FreeVars) {
    match t {
        Term::Var { name } => {
            if !bound.contains(name) {
                fv.terms.insert(name.clone());
            }
        }
        Term::Obj { annot, methods } => {
            ty_fv_into(annot, tbound, fv);
            for m in methods {
                ty_fv_into(&m.self_annot, tbound, fv);
                bound.push(m.self_var.clone());
                collect_term_fv(&m.body, bound, tbound, fv);
                bound.pop();
            }
        }
        Term::Invoke { recv, .. } => collect_term_fv(recv, bound, tbound, fv),
        Term::Update { recv, self_var, self_annot, body, .. } => {
            collect_term_fv(recv, bound, tbound, fv);
            ty_fv_into(self_annot, tbound, fv);
            bound.push(self_var.clone());
            collect_term_fv(body, bound, tbound, fv);
            bound.pop();
        }
        Term::Clone { arg } => collect_term_fv(arg, bound, tbound, fv),
        Term::Lam { var, annot, body } => {
            ty_fv_into(annot, tbound, fv);
            bound.push(var.clone());
            collect_term_fv(body, bound, tbound, fv);
            bound.pop();
        }
        Term::App { fun, arg } => {
            collect_term_fv(fun, bound, tbound, fv);
            collect_term_fv(arg, bound, tbound, fv);
        }
        Term::Fold { annot, arg } | Term::Unfold { annot, arg } => {
            ty_fv_into(annot, tbound, fv);
            collect_term_fv(arg, bound, tbound, fv);
        }
        Term::TLam { var, bound: b, body } => {
            ty_fv_into(b, tbound, fv);
            tbound.push(var.clone());
            collect_term_fv(body, bound, tbound, fv);
            tbound.pop();
        }
        Term::TApp { fun, arg } => {
            collect_term_fv(fun, bound, tbound, fv);
            ty_fv_into(arg, tbound, fv);
        }
        Term::Pack { var, bound: b, witness, payload, body_ty } => {
            ty_fv_into(b, tbound, fv);
            ty_fv_into(witness, tbound, fv);
            tbound.push(var.clone());
            collect_term_fv(payload, bound, tbound, fv);
            ty_fv_into(body_ty, tbound, fv);
            tbound.pop();
        }
        Term::Open { arg, tvar, bound: b, var, var_ty, body, result_ty } => {
            collect_term_fv(arg, bound, tbound, fv);
            ty_fv_into(b, tbound, fv);
            ty_fv_into(result_ty, tbound, fv);
            tbound.push(tvar.clone());
            ty_fv_into(var_ty, tbound, fv);
            bound.push(var.clone());
            collect_term_fv(body, bound, tbound, fv);
            bound.pop();
            tbound.pop();
        }
        Term::RtObj { fields } => fv.locs.extend(fields.iter().map(|f| f.loc)),
    }
}

/// Simultaneous capture-avoiding substitution of types for type variables.
pub fn subst_types(ty: &Type, map: &HashMap<String, Type>) -> Type {
    if map.is_empty() {
        return ty.clone();
    }
    let mut image_fv = BTreeSet::new();
    for v in map.values() {
        image_fv.extend(free_type_vars(v));
    }
    subst_types_inner(ty, map, &image_fv)
}

/// `ty[var := repl]`.
pub fn subst_type(ty: &Type, var: &str, repl: &Type) -> Type {
    let mut map = HashMap::new();
    map.insert(var.to_string(), repl.clone());
    subst_types(ty, &map)
}

/// Renames a type binder away from `image_fv` and from the body's own free
/// variables, returning the new name and the correspondingly reduced map.
fn enter_type_binder(
    var: &str,
    bodies: &[&Type],
    map: &HashMap<String, Type>,
    image_fv: &BTreeSet<String>,
) -> (String, HashMap<String, Type>) {
    let mut inner = map.clone();
    inner.remove(var);
    if !image_fv.contains(var) || inner.is_empty() {
        return (var.to_string(), inner);
    }
    let mut body_fv = BTreeSet::new();
    for b in bodies {
        body_fv.extend(free_type_vars(b));
    }
    let new = fresh_name(var, &|c| image_fv.contains(c) || body_fv.contains(c) || inner.contains_key(c));
    inner.insert(var.to_string(), Type::var(new.clone()));
    (new, inner)
}

fn subst_types_inner(ty: &Type, map: &HashMap<String, Type>, image_fv: &BTreeSet<String>) -> Type {
    let go = |t: &Type| subst_types_inner(t, map, image_fv);
    match ty {
        Type::Var { name } => map.get(name).cloned().unwrap_or_else(|| ty.clone()),
        Type::Top | Type::Bot => ty.clone(),
        Type::Arrow { dom, cod } => Type::arrow(go(dom), go(cod)),
        Type::Obj { methods } => Type::Obj {
            methods: methods
                .iter()
                .map(|m| MethodType { name: m.name.clone(), variance: m.variance, ty: go(&m.ty) })
                .collect(),
        },
        Type::Split { methods } => Type::Split {
            methods: methods
                .iter()
                .map(|m| SplitMethod { name: m.name.clone(), write: go(&m.write), read: go(&m.read) })
                .collect(),
        },
        Type::Mu { var, body } => {
            let (v, inner) = enter_type_binder(var, &[body], map, image_fv);
            let fv2 = extended_fv(image_fv, &inner, map);
            Type::mu(v, subst_types_inner(body, &inner, &fv2))
        }
        Type::All { var, bound, body } => {
            let (v, inner) = enter_type_binder(var, &[body], map, image_fv);
            let fv2 = extended_fv(image_fv, &inner, map);
            Type::all(v, go(bound), subst_types_inner(body, &inner, &fv2))
        }
        Type::Exists { var, bound, body } => {
            let (v, inner) = enter_type_binder(var, &[body], map, image_fv);
            let fv2 = extended_fv(image_fv, &inner, map);
            Type::exists(v, go(bound), subst_types_inner(body, &inner, &fv2))
        }
        Type::SelfObj { var, methods } => {
            let tys: Vec<&Type> = methods.iter().map(|m| &m.ty).collect();
            let (v, inner) = enter_type_binder(var, &tys, map, image_fv);
            let fv2 = extended_fv(image_fv, &inner, map);
            Type::SelfObj {
                var: v,
                methods: methods
                    .iter()
                    .map(|m| MethodType {
                        name: m.name.clone(),
                        variance: m.variance,
                        ty: subst_types_inner(&m.ty, &inner, &fv2),
                    })
                    .collect(),
            }
        }
    }
}

/// Free variables of the images after a binder rename added a new entry.
fn extended_fv(
    image_fv: &BTreeSet<String>,
    inner: &HashMap<String, Type>,
    outer: &HashMap<String, Type>,
) -> BTreeSet<String> {
    if inner.len() <= outer.len() && inner.keys().all(|k| outer.get(k) == inner.get(k)) {
        return image_fv.clone();
    }
    let mut fv = image_fv.clone();
    for v in inner.values() {
        fv.extend(free_type_vars(v));
    }
    fv
}

/// Simultaneous capture-avoiding substitution of closed (or open) terms for
/// term variables.
pub fn subst_term(t: &Term, env: &ValueEnv) -> Term {
    if env.is_empty() {
        return t.clone();
    }
    let mut image_fv = BTreeSet::new();
    let mut image_tfv = BTreeSet::new();
    for v in env.values() {
        let fv = free_vars(v);
        image_fv.extend(fv.terms);
        image_tfv.extend(fv.types);
    }
    Subst { terms: env.clone(), types: HashMap::new(), term_fv: image_fv, type_fv: image_tfv }.term(t)
}

/// `t[var := v]` for a single term variable.
pub fn subst_term1(t: &Term, var: &str, v: &Term) -> Term {
    let mut env = ValueEnv::new();
    env.insert(var.to_string(), v.clone());
    subst_term(t, &env)
}

/// `t[X := C]` on every type annotation of a term.
pub fn subst_type_in_term(t: &Term, var: &str, repl: &Type) -> Term {
    let mut types = HashMap::new();
    types.insert(var.to_string(), repl.clone());
    Subst {
        terms: HashMap::new(),
        type_fv: free_type_vars(repl),
        types,
        term_fv: BTreeSet::new(),
    }
    .term(t)
}

/// `t[x := v, X := C]`, both at once.
pub fn subst_term_and_type(t: &Term, var: &str, v: &Term, tvar: &str, repl: &Type) -> Term {
    let fv = free_vars(v);
    let mut type_fv = fv.types;
    type_fv.extend(free_type_vars(repl));
    Subst {
        terms: HashMap::from([(var.to_string(), v.clone())]),
        types: HashMap::from([(tvar.to_string(), repl.clone())]),
        term_fv: fv.terms,
        type_fv,
    }
    .term(t)
}

/// Combined substitution for terms and types under term binders.
struct Subst {
    terms: HashMap<String, Term>,
    types: HashMap<String, Type>,
    term_fv: BTreeSet<String>,
    type_fv: BTreeSet<String>,
}

impl Subst {
    fn ty(&self, ty: &Type) -> Type {
        if self.types.is_empty() {
            ty.clone()
        } else {
            subst_types_inner(ty, &self.types, &self.type_fv)
        }
    }

    fn is_empty(&self) -> bool {
        self.terms.is_empty() && self.types.is_empty()
    }

    /// Enters a term binder; renames it when it would capture.
    fn under_term_binder(&self, var: &str, body: &Term) -> (String, Subst) {
        let mut terms = self.terms.clone();
        terms.remove(var);
        let mut inner = Subst {
            terms,
            types: self.types.clone(),
            term_fv: self.term_fv.clone(),
            type_fv: self.type_fv.clone(),
        };
        if inner.terms.is_empty() || !self.term_fv.contains(var) {
            return (var.to_string(), inner);
        }
        let body_fv = free_vars(body).terms;
        let new = fresh_name(var, &|c| {
            self.term_fv.contains(c) || body_fv.contains(c) || inner.terms.contains_key(c)
        });
        inner.terms.insert(var.to_string(), Term::var(new.clone()));
        inner.term_fv.insert(new.clone());
        (new, inner)
    }

    /// Enters a type binder scoping over `bodies` (term parts) and `tys`.
    fn under_type_binder(&self, var: &str, bodies: &[&Term], tys: &[&Type]) -> (String, Subst) {
        let mut types = self.types.clone();
        types.remove(var);
        let mut inner = Subst {
            terms: self.terms.clone(),
            types,
            term_fv: self.term_fv.clone(),
            type_fv: self.type_fv.clone(),
        };
        if inner.is_empty() || !self.type_fv.contains(var) {
            return (var.to_string(), inner);
        }
        let mut body_fv = BTreeSet::new();
        for b in bodies {
            body_fv.extend(free_vars(b).types);
        }
        for t in tys {
            body_fv.extend(free_type_vars(t));
        }
        let new = fresh_name(var, &|c| {
            self.type_fv.contains(c) || body_fv.contains(c) || inner.types.contains_key(c)
        });
        inner.types.insert(var.to_string(), Type::var(new.clone()));
        inner.type_fv.insert(new.clone());
        (new, inner)
    }

    fn term(&self, t: &Term) -> Term {
        if self.is_empty() {
            return t.clone();
        }
        match t {
            Term::Var { name } => self.terms.get(name).cloned().unwrap_or_else(|| t.clone()),
            Term::Obj { annot, methods } => Term::Obj {
                annot: self.ty(annot),
                methods: methods
                    .iter()
                    .map(|m| {
                        let (x, inner) = self.under_term_binder(&m.self_var, &m.body);
                        Method {
                            name: m.name.clone(),
                            self_var: x,
                            self_annot: self.ty(&m.self_annot),
                            body: inner.term(&m.body),
                        }
                    })
                    .collect(),
            },
            Term::Invoke { recv, method } => Term::invoke(self.term(recv), method.clone()),
            Term::Update { recv, method, self_var, self_annot, body } => {
                let (x, inner) = self.under_term_binder(self_var, body);
                Term::update(self.term(recv), method.clone(), x, self.ty(self_annot), inner.term(body))
            }
            Term::Clone { arg } => Term::clone_of(self.term(arg)),
            Term::Lam { var, annot, body } => {
                let (x, inner) = self.under_term_binder(var, body);
                Term::lam(x, self.ty(annot), inner.term(body))
            }
            Term::App { fun, arg } => Term::app(self.term(fun), self.term(arg)),
            Term::Fold { annot, arg } => Term::fold(self.ty(annot), self.term(arg)),
            Term::Unfold { annot, arg } => Term::unfold(self.ty(annot), self.term(arg)),
            Term::TLam { var, bound, body } => {
                let (x, inner) = self.under_type_binder(var, &[body], &[]);
                Term::tlam(x, self.ty(bound), inner.term(body))
            }
            Term::TApp { fun, arg } => Term::tapp(self.term(fun), self.ty(arg)),
            Term::Pack { var, bound, witness, payload, body_ty } => {
                let (x, inner) = self.under_type_binder(var, &[payload], &[body_ty]);
                Term::Pack {
                    var: x,
                    bound: self.ty(bound),
                    witness: self.ty(witness),
                    payload: Box::new(inner.term(payload)),
                    body_ty: inner.ty(body_ty),
                }
            }
            Term::Open { arg, tvar, bound, var, var_ty, body, result_ty } => {
                let (tx, tinner) = self.under_type_binder(tvar, &[body], &[var_ty]);
                let (x, inner) = tinner.under_term_binder(var, body);
                Term::Open {
                    arg: Box::new(self.term(arg)),
                    tvar: tx,
                    bound: self.ty(bound),
                    var: x,
                    var_ty: tinner.ty(var_ty),
                    body: Box::new(inner.term(body)),
                    result_ty: self.ty(result_ty),
                }
            }
            Term::RtObj { .. } => t.clone(),
        }
    }
}

/// Replaces every location according to `map`; unmapped locations stay.
pub fn rename_locs(t: &Term, map: &HashMap<Loc, Loc>) -> Term {
    match t {
        Term::RtObj { fields } => Term::RtObj {
            fields: fields
                .iter()
                .map(|f| Field { name: f.name.clone(), loc: *map.get(&f.loc).unwrap_or(&f.loc) })
                .collect(),
        },
        _ => map_subterms(t, &|s| rename_locs(s, map)),
    }
}

/// Rebuilds `t` applying `f` to each immediate subterm; annotations are kept.
pub fn map_subterms(t: &Term, f: &dyn Fn(&Term) -> Term) -> Term {
    match t {
        Term::Var { .. } | Term::RtObj { .. } => t.clone(),
        Term::Obj { annot, methods } => Term::Obj {
            annot: annot.clone(),
            methods: methods
                .iter()
                .map(|m| Method { body: f(&m.body), ..m.clone() })
                .collect(),
        },
        Term::Invoke { recv, method } => Term::invoke(f(recv), method.clone()),
        Term::Update { recv, method, self_var, self_annot, body } => {
            Term::update(f(recv), method.clone(), self_var.clone(), self_annot.clone(), f(body))
        }
        Term::Clone { arg } => Term::clone_of(f(arg)),
        Term::Lam { var, annot, body } => Term::lam(var.clone(), annot.clone(), f(body)),
        Term::App { fun, arg } => Term::app(f(fun), f(arg)),
        Term::Fold { annot, arg } => Term::fold(annot.clone(), f(arg)),
        Term::Unfold { annot, arg } => Term::unfold(annot.clone(), f(arg)),
        Term::TLam { var, bound, body } => Term::tlam(var.clone(), bound.clone(), f(body)),
        Term::TApp { fun, arg } => Term::tapp(f(fun), arg.clone()),
        Term::Pack { var, bound, witness, payload, body_ty } => Term::Pack {
            var: var.clone(),
            bound: bound.clone(),
            witness: witness.clone(),
            payload: Box::new(f(payload)),
            body_ty: body_ty.clone(),
        },
        Term::Open { arg, tvar, bound, var, var_ty, body, result_ty } => Term::Open {
            arg: Box::new(f(arg)),
            tvar: tvar.clone(),
            bound: bound.clone(),
            var: var.clone(),
            var_ty: var_ty.clone(),
            body: Box::new(f(body)),
            result_ty: result_ty.clone(),
        },
    }
}

/// Rebuilds `t` applying `g` to every type annotation, at every depth.
pub fn map_annotations(t: &Term, g: &dyn Fn(&Type) -> Type) -> Term {
    let deep = |s: &Term| map_annotations(s, g);
    match t {
        Term::Var { .. } | Term::RtObj { .. } => t.clone(),
        Term::Obj { annot, methods } => Term::Obj {
            annot: g(annot),
            methods: methods
                .iter()
                .map(|m| Method {
                    name: m.name.clone(),
                    self_var: m.self_var.clone(),
                    self_annot: g(&m.self_annot),
                    body: deep(&m.body),
                })
                .collect(),
        },
        Term::Invoke { recv, method } => Term::invoke(deep(recv), method.clone()),
        Term::Update { recv, method, self_var, self_annot, body } => {
            Term::update(deep(recv), method.clone(), self_var.clone(), g(self_annot), deep(body))
        }
        Term::Clone { arg } => Term::clone_of(deep(arg)),
        Term::Lam { var, annot, body } => Term::lam(var.clone(), g(annot), deep(body)),
        Term::App { fun, arg } => Term::app(deep(fun), deep(arg)),
        Term::Fold { annot, arg } => Term::fold(g(annot), deep(arg)),
        Term::Unfold { annot, arg } => Term::unfold(g(annot), deep(arg)),
        Term::TLam { var, bound, body } => Term::tlam(var.clone(), g(bound), deep(body)),
        Term::TApp { fun, arg } => Term::tapp(deep(fun), g(arg)),
        Term::Pack { var, bound, witness, payload, body_ty } => Term::Pack {
            var: var.clone(),
            bound: g(bound),
            witness: g(witness),
            payload: Box::new(deep(payload)),
            body_ty: g(body_ty),
        },
        Term::Open { arg, tvar, bound, var, var_ty, body, result_ty } => Term::Open {
            arg: Box::new(deep(arg)),
            tvar: tvar.clone(),
            bound: g(bound),
            var: var.clone(),
            var_ty: g(var_ty),
            body: Box::new(deep(body)),
            result_ty: g(result_ty),
        },
    }
}

/// Binder correspondence used by alpha-equivalence.
#[derive(Default)]
struct Scopes {
    left: Vec<String>,
    right: Vec<String>,
}

impl Scopes {
    fn push(&mut self, l: &str, r: &str) {
        self.left.push(l.to_string());
        self.right.push(r.to_string());
    }

    fn pop(&mut self) {
        self.left.pop();
        self.right.pop();
    }

    fn same(&self, l: &str, r: &str) -> bool {
        let li = self.left.iter().rposition(|x| x == l);
        let ri = self.right.iter().rposition(|x| x == r);
        match (li, ri) {
            (None, None) => l == r,
            (a, b) => a == b,
        }
    }
}

pub fn alpha_eq_type(a: &Type, b: &Type) -> bool {
    alpha_ty(a, b, &mut Scopes::default())
}

fn sorted_by_name<T>(items: &[T], name: impl Fn(&T) -> &str) -> Vec<&T> {
    let mut v: Vec<&T> = items.iter().collect();
    v.sort_by(|x, y| name(x).cmp(name(y)));
    v
}

fn alpha_methods(a: &[MethodType], b: &[MethodType], s: &mut Scopes) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let (sa, sb) = (sorted_by_name(a, |m| &m.name), sorted_by_name(b, |m| &m.name));
    sa.iter()
        .zip(sb.iter())
        .all(|(x, y)| x.name == y.name && x.variance == y.variance && alpha_ty(&x.ty, &y.ty, s))
}

fn alpha_ty(a: &Type, b: &Type, s: &mut Scopes) -> bool {
    match (a, b) {
        (Type::Var { name: x }, Type::Var { name: y }) => s.same(x, y),
        (Type::Top, Type::Top) | (Type::Bot, Type::Bot) => true,
        (Type::Arrow { dom: d1, cod: c1 }, Type::Arrow { dom: d2, cod: c2 }) => {
            alpha_ty(d1, d2, s) && alpha_ty(c1, c2, s)
        }
        (Type::Obj { methods: m1 }, Type::Obj { methods: m2 }) => alpha_methods(m1, m2, s),
        (Type::Split { methods: m1 }, Type::Split { methods: m2 }) => {
            if m1.len() != m2.len() {
                return false;
            }
            let (sa, sb) = (sorted_by_name(m1, |m| &m.name), sorted_by_name(m2, |m| &m.name));
            sa.iter().zip(sb.iter()).all(|(x, y)| {
                x.name == y.name && alpha_ty(&x.write, &y.write, s) && alpha_ty(&x.read, &y.read, s)
            })
        }
        (Type::Mu { var: x, body: b1 }, Type::Mu { var: y, body: b2 }) => {
            s.push(x, y);
            let r = alpha_ty(b1, b2, s);
            s.pop();
            r
        }
        (Type::All { var: x, bound: k1, body: b1 }, Type::All { var: y, bound: k2, body: b2 })
        | (Type::Exists { var: x, bound: k1, body: b1 }, Type::Exists { var: y, bound: k2, body: b2 }) => {
            if !alpha_ty(k1, k2, s) {
                return false;
            }
            s.push(x, y);
            let r = alpha_ty(b1, b2, s);
            s.pop();
            r
        }
        (Type::SelfObj { var: x, methods: m1 }, Type::SelfObj { var: y, methods: m2 }) => {
            s.push(x, y);
            let r = alpha_methods(m1, m2, s);
            s.pop();
            r
        }
        _ => false,
    }
}

pub fn alpha_eq_term(a: &Term, b: &Term) -> bool {
    alpha_tm(a, b, &mut Scopes::default(), &mut Scopes::default())
}

fn alpha_tm(a: &Term, b: &Term, s: &mut Scopes, ts: &mut Scopes) -> bool {
    match (a, b) {
        (Term::Var { name: x }, Term::Var { name: y }) => s.same(x, y),
        (Term::Obj { annot: a1, methods: m1 }, Term::Obj { annot: a2, methods: m2 }) => {
            if !alpha_ty(a1, a2, ts) || m1.len() != m2.len() {
                return false;
            }
            let (sa, sb) = (sorted_by_name(m1, |m| &m.name), sorted_by_name(m2, |m| &m.name));
            sa.iter().zip(sb.iter()).all(|(x, y)| {
                if x.name != y.name || !alpha_ty(&x.self_annot, &y.self_annot, ts) {
                    return false;
                }
                s.push(&x.self_var, &y.self_var);
                let r = alpha_tm(&x.body, &y.body, s, ts);
                s.pop();
                r
            })
        }
        (Term::Invoke { recv: r1, method: m1 }, Term::Invoke { recv: r2, method: m2 }) => {
            m1 == m2 && alpha_tm(r1, r2, s, ts)
        }
        (
            Term::Update { recv: r1, method: m1, self_var: x1, self_annot: a1, body: b1 },
            Term::Update { recv: r2, method: m2, self_var: x2, self_annot: a2, body: b2 },
        ) => {
            if m1 != m2 || !alpha_tm(r1, r2, s, ts) || !alpha_ty(a1, a2, ts) {
                return false;
            }
            s.push(x1, x2);
            let r = alpha_tm(b1, b2, s, ts);
            s.pop();
            r
        }
        (Term::Clone { arg: x }, Term::Clone { arg: y }) => alpha_tm(x, y, s, ts),
        (Term::Lam { var: x1, annot: a1, body: b1 }, Term::Lam { var: x2, annot: a2, body: b2 }) => {
            if !alpha_ty(a1, a2, ts) {
                return false;
            }
            s.push(x1, x2);
            let r = alpha_tm(b1, b2, s, ts);
            s.pop();
            r
        }
        (Term::App { fun: f1, arg: a1 }, Term::App { fun: f2, arg: a2 }) => {
            alpha_tm(f1, f2, s, ts) && alpha_tm(a1, a2, s, ts)
        }
        (Term::Fold { annot: a1, arg: x }, Term::Fold { annot: a2, arg: y })
        | (Term::Unfold { annot: a1, arg: x }, Term::Unfold { annot: a2, arg: y }) => {
            alpha_ty(a1, a2, ts) && alpha_tm(x, y, s, ts)
        }
        (Term::TLam { var: x1, bound: k1, body: b1 }, Term::TLam { var: x2, bound: k2, body: b2 }) => {
            if !alpha_ty(k1, k2, ts) {
                return false;
            }
            ts.push(x1, x2);
            let r = alpha_tm(b1, b2, s, ts);
            ts.pop();
            r
        }
        (Term::TApp { fun: f1, arg: a1 }, Term::TApp { fun: f2, arg: a2 }) => {
            alpha_tm(f1, f2, s, ts) && alpha_ty(a1, a2, ts)
        }
        (
            Term::Pack { var: x1, bound: k1, witness: w1, payload: p1, body_ty: t1 },
            Term::Pack { var: x2, bound: k2, witness: w2, payload: p2, body_ty: t2 },
        ) => {
            if !alpha_ty(k1, k2, ts) || !alpha_ty(w1, w2, ts) {
                return false;
            }
            ts.push(x1, x2);
            let r = alpha_tm(p1, p2, s, ts) && alpha_ty(t1, t2, ts);
            ts.pop();
            r
        }
        (
            Term::Open { arg: a1, tvar: tx1, bound: k1, var: x1, var_ty: v1, body: b1, result_ty: r1 },
            Term::Open { arg: a2, tvar: tx2, bound: k2, var: x2, var_ty: v2, body: b2, result_ty: r2 },
        ) => {
            if !alpha_tm(a1, a2, s, ts) || !alpha_ty(k1, k2, ts) || !alpha_ty(r1, r2, ts) {
                return false;
            }
            ts.push(tx1, tx2);
            s.push(x1, x2);
            let r = alpha_ty(v1, v2, ts) && alpha_tm(b1, b2, s, ts);
            s.pop();
            ts.pop();
            r
        }
        (Term::RtObj { fields: f1 }, Term::RtObj { fields: f2 }) => {
            if f1.len() != f2.len() {
                return false;
            }
            let (sa, sb) = (sorted_by_name(f1, |f| &f.name), sorted_by_name(f2, |f| &f.name));
            sa.iter().zip(sb.iter()).all(|(x, y)| x.name == y.name && x.loc == y.loc)
        }
        _ => false,
    }
}
