//! Pretty-printer producing text that re-parses to an alpha-equal tree.
//!
//! Binders that would shadow an enclosing binder or a free variable are
//! renamed before printing.

use super::ast::{Method, MethodType, Term, Type};
use super::binding::{free_type_vars, free_vars, fresh_name, subst_term1, subst_type, subst_type_in_term};
use super::parser::is_keyword;
use std::collections::BTreeSet;
use std::fmt::{self, Write};

pub fn print_type(ty: &Type) -> String {
    let scope = free_type_vars(ty);
    let ty = unshadow_type(ty, &scope);
    let mut s = String::new();
    write_type(&mut s, &ty, 0);
    s
}

pub fn print_term(t: &Term) -> String {
    let fv = free_vars(t);
    let t = unshadow_term(t, &fv.terms, &fv.types);
    let mut s = String::new();
    write_term(&mut s, &t, 0);
    s
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_type(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

fn pick(var: &str, scope: &BTreeSet<String>, extra: &BTreeSet<String>) -> String {
    if !scope.contains(var) && !is_keyword(var) {
        return var.to_string();
    }
    let base = if is_keyword(var) { format!("{var}_") } else { var.to_string() };
    fresh_name(&base, &|c| scope.contains(c) || extra.contains(c) || is_keyword(c))
}

/// Renames every type binder whose name is already in `scope`.
fn unshadow_type(ty: &Type, scope: &BTreeSet<String>) -> Type {
    let enter = |var: &str, body: &Type| -> (String, Type, BTreeSet<String>) {
        let fv = free_type_vars(body);
        let new = pick(var, scope, &fv);
        let body = if new == var { body.clone() } else { subst_type(body, var, &Type::var(new.clone())) };
        let mut inner = scope.clone();
        inner.insert(new.clone());
        (new, body, inner)
    };
    match ty {
        Type::Var { .. } | Type::Top | Type::Bot => ty.clone(),
        Type::Arrow { dom, cod } => Type::arrow(unshadow_type(dom, scope), unshadow_type(cod, scope)),
        Type::Obj { methods } => Type::Obj { methods: unshadow_methods(methods, scope) },
        Type::Split { methods } => Type::Split {
            methods: methods
                .iter()
                .map(|m| super::ast::SplitMethod {
                    name: m.name.clone(),
                    write: unshadow_type(&m.write, scope),
                    read: unshadow_type(&m.read, scope),
                })
                .collect(),
        },
        Type::Mu { var, body } => {
            let (v, body, inner) = enter(var, body);
            Type::mu(v, unshadow_type(&body, &inner))
        }
        Type::All { var, bound, body } => {
            let (v, body, inner) = enter(var, body);
            Type::all(v, unshadow_type(bound, scope), unshadow_type(&body, &inner))
        }
        Type::Exists { var, bound, body } => {
            let (v, body, inner) = enter(var, body);
            Type::exists(v, unshadow_type(bound, scope), unshadow_type(&body, &inner))
        }
        Type::SelfObj { var, methods } => {
            let whole = Type::Obj { methods: methods.clone() };
            let (v, body, inner) = enter(var, &whole);
            match body {
                Type::Obj { methods } => Type::SelfObj { var: v, methods: unshadow_methods(&methods, &inner) },
                _ => unreachable!("substitution preserves the constructor"),
            }
        }
    }
}

fn unshadow_methods(methods: &[MethodType], scope: &BTreeSet<String>) -> Vec<MethodType> {
    methods
        .iter()
        .map(|m| MethodType { name: m.name.clone(), variance: m.variance, ty: unshadow_type(&m.ty, scope) })
        .collect()
}

fn unshadow_term(t: &Term, scope: &BTreeSet<String>, tscope: &BTreeSet<String>) -> Term {
    let ty = |a: &Type| unshadow_type(a, tscope);
    let enter = |var: &str, body: &Term| -> (String, Term, BTreeSet<String>) {
        let fv = free_vars(body).terms;
        let new = pick(var, scope, &fv);
        let body = if new == var { body.clone() } else { subst_term1(body, var, &Term::var(new.clone())) };
        let mut inner = scope.clone();
        inner.insert(new.clone());
        (new, body, inner)
    };
    let tenter = |var: &str, body: &Term, extra: &[&Type]| -> (String, Term, BTreeSet<String>) {
        let mut fv = free_vars(body).types;
        for e in extra {
            fv.extend(free_type_vars(e));
        }
        let new = pick(var, tscope, &fv);
        let body = if new == var { body.clone() } else { subst_type_in_term(body, var, &Type::var(new.clone())) };
        let mut inner = tscope.clone();
        inner.insert(new.clone());
        (new, body, inner)
    };
    match t {
        Term::Var { .. } | Term::RtObj { .. } => t.clone(),
        Term::Obj { annot, methods } => Term::Obj {
            annot: ty(annot),
            methods: methods
                .iter()
                .map(|m| {
                    let (x, body, inner) = enter(&m.self_var, &m.body);
                    Method {
                        name: m.name.clone(),
                        self_var: x,
                        self_annot: ty(&m.self_annot),
                        body: unshadow_term(&body, &inner, tscope),
                    }
                })
                .collect(),
        },
        Term::Invoke { recv, method } => Term::invoke(unshadow_term(recv, scope, tscope), method.clone()),
        Term::Update { recv, method, self_var, self_annot, body } => {
            let (x, body, inner) = enter(self_var, body);
            Term::update(
                unshadow_term(recv, scope, tscope),
                method.clone(),
                x,
                ty(self_annot),
                unshadow_term(&body, &inner, tscope),
            )
        }
        Term::Clone { arg } => Term::clone_of(unshadow_term(arg, scope, tscope)),
        Term::Lam { var, annot, body } => {
            let (x, body, inner) = enter(var, body);
            Term::lam(x, ty(annot), unshadow_term(&body, &inner, tscope))
        }
        Term::App { fun, arg } => {
            Term::app(unshadow_term(fun, scope, tscope), unshadow_term(arg, scope, tscope))
        }
        Term::Fold { annot, arg } => Term::fold(ty(annot), unshadow_term(arg, scope, tscope)),
        Term::Unfold { annot, arg } => Term::unfold(ty(annot), unshadow_term(arg, scope, tscope)),
        Term::TLam { var, bound, body } => {
            let (x, body, inner) = tenter(var, body, &[]);
            Term::tlam(x, ty(bound), unshadow_term(&body, scope, &inner))
        }
        Term::TApp { fun, arg } => Term::tapp(unshadow_term(fun, scope, tscope), ty(arg)),
        Term::Pack { var, bound, witness, payload, body_ty } => {
            // Rename through a temporary open so payload and body type move together.
            let fv_extra = [body_ty];
            let (x, payload, inner) = tenter(var, payload, &fv_extra);
            let body_ty = if &x == var { body_ty.clone() } else { subst_type(body_ty, var, &Type::var(x.clone())) };
            Term::Pack {
                var: x,
                bound: ty(bound),
                witness: ty(witness),
                payload: Box::new(unshadow_term(&payload, scope, &inner)),
                body_ty: unshadow_type(&body_ty, &inner),
            }
        }
        Term::Open { arg, tvar, bound, var, var_ty, body, result_ty } => {
            let (tx, body1, tinner) = tenter(tvar, body, &[var_ty]);
            let var_ty = if &tx == tvar { var_ty.clone() } else { subst_type(var_ty, tvar, &Type::var(tx.clone())) };
            let (x, body2, inner) = enter(var, &body1);
            Term::Open {
                arg: Box::new(unshadow_term(arg, scope, tscope)),
                tvar: tx,
                bound: ty(bound),
                var: x,
                var_ty: unshadow_type(&var_ty, &tinner),
                body: Box::new(unshadow_term(&body2, &inner, &tinner)),
                result_ty: ty(result_ty),
            }
        }
    }
}

// Type levels: 0 binder/arrow, 1 atom.
fn write_type(s: &mut String, ty: &Type, level: u8) {
    let paren = level > 0 && matches!(ty, Type::Arrow { .. } | Type::Mu { .. } | Type::All { .. } | Type::Exists { .. });
    if paren {
        s.push('(');
    }
    match ty {
        Type::Var { name } => s.push_str(name),
        Type::Top => s.push_str("Top"),
        Type::Bot => s.push_str("Bot"),
        Type::Arrow { dom, cod } => {
            write_type(s, dom, 1);
            s.push_str(" -> ");
            write_type(s, cod, 0);
        }
        Type::Obj { methods } => write_var_methods(s, methods),
        Type::Split { methods } => {
            s.push('[');
            for (i, m) in methods.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                let _ = write!(s, "{}:(", m.name);
                write_type(s, &m.write, 0);
                s.push_str(", ");
                write_type(s, &m.read, 0);
                s.push(')');
            }
            s.push(']');
        }
        Type::Mu { var, body } => {
            let _ = write!(s, "mu {var}. ");
            write_type(s, body, 0);
        }
        Type::All { var, bound, body } | Type::Exists { var, bound, body } => {
            let kw = if matches!(ty, Type::All { .. }) { "All" } else { "Some" };
            let _ = write!(s, "{kw}({var}<:");
            write_type(s, bound, 0);
            s.push_str(") ");
            write_type(s, body, 0);
        }
        Type::SelfObj { var, methods } => {
            let _ = write!(s, "Obj({var})");
            write_var_methods(s, methods);
        }
    }
    if paren {
        s.push(')');
    }
}

fn write_var_methods(s: &mut String, methods: &[MethodType]) {
    s.push('[');
    for (i, m) in methods.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{}:{} ", m.name, m.variance);
        write_type(s, &m.ty, 0);
    }
    s.push(']');
}

// Term levels: 0 term, 1 application, 2 prefix (fold/unfold), 3 postfix, 4 atom.
fn term_level(t: &Term) -> u8 {
    match t {
        Term::Lam { .. } | Term::TLam { .. } | Term::Open { .. } | Term::Update { .. } => 0,
        Term::App { .. } => 1,
        Term::Fold { .. } | Term::Unfold { .. } => 2,
        Term::Invoke { .. } | Term::TApp { .. } => 3,
        _ => 4,
    }
}

fn write_term(s: &mut String, t: &Term, level: u8) {
    let paren = term_level(t) < level;
    if paren {
        s.push('(');
    }
    match t {
        Term::Var { name } => s.push_str(name),
        Term::Obj { annot, methods } => {
            s.push_str("obj ");
            write_type(s, annot, 1);
            s.push_str(" {");
            for (i, m) in methods.iter().enumerate() {
                s.push_str(if i > 0 { ", " } else { " " });
                let _ = write!(s, "{} = ", m.name);
                write_sigma(s, &m.self_var, &m.self_annot, &m.body);
            }
            s.push_str(if methods.is_empty() { "}" } else { " }" });
        }
        Term::Invoke { recv, method } => {
            write_term(s, recv, 3);
            let _ = write!(s, ".{method}");
        }
        Term::Update { recv, method, self_var, self_annot, body } => {
            write_term(s, recv, 3);
            let _ = write!(s, ".{method} := ");
            write_sigma(s, self_var, self_annot, body);
        }
        Term::Clone { arg } => {
            s.push_str("clone(");
            write_term(s, arg, 0);
            s.push(')');
        }
        Term::Lam { var, annot, body } => {
            let _ = write!(s, "\\({var}:");
            write_type(s, annot, 0);
            s.push_str(") ");
            write_term(s, body, 0);
        }
        Term::App { fun, arg } => {
            write_term(s, fun, 1);
            s.push(' ');
            write_term(s, arg, 2);
        }
        Term::Fold { annot, arg } | Term::Unfold { annot, arg } => {
            s.push_str(if matches!(t, Term::Fold { .. }) { "fold[" } else { "unfold[" });
            write_type(s, annot, 0);
            s.push_str("] ");
            write_term(s, arg, 3);
        }
        Term::TLam { var, bound, body } => {
            let _ = write!(s, "Fun({var}<:");
            write_type(s, bound, 0);
            s.push_str(") ");
            write_term(s, body, 0);
        }
        Term::TApp { fun, arg } => {
            write_term(s, fun, 3);
            s.push('[');
            write_type(s, arg, 0);
            s.push(']');
        }
        Term::Pack { var, bound, witness, payload, body_ty } => {
            let _ = write!(s, "pack<{var}<:");
            write_type(s, bound, 0);
            s.push('=');
            write_type(s, witness, 0);
            s.push_str(", ");
            write_term(s, payload, 0);
            s.push_str(" : ");
            write_type(s, body_ty, 0);
            s.push('>');
        }
        Term::Open { arg, tvar, bound, var, var_ty, body, result_ty } => {
            s.push_str("open ");
            write_term(s, arg, 0);
            let _ = write!(s, " as <{tvar}<:");
            write_type(s, bound, 0);
            let _ = write!(s, ", {var}:");
            write_type(s, var_ty, 0);
            s.push_str("> in ");
            write_term(s, body, 0);
            s.push_str(" : ");
            write_type(s, result_ty, 0);
        }
        Term::RtObj { fields } => {
            s.push('{');
            for (i, f) in fields.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                let _ = write!(s, "{}={}", f.name, f.loc);
            }
            s.push('}');
        }
    }
    if paren {
        s.push(')');
    }
}

fn write_sigma(s: &mut String, x: &str, annot: &Type, body: &Term) {
    let _ = write!(s, "self({x}:");
    write_type(s, annot, 0);
    s.push_str(") ");
    write_term(s, body, 0);
}
