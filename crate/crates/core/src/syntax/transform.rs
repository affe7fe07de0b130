//! Annotation erasure and the self-type encoding.

use super::ast::{MethodType, Term, Type};
use super::binding::{free_type_vars, fresh_name, map_annotations};

/// Replaces every type annotation in `t` by `Top`.
pub fn erase_annotations(t: &Term) -> Term {
    map_annotations(t, &|_| Type::Top)
}

/// Rewrites every `Obj(X)[ms]` into `mu Y. Some(X<:Y) [ms]` with `Y` fresh,
/// innermost occurrences first.
pub fn desugar_self(ty: &Type) -> Type {
    let methods = |ms: &[MethodType]| -> Vec<MethodType> {
        ms.iter()
            .map(|m| MethodType { name: m.name.clone(), variance: m.variance, ty: desugar_self(&m.ty) })
            .collect()
    };
    match ty {
        Type::Var { .. } | Type::Top | Type::Bot => ty.clone(),
        Type::Arrow { dom, cod } => Type::arrow(desugar_self(dom), desugar_self(cod)),
        Type::Obj { methods: ms } => Type::Obj { methods: methods(ms) },
        Type::Split { methods: ms } => Type::Split {
            methods: ms
                .iter()
                .map(|m| super::ast::SplitMethod {
                    name: m.name.clone(),
                    write: desugar_self(&m.write),
                    read: desugar_self(&m.read),
                })
                .collect(),
        },
        Type::Mu { var, body } => Type::mu(var.clone(), desugar_self(body)),
        Type::All { var, bound, body } => Type::all(var.clone(), desugar_self(bound), desugar_self(body)),
        Type::Exists { var, bound, body } => {
            Type::exists(var.clone(), desugar_self(bound), desugar_self(body))
        }
        Type::SelfObj { var, methods: ms } => {
            let inner = Type::Obj { methods: methods(ms) };
            let fv = free_type_vars(&inner);
            let host = fresh_name("Y", &|c| c == var || fv.contains(c));
            Type::mu(host.clone(), Type::exists(var.clone(), Type::var(host), inner))
        }
    }
}

/// Applies [`desugar_self`] to every annotation of a term.
pub fn desugar_self_in_term(t: &Term) -> Term {
    map_annotations(t, &desugar_self)
}

/// Whether any `Obj(X)[...]` node remains.
pub fn has_self_types(ty: &Type) -> bool {
    match ty {
        Type::SelfObj { .. } => true,
        Type::Var { .. } | Type::Top | Type::Bot => false,
        Type::Arrow { dom, cod } => has_self_types(dom) || has_self_types(cod),
        Type::Obj { methods } => methods.iter().any(|m| has_self_types(&m.ty)),
        Type::Split { methods } => methods.iter().any(|m| has_self_types(&m.write) || has_self_types(&m.read)),
        Type::Mu { body, .. } => has_self_types(body),
        Type::All { bound, body, .. } | Type::Exists { bound, body, .. } => {
            has_self_types(bound) || has_self_types(body)
        }
    }
}

/// JSON dump of a term, one object per node tagged with `kind`.
pub fn term_to_json(t: &Term) -> serde_json::Value {
    serde_json::to_value(t).expect("terms serialize")
}

/// JSON dump of a type, one object per node tagged with `kind`.
pub fn type_to_json(ty: &Type) -> serde_json::Value {
    serde_json::to_value(ty).expect("types serialize")
}
