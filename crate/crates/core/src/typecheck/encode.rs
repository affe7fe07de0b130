use super::Mutation;
use crate::syntax::{map_annotations, MethodType, SplitMethod, Term, Type, Variance};

/// Replaces every variance-annotated object type by its split form:
/// `inv A` becomes `(A, A)`, `cov A` becomes `(Bot, A)`, `con A` becomes
/// `(A, Top)`.
pub fn encode_to_split(ty: &Type, mutation: Option<Mutation>) -> Type {
    let enc = |t: &Type| encode_to_split(t, mutation);
    match ty {
        Type::Var { .. } | Type::Top | Type::Bot => ty.clone(),
        Type::Arrow { dom, cod } => Type::arrow(enc(dom), enc(cod)),
        Type::Obj { methods } => Type::Split { methods: methods.iter().map(|m| encode_method(m, mutation)).collect() },
        Type::Split { methods } => Type::Split {
            methods: methods
                .iter()
                .map(|m| SplitMethod { name: m.name.clone(), write: enc(&m.write), read: enc(&m.read) })
                .collect(),
        },
        Type::Mu { var, body } => Type::mu(var.clone(), enc(body)),
        Type::All { var, bound, body } => Type::all(var.clone(), enc(bound), enc(body)),
        Type::Exists { var, bound, body } => Type::exists(var.clone(), enc(bound), enc(body)),
        Type::SelfObj { var, methods } => Type::SelfObj {
            var: var.clone(),
            methods: methods
                .iter()
                .map(|m| MethodType { name: m.name.clone(), variance: m.variance, ty: enc(&m.ty) })
                .collect(),
        },
    }
}

fn encode_method(m: &MethodType, mutation: Option<Mutation>) -> SplitMethod {
    let ty = encode_to_split(&m.ty, mutation);
    let (write, read) = match m.variance {
        Variance::Inv => (ty.clone(), ty),
        Variance::Cov => (Type::Bot, ty),
        Variance::Con if mutation == Some(Mutation::ConReadAtPayload) => (ty.clone(), ty),
        Variance::Con => (ty, Type::Top),
    };
    SplitMethod { name: m.name.clone(), write, read }
}

/// [`encode_to_split`] applied to every annotation of a term.
pub fn encode_term_to_split(t: &Term, mutation: Option<Mutation>) -> Term {
    map_annotations(t, &|ty| encode_to_split(ty, mutation))
}
