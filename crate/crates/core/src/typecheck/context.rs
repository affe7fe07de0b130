use crate::syntax::{free_type_vars, Type};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;

/// One entry of a typing context.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Binding {
    /// `x : A`
    Term { name: String, ty: Type },
    /// `X <: A`
    Type { name: String, bound: Type },
}

/// An ordered typing context; later entries are innermost.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Context {
    entries: Vec<Binding>,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn entries(&self) -> &[Binding] {
        &self.entries
    }

    pub fn push_term(&mut self, name: impl Into<String>, ty: Type) {
        self.entries.push(Binding::Term { name: name.into(), ty });
    }

    pub fn push_type(&mut self, name: impl Into<String>, bound: Type) {
        self.entries.push(Binding::Type { name: name.into(), bound });
    }

    pub fn with_term(mut self, name: impl Into<String>, ty: Type) -> Context {
        self.push_term(name, ty);
        self
    }

    pub fn with_type(mut self, name: impl Into<String>, bound: Type) -> Context {
        self.push_type(name, bound);
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn truncate(&mut self, len: usize) {
        self.entries.truncate(len);
    }

    pub fn term(&self, name: &str) -> Option<&Type> {
        self.entries.iter().rev().find_map(|b| match b {
            Binding::Term { name: n, ty } if n == name => Some(ty),
            _ => None,
        })
    }

    pub fn bound(&self, name: &str) -> Option<&Type> {
        self.entries.iter().rev().find_map(|b| match b {
            Binding::Type { name: n, bound } if n == name => Some(bound),
            _ => None,
        })
    }

    pub fn has_term(&self, name: &str) -> bool {
        self.term(name).is_some()
    }

    pub fn has_type(&self, name: &str) -> bool {
        self.bound(name).is_some()
    }

    pub fn type_names(&self) -> BTreeSet<String> {
        self.entries
            .iter()
            .filter_map(|b| match b {
                Binding::Type { name, .. } => Some(name.clone()),
                Binding::Term { .. } => None,
            })
            .collect()
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match b {
                Binding::Term { name, ty } => write!(f, "{name}:{ty}")?,
                Binding::Type { name, bound } => write!(f, "{name}<:{bound}")?,
            }
        }
        Ok(())
    }
}

/// Every type variable of `ty` is bound in `ctx` or by an enclosing binder,
/// and method names are distinct within each object type.
pub fn wf_type(ctx: &Context, ty: &Type) -> bool {
    free_type_vars(ty).iter().all(|v| ctx.has_type(v)) && distinct_methods(ty)
}

fn distinct_methods(ty: &Type) -> bool {
    fn distinct<'a>(names: impl Iterator<Item = &'a String>) -> bool {
        let mut seen = BTreeSet::new();
        names.into_iter().all(|n| seen.insert(n))
    }
    match ty {
        Type::Var { .. } | Type::Top | Type::Bot => true,
        Type::Arrow { dom, cod } => distinct_methods(dom) && distinct_methods(cod),
        Type::Obj { methods } | Type::SelfObj { methods, .. } => {
            distinct(methods.iter().map(|m| &m.name)) && methods.iter().all(|m| distinct_methods(&m.ty))
        }
        Type::Split { methods } => {
            distinct(methods.iter().map(|m| &m.name))
                && methods.iter().all(|m| distinct_methods(&m.write) && distinct_methods(&m.read))
        }
        Type::Mu { body, .. } => distinct_methods(body),
        Type::All { bound, body, .. } | Type::Exists { bound, body, .. } => {
            distinct_methods(bound) && distinct_methods(body)
        }
    }
}

/// No duplicate bindings and every type well-formed in its prefix.
pub fn wf_context(ctx: &Context) -> bool {
    let mut prefix = Context::new();
    for b in ctx.entries() {
        match b {
            Binding::Term { name, ty } => {
                if prefix.has_term(name) || !wf_type(&prefix, ty) {
                    return false;
                }
            }
            Binding::Type { name, bound } => {
                if prefix.has_type(name) || !wf_type(&prefix, bound) {
                    return false;
                }
            }
        }
        prefix.entries.push(b.clone());
    }
    true
}
