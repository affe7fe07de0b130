//! Type codes: closed syntactic types standing for their interpretations,
//! with optional approximation ceilings at any node.

use crate::syntax::{desugar_self, Loc, MethodType, SplitMethod, Type, Variance};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// A method entry of an object, self or recursive-record code.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CodeMethod {
    pub name: String,
    pub variance: Variance,
    pub ty: TypeCode,
}

/// A method entry of a generalized (split) object code.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CodeSplit {
    pub name: String,
    pub write: TypeCode,
    pub read: TypeCode,
}

/// Code for a semantic type. Method lists are kept sorted by name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind")]
pub enum TypeCode {
    /// A variable bound by an enclosing binder of the code.
    Var { name: String },
    Top,
    Bot,
    Arrow { dom: Box<TypeCode>, cod: Box<TypeCode> },
    Obj { methods: Vec<CodeMethod> },
    Split { methods: Vec<CodeSplit> },
    /// Self type read directly, with `var` naming the hidden true type.
    SelfObj { var: String, methods: Vec<CodeMethod> },
    /// Recursive record type: the object's true type is the code itself.
    Rec { var: String, methods: Vec<CodeMethod> },
    Mu { var: String, body: Box<TypeCode> },
    All { var: String, bound: Box<TypeCode>, body: Box<TypeCode> },
    Exists { var: String, bound: Box<TypeCode>, body: Box<TypeCode> },
    /// `⌊body⌋_ceiling`: the triples of `body` with index below `ceiling`.
    Approx { ceiling: u32, body: Box<TypeCode> },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InterpError {
    /// A type variable is neither bound in the type nor mapped by the environment.
    #[error("unbound type variable {0}")]
    Unbound(String),
}

/// Environment from type variables to closed codes.
pub type CodeEnv = BTreeMap<String, TypeCode>;

fn sorted<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v
}

impl TypeCode {
    pub fn arrow(dom: TypeCode, cod: TypeCode) -> TypeCode {
        TypeCode::Arrow { dom: Box::new(dom), cod: Box::new(cod) }
    }

    pub fn obj<I, S>(methods: I) -> TypeCode
    where
        I: IntoIterator<Item = (S, Variance, TypeCode)>,
        S: Into<String>,
    {
        TypeCode::Obj {
            methods: sorted(methods.into_iter().map(|(n, variance, ty)| CodeMethod { name: n.into(), variance, ty }).collect()),
        }
    }

    pub fn split<I, S>(methods: I) -> TypeCode
    where
        I: IntoIterator<Item = (S, TypeCode, TypeCode)>,
        S: Into<String>,
    {
        TypeCode::Split {
            methods: sorted(methods.into_iter().map(|(n, write, read)| CodeSplit { name: n.into(), write, read }).collect()),
        }
    }

    pub fn self_obj(var: impl Into<String>, methods: Vec<CodeMethod>) -> TypeCode {
        TypeCode::SelfObj { var: var.into(), methods: sorted(methods) }
    }

    /// The recursive record code sharing the methods of a self or object code.
    pub fn rec_of(&self) -> Option<TypeCode> {
        match self {
            TypeCode::SelfObj { var, methods } | TypeCode::Rec { var, methods } => {
                Some(TypeCode::Rec { var: var.clone(), methods: methods.clone() })
            }
            TypeCode::Obj { methods } => {
                let var = fresh_code_var("R", self);
                Some(TypeCode::Rec { var, methods: methods.clone() })
            }
            _ => None,
        }
    }

    pub fn mu(var: impl Into<String>, body: TypeCode) -> TypeCode {
        TypeCode::Mu { var: var.into(), body: Box::new(body) }
    }

    pub fn all(var: impl Into<String>, bound: TypeCode, body: TypeCode) -> TypeCode {
        TypeCode::All { var: var.into(), bound: Box::new(bound), body: Box::new(body) }
    }

    pub fn exists(var: impl Into<String>, bound: TypeCode, body: TypeCode) -> TypeCode {
        TypeCode::Exists { var: var.into(), bound: Box::new(bound), body: Box::new(body) }
    }

    /// The outermost effective ceiling; `None` stands for infinity.
    pub fn ceiling(&self) -> Option<u32> {
        match self {
            TypeCode::Approx { ceiling, body } => Some(body.ceiling().map_or(*ceiling, |c| c.min(*ceiling))),
            _ => None,
        }
    }

    /// The code under any outer approximations.
    pub fn strip(&self) -> &TypeCode {
        match self {
            TypeCode::Approx { body, .. } => body.strip(),
            other => other,
        }
    }

    /// Codes read off a syntactic type with no free variables; self types
    /// are desugared.
    pub fn from_type(ty: &Type) -> Result<TypeCode, InterpError> {
        interp(ty, &CodeEnv::new())
    }

    /// Back to a syntactic type, when the code has no approximation or
    /// recursive-record node.
    pub fn to_type(&self) -> Option<Type> {
        let methods = |ms: &[CodeMethod]| -> Option<Vec<MethodType>> {
            ms.iter()
                .map(|m| Some(MethodType { name: m.name.clone(), variance: m.variance, ty: m.ty.to_type()? }))
                .collect()
        };
        Some(match self {
            TypeCode::Var { name } => Type::var(name.clone()),
            TypeCode::Top => Type::Top,
            TypeCode::Bot => Type::Bot,
            TypeCode::Arrow { dom, cod } => Type::arrow(dom.to_type()?, cod.to_type()?),
            TypeCode::Obj { methods: ms } => Type::Obj { methods: methods(ms)? },
            TypeCode::Split { methods: ms } => Type::Split {
                methods: ms
                    .iter()
                    .map(|m| {
                        Some(SplitMethod { name: m.name.clone(), write: m.write.to_type()?, read: m.read.to_type()? })
                    })
                    .collect::<Option<_>>()?,
            },
            TypeCode::SelfObj { var, methods: ms } => Type::SelfObj { var: var.clone(), methods: methods(ms)? },
            TypeCode::Mu { var, body } => Type::mu(var.clone(), body.to_type()?),
            TypeCode::All { var, bound, body } => Type::all(var.clone(), bound.to_type()?, body.to_type()?),
            TypeCode::Exists { var, bound, body } => Type::exists(var.clone(), bound.to_type()?, body.to_type()?),
            TypeCode::Rec { .. } | TypeCode::Approx { .. } => return None,
        })
    }

    /// A syntactic type for annotations: ceilings are dropped and a
    /// recursive record is written as the self type with its methods.
    pub fn to_type_lossy(&self) -> Type {
        let erased = self.erase_ceilings();
        let rewrite = |c: &TypeCode| -> TypeCode {
            fn go(c: &TypeCode) -> TypeCode {
                let ms = |ms: &[CodeMethod]| -> Vec<CodeMethod> {
                    ms.iter().map(|m| CodeMethod { ty: go(&m.ty), ..m.clone() }).collect()
                };
                match c {
                    TypeCode::Rec { var, methods } | TypeCode::SelfObj { var, methods } => {
                        TypeCode::SelfObj { var: var.clone(), methods: ms(methods) }
                    }
                    TypeCode::Obj { methods } => TypeCode::Obj { methods: ms(methods) },
                    TypeCode::Split { methods } => TypeCode::Split {
                        methods: methods
                            .iter()
                            .map(|m| CodeSplit { name: m.name.clone(), write: go(&m.write), read: go(&m.read) })
                            .collect(),
                    },
                    TypeCode::Arrow { dom, cod } => TypeCode::arrow(go(dom), go(cod)),
                    TypeCode::Mu { var, body } => TypeCode::mu(var.clone(), go(body)),
                    TypeCode::All { var, bound, body } => TypeCode::all(var.clone(), go(bound), go(body)),
                    TypeCode::Exists { var, bound, body } => TypeCode::exists(var.clone(), go(bound), go(body)),
                    other => other.clone(),
                }
            }
            go(c)
        };
        rewrite(&erased).to_type().unwrap_or(Type::Top)
    }

    /// Free variables of the code.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        collect_free(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Replaces free occurrences of `var` by the closed code `repl`.
    pub fn subst(&self, var: &str, repl: &TypeCode) -> TypeCode {
        let methods = |ms: &[CodeMethod]| -> Vec<CodeMethod> {
            ms.iter()
                .map(|m| CodeMethod { name: m.name.clone(), variance: m.variance, ty: m.ty.subst(var, repl) })
                .collect()
        };
        match self {
            TypeCode::Var { name } if name == var => repl.clone(),
            TypeCode::Var { .. } | TypeCode::Top | TypeCode::Bot => self.clone(),
            TypeCode::Arrow { dom, cod } => TypeCode::arrow(dom.subst(var, repl), cod.subst(var, repl)),
            TypeCode::Obj { methods: ms } => TypeCode::Obj { methods: methods(ms) },
            TypeCode::Split { methods: ms } => TypeCode::Split {
                methods: ms
                    .iter()
                    .map(|m| CodeSplit { name: m.name.clone(), write: m.write.subst(var, repl), read: m.read.subst(var, repl) })
                    .collect(),
            },
            TypeCode::SelfObj { var: x, .. } | TypeCode::Rec { var: x, .. } if x == var => self.clone(),
            TypeCode::SelfObj { var: x, methods: ms } => TypeCode::SelfObj { var: x.clone(), methods: methods(ms) },
            TypeCode::Rec { var: x, methods: ms } => TypeCode::Rec { var: x.clone(), methods: methods(ms) },
            TypeCode::Mu { var: x, .. } if x == var => self.clone(),
            TypeCode::Mu { var: x, body } => TypeCode::mu(x.clone(), body.subst(var, repl)),
            TypeCode::All { var: x, bound, body } => {
                let body = if x == var { (**body).clone() } else { body.subst(var, repl) };
                TypeCode::all(x.clone(), bound.subst(var, repl), body)
            }
            TypeCode::Exists { var: x, bound, body } => {
                let body = if x == var { (**body).clone() } else { body.subst(var, repl) };
                TypeCode::exists(x.clone(), bound.subst(var, repl), body)
            }
            TypeCode::Approx { ceiling, body } => approx_code(&body.subst(var, repl), *ceiling),
        }
    }

    /// One unrolling of a recursive code: `body[var := self]`.
    pub fn unroll(&self) -> Option<TypeCode> {
        match self {
            TypeCode::Mu { var, body } => Some(body.subst(var, self)),
            _ => None,
        }
    }

    /// The code as observed at indices strictly below `n`.
    ///
    /// Membership at index `i` only consults sub-codes at indices below
    /// `i`, so ceilings that can no longer bite are dropped and everything
    /// observed at no index collapses to `Bot`. Two codes with alpha-equal
    /// trims have equal `n`-th approximations.
    pub fn trim(&self, n: u32) -> TypeCode {
        if n == 0 {
            return TypeCode::Bot;
        }
        let below = n - 1;
        let methods = |ms: &[CodeMethod]| -> Vec<CodeMethod> {
            ms.iter()
                .map(|m| CodeMethod { name: m.name.clone(), variance: m.variance, ty: m.ty.trim(below) })
                .collect()
        };
        match self {
            TypeCode::Var { .. } | TypeCode::Top | TypeCode::Bot => self.clone(),
            TypeCode::Approx { ceiling, body } => {
                if *ceiling >= n {
                    body.trim(n)
                } else if *ceiling == 0 {
                    TypeCode::Bot
                } else {
                    TypeCode::Approx { ceiling: *ceiling, body: Box::new(body.trim(*ceiling)) }
                }
            }
            TypeCode::Arrow { dom, cod } => TypeCode::arrow(dom.trim(below), cod.trim(below)),
            TypeCode::Obj { methods: ms } => TypeCode::Obj { methods: methods(ms) },
            TypeCode::Split { methods: ms } => TypeCode::Split {
                methods: ms
                    .iter()
                    .map(|m| CodeSplit { name: m.name.clone(), write: m.write.trim(below), read: m.read.trim(below) })
                    .collect(),
            },
            TypeCode::SelfObj { var, methods: ms } => TypeCode::SelfObj { var: var.clone(), methods: methods(ms) },
            TypeCode::Rec { var, methods: ms } => TypeCode::Rec { var: var.clone(), methods: methods(ms) },
            TypeCode::Mu { var, body } => TypeCode::mu(var.clone(), body.trim(below)),
            TypeCode::All { var, bound, body } => TypeCode::all(var.clone(), bound.trim(below), body.trim(below)),
            TypeCode::Exists { var, bound, body } => {
                TypeCode::exists(var.clone(), bound.trim(below), body.trim(below))
            }
        }
    }

    /// Drops every approximation node.
    pub fn erase_ceilings(&self) -> TypeCode {
        let methods = |ms: &[CodeMethod]| -> Vec<CodeMethod> {
            ms.iter()
                .map(|m| CodeMethod { name: m.name.clone(), variance: m.variance, ty: m.ty.erase_ceilings() })
                .collect()
        };
        match self {
            TypeCode::Var { .. } | TypeCode::Top | TypeCode::Bot => self.clone(),
            TypeCode::Approx { body, .. } => body.erase_ceilings(),
            TypeCode::Arrow { dom, cod } => TypeCode::arrow(dom.erase_ceilings(), cod.erase_ceilings()),
            TypeCode::Obj { methods: ms } => TypeCode::Obj { methods: methods(ms) },
            TypeCode::Split { methods: ms } => TypeCode::Split {
                methods: ms
                    .iter()
                    .map(|m| CodeSplit {
                        name: m.name.clone(),
                        write: m.write.erase_ceilings(),
                        read: m.read.erase_ceilings(),
                    })
                    .collect(),
            },
            TypeCode::SelfObj { var, methods: ms } => TypeCode::SelfObj { var: var.clone(), methods: methods(ms) },
            TypeCode::Rec { var, methods: ms } => TypeCode::Rec { var: var.clone(), methods: methods(ms) },
            TypeCode::Mu { var, body } => TypeCode::mu(var.clone(), body.erase_ceilings()),
            TypeCode::All { var, bound, body } => {
                TypeCode::all(var.clone(), bound.erase_ceilings(), body.erase_ceilings())
            }
            TypeCode::Exists { var, bound, body } => {
                TypeCode::exists(var.clone(), bound.erase_ceilings(), body.erase_ceilings())
            }
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        let ms = |ms: &[CodeMethod]| ms.iter().map(|m| m.ty.size()).sum::<usize>();
        1 + match self {
            TypeCode::Var { .. } | TypeCode::Top | TypeCode::Bot => 0,
            TypeCode::Arrow { dom, cod } => dom.size() + cod.size(),
            TypeCode::Obj { methods } | TypeCode::SelfObj { methods, .. } | TypeCode::Rec { methods, .. } => ms(methods),
            TypeCode::Split { methods } => methods.iter().map(|m| m.write.size() + m.read.size()).sum(),
            TypeCode::Mu { body, .. } | TypeCode::Approx { body, .. } => body.size(),
            TypeCode::All { bound, body, .. } | TypeCode::Exists { bound, body, .. } => bound.size() + body.size(),
        }
    }
}

fn collect_free(c: &TypeCode, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match c {
        TypeCode::Var { name } => {
            if !bound.contains(name) {
                out.insert(name.clone());
            }
        }
        TypeCode::Top | TypeCode::Bot => {}
        TypeCode::Arrow { dom, cod } => {
            collect_free(dom, bound, out);
            collect_free(cod, bound, out);
        }
        TypeCode::Obj { methods } => methods.iter().for_each(|m| collect_free(&m.ty, bound, out)),
        TypeCode::Split { methods } => methods.iter().for_each(|m| {
            collect_free(&m.write, bound, out);
            collect_free(&m.read, bound, out);
        }),
        TypeCode::SelfObj { var, methods } | TypeCode::Rec { var, methods } => {
            bound.push(var.clone());
            methods.iter().for_each(|m| collect_free(&m.ty, bound, out));
            bound.pop();
        }
        TypeCode::Mu { var, body } => {
            bound.push(var.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
        TypeCode::All { var, bound: k, body } | TypeCode::Exists { var, bound: k, body } => {
            collect_free(k, bound, out);
            bound.push(var.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
        TypeCode::Approx { body, .. } => collect_free(body, bound, out),
    }
}

fn fresh_code_var(base: &str, c: &TypeCode) -> String {
    let used = c.free_vars();
    (0..).map(|i| if i == 0 { base.to_string() } else { format!("{base}{i}") }).find(|v| !used.contains(v)).unwrap()
}

/// `⌊τ⌋_k`: sets the outer ceiling to the minimum of the old one and `k`.
pub fn approx_code(code: &TypeCode, k: u32) -> TypeCode {
    match code {
        TypeCode::Approx { ceiling, body } => TypeCode::Approx { ceiling: (*ceiling).min(k), body: body.clone() },
        other => TypeCode::Approx { ceiling: k, body: Box::new(other.clone()) },
    }
}

/// Alpha-equivalence of codes; method lists compare as maps.
pub fn alpha_eq_code(a: &TypeCode, b: &TypeCode) -> bool {
    alpha(a, b, &mut Vec::new())
}

fn alpha(a: &TypeCode, b: &TypeCode, scope: &mut Vec<(String, String)>) -> bool {
    let same_var = |x: &str, y: &str, scope: &Vec<(String, String)>| {
        let l = scope.iter().rposition(|(p, _)| p == x);
        let r = scope.iter().rposition(|(_, q)| q == y);
        match (l, r) {
            (None, None) => x == y,
            (l, r) => l == r,
        }
    };
    let methods = |m1: &[CodeMethod], m2: &[CodeMethod], scope: &mut Vec<(String, String)>| {
        m1.len() == m2.len()
            && m1
                .iter()
                .zip(m2)
                .all(|(x, y)| x.name == y.name && x.variance == y.variance && alpha(&x.ty, &y.ty, scope))
    };
    match (a, b) {
        (TypeCode::Var { name: x }, TypeCode::Var { name: y }) => same_var(x, y, scope),
        (TypeCode::Top, TypeCode::Top) | (TypeCode::Bot, TypeCode::Bot) => true,
        (TypeCode::Arrow { dom: d1, cod: c1 }, TypeCode::Arrow { dom: d2, cod: c2 }) => {
            alpha(d1, d2, scope) && alpha(c1, c2, scope)
        }
        (TypeCode::Obj { methods: m1 }, TypeCode::Obj { methods: m2 }) => methods(m1, m2, scope),
        (TypeCode::Split { methods: m1 }, TypeCode::Split { methods: m2 }) => {
            m1.len() == m2.len()
                && m1.iter().zip(m2).all(|(x, y)| {
                    x.name == y.name && alpha(&x.write, &y.write, scope) && alpha(&x.read, &y.read, scope)
                })
        }
        (TypeCode::SelfObj { var: x, methods: m1 }, TypeCode::SelfObj { var: y, methods: m2 })
        | (TypeCode::Rec { var: x, methods: m1 }, TypeCode::Rec { var: y, methods: m2 }) => {
            scope.push((x.clone(), y.clone()));
            let r = methods(m1, m2, scope);
            scope.pop();
            r
        }
        (TypeCode::Mu { var: x, body: b1 }, TypeCode::Mu { var: y, body: b2 }) => {
            scope.push((x.clone(), y.clone()));
            let r = alpha(b1, b2, scope);
            scope.pop();
            r
        }
        (TypeCode::All { var: x, bound: k1, body: b1 }, TypeCode::All { var: y, bound: k2, body: b2 })
        | (TypeCode::Exists { var: x, bound: k1, body: b1 }, TypeCode::Exists { var: y, bound: k2, body: b2 }) => {
            if !alpha(k1, k2, scope) {
                return false;
            }
            scope.push((x.clone(), y.clone()));
            let r = alpha(b1, b2, scope);
            scope.pop();
            r
        }
        (TypeCode::Approx { ceiling: c1, body: b1 }, TypeCode::Approx { ceiling: c2, body: b2 }) => {
            c1 == c2 && alpha(b1, b2, scope)
        }
        _ => false,
    }
}

/// Interpretation of a syntactic type under `env`: variables are replaced by
/// their codes, self types are desugared, binders stay binders.
pub fn interp(ty: &Type, env: &CodeEnv) -> Result<TypeCode, InterpError> {
    convert(&desugar_self(ty), env, &mut Vec::new())
}

/// Like [`interp`] but keeps `Obj(X)[...]` as the direct self-type code.
pub fn interp_self_direct(ty: &Type, env: &CodeEnv) -> Result<TypeCode, InterpError> {
    convert(ty, env, &mut Vec::new())
}

fn convert(ty: &Type, env: &CodeEnv, bound: &mut Vec<String>) -> Result<TypeCode, InterpError> {
    let methods = |ms: &[MethodType], bound: &mut Vec<String>| -> Result<Vec<CodeMethod>, InterpError> {
        Ok(sorted(
            ms.iter()
                .map(|m| Ok(CodeMethod { name: m.name.clone(), variance: m.variance, ty: convert(&m.ty, env, bound)? }))
                .collect::<Result<Vec<_>, InterpError>>()?,
        ))
    };
    Ok(match ty {
        Type::Var { name } => {
            if bound.contains(name) {
                TypeCode::Var { name: name.clone() }
            } else {
                env.get(name).cloned().ok_or_else(|| InterpError::Unbound(name.clone()))?
            }
        }
        Type::Top => TypeCode::Top,
        Type::Bot => TypeCode::Bot,
        Type::Arrow { dom, cod } => TypeCode::arrow(convert(dom, env, bound)?, convert(cod, env, bound)?),
        Type::Obj { methods: ms } => TypeCode::Obj { methods: methods(ms, bound)? },
        Type::Split { methods: ms } => TypeCode::Split {
            methods: sorted(
                ms.iter()
                    .map(|m| {
                        Ok(CodeSplit {
                            name: m.name.clone(),
                            write: convert(&m.write, env, bound)?,
                            read: convert(&m.read, env, bound)?,
                        })
                    })
                    .collect::<Result<Vec<_>, InterpError>>()?,
            ),
        },
        Type::SelfObj { var, methods: ms } => {
            let ms = {
                bound.push(var.clone());
                let r = methods(ms, bound);
                bound.pop();
                r?
            };
            TypeCode::SelfObj { var: var.clone(), methods: ms }
        }
        Type::Mu { var, body } => TypeCode::mu(var.clone(), under(bound, var, |b| convert(body, env, b))?),
        Type::All { var, bound: k, body } => {
            let k = convert(k, env, bound)?;
            TypeCode::all(var.clone(), k, under(bound, var, |b| convert(body, env, b))?)
        }
        Type::Exists { var, bound: k, body } => {
            let k = convert(k, env, bound)?;
            TypeCode::exists(var.clone(), k, under(bound, var, |b| convert(body, env, b))?)
        }
    })
}

fn under<T>(bound: &mut Vec<String>, var: &str, f: impl FnOnce(&mut Vec<String>) -> T) -> T {
    bound.push(var.to_string());
    let r = f(bound);
    bound.pop();
    r
}

/// Pointwise `⌊η⌋_k`.
pub fn approx_env(env: &CodeEnv, k: u32) -> CodeEnv {
    env.iter().map(|(x, c)| (x.clone(), approx_code(c, k))).collect()
}

impl fmt::Display for TypeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_code(&mut s, self, 0);
        f.write_str(&s)
    }
}

fn write_code(s: &mut String, c: &TypeCode, level: u8) {
    let binder = matches!(c, TypeCode::Arrow { .. } | TypeCode::Mu { .. } | TypeCode::All { .. } | TypeCode::Exists { .. });
    let paren = level > 0 && binder;
    if paren {
        s.push('(');
    }
    let methods = |s: &mut String, ms: &[CodeMethod]| {
        s.push('[');
        for (i, m) in ms.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            s.push_str(&format!("{}:{} ", m.name, m.variance));
            write_code(s, &m.ty, 0);
        }
        s.push(']');
    };
    match c {
        TypeCode::Var { name } => s.push_str(name),
        TypeCode::Top => s.push_str("Top"),
        TypeCode::Bot => s.push_str("Bot"),
        TypeCode::Arrow { dom, cod } => {
            write_code(s, dom, 1);
            s.push_str(" -> ");
            write_code(s, cod, 0);
        }
        TypeCode::Obj { methods: ms } => methods(s, ms),
        TypeCode::Split { methods: ms } => {
            s.push('[');
            for (i, m) in ms.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                s.push_str(&format!("{}:(", m.name));
                write_code(s, &m.write, 0);
                s.push_str(", ");
                write_code(s, &m.read, 0);
                s.push(')');
            }
            s.push(']');
        }
        TypeCode::SelfObj { var, methods: ms } => {
            s.push_str(&format!("Obj({var})"));
            methods(s, ms);
        }
        TypeCode::Rec { var, methods: ms } => {
            s.push_str(&format!("Rec({var})"));
            methods(s, ms);
        }
        TypeCode::Mu { var, body } => {
            s.push_str(&format!("mu {var}. "));
            write_code(s, body, 0);
        }
        TypeCode::All { var, bound, body } | TypeCode::Exists { var, bound, body } => {
            let kw = if matches!(c, TypeCode::All { .. }) { "All" } else { "Some" };
            s.push_str(&format!("{kw}({var}<:"));
            write_code(s, bound, 0);
            s.push_str(") ");
            write_code(s, body, 0);
        }
        TypeCode::Approx { ceiling, body } => {
            s.push_str(&format!("approx[{ceiling}]("));
            write_code(s, body, 0);
            s.push(')');
        }
    }
    if paren {
        s.push(')');
    }
}

/// Finite heap typing: locations to closed codes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HeapTypingApprox {
    pub entries: BTreeMap<Loc, TypeCode>,
}

impl HeapTypingApprox {
    pub fn new() -> HeapTypingApprox {
        HeapTypingApprox::default()
    }

    pub fn from_entries<I: IntoIterator<Item = (Loc, TypeCode)>>(entries: I) -> HeapTypingApprox {
        HeapTypingApprox { entries: entries.into_iter().collect() }
    }

    pub fn get(&self, l: Loc) -> Option<&TypeCode> {
        self.entries.get(&l)
    }

    pub fn contains(&self, l: Loc) -> bool {
        self.entries.contains_key(&l)
    }

    pub fn insert(&mut self, l: Loc, code: TypeCode) {
        self.entries.insert(l, code);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn locs(&self) -> impl Iterator<Item = Loc> + '_ {
        self.entries.keys().copied()
    }

    /// `⌊Ψ⌋_k`, pointwise.
    pub fn approx(&self, k: u32) -> HeapTypingApprox {
        HeapTypingApprox { entries: self.entries.iter().map(|(l, c)| (*l, approx_code(c, k))).collect() }
    }

    /// The heap typing as observed by a membership query at index `k`.
    pub fn trim(&self, k: u32) -> HeapTypingApprox {
        HeapTypingApprox { entries: self.entries.iter().map(|(l, c)| (*l, c.trim(k))).collect() }
    }

    /// Union with entries at locations not already typed.
    pub fn extended(&self, delta: &HeapTypingApprox) -> HeapTypingApprox {
        let mut out = self.clone();
        for (l, c) in &delta.entries {
            out.entries.entry(*l).or_insert_with(|| c.clone());
        }
        out
    }

    /// Whether `delta` mentions no location typed here.
    pub fn disjoint(&self, delta: &HeapTypingApprox) -> bool {
        delta.entries.keys().all(|l| !self.entries.contains_key(l))
    }

    /// One past the largest location, but at least `floor`.
    pub fn next_free(&self, floor: u64) -> u64 {
        self.entries.keys().next_back().map_or(floor, |l| (l.0 + 1).max(floor))
    }
}

impl fmt::Display for HeapTypingApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (l, c)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l} : {c}")?;
        }
        f.write_str("}")
    }
}
