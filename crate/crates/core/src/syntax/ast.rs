//! Abstract syntax of types and terms.
//!
//! Method collections keep insertion order so that printing is
//! reproducible; every comparison treats them as unordered maps.

use serde::Serialize;
use std::fmt;

/// Per-method variance annotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Variance {
    /// Invocable and updatable.
    Inv,
    /// Invoke-only.
    Cov,
    /// Update-only.
    Con,
}

impl Variance {
    pub const ALL: [Variance; 3] = [Variance::Inv, Variance::Cov, Variance::Con];

    pub fn keyword(self) -> &'static str {
        match self {
            Variance::Inv => "inv",
            Variance::Cov => "cov",
            Variance::Con => "con",
        }
    }

    /// Whether a method with this annotation may be invoked.
    pub fn readable(self) -> bool {
        matches!(self, Variance::Inv | Variance::Cov)
    }

    /// Whether a method with this annotation may be updated.
    pub fn writable(self) -> bool {
        matches!(self, Variance::Inv | Variance::Con)
    }
}

impl fmt::Display for Variance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A heap location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Loc(pub u64);

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

/// One entry of a variance-annotated object type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MethodType {
    pub name: String,
    pub variance: Variance,
    pub ty: Type,
}

/// One entry of a split object type: the write type and the read type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SplitMethod {
    pub name: String,
    pub write: Type,
    pub read: Type,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind")]
pub enum Type {
    Var { name: String },
    Top,
    Bot,
    Arrow { dom: Box<Type>, cod: Box<Type> },
    Obj { methods: Vec<MethodType> },
    Split { methods: Vec<SplitMethod> },
    Mu { var: String, body: Box<Type> },
    All { var: String, bound: Box<Type>, body: Box<Type> },
    Exists { var: String, bound: Box<Type>, body: Box<Type> },
    SelfObj { var: String, methods: Vec<MethodType> },
}

impl Type {
    pub fn var(name: impl Into<String>) -> Type {
        Type::Var { name: name.into() }
    }

    pub fn arrow(dom: Type, cod: Type) -> Type {
        Type::Arrow { dom: Box::new(dom), cod: Box::new(cod) }
    }

    pub fn obj<I, S>(methods: I) -> Type
    where
        I: IntoIterator<Item = (S, Variance, Type)>,
        S: Into<String>,
    {
        Type::Obj {
            methods: methods
                .into_iter()
                .map(|(n, variance, ty)| MethodType { name: n.into(), variance, ty })
                .collect(),
        }
    }

    pub fn split<I, S>(methods: I) -> Type
    where
        I: IntoIterator<Item = (S, Type, Type)>,
        S: Into<String>,
    {
        Type::Split {
            methods: methods
                .into_iter()
                .map(|(n, write, read)| SplitMethod { name: n.into(), write, read })
                .collect(),
        }
    }

    pub fn mu(var: impl Into<String>, body: Type) -> Type {
        Type::Mu { var: var.into(), body: Box::new(body) }
    }

    pub fn all(var: impl Into<String>, bound: Type, body: Type) -> Type {
        Type::All { var: var.into(), bound: Box::new(bound), body: Box::new(body) }
    }

    pub fn exists(var: impl Into<String>, bound: Type, body: Type) -> Type {
        Type::Exists { var: var.into(), bound: Box::new(bound), body: Box::new(body) }
    }

    /// Number of constructor nodes.
    pub fn size(&self) -> usize {
        match self {
            Type::Var { .. } | Type::Top | Type::Bot => 1,
            Type::Arrow { dom, cod } => 1 + dom.size() + cod.size(),
            Type::Obj { methods } | Type::SelfObj { methods, .. } => {
                1 + methods.iter().map(|m| m.ty.size()).sum::<usize>()
            }
            Type::Split { methods } => {
                1 + methods.iter().map(|m| m.write.size() + m.read.size()).sum::<usize>()
            }
            Type::Mu { body, .. } => 1 + body.size(),
            Type::All { bound, body, .. } | Type::Exists { bound, body, .. } => {
                1 + bound.size() + body.size()
            }
        }
    }
}

/// A method of an object literal: `m = ς(self_var:self_annot) body`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Method {
    pub name: String,
    pub self_var: String,
    pub self_annot: Type,
    pub body: Term,
}

/// A field of a run-time object.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Field {
    pub name: String,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind")]
pub enum Term {
    Var {
        name: String,
    },
    Obj {
        annot: Type,
        methods: Vec<Method>,
    },
    Invoke {
        recv: Box<Term>,
        method: String,
    },
    Update {
        recv: Box<Term>,
        method: String,
        self_var: String,
        self_annot: Type,
        body: Box<Term>,
    },
    Clone {
        arg: Box<Term>,
    },
    Lam {
        var: String,
        annot: Type,
        body: Box<Term>,
    },
    App {
        fun: Box<Term>,
        arg: Box<Term>,
    },
    Fold {
        annot: Type,
        arg: Box<Term>,
    },
    Unfold {
        annot: Type,
        arg: Box<Term>,
    },
    TLam {
        var: String,
        bound: Type,
        body: Box<Term>,
    },
    TApp {
        fun: Box<Term>,
        arg: Type,
    },
    Pack {
        var: String,
        bound: Type,
        witness: Type,
        payload: Box<Term>,
        body_ty: Type,
    },
    Open {
        arg: Box<Term>,
        tvar: String,
        bound: Type,
        var: String,
        var_ty: Type,
        body: Box<Term>,
        result_ty: Type,
    },
    RtObj {
        fields: Vec<Field>,
    },
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var { name: name.into() }
    }

    pub fn lam(var: impl Into<String>, annot: Type, body: Term) -> Term {
        Term::Lam { var: var.into(), annot, body: Box::new(body) }
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App { fun: Box::new(fun), arg: Box::new(arg) }
    }

    pub fn invoke(recv: Term, method: impl Into<String>) -> Term {
        Term::Invoke { recv: Box::new(recv), method: method.into() }
    }

    pub fn clone_of(arg: Term) -> Term {
        Term::Clone { arg: Box::new(arg) }
    }

    pub fn update(
        recv: Term,
        method: impl Into<String>,
        self_var: impl Into<String>,
        self_annot: Type,
        body: Term,
    ) -> Term {
        Term::Update {
            recv: Box::new(recv),
            method: method.into(),
            self_var: self_var.into(),
            self_annot,
            body: Box::new(body),
        }
    }

    pub fn fold(annot: Type, arg: Term) -> Term {
        Term::Fold { annot, arg: Box::new(arg) }
    }

    pub fn unfold(annot: Type, arg: Term) -> Term {
        Term::Unfold { annot, arg: Box::new(arg) }
    }

    pub fn tlam(var: impl Into<String>, bound: Type, body: Term) -> Term {
        Term::TLam { var: var.into(), bound, body: Box::new(body) }
    }

    pub fn tapp(fun: Term, arg: Type) -> Term {
        Term::TApp { fun: Box::new(fun), arg }
    }

    /// `obj annot { m = ς(x:annot) body, ... }` with every self annotation
    /// equal to the object annotation.
    pub fn obj<I, S, V>(annot: Type, methods: I) -> Term
    where
        I: IntoIterator<Item = (S, V, Term)>,
        S: Into<String>,
        V: Into<String>,
    {
        let methods = methods
            .into_iter()
            .map(|(n, x, body)| Method {
                name: n.into(),
                self_var: x.into(),
                self_annot: annot.clone(),
                body,
            })
            .collect();
        Term::Obj { annot, methods }
    }

    pub fn rt_obj<I, S>(fields: I) -> Term
    where
        I: IntoIterator<Item = (S, Loc)>,
        S: Into<String>,
    {
        Term::RtObj {
            fields: fields.into_iter().map(|(n, loc)| Field { name: n.into(), loc }).collect(),
        }
    }

    /// `let x = bound in body`, i.e. `(λ(x:annot) body) bound`.
    pub fn let_in(x: impl Into<String>, annot: Type, bound: Term, body: Term) -> Term {
        Term::app(Term::lam(x, annot, body), bound)
    }

    /// Membership in the value grammar.
    pub fn is_value(&self) -> bool {
        match self {
            Term::RtObj { .. } | Term::Lam { .. } | Term::TLam { .. } => true,
            Term::Fold { arg, .. } => arg.is_value(),
            Term::Pack { payload, .. } => payload.is_value(),
            _ => false,
        }
    }

    /// Height of the term tree; variables and run-time objects have height 1.
    pub fn depth(&self) -> usize {
        1 + match self {
            Term::Var { .. } | Term::RtObj { .. } => 0,
            Term::Obj { methods, .. } => methods.iter().map(|m| m.body.depth()).max().unwrap_or(0),
            Term::Invoke { recv: arg, .. }
            | Term::Clone { arg }
            | Term::Fold { arg, .. }
            | Term::Unfold { arg, .. }
            | Term::TApp { fun: arg, .. }
            | Term::Lam { body: arg, .. }
            | Term::TLam { body: arg, .. }
            | Term::Pack { payload: arg, .. } => arg.depth(),
            Term::Update { recv: a, body: b, .. } | Term::App { fun: a, arg: b } | Term::Open { arg: a, body: b, .. } => {
                a.depth().max(b.depth())
            }
        }
    }

    /// Number of constructor nodes, annotations excluded.
    pub fn size(&self) -> usize {
        match self {
            Term::Var { .. } | Term::RtObj { .. } => 1,
            Term::Obj { methods, .. } => 1 + methods.iter().map(|m| m.body.size()).sum::<usize>(),
            Term::Invoke { recv, .. } => 1 + recv.size(),
            Term::Update { recv, body, .. } => 1 + recv.size() + body.size(),
            Term::Clone { arg }
            | Term::Fold { arg, .. }
            | Term::Unfold { arg, .. }
            | Term::TApp { fun: arg, .. } => 1 + arg.size(),
            Term::Lam { body, .. } | Term::TLam { body, .. } => 1 + body.size(),
            Term::App { fun, arg } => 1 + fun.size() + arg.size(),
            Term::Pack { payload, .. } => 1 + payload.size(),
            Term::Open { arg, body, .. } => 1 + arg.size() + body.size(),
        }
    }
}
