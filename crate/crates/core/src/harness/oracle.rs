//! Brute-force declarative subtyping over a finite universe of types.
//!
//! Every rule of the declarative system, including free-standing
//! transitivity, is applied as a closure step over all pairs of the
//! universe; `R_1` holds the axioms and `R_{d+1}` everything derivable by
//! one rule from `R_d`. Cut types for transitivity range over the same
//! universe. Recursive types are related through a second universe of open
//! types over the two variables of the recursive-type rule.

use crate::syntax::{parse_type, print_type, subst_type, Type, Variance};
use crate::typecheck::Context;
use std::collections::HashMap;
use std::sync::OnceLock;

/// Method names available to universe object types.
pub const UNIVERSE_METHODS: [&str; 2] = ["m", "n"];
/// Largest type size in the universe.
pub const UNIVERSE_MAX_SIZE: usize = 4;
/// Name of the single recursive-type variable.
pub const MU_VAR: &str = "X";
/// Name the recursive-type rule gives the right-hand variable.
pub const MU_VAR_RIGHT: &str = "Y";

/// The universe manifest shipped with the crate, one type per line.
pub const UNIVERSE_MANIFEST: &str = include_str!("../../data/universe.txt");

/// All types of exactly `size` over `vars`, with at most one recursive
/// binder when `allow_mu`.
fn enumerate_exact(size: usize, vars: &[&str], allow_mu: bool, memo: &mut HashMap<(usize, bool, usize), Vec<Type>>) -> Vec<Type> {
    let key = (size, allow_mu, vars.len());
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let mut out = Vec::new();
    if size == 1 {
        out.push(Type::Top);
        out.push(Type::Bot);
        out.extend(vars.iter().map(|v| Type::var(*v)));
        out.push(Type::Obj { methods: Vec::new() });
    }
    // Pairs of children sharing a budget of at most one recursive binder.
    let pairs = |a: usize, b: usize, memo: &mut HashMap<_, _>| -> Vec<(Type, Type)> {
        let mut ps = Vec::new();
        let plain_a = enumerate_exact(a, vars, false, memo);
        let plain_b = enumerate_exact(b, vars, false, memo);
        for x in &plain_a {
            for y in &plain_b {
                ps.push((x.clone(), y.clone()));
            }
        }
        if allow_mu {
            for x in enumerate_exact(a, vars, true, memo).iter().filter(|t| has_mu(t)) {
                for y in &plain_b {
                    ps.push((x.clone(), y.clone()));
                }
            }
            for x in &plain_a {
                for y in enumerate_exact(b, vars, true, memo).iter().filter(|t| has_mu(t)) {
                    ps.push((x.clone(), y.clone()));
                }
            }
        }
        ps
    };
    if size >= 3 {
        for a in 1..size - 1 {
            for (x, y) in pairs(a, size - 1 - a, memo) {
                out.push(Type::arrow(x, y));
            }
        }
    }
    if size >= 2 {
        for name in UNIVERSE_METHODS {
            for v in Variance::ALL {
                for x in enumerate_exact(size - 1, vars, allow_mu, memo) {
                    out.push(Type::obj([(name, v, x)]));
                }
            }
        }
    }
    if size >= 3 {
        for a in 1..size - 1 {
            for (x, y) in pairs(a, size - 1 - a, memo) {
                for v in Variance::ALL {
                    for w in Variance::ALL {
                        out.push(Type::obj([
                            (UNIVERSE_METHODS[0], v, x.clone()),
                            (UNIVERSE_METHODS[1], w, y.clone()),
                        ]));
                    }
                }
            }
        }
    }
    if allow_mu && size >= 2 && vars.is_empty() {
        let mut inner_memo = HashMap::new();
        for body in enumerate_exact(size - 1, &[MU_VAR], false, &mut inner_memo) {
            out.push(Type::mu(MU_VAR, body));
        }
    }
    memo.insert(key, out.clone());
    out
}

fn has_mu(t: &Type) -> bool {
    match t {
        Type::Mu { .. } => true,
        Type::Arrow { dom, cod } => has_mu(dom) || has_mu(cod),
        Type::Obj { methods } => methods.iter().any(|m| has_mu(&m.ty)),
        _ => false,
    }
}

fn enumerate(max: usize, vars: &[&str], allow_mu: bool) -> Vec<Type> {
    let mut memo = HashMap::new();
    (1..=max).flat_map(|s| enumerate_exact(s, vars, allow_mu, &mut memo)).collect()
}

/// The closed universe: sizes up to [`UNIVERSE_MAX_SIZE`], built from Top,
/// Bot, arrows, object types over [`UNIVERSE_METHODS`] and at most one
/// recursive binder.
pub fn enumerate_universe() -> Vec<Type> {
    enumerate(UNIVERSE_MAX_SIZE, &[], true)
}

/// Renders the universe in manifest form.
pub fn universe_manifest_text(types: &[Type]) -> String {
    types.iter().map(|t| print_type(t) + "\n").collect()
}

/// The universe as read back from the shipped manifest.
pub fn load_universe() -> Vec<Type> {
    UNIVERSE_MANIFEST
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_type(l).unwrap_or_else(|e| panic!("manifest line {l:?}: {e}")))
        .collect()
}

/// A square boolean relation stored as bit rows.
#[derive(Clone, PartialEq, Eq)]
struct Relation {
    words: usize,
    bits: Vec<u64>,
}

impl Relation {
    fn new(n: usize) -> Relation {
        let words = n.div_ceil(64);
        Relation { words, bits: vec![0; n * words] }
    }

    fn get(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    fn set(&mut self, a: usize, b: usize) {
        self.bits[a * self.words + b / 64] |= 1 << (b % 64);
    }

    fn row(&self, a: usize) -> &[u64] {
        &self.bits[a * self.words..(a + 1) * self.words]
    }
}

/// One universe with its index and the derivable relation at every depth
/// computed so far.
struct Layer {
    types: Vec<Type>,
    index: HashMap<Type, usize>,
    rel: Relation,
    arrows: Vec<usize>,
    objects: Vec<usize>,
}

impl Layer {
    fn new(types: Vec<Type>) -> Layer {
        let index = types.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let arrows = (0..types.len()).filter(|&i| matches!(types[i], Type::Arrow { .. })).collect();
        let objects = (0..types.len()).filter(|&i| matches!(types[i], Type::Obj { .. })).collect();
        let rel = Relation::new(types.len());
        Layer { types, index, rel, arrows, objects }
    }

    fn idx(&self, t: &Type) -> usize {
        *self.index.get(t).unwrap_or_else(|| panic!("{} outside the universe", print_type(t)))
    }
}

/// The declarative relation closed to a fixed derivation depth.
pub struct DeclarativeOracle {
    depth: usize,
    converged_at: Option<usize>,
    closed: Layer,
    open: Layer,
}

impl DeclarativeOracle {
    /// Closes the rules over the universe up to derivation depth `max_depth`.
    pub fn build(universe: Vec<Type>, max_depth: usize) -> DeclarativeOracle {
        let open_types = enumerate(UNIVERSE_MAX_SIZE, &[MU_VAR, MU_VAR_RIGHT], false);
        let mut closed = Layer::new(universe);
        let mut open = Layer::new(open_types);
        let mut converged_at = None;
        for depth in 1..=max_depth {
            let next_open = close_step(&open, None, depth);
            let next_closed = close_step(&closed, Some(&open), depth);
            let done = next_open == open.rel && next_closed == closed.rel;
            open.rel = next_open;
            closed.rel = next_closed;
            if done {
                converged_at = Some(depth - 1);
                break;
            }
        }
        DeclarativeOracle { depth: max_depth, converged_at, closed, open }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// The depth after which no rule added a pair, if reached.
    pub fn converged_at(&self) -> Option<usize> {
        self.converged_at
    }

    pub fn universe(&self) -> &[Type] {
        &self.closed.types
    }

    /// Derivability of `a <: b` in the empty context; `None` outside the
    /// universe.
    pub fn holds(&self, a: &Type, b: &Type) -> Option<bool> {
        let i = *self.closed.index.get(a)?;
        let j = *self.closed.index.get(b)?;
        Some(self.closed.rel.get(i, j))
    }

    /// Derivability under `Y <: Top, X <: Y` for open universe types.
    pub fn holds_open(&self, a: &Type, b: &Type) -> Option<bool> {
        let i = *self.open.index.get(a)?;
        let j = *self.open.index.get(b)?;
        Some(self.open.rel.get(i, j))
    }

    /// Derivability by index into [`Self::universe`].
    pub fn holds_at(&self, i: usize, j: usize) -> bool {
        self.closed.rel.get(i, j)
    }
}

/// One closure step. `rec` is the open layer, present for the closed one.
fn close_step(layer: &Layer, rec: Option<&Layer>, depth: usize) -> Relation {
    let n = layer.types.len();
    let prev = &layer.rel;
    let mut next = Relation::new(n);
    let top = layer.index.get(&Type::Top).copied();
    let bot = layer.index.get(&Type::Bot).copied();
    for i in 0..n {
        // SubRefl, SubTop, SubBot.
        next.set(i, i);
        if let Some(t) = top {
            next.set(i, t);
        }
        if let Some(b) = bot {
            next.set(b, i);
        }
    }
    if rec.is_none() {
        // SubVar under Y <: Top, X <: Y.
        next.set(layer.idx(&Type::var(MU_VAR)), layer.idx(&Type::var(MU_VAR_RIGHT)));
    }
    if depth == 1 {
        return next;
    }
    // SubProc.
    for &i in &layer.arrows {
        let Type::Arrow { dom: d1, cod: c1 } = &layer.types[i] else { unreachable!() };
        let (d1, c1) = (layer.idx(d1), layer.idx(c1));
        for &j in &layer.arrows {
            let Type::Arrow { dom: d2, cod: c2 } = &layer.types[j] else { unreachable!() };
            if prev.get(layer.idx(d2), d1) && prev.get(c1, layer.idx(c2)) {
                next.set(i, j);
            }
        }
    }
    // SubObj and SubObjVar.
    for &i in &layer.objects {
        let Type::Obj { methods: src } = &layer.types[i] else { unreachable!() };
        for &j in &layer.objects {
            let Type::Obj { methods: tgt } = &layer.types[j] else { unreachable!() };
            let sub_obj = tgt.iter().all(|t| {
                src.iter().any(|s| {
                    s.name == t.name
                        && s.variance == t.variance
                        && (!t.variance.readable() || prev.get(layer.idx(&s.ty), layer.idx(&t.ty)))
                        && (!t.variance.writable() || prev.get(layer.idx(&t.ty), layer.idx(&s.ty)))
                })
            });
            let sub_obj_var = src.len() == tgt.len()
                && tgt.iter().all(|t| {
                    src.iter().any(|s| {
                        s.name == t.name && s.ty == t.ty && (s.variance == Variance::Inv || s.variance == t.variance)
                    })
                });
            if sub_obj || sub_obj_var {
                next.set(i, j);
            }
        }
    }
    // SubRec.
    if let Some(open) = rec {
        let mus: Vec<usize> = (0..n).filter(|&i| matches!(layer.types[i], Type::Mu { .. })).collect();
        for &i in &mus {
            let Type::Mu { var: x, body: a } = &layer.types[i] else { unreachable!() };
            let a = open.idx(&subst_type(a, x, &Type::var(MU_VAR)));
            for &j in &mus {
                let Type::Mu { var: y, body: b } = &layer.types[j] else { unreachable!() };
                let b = open.idx(&subst_type(b, y, &Type::var(MU_VAR_RIGHT)));
                if open.rel.get(a, b) {
                    next.set(i, j);
                }
            }
        }
    }
    // SubTrans with every cut type of the layer.
    let words = prev.words;
    for i in 0..n {
        let mut acc = prev.row(i).to_vec();
        for (w, &word) in prev.row(i).iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let c = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                for (a, b) in acc.iter_mut().zip(prev.row(c)) {
                    *a |= *b;
                }
            }
        }
        for (dst, src) in next.bits[i * words..(i + 1) * words].iter_mut().zip(&acc) {
            *dst |= *src;
        }
    }
    next
}

static DEFAULT_ORACLE: OnceLock<DeclarativeOracle> = OnceLock::new();

/// Whether `a <: b` is derivable within `max_depth` in the declarative
/// system, for `a`, `b` in the shipped universe. Only the empty context and
/// the recursive-type context `Y <: Top, X <: Y` are supported; other inputs
/// give `None`.
pub fn declarative_subtype_oracle(ctx: &Context, a: &Type, b: &Type, max_depth: usize) -> Option<bool> {
    let amber = Context::new().with_type(MU_VAR_RIGHT, Type::Top).with_type(MU_VAR, Type::var(MU_VAR_RIGHT));
    let built;
    let oracle = if max_depth == 8 {
        DEFAULT_ORACLE.get_or_init(|| DeclarativeOracle::build(load_universe(), 8))
    } else {
        built = DeclarativeOracle::build(load_universe(), max_depth);
        &built
    };
    if ctx.is_empty() {
        oracle.holds(a, b)
    } else if *ctx == amber {
        oracle.holds_open(a, b)
    } else {
        None
    }
}
