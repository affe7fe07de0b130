use objcalc::eval::*;
use objcalc::harness::{gen_well_typed, load_universe, GenConfig};
use objcalc::syntax::*;
use objcalc::typecheck::{subtype, Context, Mode, DEFAULT_FUEL};
use proptest::prelude::*;
use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

fn variance() -> impl Strategy<Value = Variance> {
    prop_oneof![Just(Variance::Inv), Just(Variance::Cov), Just(Variance::Con)]
}

fn method_name() -> impl Strategy<Value = String> {
    prop_oneof![Just("m".to_string()), Just("n".to_string())]
}

fn methods<T: Strategy<Value = Type> + Clone>(inner: T) -> impl Strategy<Value = Vec<MethodType>> {
    prop::collection::btree_map(method_name(), (variance(), inner), 0..3)
        .prop_map(|ms| ms.into_iter().map(|(name, (variance, ty))| MethodType { name, variance, ty }).collect())
}

fn arb_type() -> impl Strategy<Value = Type> {
    let leaf = prop_oneof![Just(Type::Top), Just(Type::Bot), Just(Type::var("X")), Just(Type::var("Y"))];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::arrow(a, b)),
            methods(inner.clone()).prop_map(|methods| Type::Obj { methods }),
            inner.clone().prop_map(|b| Type::mu("X", b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::all("Y", a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::exists("X", a, b)),
            methods(inner).prop_map(|methods| Type::SelfObj { var: "X".into(), methods }),
        ]
    })
}

fn var_name() -> impl Strategy<Value = String> {
    prop_oneof![Just("x".to_string()), Just("y".to_string()), Just("z".to_string())]
}

/// Untyped terms over a few variables, with annotations drawn at random.
fn arb_term() -> impl Strategy<Value = Term> {
    let ann = || prop_oneof![Just(Type::Top), Just(Type::obj([("m", Variance::Inv, Type::Top)]))];
    let leaf = prop_oneof![
        4 => var_name().prop_map(Term::var),
        1 => Just(Term::rt_obj(Vec::<(&str, Loc)>::new())),
    ];
    leaf.prop_recursive(4, 32, 3, move |inner| {
        prop_oneof![
            (var_name(), ann(), inner.clone()).prop_map(|(x, a, b)| Term::lam(x, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            (inner.clone(), method_name()).prop_map(|(r, m)| Term::invoke(r, m)),
            prop::collection::btree_map(method_name(), (var_name(), inner.clone()), 0..3).prop_map(|ms| {
                let methods = ms.into_iter().map(|(name, (self_var, body))| Method {
                    name,
                    self_var,
                    self_annot: Type::Top,
                    body,
                });
                Term::Obj { annot: Type::Top, methods: methods.collect() }
            }),
            (inner.clone(), method_name(), var_name(), inner.clone()).prop_map(|(r, m, s, b)| Term::Update {
                recv: Box::new(r),
                method: m,
                self_var: s,
                self_annot: Type::Top,
                body: Box::new(b),
            }),
            inner.clone().prop_map(Term::clone_of),
            (ann(), inner.clone()).prop_map(|(a, b)| Term::tlam("X", a, b)),
            (inner.clone(), ann()).prop_map(|(f, a)| Term::tapp(f, a)),
            inner.clone().prop_map(|a| Term::unfold(Type::mu("X", Type::var("X")), a)),
            inner.clone().prop_map(|p| Term::Pack {
                var: "X".into(),
                bound: Type::Top,
                witness: Type::Top,
                payload: Box::new(p),
                body_ty: Type::var("X"),
            }),
            (inner.clone(), var_name(), inner).prop_map(|(a, x, b)| Term::Open {
                arg: Box::new(a),
                tvar: "X".into(),
                bound: Type::Top,
                var: x,
                var_ty: Type::var("X"),
                body: Box::new(b),
                result_ty: Type::Top,
            }),
        ]
    })
}

/// Closed values to substitute.
fn arb_value() -> impl Strategy<Value = Term> {
    prop_oneof![
        Just(Term::lam("x", Type::Top, Term::var("x"))),
        Just(Term::rt_obj([("m", Loc(4))])),
        Just(Term::lam("y", Type::Top, Term::lam("x", Type::Top, Term::var("y")))),
        Just(Term::tlam("X", Type::Top, Term::rt_obj(Vec::<(&str, Loc)>::new()))),
    ]
}

fn close(t: Term) -> Term {
    let env: ValueEnv = free_vars(&t)
        .terms
        .into_iter()
        .map(|x| (x, Term::lam("w", Type::Top, Term::var("w"))))
        .collect();
    subst_term(&t, &env)
}

fn program(seed: u64) -> Term {
    gen_well_typed(&GenConfig { seed, max_term_depth: 4, ..GenConfig::default() }).expect("generator").0
}

fn configs_alpha_eq(a: &Config, b: &Config) -> bool {
    alpha_eq_term(&a.term, &b.term)
        && a.heap.len() == b.heap.len()
        && a.heap.iter().all(|(l, v)| b.heap.get(l).is_some_and(|w| alpha_eq_term(v, w)))
}

fn universe() -> &'static [Type] {
    static U: OnceLock<Vec<Type>> = OnceLock::new();
    U.get_or_init(load_universe)
}

fn sub(a: &Type, b: &Type) -> bool {
    subtype(&Context::new(), a, b, Mode::Variance, DEFAULT_FUEL).is_yes()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_then_parsing_terms_is_identity(t in arb_term()) {
        let printed = print_term(&t);
        let back = parse_term(&printed).map_err(|e| TestCaseError::fail(format!("{printed}: {e}")))?;
        prop_assert!(alpha_eq_term(&t, &back), "{}", printed);
    }

    #[test]
    fn printing_then_parsing_types_is_identity(ty in arb_type()) {
        let printed = print_type(&ty);
        let back = parse_type(&printed).map_err(|e| TestCaseError::fail(format!("{printed}: {e}")))?;
        prop_assert!(alpha_eq_type(&ty, &back), "{}", printed);
    }

    #[test]
    fn empty_substitution_is_identity(t in arb_term()) {
        prop_assert!(alpha_eq_term(&subst_term(&t, &ValueEnv::new()), &t));
    }

    #[test]
    fn substitution_replaces_exactly_the_variable(t in arb_term(), v in arb_value()) {
        let before = free_vars(&t).terms;
        prop_assume!(before.contains("x"));
        let after = free_vars(&subst_term1(&t, "x", &v)).terms;
        let expected: BTreeSet<String> = before.into_iter().filter(|y| y != "x").collect();
        prop_assert_eq!(after, expected);
    }

    #[test]
    fn disjoint_substitutions_compose(t in arb_term(), v in arb_value(), w in arb_value()) {
        let stepwise = subst_term1(&subst_term1(&t, "x", &v), "y", &w);
        let together = subst_term(&t, &HashMap::from([("x".to_string(), v), ("y".to_string(), w)]));
        prop_assert!(alpha_eq_term(&stepwise, &together));
    }

    #[test]
    fn erasure_commutes_with_substitution(t in arb_term(), v in arb_value()) {
        let a = erase_annotations(&subst_term1(&t, "x", &v));
        let b = subst_term1(&erase_annotations(&t), "x", &erase_annotations(&v));
        prop_assert!(alpha_eq_term(&a, &b));
    }

    #[test]
    fn desugaring_removes_self_types_and_is_idempotent(ty in arb_type()) {
        let once = desugar_self(&ty);
        prop_assert!(!has_self_types(&once));
        prop_assert!(alpha_eq_type(&desugar_self(&once), &once));
    }

    #[test]
    fn every_closed_term_has_one_decomposition(t in arb_term()) {
        let t = close(t);
        let c = Config::program(t.clone());
        match (decompose(&t), classify(&c)) {
            (Decomposition::ValueForm, r) => {
                prop_assert!(t.is_value());
                prop_assert_eq!(r, Err(Irreducible::Value));
            }
            (Decomposition::RedexInContext { ctx, redex }, _) => {
                prop_assert!(!t.is_value());
                prop_assert_eq!(ctx.plug(redex.clone()), t);
                prop_assert_eq!(decompose(&redex), Decomposition::RedexInContext { ctx: EvalContext::default(), redex: redex.clone() });
            }
            (Decomposition::StuckForm(r), c) => {
                prop_assert!(!t.is_value());
                prop_assert_eq!(c, Err(Irreducible::Stuck(r)));
            }
        }
    }

    #[test]
    fn safety_is_antitone_in_the_step_bound(t in arb_term(), k in 0usize..50) {
        let c = Config::program(close(t));
        if safe_k(&c, k + 1) {
            prop_assert!(safe_k(&c, k));
        }
    }

    #[test]
    fn reduction_ignores_annotations(t in arb_term()) {
        let mut c = Config::program(close(t));
        for _ in 0..20 {
            let plain = step(&c.erase(), &mut Allocator::canonical());
            let full = step(&c, &mut Allocator::canonical());
            match (full, plain) {
                (StepResult::Stepped(next, r1), StepResult::Stepped(erased, r2)) => {
                    prop_assert_eq!(r1, r2);
                    prop_assert!(configs_alpha_eq(&next.erase(), &erased));
                    c = next;
                }
                (StepResult::Irreducible(a), StepResult::Irreducible(b)) => {
                    prop_assert_eq!(a, b);
                    break;
                }
                _ => prop_assert!(false, "one of the two configurations stepped"),
            }
        }
    }

    #[test]
    fn clone_copies_contents_to_fresh_locations(seed in any::<u64>()) {
        let mut c = Config::program(program(seed));
        let mut alloc = Allocator::randomized(seed);
        for _ in 0..200 {
            let source = match decompose(&c.term) {
                Decomposition::RedexInContext { redex: Term::Clone { arg }, .. } => match *arg {
                    Term::RtObj { fields } => Some(fields),
                    _ => None,
                },
                _ => None,
            };
            let before = c.heap.clone();
            let Ok(Stepped { rule, fresh }) = step_in_place(&mut c, &mut alloc) else { break };
            let Some(fields) = source else { continue };
            prop_assert_eq!(rule, Rule::Clone);
            prop_assert_eq!(fresh.len(), fields.len());
            let mut copied: Vec<String> = fresh.iter().map(|l| print_term(&c.heap[l])).collect();
            let mut originals: Vec<String> = fields.iter().map(|f| print_term(&before[&f.loc])).collect();
            copied.sort();
            originals.sort();
            prop_assert_eq!(copied, originals);
            for l in &fresh {
                prop_assert!(!before.contains_key(l));
            }
        }
    }

    #[test]
    fn allocators_agree_on_generated_programs(seed in any::<u64>(), alloc_seed in any::<u64>()) {
        let c = Config::program(program(seed));
        let a = run(&c, 200, &mut Allocator::canonical());
        let b = run(&c, 200, &mut Allocator::randomized(alloc_seed));
        prop_assert!(traces_equivalent(&a, &b));
        prop_assert_eq!(a.rules(), b.rules());
    }

    #[test]
    fn subtyping_is_transitive_on_the_universe(i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>(), k in any::<prop::sample::Index>()) {
        let u = universe();
        let (a, b, c) = (&u[i.index(u.len())], &u[j.index(u.len())], &u[k.index(u.len())]);
        if sub(a, b) && sub(b, c) {
            prop_assert!(sub(a, c), "{} <: {} <: {}", a, b, c);
        }
    }
}

#[test]
fn subtyping_is_reflexive_on_the_universe() {
    for a in universe() {
        assert!(sub(a, a), "{a}");
    }
}

#[test]
fn subtyping_is_transitive_through_every_middle_type() {
    let u = universe();
    let probes = [Type::Bot, Type::obj([("m", Variance::Inv, Type::Top)]), Type::arrow(Type::Top, Type::Bot)];
    for a in &probes {
        for b in u.iter().filter(|b| sub(a, b)) {
            for c in u.iter().step_by(37).filter(|c| sub(b, c)) {
                assert!(sub(a, c), "{a} <: {b} <: {c}");
            }
        }
    }
}
