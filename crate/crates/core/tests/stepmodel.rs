use objcalc::eval::{execute, Allocator, Config, Heap, Outcome};
use objcalc::harness::load_universe;
use objcalc::stepmodel::*;
use objcalc::syntax::*;
use objcalc::typecheck::{check, subtype, Context, Mode, DEFAULT_FUEL};
use proptest::prelude::*;
use std::cell::RefCell;

fn t(s: &str) -> Term {
    parse_term(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn code(s: &str) -> TypeCode {
    interp_self_direct(&parse_type(s).unwrap_or_else(|e| panic!("{s}: {e}")), &CodeEnv::new()).unwrap()
}

fn model(k_max: u32) -> Model {
    Model::new(Budget::standard(k_max, 7)).unwrap()
}

fn empty() -> HeapTypingApprox {
    HeapTypingApprox::new()
}

thread_local! {
    static SHARED: RefCell<Option<Model>> = const { RefCell::new(None) };
}

/// A model kept across proptest cases so memo tables are reused.
fn with_model<R>(f: impl FnOnce(&Model) -> R) -> R {
    SHARED.with(|m| {
        let mut slot = m.borrow_mut();
        let model = slot.get_or_insert_with(|| model(4));
        f(model)
    })
}

#[test]
fn interpretation_examples() {
    let env: CodeEnv = [("X".to_string(), TypeCode::Top)].into_iter().collect();
    assert_eq!(interp(&Type::var("X"), &env).unwrap(), TypeCode::Top);
    let all = interp(&parse_type("All(Y<:X) Y -> X").unwrap(), &env).unwrap();
    assert_eq!(all, TypeCode::all("Y", TypeCode::Top, TypeCode::arrow(TypeCode::Var { name: "Y".into() }, TypeCode::Top)));
    let mu = interp(&parse_type("mu Y. [m:cov Y]").unwrap(), &CodeEnv::new()).unwrap();
    assert!(matches!(mu, TypeCode::Mu { .. }));
    assert_eq!(interp(&Type::var("Z"), &env), Err(InterpError::Unbound("Z".into())));
}

#[test]
fn approximation_composes_by_minimum() {
    let p = code_p();
    for k in 0..6 {
        for j in 0..6 {
            assert_eq!(approx_code(&approx_code(&p, k), j).ceiling(), Some(k.min(j)));
        }
    }
}

#[test]
fn zeroth_approximation_is_empty() {
    let m = model(3);
    for k in 0..=3 {
        for v in standard_values() {
            assert!(m.mem_value(k, &empty(), &v, &approx_code(&TypeCode::Top, 0)).is_counterexample());
        }
    }
}

#[test]
fn arrow_is_non_expansive() {
    let m = model(4);
    let (a, b) = (code_m(Variance::Inv), code_stream());
    for k in 0..=4 {
        let cut = TypeCode::arrow(approx_code(&a, k), approx_code(&b, k));
        assert!(m.approx_eq(&TypeCode::arrow(a.clone(), b.clone()), &cut, k).is_holds(), "k = {k}");
    }
}

#[test]
fn state_extension_examples() {
    let m = model(4);
    let psi = HeapTypingApprox::from_entries([(Loc(0), TypeCode::arrow(code_p(), code_p()))]);
    assert!(m.state_extends(3, &psi, 3, &psi).is_holds());
    for j in 0..=3 {
        assert!(m.state_extends(3, &psi, j, &psi.approx(j)).is_holds());
    }
    let shrink = m.state_extends(3, &psi, 2, &empty());
    assert_eq!(shrink.witness().unwrap().reason, Reason::ExtensionDomain);
    let raise = m.state_extends(2, &psi, 3, &psi);
    assert_eq!(raise.witness().unwrap().reason, Reason::IndexOrder);
}

#[test]
fn top_and_bottom_membership() {
    let m = model(3);
    for v in standard_values() {
        for k in 0..=3 {
            assert!(m.mem_value(k, &empty(), &v, &TypeCode::Top).is_holds());
            assert!(m.mem_value(k, &empty(), &v, &TypeCode::Bot).is_counterexample());
        }
    }
}

/// `{m=@0}.m` under `@0 ↦ λs.s` returns `{m=@0}` after two steps.
fn false_positive_oracle() -> (usize, Term) {
    let heap: Heap = [(Loc(0), t("\\(s:Top) s"))].into_iter().collect();
    let run = execute(Config::new(heap, t("({m=@0}).m")), 50, &mut Allocator::canonical());
    assert_eq!(run.outcome, Outcome::Value);
    (run.steps, run.config.term)
}

#[test]
fn false_positive_is_refuted_only_with_enough_steps() {
    let (steps, result) = false_positive_oracle();
    assert_eq!(steps, 2);
    assert_eq!(result, t("{m=@0}"));
    let m = model(5);
    let psi = HeapTypingApprox::from_entries([(Loc(0), TypeCode::arrow(code_p(), code_p()))]);
    let v = t("\\(y:Top) ({m=@0}).m");
    let tau = TypeCode::arrow(TypeCode::Top, code_q());
    for k in 0..=2 {
        assert!(m.mem_value(k, &psi, &v, &tau).is_holds(), "k = {k}");
    }
    // One beta step, two steps of invocation, then a value check at a
    // positive index.
    for k in 4..=5 {
        let r = m.mem_value(k, &psi, &v, &tau);
        let w = r.witness().unwrap_or_else(|| panic!("k = {k}: {r}"));
        assert_eq!(w.reason, Reason::MissingMethod);
        assert_eq!(w.subject, print_term(&result));
        let again = model(5).mem_value(k, &psi, &v, &tau);
        assert_eq!(again, r);
    }
}

#[test]
fn term_membership_examples() {
    let m = model(5);
    for v in standard_values() {
        assert!(m.mem_term(3, &empty(), &v, &TypeCode::Top).is_holds());
    }
    let stuck = t("(\\(x:Top) x.m) (\\(y:Top) y)");
    let run = execute(Config::program(stuck.clone()), 10, &mut Allocator::canonical());
    assert!(run.outcome.is_stuck());
    assert_eq!(run.steps, 1);
    for k in 2..=5 {
        let r = m.mem_term(k, &empty(), &stuck, &code_p());
        assert_eq!(r.witness().map(|w| w.reason), Some(Reason::Stuck), "k = {k}");
    }
    let obj = t("obj [m:cov Top] { m = self(s:[m:cov Top]) s.m }");
    for k in 0..=5 {
        assert!(m.mem_term(k, &empty(), &obj, &code_m(Variance::Cov)).is_holds(), "k = {k}");
    }
}

#[test]
fn heap_typing_examples() {
    let m = model(3);
    let h: Heap = [(Loc(0), t("\\(s:Top) s.m"))].into_iter().collect();
    for k in 0..=3 {
        assert!(m.heap_typed(&h, k, &empty()).is_holds());
        assert!(m.heap_typed(&Heap::new(), k, &empty()).is_holds());
    }
    let psi = HeapTypingApprox::from_entries([(Loc(0), TypeCode::arrow(code_m(Variance::Inv), TypeCode::Top))]);
    assert_eq!(m.heap_typed(&Heap::new(), 2, &psi).witness().unwrap().reason, Reason::HeapDomain);
    for k in 0..=3 {
        assert!(m.heap_typed(&h, k, &psi).is_holds(), "k = {k}");
    }
}

#[test]
fn inclusion_examples() {
    let m = model(3);
    for c in standard_witnesses() {
        assert!(m.sem_subset(&c, &TypeCode::Top).is_holds());
        assert!(m.sem_subset(&TypeCode::Bot, &c).is_holds());
    }
    assert!(m.sem_subset(&code_m(Variance::Inv), &code_m(Variance::Cov)).is_holds());
    assert!(m.sem_subset(&code_m(Variance::Inv), &code("[n:inv Top]")).is_counterexample());
    assert!(m.sem_subset(&code("Bot -> Top"), &code("Top -> Top")).is_counterexample());
}

#[test]
fn self_exposure_examples() {
    let m = model(3);
    let alpha = code("Obj(X)[m:cov X]");
    assert!(m.tsubself_check(&TypeCode::Bot, &alpha).is_holds());
    assert!(m.tsubself_check(&alpha.rec_of().unwrap(), &alpha).is_holds());
    assert!(m.tsubself_check(&TypeCode::Top, &alpha).is_counterexample());
}

#[test]
fn reference_variance_lemma_holds() {
    let report = check_lemma(LemmaId::SemSubVarRef, None, &Budget::standard(4, 7)).unwrap();
    assert!(report.records.iter().all(|r| r.status == Status::Holds), "{:?}", report.records);
}

#[test]
fn closure_under_extension_has_no_counterexample() {
    let report = check_lemma(LemmaId::ClosureUnderExtension, None, &Budget::standard(3, 7)).unwrap();
    assert_eq!(report.counterexamples(), 0);
    assert!(report.count(Status::Holds) > 0);
}

#[test]
fn inverted_reference_premise_is_refuted_and_replays() {
    let budget = Budget::standard(3, 7);
    let report = check_lemma(LemmaId::SemSubCovRef, Some(Flip::InvertedPremise), &budget).unwrap();
    let ce = report.records.iter().find(|r| r.status == Status::Counterexample).expect("a counterexample");
    assert!(replay(ce, &budget).unwrap());
    let line = serde_json::to_value(ce).unwrap();
    assert_eq!(line["verdict"]["verdict"], "counterexample");
    assert_eq!(line["mutation"], "inverted-premise");
}

#[test]
fn lemma_names_round_trip() {
    for id in LemmaId::ALL {
        assert_eq!(id.name().parse::<LemmaId>().unwrap(), *id);
    }
    assert!("NoSuchLemma".parse::<LemmaId>().is_err());
    for f in Flip::all() {
        assert_eq!(f.name().parse::<Flip>().unwrap(), f);
        assert!(!f.targets().is_empty());
    }
    assert!(matches!(check_lemma(LemmaId::SemLam, Some(Flip::InvertedPremise), &Budget::standard(2, 0)), Err(LemmaError::NoMutant { .. })));
}

#[test]
fn budget_validation() {
    let mut b = Budget::standard(2, 0);
    b.samples = 0;
    assert_eq!(Model::new(b).err(), Some(BudgetError::NoSamples));
    let mut b = Budget::standard(2, 0);
    b.values.clear();
    assert_eq!(Model::new(b).err(), Some(BudgetError::EmptyCatalog("value")));
    let mut b = Budget::standard(2, 0);
    b.witnesses.push(TypeCode::Var { name: "X".into() });
    assert!(matches!(Model::new(b).err(), Some(BudgetError::OpenCode(_))));
}

#[test]
fn stratification_gauge_records_no_violation() {
    let m = model(4);
    let _ = check_lemma(LemmaId::SemObj, None, &Budget::standard(3, 7)).unwrap();
    for v in standard_values() {
        for c in standard_witnesses() {
            let _ = m.mem_value(4, &empty(), &v, &c);
        }
    }
    let g = m.gauge();
    assert_eq!(g.violations, 0);
    assert!(g.calls > 0);
}

fn index_pair() -> impl Strategy<Value = (u32, u32)> {
    (1u32..=4).prop_flat_map(|k| (Just(k), 0..k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monotone_approximation(v in 0usize..21, c in 0usize..14, e in 0usize..4, (k, j) in index_pair()) {
        with_model(|m| {
            let v = &m.budget().values[v];
            let tau = &m.budget().witnesses[c];
            let psi = m.budget().extensions[e].typing.approx(j);
            let cut = m.mem_value(j, &psi, v, &approx_code(tau, k));
            let full = m.mem_value(j, &psi, v, tau);
            prop_assert_eq!(cut.kind(), full.kind());
            Ok(())
        })?;
    }

    #[test]
    fn recursive_types_are_fixed_points(v in 0usize..21, e in 0usize..4, k in 1u32..=4) {
        with_model(|m| {
            let v = &m.budget().values[v];
            let psi = &m.budget().extensions[e].typing;
            let mu = code_stream();
            let folded = Term::fold(mu.to_type_lossy(), v.clone());
            let left = m.mem_value(k, psi, &folded, &mu);
            let right = all_of(0..k, |j| m.mem_value(j, psi, v, &mu.unroll().unwrap()));
            prop_assert_eq!(left.kind(), right.kind());
            Ok(())
        })?;
    }

    #[test]
    fn interpretation_is_non_expansive(shape in 0usize..6, c in 0usize..14, k in 0u32..=4) {
        let shapes = ["X -> X", "[m:inv X]", "mu Y. [m:cov Y, n:inv X]", "All(Y<:X) Y -> X", "Obj(Y)[m:cov Y, n:con X]", "[m:(X, Top)]"];
        with_model(|m| {
            let ty = parse_type(shapes[shape]).unwrap();
            let eta: CodeEnv = [("X".to_string(), m.budget().witnesses[c].clone())].into_iter().collect();
            let full = interp(&ty, &eta).unwrap();
            let cut = interp(&ty, &approx_env(&eta, k)).unwrap();
            prop_assert!(m.approx_eq(&full, &cut, k).is_holds());
            Ok(())
        })?;
    }

    #[test]
    fn counterexamples_replay(v in 0usize..21, c in 0usize..14, e in 0usize..4, k in 1u32..=3) {
        let (first, second) = (model(3), model(3));
        let v = &first.budget().values[v];
        let tau = &first.budget().witnesses[c];
        let psi = &first.budget().extensions[e].typing;
        let a = first.mem_value(k, psi, v, tau);
        let b = second.mem_value(k, psi, v, tau);
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn algorithmic_subtyping_is_semantically_sound(i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        thread_local! {
            static UNIVERSE: Vec<Type> = load_universe();
        }
        let (a, b) = UNIVERSE.with(|u| (i.get(u).clone(), j.get(u).clone()));
        if subtype(&Context::new(), &a, &b, Mode::Variance, DEFAULT_FUEL).is_yes() {
            with_model(|m| {
                let (ca, cb) = (interp(&a, &CodeEnv::new()).unwrap(), interp(&b, &CodeEnv::new()).unwrap());
                let r = m.sem_subset(&ca, &cb);
                prop_assert!(!r.is_counterexample(), "{} <: {} but {}", print_type(&a), print_type(&b), r);
                Ok(())
            })?;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn well_typed_programs_are_semantically_typed(seed in any::<u64>()) {
        let cfg = objcalc::harness::GenConfig { seed, max_term_depth: 4, ..Default::default() };
        let (term, ty) = objcalc::harness::gen_well_typed(&cfg).unwrap();
        prop_assert!(check(&Context::new(), &term, &ty, Mode::Variance, DEFAULT_FUEL).is_ok());
        with_model(|m| {
            let tau = interp(&ty, &CodeEnv::new()).unwrap();
            for k in 0..=3 {
                let r = m.mem_term(k, &empty(), &term, &tau);
                prop_assert!(!r.is_counterexample(), "{} : {} refuted at {k}: {}", print_term(&term), print_type(&ty), r);
            }
            Ok(())
        })?;
    }
}
