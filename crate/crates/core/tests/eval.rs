use objcalc::eval::*;
use objcalc::syntax::*;

fn t(s: &str) -> Term {
    parse_term(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn prog(s: &str) -> Config {
    Config::program(t(s))
}

#[test]
fn decompose_examples() {
    assert_eq!(decompose(&t("\\(x:Top) x")), Decomposition::ValueForm);
    let id_app = t("(\\(x:Top) x) (obj Top { m = self(s) s })");
    match decompose(&id_app) {
        Decomposition::RedexInContext { ctx, redex } => {
            assert_eq!(ctx.frames, vec![Frame::AppArg { fun: t("\\(x:Top) x") }]);
            assert!(matches!(redex, Term::Obj { .. }));
            assert_eq!(ctx.plug(redex), id_app);
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(decompose(&t("(\\(x:Top) x).m")), Decomposition::StuckForm(StuckReason::InvokeOnNonObject));
}

#[test]
fn red_obj_allocates_and_stores_procedures() {
    let c = prog("obj Top { m = self(s) s.m }");
    let StepResult::Stepped(next, rule) = step(&c, &mut Allocator::canonical()) else { panic!() };
    assert_eq!(rule, Rule::Obj);
    assert_eq!(next.heap.len(), 1);
    assert!(alpha_eq_term(&next.heap[&Loc(0)], &t("\\(s:Top) s.m")));
    assert_eq!(next.term, Term::rt_obj([("m", Loc(0))]));
}

#[test]
fn red_inv_self_applies() {
    let c = Config::new([(Loc(0), t("\\(s:Top) s.m"))].into(), t("{m=@0}.m"));
    let StepResult::Stepped(next, rule) = step(&c, &mut Allocator::canonical()) else { panic!() };
    assert_eq!(rule, Rule::Inv);
    assert_eq!(next.heap, c.heap);
    assert_eq!(next.term, t("(\\(s:Top) s.m) {m=@0}"));
}

#[test]
fn red_clone_copies_contents() {
    let v0 = t("\\(s:Top) s");
    let c = Config::new([(Loc(0), v0.clone())].into(), t("clone({m=@0})"));
    let StepResult::Stepped(next, rule) = step(&c, &mut Allocator::canonical()) else { panic!() };
    assert_eq!(rule, Rule::Clone);
    assert_eq!(next.heap, [(Loc(0), v0.clone()), (Loc(1), v0)].into());
    assert_eq!(next.term, t("{m=@1}"));
}

#[test]
fn canonical_allocation_follows_method_names() {
    let c = prog("obj Top { n = self(s) s, m = self(s) s }");
    let StepResult::Stepped(next, _) = step(&c, &mut Allocator::canonical()) else { panic!() };
    assert_eq!(next.term, t("{n=@1, m=@0}"));
}

#[test]
fn run_examples() {
    let v = prog("\\(x:Top) x");
    let tr = run(&v, 10, &mut Allocator::canonical());
    assert!(tr.steps.is_empty());
    assert_eq!(tr.outcome, Outcome::Value);

    let tr = run(&prog("unfold[Top] (fold[Top] (\\(x:Top) x))"), 5, &mut Allocator::canonical());
    assert_eq!(tr.rules(), vec![Rule::Unfold]);
    assert_eq!(tr.outcome, Outcome::Value);
}

#[test]
fn fuel_exhaustion_is_distinct() {
    let omega = prog("(\\(x:Top) x x) (\\(x:Top) x x)");
    let tr = run(&omega, 7, &mut Allocator::canonical());
    assert_eq!(tr.steps.len(), 7);
    assert_eq!(tr.outcome, Outcome::FuelExhausted);
}

#[test]
fn safe_k_examples() {
    let v = prog("\\(x:Top) x");
    assert!((0..20).all(|k| safe_k(&v, k)));
    let c = prog("(\\(x:Top) x).m");
    assert!(safe_k(&c, 0));
    assert!(!safe_k(&c, 1));
    let c = prog("(\\(x:Top) x.m) (\\(y:Top) y)");
    assert!(safe_k(&c, 1));
    assert!(!safe_k(&c, 2));
}

#[test]
fn stuck_reasons() {
    let cases = [
        ("(\\(x:Top) x).m", StuckReason::InvokeOnNonObject),
        ("{m=@0}.n", StuckReason::MissingMethod),
        ("(\\(x:Top) x).m := self(s) s", StuckReason::UpdateOnNonObject),
        ("clone(\\(x:Top) x)", StuckReason::CloneNonObject),
        ("{m=@0} {m=@0}", StuckReason::ApplyNonLambda),
        ("unfold[Top] (\\(x:Top) x)", StuckReason::UnfoldNonFold),
        ("(\\(x:Top) x)[Top]", StuckReason::TypeApplyNonTlam),
        ("open (\\(x:Top) x) as <X<:Top, x:X> in x : Top", StuckReason::OpenNonPack),
        ("{m=@7}.m", StuckReason::DanglingLocation),
        ("y", StuckReason::FreeVariable),
    ];
    for (src, reason) in cases {
        let heap = [(Loc(0), t("\\(s:Top) s"))].into();
        let tr = run(&Config::new(heap, t(src)), 5, &mut Allocator::canonical());
        assert_eq!(tr.outcome, Outcome::Stuck(reason), "{src}");
    }
}

#[test]
fn backup_and_retrieve() {
    let src = "let o = obj Top { \
                 retrieve = self(s) s, \
                 backup = self(s) let z = clone(s) in s.retrieve := self(y) z \
               } in (o.backup).retrieve";
    let tr = run(&prog(src), 100, &mut Allocator::canonical());
    assert_eq!(tr.outcome, Outcome::Value);
    let fin = tr.final_config();
    let Term::RtObj { fields } = &fin.term else { panic!("{}", fin.term) };
    let names: Vec<_> = fields.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names, vec!["retrieve", "backup"]);
    assert_eq!(tr.steps[0].rule, Rule::Obj);
    let original = &tr.steps[0].fresh;
    assert!(fields.iter().all(|f| !original.contains(&f.loc)));
    assert_eq!(tr.steps.iter().filter(|s| s.rule == Rule::Clone).count(), 1);
}

#[test]
fn red_open_substitutes_payload_and_witness() {
    let c = prog("open pack<X<:Top=Top, \\(x:X) x : X -> X> as <Y<:Top, f:Y -> Y> in \\(z:Y) f z : Top");
    let tr = run(&c, 5, &mut Allocator::canonical());
    assert_eq!(tr.rules(), vec![Rule::Open]);
    let fin = &tr.final_config().term;
    assert!(alpha_eq_term(fin, &t("\\(z:Top) (\\(x:Top) x) z")), "{fin}");
}

#[test]
fn allocators_agree_up_to_renaming() {
    let src = "let o = obj Top { m = self(s) s, n = self(s) clone(s) } in (o.n).m := self(y) y";
    let a = run(&prog(src), 50, &mut Allocator::canonical());
    let b = run(&prog(src), 50, &mut Allocator::randomized(3));
    assert!(traces_equivalent(&a, &b));
    assert_ne!(a.final_config(), b.final_config());
}
