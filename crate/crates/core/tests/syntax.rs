use objcalc::syntax::*;

fn t(s: &str) -> Term {
    parse_term(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn ty(s: &str) -> Type {
    parse_type(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

#[test]
fn parses_clone() {
    assert_eq!(t("clone(x)"), Term::clone_of(Term::var("x")));
}

#[test]
fn object_literal_self_annotation_defaults_to_object_annotation() {
    let a = t("obj [m:inv Top] { m = ς(s) s.m }");
    let Term::Obj { annot, methods } = a else { panic!() };
    assert_eq!(methods.len(), 1);
    assert_eq!(methods[0].self_annot, annot);
    assert_eq!(methods[0].body, Term::invoke(Term::var("s"), "m"));
}

#[test]
fn let_is_application_of_lambda() {
    let a = t("let z = clone(x) in x.retrieve := ς(y:A) z");
    let Term::App { fun, arg } = a else { panic!() };
    assert_eq!(*arg, Term::clone_of(Term::var("x")));
    let Term::Lam { var, annot, body } = *fun else { panic!() };
    assert_eq!(var, "z");
    assert_eq!(annot, Type::Top);
    assert!(matches!(*body, Term::Update { .. }));
}

#[test]
fn duplicate_methods_are_rejected() {
    assert!(matches!(parse_term("obj Top { m = self(s) s, m = self(s) s }"), Err(ParseError::DuplicateMethod { .. })));
    assert!(matches!(parse_type("[m:inv Top, m:cov Top]"), Err(ParseError::DuplicateMethod { .. })));
}

#[test]
fn syntax_errors_report_position_and_expectation() {
    match parse_term("\\(x:Top)\n  x .") {
        Err(ParseError::Syntax { line, col, expected, .. }) => {
            assert_eq!(line, 2);
            assert_eq!(col, 6);
            assert!(!expected.is_empty());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn printing_examples() {
    assert_eq!(print_type(&ty("Top -> Bot")), "Top -> Bot");
    assert_eq!(print_term(&Term::clone_of(Term::var("x"))), "clone(x)");
}

#[test]
fn printer_renames_shadowing_binders() {
    let inner = Type::mu("X", Type::obj([("m", Variance::Cov, Type::var("X"))]));
    let outer = Type::mu("X", Type::obj([("n", Variance::Inv, Type::arrow(Type::var("X"), inner))]));
    let text = print_type(&outer);
    assert!(text.contains("X1"), "{text}");
    assert!(alpha_eq_type(&ty(&text), &outer));

    let free_capture = Term::lam("y", Type::Top, Term::app(Term::var("y"), Term::var("y")));
    let with_free = Term::app(Term::var("y"), free_capture);
    let text = print_term(&with_free);
    assert!(alpha_eq_term(&t(&text), &with_free), "{text}");
}

#[test]
fn free_variable_examples() {
    let fv = free_vars(&t("\\(x:Top) x"));
    assert!(fv.terms.is_empty() && fv.types.is_empty() && fv.locs.is_empty());
    let fv = free_vars(&t("obj Top { m = self(s) s.m }"));
    assert!(fv.terms.is_empty());
    let fv = free_vars(&t("{m=@0}"));
    assert_eq!(fv.locs.into_iter().collect::<Vec<_>>(), vec![Loc(0)]);
}

#[test]
fn substitution_avoids_capture() {
    let body = t("\\(y:Top) x");
    let out = subst_term1(&body, "x", &Term::var("y"));
    let Term::Lam { var, body, .. } = &out else { panic!() };
    assert_ne!(var, "y");
    assert_eq!(**body, Term::var("y"));
    assert_eq!(subst_term1(&t("x.m"), "x", &t("\\(z:Top) z")), t("(\\(z:Top) z).m"));
}

#[test]
fn alpha_equivalence_examples() {
    assert!(alpha_eq_type(&ty("mu X. [m:cov X]"), &ty("mu Y. [m:cov Y]")));
    assert!(!alpha_eq_type(&ty("[m:cov Top]"), &ty("[m:con Top]")));
    assert!(alpha_eq_type(&ty("[m:inv Top, n:inv Bot]"), &ty("[n:inv Bot, m:inv Top]")));
}

#[test]
fn erasure_examples() {
    assert_eq!(erase_annotations(&t("\\(x:[m:inv Top]) x")), t("\\(x:Top) x"));
    assert_eq!(erase_annotations(&t("a[[m:inv Top]]")), t("a[Top]"));
    let e = erase_annotations(&t("obj [m:inv Top] { m = self(s) s.m }"));
    assert_eq!(erase_annotations(&e), e);
}

#[test]
fn self_type_desugaring() {
    assert!(alpha_eq_type(&desugar_self(&ty("Obj(X)[m:inv X]")), &ty("mu Y. Some(X<:Y) [m:inv X]")));
    let plain = ty("mu X. [m:cov X -> Top]");
    assert_eq!(desugar_self(&plain), plain);
    let bk = ty("Obj(X)[retrieve:inv X, backup:inv X]");
    let d = desugar_self(&bk);
    assert!(alpha_eq_type(&d, &ty("mu Y. Some(X<:Y) [retrieve:inv X, backup:inv X]")));
    assert!(!has_self_types(&d));
    assert_eq!(desugar_self(&d), d);
}

#[test]
fn unicode_aliases() {
    assert!(alpha_eq_type(&ty("μX. [m:cov X] → ⊤"), &ty("mu X. [m:cov X] -> Top")));
    assert!(alpha_eq_term(&t("λ(x:⊥) x"), &t("\\(x:Bot) x")));
    assert!(alpha_eq_type(&ty("∀(X≤⊤) X"), &ty("All(X<:Top) X")));
}

#[test]
fn json_dump_carries_kind_tags() {
    let j = term_to_json(&t("clone(x)"));
    assert_eq!(j["kind"], "Clone");
    assert_eq!(j["arg"]["kind"], "Var");
}

#[test]
fn round_trip_of_every_construct() {
    for s in [
        "\\(x:Top) x",
        "obj [m:inv Top, n:cov [m:inv Top] -> Bot] { m = self(s:[m:inv Top]) s.m, n = self(s) \\(z:Bot) s }",
        "(x.m := self(s:Top) s).m",
        "(\\(x:Top) x) (\\(y:Top) y) z",
        "f (g h)",
        "fold[mu X. [m:cov X]] obj [m:cov mu X. [m:cov X]] { m = self(s) fold[mu X. [m:cov X]] s }",
        "(unfold[mu X. [m:cov X]] x).m",
        "Fun(X<:Top) \\(x:X) x",
        "(Fun(X<:[m:inv Top]) \\(x:X) x)[[m:inv Top]] y",
        "pack<X<:Top=[m:inv Top], obj X { } : X>",
        "open p as <X<:Top, x:X -> X> in x : Top",
        "{m=@0, n=@3}.n",
        "clone(clone(y))",
        "\\(x:All(X<:Top) X -> Some(Y<:X) Y) x",
        "\\(x:Obj(X)[m:inv X]) x",
        "\\(x:[m:(Bot, Top)]) x",
    ] {
        let a = t(s);
        let p = print_term(&a);
        let b = parse_term(&p).unwrap_or_else(|e| panic!("{s} printed as {p}: {e}"));
        assert!(alpha_eq_term(&a, &b), "{s} printed as {p}");
    }
}
