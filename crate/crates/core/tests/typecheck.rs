use objcalc::syntax::*;
use objcalc::typecheck::*;

const FUEL: u64 = DEFAULT_FUEL;

fn t(s: &str) -> Term {
    parse_term(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn ty(s: &str) -> Type {
    parse_type(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn sub(a: &str, b: &str) -> SubtypeResult {
    subtype(&Context::new(), &ty(a), &ty(b), Mode::Variance, FUEL)
}

fn split_sub(a: &str, b: &str) -> SubtypeResult {
    subtype(&Context::new(), &ty(a), &ty(b), Mode::Split, FUEL)
}

#[test]
fn well_formedness_examples() {
    assert!(wf_type(&Context::new(), &Type::Top));
    assert!(!wf_type(&Context::new(), &Type::var("X")));
    let ctx = Context::new().with_type("X", Type::Top);
    assert!(wf_type(&ctx, &ty("All(Y<:X) Y -> X")));
    assert!(wf_context(&ctx));
    assert!(!wf_context(&Context::new().with_type("X", Type::Top).with_type("X", Type::Top)));
    assert!(!wf_context(&Context::new().with_term("x", Type::var("X"))));
}

#[test]
fn subtyping_examples() {
    assert!(sub("[m:inv Top, n:inv Bot]", "[m:inv Top]").is_yes());
    assert!(sub("[m:inv [n:inv Top]]", "[m:cov [n:inv Top]]").is_yes());
    assert!(sub("mu X. [m:cov X, n:cov Top]", "mu Y. [m:cov Y]").is_yes());
    assert!(!sub("[m:inv Top]", "[m:inv Top, n:inv Bot]").is_yes());
    assert!(!sub("[m:cov Top]", "[m:con Top]").is_yes());
    assert!(sub("[m:inv Top]", "[m:con Top]").is_yes());
    assert!(sub("[m:con Top]", "[m:con [n:inv Top]]").is_yes());
    assert!(!sub("[m:con [n:inv Top]]", "[m:con Top]").is_yes());
    assert!(sub("Top -> Top", "Bot -> Top").is_yes());
    assert!(!sub("Bot -> Top", "Top -> Top").is_yes());
    assert!(sub("All(X<:Top) X -> X", "All(Y<:[m:inv Top]) Y -> Y").is_yes());
    assert!(sub("Some(X<:[m:inv Top]) X", "Some(Y<:Top) Y").is_yes());
    assert!(sub("Obj(X)[m:inv X]", "mu Y. Some(X<:Y) [m:inv X]").is_yes());
}

#[test]
fn subtype_failure_explains_the_premise() {
    let SubtypeResult::No(chain) = sub("Top -> [m:inv Top]", "Top -> [n:inv Top]") else { panic!() };
    assert_eq!(chain[0], "SubProc: codomain");
    assert!(chain[1].contains("method n missing"), "{chain:?}");
}

#[test]
fn bound_promotion_and_unknown() {
    let ctx = Context::new().with_type("X", ty("[m:inv Top]")).with_type("Z", Type::var("X"));
    let r = subtype(&ctx, &Type::var("Z"), &ty("[m:cov Top]"), Mode::Variance, FUEL);
    assert!(r.is_yes());
    let a = ty("All(X<:Top) All(Y<:X) Y");
    let r = subtype(&Context::new(), &a, &a, Mode::Variance, 1);
    assert!(r.is_yes());
    let deep = ty("All(X<:Top) All(Y<:X) All(Z<:Y) Z");
    let other = ty("All(X<:Top) All(Y<:X) All(Z<:Y) Y");
    assert_eq!(subtype(&Context::new(), &deep, &other, Mode::Variance, 3), SubtypeResult::Unknown(3));
    assert!(subtype(&Context::new(), &deep, &other, Mode::Variance, FUEL).is_yes());
}

#[test]
fn split_encoding() {
    assert_eq!(encode_to_split(&ty("[m:inv Top]")), ty("[m:(Top, Top)]"));
    assert_eq!(encode_to_split(&ty("[m:cov Top]")), ty("[m:(Bot, Top)]"));
    assert_eq!(encode_to_split(&ty("[m:con Top]")), ty("[m:(Top, Top)]"));
    assert_eq!(encode_to_split(&ty("[m:con Bot]")), ty("[m:(Bot, Top)]"));
    let a = ty("[n:inv Top, p:inv Top]");
    let b = ty("[n:inv Top]");
    let lhs = Type::split([("m", Type::Bot, a.clone())]);
    let rhs = Type::split([("m", Type::Bot, b.clone())]);
    assert!(subtype(&Context::new(), &lhs, &rhs, Mode::Split, FUEL).is_yes());
    assert!(!subtype(&Context::new(), &rhs, &lhs, Mode::Split, FUEL).is_yes());
    assert!(split_sub("[m:con [n:inv Top]]", "[m:cov Top]").is_yes());
    assert!(!sub("[m:con [n:inv Top]]", "[m:cov Top]").is_yes());
}

#[test]
fn typing_examples() {
    let a = ty("[m:inv Top]");
    let obj = t("obj [m:inv Top] { m = self(s:[m:inv Top]) s.m }");
    assert_eq!(type_of(&Context::new(), &obj, Mode::Variance, FUEL).unwrap(), a);

    let ctx = Context::new().with_term("a", ty("[m:con Top]"));
    let err = type_of(&ctx, &t("a.m"), Mode::Variance, FUEL).unwrap_err();
    assert_eq!(err.rule, "Inv");
    assert!(matches!(err.kind, TypeErrorKind::Variance { .. }));

    let b = ty("[n:inv Top]");
    let ctx = Context::new().with_term("a", Type::split([("m", Type::Bot, b.clone())]));
    assert_eq!(type_of(&ctx, &t("a.m"), Mode::Split, FUEL).unwrap(), encode_to_split(&b));
    let upd = t("a.m := self(x:[m:(Bot, [n:inv Top])]) obj [n:inv Top] { n = self(s) s }");
    let err = type_of(&ctx, &upd, Mode::Split, FUEL).unwrap_err();
    assert_eq!(err.rule, "Upd-Gen");
    let ctx = ctx.with_term("z", Type::Bot);
    let upd_bot = t("a.m := self(x:[m:(Bot, [n:inv Top])]) z");
    assert!(type_of(&ctx, &upd_bot, Mode::Split, FUEL).is_ok());
}

#[test]
fn checking_examples() {
    let id = t("\\(x:Top) x");
    assert!(check(&Context::new(), &id, &ty("Top -> Top"), Mode::Variance, FUEL).is_ok());
    assert!(check(&Context::new(), &id, &ty("Bot -> Top"), Mode::Variance, FUEL).is_ok());
    let o = t("obj [m:inv [n:inv Top, p:inv Top]] { m = self(s) obj [n:inv Top, p:inv Top] { n = self(u) u, p = self(u) u } }");
    assert!(check(&Context::new(), &o, &ty("[m:cov [n:inv Top]]"), Mode::Variance, FUEL).is_ok());
    assert!(check(&Context::new(), &o, &ty("[m:inv [n:inv Top]]"), Mode::Variance, FUEL).is_err());
}

#[test]
fn bot_receivers_synthesize_bot() {
    let ctx = Context::new().with_term("b", Type::Bot);
    for src in ["b.m", "b b", "b[Top]", "clone(b)"] {
        assert_eq!(type_of(&ctx, &t(src), Mode::Variance, FUEL).unwrap(), Type::Bot, "{src}");
    }
}

#[test]
fn split_only_witness() {
    let w = t("\\(x:[m:con [n:inv Top]]) (\\(y:[m:cov Top]) y.m) x");
    assert!(type_of(&Context::new(), &w, Mode::Split, FUEL).is_ok());
    assert!(type_of(&Context::new(), &w, Mode::Variance, FUEL).is_err());
}

#[test]
fn quantifiers_and_recursion() {
    let poly = t("Fun(X<:[m:cov Top]) \\(x:X) x.m");
    let pty = type_of(&Context::new(), &poly, Mode::Variance, FUEL).unwrap();
    assert!(alpha_eq_type(&pty, &ty("All(X<:[m:cov Top]) X -> Top")));
    let inst = t("(Fun(X<:[m:cov Top]) \\(x:X) x.m)[[m:inv Top]]");
    assert!(alpha_eq_type(&type_of(&Context::new(), &inst, Mode::Variance, FUEL).unwrap(), &ty("[m:inv Top] -> Top")));
    let bad = t("(Fun(X<:[m:cov Top]) \\(x:X) x.m)[Top]");
    assert_eq!(type_of(&Context::new(), &bad, Mode::Variance, FUEL).unwrap_err().rule, "TApp");

    let list = ty("mu L. [next:cov L]");
    let node = t("fold[mu L. [next:cov L]] obj [next:cov mu L. [next:cov L]] { next = self(s) b }");
    let ctx = Context::new().with_term("b", list.clone());
    assert_eq!(type_of(&ctx, &node, Mode::Variance, FUEL).unwrap(), list);
    let un = t("(unfold[mu L. [next:cov L]] b).next");
    assert_eq!(type_of(&ctx, &un, Mode::Variance, FUEL).unwrap(), list);

    let pk = t("pack<X<:Top=[m:inv Top], obj X { m = self(s) s } : X>");
    let pk_ty = type_of(&Context::new(), &pk, Mode::Variance, FUEL).unwrap();
    assert!(alpha_eq_type(&pk_ty, &ty("Some(X<:Top) X")));
    let op = t("open pack<X<:Top=[m:inv Top], obj X { m = self(s) s } : X> as <Y<:Top, y:Y> in y : Top");
    assert_eq!(type_of(&Context::new(), &op, Mode::Variance, FUEL).unwrap(), Type::Top);
    let escape = t("open pack<X<:Top=[m:inv Top], obj X { m = self(s) s } : X> as <Y<:Top, y:Y> in y : Y");
    assert!(type_of(&Context::new(), &escape, Mode::Variance, FUEL).is_err());
}
