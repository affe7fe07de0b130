use objcalc::harness::{declarative_subtype_oracle, enumerate_universe, load_universe, universe_manifest_text, DeclarativeOracle};
use objcalc::syntax::{parse_type, Type};
use objcalc::typecheck::Context;

fn ty(s: &str) -> Type {
    parse_type(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

#[test]
fn manifest_matches_enumeration() {
    let text = universe_manifest_text(&enumerate_universe());
    if std::env::var_os("OBJCALC_BLESS").is_some() {
        std::fs::write(concat!(env!("CARGO_MANIFEST_DIR"), "/data/universe.txt"), &text).unwrap();
        return;
    }
    assert_eq!(load_universe(), enumerate_universe());
}

#[test]
fn bottom_is_below_top_in_two_steps() {
    assert_eq!(declarative_subtype_oracle(&Context::new(), &Type::Bot, &Type::Top, 2), Some(true));
}

#[test]
fn invariant_method_weakens_to_contravariant() {
    let (a, b) = (ty("[m:inv Top]"), ty("[m:con Top]"));
    assert_eq!(declarative_subtype_oracle(&Context::new(), &a, &b, 3), Some(true));
    assert_eq!(declarative_subtype_oracle(&Context::new(), &b, &a, 3), Some(false));
}

#[test]
fn queries_outside_the_universe_are_unanswered() {
    let big = ty("[m:inv Top -> Top -> Top -> Top]");
    assert_eq!(declarative_subtype_oracle(&Context::new(), &big, &Type::Top, 2), None);
    let ctx = Context::new().with_type("Z", Type::Top);
    assert_eq!(declarative_subtype_oracle(&ctx, &Type::Bot, &Type::Top, 2), None);
}

#[test]
fn depth_bounds_the_derivations() {
    let shallow = DeclarativeOracle::build(load_universe(), 1);
    let a = ty("[m:inv Top, n:inv Top]");
    let b = ty("[n:cov Top]");
    assert_eq!(shallow.holds(&a, &b), Some(false));
    let deeper = DeclarativeOracle::build(load_universe(), 3);
    assert_eq!(deeper.holds(&a, &b), Some(true));
}
