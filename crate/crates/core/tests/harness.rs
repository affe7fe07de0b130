use objcalc::eval::{run, Allocator, Config};
use objcalc::harness::*;
use objcalc::syntax::{free_vars, Term, Type};
use objcalc::typecheck::{check, Context, Mode, Mutation, DEFAULT_FUEL};
use std::path::Path;

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus");

fn cfg(seed: u64) -> GenConfig {
    GenConfig { seed, ..GenConfig::default() }
}

#[test]
fn generation_is_deterministic_per_seed() {
    assert_eq!(gen_well_typed(&cfg(5)), gen_well_typed(&cfg(5)));
    let distinct: std::collections::HashSet<_> = (0..20).map(|s| gen_well_typed(&cfg(s)).unwrap().0).collect();
    assert!(distinct.len() > 10);
}

fn settles_at_once(t: &Term) -> bool {
    let tr = run(&Config::program(t.clone()), 1, &mut Allocator::canonical());
    tr.final_config().term.is_value()
}

#[test]
fn shallow_generation_gives_values() {
    let c = GenConfig { max_term_depth: 1, ..cfg(0) };
    for seed in 0..20 {
        let c = GenConfig { seed, ..c.clone() };
        let t = Generator::new(&c).term(&Context::new(), &Type::Top, 1).expect("a term");
        assert!(settles_at_once(&t), "{t}");
    }
}

#[test]
fn object_goal_gives_an_object() {
    let c = cfg(1);
    let goal = Type::obj([("m", objcalc::Variance::Inv, Type::Top)]);
    let t = Generator::new(&c).term(&Context::new(), &goal, 2).expect("a term");
    assert!(matches!(t, Term::Obj { .. }), "{t}");
    assert!(check(&Context::new(), &t, &goal, Mode::Variance, DEFAULT_FUEL).is_ok());
}

#[test]
fn emitted_programs_are_closed_and_recheck() {
    for mode in [Mode::Variance, Mode::Split] {
        for seed in 0..150 {
            let c = GenConfig { mode, ..cfg(program_seed(11, seed)) };
            let (t, ty) = gen_well_typed(&c).unwrap();
            let fv = free_vars(&t);
            assert!(fv.is_closed() && fv.locs.is_empty(), "{t}");
            assert!(check(&Context::new(), &t, &ty, mode, DEFAULT_FUEL).is_ok(), "{t} : {ty}");
        }
    }
}

#[test]
fn generated_terms_respect_the_depth_bound() {
    for depth in 1..=6 {
        for seed in 0..300 {
            let c = GenConfig { max_term_depth: depth, ..cfg(seed) };
            let mut g = Generator::new(&c);
            let goal = g.gen_type(c.max_type_size, &[]);
            if let Some(t) = g.term(&Context::new(), &goal, depth) {
                assert!(t.depth() <= depth, "depth {depth}: {t}");
            }
        }
    }
}

#[test]
fn zero_bounds_are_rejected() {
    assert_eq!(gen_well_typed(&GenConfig { max_term_depth: 0, ..cfg(0) }), Err(GenError::BadConfig));
    assert_eq!(gen_well_typed(&GenConfig { method_pool: Vec::new(), ..cfg(0) }), Err(GenError::BadConfig));
}

#[test]
fn empty_run_passes_vacuously() {
    let r = fuzz_safety(&cfg(0), 0);
    assert_eq!(r, FuzzReport::default());
    assert!(r.passed());
}

#[test]
fn stock_rules_are_safe_on_a_sample() {
    let r = fuzz_safety(&cfg(3), 200);
    assert_eq!(r.generated, 200);
    assert_eq!(r.typechecked, 200);
    assert_eq!(r.outcomes.stuck, 0);
    assert!(r.passed(), "{:?}", r.failures);
}

#[test]
fn merging_reports_is_associative() {
    let parts: Vec<FuzzReport> = (0..3).map(|i| fuzz_safety(&cfg(i), 15)).collect();
    let left = parts[0].clone().merge(parts[1].clone()).merge(parts[2].clone());
    let right = parts[0].clone().merge(parts[1].clone().merge(parts[2].clone()));
    assert_eq!(left, right);
}

#[test]
fn broken_rules_produce_stuck_programs() {
    for m in [Mutation::DropInvVariance, Mutation::DropUpdVariance, Mutation::CovariantUpdBody, Mutation::WidthReversed] {
        let r = fuzz_safety(&GenConfig { mutation: Some(m), ..cfg(0) }, 200);
        assert!(r.outcomes.stuck > 0, "{m}");
        let f = r.failures.iter().find(|f| f.kind == "stuck").unwrap();
        let replay = fuzz_one(&GenConfig { mutation: Some(m), ..cfg(0) }, f.seed);
        assert_eq!(replay.outcomes.stuck, 1, "{m} seed {}", f.seed);
    }
}

#[test]
fn fuel_exhaustion_replays() {
    let r = fuzz_safety(&cfg(0), 200);
    let seed = (0..200)
        .map(|i| program_seed(0, i))
        .find(|&s| fuzz_one(&cfg(0), s).outcomes.fuel_exhausted == 1)
        .expect("some divergent program");
    assert!(r.outcomes.fuel_exhausted > 0);
    let (t, _) = gen_well_typed(&cfg(seed)).unwrap();
    let a = run(&Config::program(t.clone()), 500, &mut Allocator::canonical());
    let b = run(&Config::program(t), 500, &mut Allocator::canonical());
    assert_eq!(a, b);
}

#[test]
fn corpus_passes() {
    let r = run_corpus(Path::new(CORPUS));
    let failures: Vec<String> = r
        .failures()
        .map(|f| format!("{}: {:?} {:?}", f.path, f.error, f.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>()))
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
    assert!(r.files.len() >= 30);
    for name in ["list_node", "backup_retrieve", "split_only_witness"] {
        assert!(r.files.iter().any(|f| f.path.contains(name)), "{name}");
    }
}

#[test]
fn corpus_entries_carry_expectations() {
    let entries = load_corpus(Path::new(CORPUS)).unwrap();
    let witness = entries.iter().find(|e| e.path.ends_with("split_only_witness.sigma")).unwrap();
    assert!(witness.expectations.contains(&Expectation::IllTyped(Mode::Variance)));
    assert!(witness.expected_type(Mode::Split).is_some());
    assert!(load_entry(Path::new("no/such/file.sigma")).is_err());
}

#[test]
fn missing_corpus_directory_fails() {
    let r = run_corpus(Path::new("no/such/dir"));
    assert!(!r.passed());
}
