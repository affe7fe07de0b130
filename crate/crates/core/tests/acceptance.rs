//! End-to-end acceptance run. Prints one line per criterion; run with
//! `cargo test -p objcalc --test acceptance -- --nocapture` to see them.

use objcalc::eval::{execute, run, safe_k, traces_equivalent, Allocator, Config, Heap, Outcome, Rule};
use objcalc::harness::*;
use objcalc::stepmodel::*;
use objcalc::syntax::{parse_term, print_term, Loc, Term};
use objcalc::typecheck::{check, type_of, Context, Mode, Mutation, DEFAULT_FUEL};
use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration, Instant};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus");
const SEED: u64 = 42;

struct Line {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn criterion(id: u32, name: &'static str, limit: Option<Duration>, f: impl FnOnce() -> (bool, String)) -> Line {
    let start = Instant::now();
    let (ok, mut detail) = f();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    if !in_time {
        detail.push_str(&format!("; over the {}s limit", limit.unwrap().as_secs()));
    }
    let line = Line { id, name, passed: ok && in_time, detail, elapsed };
    println!(
        "[{}] criterion {} {}: {} ({:.1}s)",
        if line.passed { "PASS" } else { "FAIL" },
        line.id,
        line.name,
        line.detail,
        line.elapsed.as_secs_f64()
    );
    line
}

fn t(s: &str) -> Term {
    parse_term(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn safety_fuzz() -> (bool, String) {
    let cfg = GenConfig { seed: SEED, max_term_depth: 6, fuel: 500, ..GenConfig::default() };
    let r = fuzz_safety(&cfg, 1000);
    let ok = r.typechecked >= 1000 && r.outcomes.stuck == 0 && r.passed();
    (
        ok,
        format!(
            "{} programs, {} values, {} out of fuel, {} stuck, {} failures",
            r.typechecked,
            r.outcomes.value,
            r.outcomes.fuel_exhausted,
            r.outcomes.stuck,
            r.failures.len()
        ),
    )
}

fn oracle_agreement() -> (bool, String) {
    let oracle = DeclarativeOracle::build(load_universe(), 8);
    let r = oracle_sweep(&oracle);
    (
        r.passed(),
        format!("{} types, {}/{} pairs agree, {} unknown, {} subtype pairs", r.types, r.agree, r.pairs, r.unknown, r.yes),
    )
}

fn encoding() -> (bool, String) {
    let r = encoding_sweep(&load_universe());
    let entry = load_entry(&Path::new(CORPUS).join("split_only_witness.sigma")).expect("witness file");
    let ctx = Context::new();
    let ty = objcalc::syntax::parse_type(entry.expected_type(Mode::Split).expect("split expectation")).expect("type");
    let split = check(&ctx, &entry.term, &ty, Mode::Split, DEFAULT_FUEL).is_ok();
    let variance = type_of(&ctx, &entry.term, Mode::Variance, DEFAULT_FUEL).is_ok();
    (
        r.passed() && split && !variance,
        format!(
            "{}/{} variance pairs kept, {} split-only pairs; witness split={} variance={}",
            r.split_yes, r.variance_yes, r.split_only, split, variance
        ),
    )
}

fn false_positive() -> (bool, String) {
    let heap: Heap = [(Loc(0), t("\\(s:Top) s"))].into_iter().collect();
    let oracle = execute(Config::new(heap, t("({m=@0}).m")), 50, &mut Allocator::canonical());
    // One beta step on the argument, the invocation's steps, then the result check.
    let failing_index = oracle.steps as u32 + 2;
    let model = Model::new(Budget::standard(5, SEED)).expect("budget");
    let psi = HeapTypingApprox::from_entries([(Loc(0), TypeCode::arrow(code_p(), code_p()))]);
    let v = t("\\(y:Top) ({m=@0}).m");
    let tau = TypeCode::arrow(TypeCode::Top, code_q());
    let at2 = model.mem_value(2, &psi, &v, &tau);
    let mut ok = oracle.outcome == Outcome::Value && at2.is_holds();
    let mut first_ce = None;
    for k in 0..=6 {
        let r = model.mem_value(k, &psi, &v, &tau);
        if let Some(w) = r.witness() {
            first_ce.get_or_insert(k);
            let again = Model::new(Budget::standard(5, SEED)).expect("budget").mem_value(k, &psi, &v, &tau);
            ok &= k >= 4 && again == r && w.subject == print_term(&oracle.config.term);
        }
    }
    ok &= first_ce == Some(failing_index) && (4..=6).all(|k| model.mem_value(k, &psi, &v, &tau).is_counterexample());
    (ok, format!("Holds at k=2: {}; first counterexample at k={:?}, evaluation predicts k={}", at2.is_holds(), first_ce, failing_index))
}

fn lemma_suite() -> (bool, String) {
    let budget = Budget::standard(5, SEED);
    if budget.values.len() < 20 || budget.witnesses.len() < 10 {
        return (false, "catalogs below the required size".into());
    }
    let stock = stock_suite(&budget).expect("stock suite");
    let stock_ce: usize = stock.iter().map(LemmaReport::counterexamples).sum();
    let instances: usize = stock.iter().map(|r| r.records.len()).sum();
    let mut ok = stock_ce == 0;
    let mut parts = Vec::new();
    for m in Mutation::ALL {
        let reports = mutation_suite(Flip::Rule(m), &budget).expect("mutation suite");
        let ce: Vec<&Record> = reports.iter().flat_map(|r| &r.records).filter(|r| r.status == Status::Counterexample).collect();
        ok &= !ce.is_empty() && ce.iter().all(|r| replay(r, &budget).unwrap_or(false));
        parts.push(format!("{m}={}", ce.len()));
    }
    (
        ok,
        format!(
            "{} lemmas, {} instances, {} stock counterexamples; mutants: {}",
            stock.len(),
            instances,
            stock_ce,
            parts.join(" ")
        ),
    )
}

fn soundness_bridge() -> (bool, String) {
    let entries = load_corpus(Path::new(CORPUS)).expect("corpus");
    let model = Model::new(Budget::standard(5, SEED)).expect("budget");
    let ctx = Context::new();
    let psi = HeapTypingApprox::new();
    let (mut typed, mut failures) = (0, Vec::new());
    for e in &entries {
        let ty = [Mode::Variance, Mode::Split].into_iter().find_map(|m| type_of(&ctx, &e.term, m, DEFAULT_FUEL).ok());
        let Some(ty) = ty else { continue };
        typed += 1;
        let name = e.path.file_name().unwrap().to_string_lossy().into_owned();
        let code = match interp(&ty, &CodeEnv::new()) {
            Ok(c) => c,
            Err(err) => {
                failures.push(format!("{name}: {err}"));
                continue;
            }
        };
        if let Some(k) = (0..=5).find(|&k| model.mem_term(k, &psi, &e.term, &code).is_counterexample()) {
            failures.push(format!("{name}: refuted at k={k}"));
        }
        if !safe_k(&Config::program(e.term.clone()), 500) {
            failures.push(format!("{name}: unsafe within 500 steps"));
        }
    }
    (
        entries.len() >= 30 && failures.is_empty(),
        format!("{} files, {} typed, failures: {:?}", entries.len(), typed, failures),
    )
}

fn evaluator_semantics() -> (bool, String) {
    let entries = load_corpus(Path::new(CORPUS)).expect("corpus");
    let mut covered = BTreeSet::new();
    let mut mismatched = Vec::new();
    for e in &entries {
        for exp in &e.expectations {
            let Expectation::Trace(file) = exp else { continue };
            let golden = std::fs::read_to_string(e.path.parent().unwrap().join(file)).unwrap_or_default();
            let trace = run(&Config::program(e.term.clone()), e.fuel(), &mut Allocator::canonical());
            if trace.to_string() == golden {
                covered.extend(trace.rules());
            } else {
                mismatched.push(file.clone());
            }
        }
    }
    let all_rules = Rule::ALL.iter().all(|r| covered.contains(r));
    let mut equivalent = 0;
    for i in 0..100 {
        let seed = program_seed(SEED, i);
        let (term, _) = gen_well_typed(&GenConfig { seed, ..GenConfig::default() }).expect("generator");
        let c = Config::program(term);
        let a = run(&c, 500, &mut Allocator::canonical());
        let b = run(&c, 500, &mut Allocator::randomized(seed));
        equivalent += traces_equivalent(&a, &b) as u32;
    }
    (
        all_rules && mismatched.is_empty() && equivalent == 100,
        format!(
            "{}/8 rules covered by golden traces, mismatches {:?}; {}/100 programs allocator-independent",
            covered.len(),
            mismatched,
            equivalent
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let secs = |s| Some(Duration::from_secs(s));
    let lines = [
        criterion(1, "safety fuzz", secs(120), safety_fuzz),
        criterion(2, "subtyping oracle sweep", secs(300), oracle_agreement),
        criterion(3, "encoding sweep", None, encoding),
        criterion(4, "step-index false positive", None, false_positive),
        criterion(5, "lemma falsifier suite", secs(600), lemma_suite),
        criterion(6, "soundness bridge", None, soundness_bridge),
        criterion(7, "evaluator semantics", None, evaluator_semantics),
    ];
    let failed: Vec<u32> = lines.iter().filter(|l| !l.passed).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
