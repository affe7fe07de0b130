use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use objcalc::eval::{run, safe_k, Allocator, Config};
use objcalc::harness::{fuzz_safety, load_universe, GenConfig};
use objcalc::stepmodel::{check_lemma, interp, Budget, CodeEnv, HeapTypingApprox, LemmaId, Model};
use objcalc::syntax::{parse_term, print_term};
use objcalc::typecheck::{subtype, type_of, Context, Mode, DEFAULT_FUEL};
use objcalc_bench::{generated, source_term, SOURCE};

fn front_end(c: &mut Criterion) {
    c.bench_function("parse", |b| b.iter(|| parse_term(black_box(SOURCE)).unwrap()));
    let t = source_term();
    c.bench_function("print", |b| b.iter(|| print_term(black_box(&t))));
    c.bench_function("type_of", |b| b.iter(|| type_of(&Context::new(), black_box(&t), Mode::Variance, DEFAULT_FUEL).unwrap()));
}

fn evaluation(c: &mut Criterion) {
    let programs = generated(50);
    c.bench_function("run 50 generated programs", |b| {
        b.iter(|| {
            for (t, _) in &programs {
                black_box(run(&Config::program(t.clone()), 500, &mut Allocator::canonical()));
            }
        })
    });
    let start = Config::program(source_term());
    c.bench_function("safe_k 500", |b| b.iter(|| safe_k(black_box(&start), 500)));
}

fn subtyping(c: &mut Criterion) {
    let universe = load_universe();
    let sample: Vec<_> = universe.iter().step_by(53).collect();
    c.bench_function("subtype universe sample", |b| {
        b.iter(|| {
            let ctx = Context::new();
            for a in &sample {
                for bt in &sample {
                    black_box(subtype(&ctx, a, bt, Mode::Variance, DEFAULT_FUEL));
                }
            }
        })
    });
}

fn semantics(c: &mut Criterion) {
    let programs = generated(10);
    c.bench_function("mem_term k=3 on 10 programs", |b| {
        b.iter_batched(
            || Model::new(Budget::standard(3, 42)).unwrap(),
            |m| {
                for (t, ty) in &programs {
                    let tau = interp(ty, &CodeEnv::new()).unwrap();
                    black_box(m.mem_term(3, &HeapTypingApprox::new(), t, &tau));
                }
            },
            BatchSize::PerIteration,
        )
    });
    let budget = Budget::standard(3, 42);
    c.bench_function("lemma SemSubVarRef k=3", |b| b.iter(|| check_lemma(LemmaId::SemSubVarRef, None, &budget).unwrap()));
}

fn fuzzing(c: &mut Criterion) {
    let mut group = c.benchmark_group("fuzz");
    group.sample_size(10);
    group.bench_function("100 programs", |b| b.iter(|| fuzz_safety(&GenConfig::default(), 100)));
    group.finish();
}

criterion_group!(benches, front_end, evaluation, subtyping, semantics, fuzzing);
criterion_main!(benches);
