use crate::config::Settings;
use crate::{CheckArgs, Cli, Command, EvalArgs, FuzzArgs, LemmaArgs, ParseArgs, TransformArgs};
use objcalc::eval::{run, Allocator, Config, Outcome};
use objcalc::harness::{fuzz_safety, GenConfig};
use objcalc::stepmodel::{check_lemma, mutation_suite, stock_suite, Budget, Flip, LemmaError, LemmaId, LemmaReport, Status};
use objcalc::syntax::{desugar_self, desugar_self_in_term, parse_term, parse_type, print_term, print_type, term_to_json, type_to_json};
use objcalc::typecheck::{check, encode_term_to_split, encode_to_split, type_of, Context, Mode, Mutation, DEFAULT_FUEL};
use serde_json::{json, Value};
use std::io::Read;
use std::path::{Path, PathBuf};

pub const OK: u8 = 0;
pub const NEGATIVE: u8 = 1;
pub const RESOURCE: u8 = 2;
pub const USAGE: u8 = 3;

/// An early exit with its code and message.
struct Fail(u8, String);

fn usage(msg: impl Into<String>) -> Fail {
    Fail(USAGE, msg.into())
}

type Res = Result<u8, Fail>;

struct Out {
    json: bool,
}

impl Out {
    fn emit(&self, value: Value, text: impl FnOnce() -> String) {
        if self.json {
            println!("{value}");
        } else {
            let text = text();
            if !text.is_empty() {
                println!("{}", text.trim_end());
            }
        }
    }
}

pub fn main(cli: Cli) -> u8 {
    let out = Out { json: cli.json };
    let result = Settings::load(cli.config.as_deref()).map_err(usage).and_then(|settings| {
        let out = Out { json: out.json || settings.flag(false, "json").map_err(usage)? };
        if let Some(n) = settings.pick_opt(cli.jobs, "jobs").map_err(usage)? {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| usage(format!("--jobs: {e}")))?;
        }
        match &cli.command {
            Command::Parse(a) => parse(a, &out),
            Command::Check(a) => check_cmd(a, &settings, &out),
            Command::Eval(a) => eval(a, &settings, &out),
            Command::Fuzz(a) => fuzz(a, &settings, &out),
            Command::Lemma(a) => lemma(a, &settings, &out),
            Command::Encode(a) => transform(a, "encode", &out),
            Command::Desugar(a) => transform(a, "desugar", &out),
        }
    });
    match result {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            if out.json {
                println!("{}", json!({ "error": msg, "exit": code }));
            }
            eprintln!("objcalc: {msg}");
            if code == USAGE {
                eprintln!("usage: objcalc [--json] [--config FILE] [--jobs N] <parse|check|eval|fuzz|lemma|encode|desugar> ...");
            }
            code
        }
    }
}

fn read_source(file: Option<&Path>) -> Result<String, Fail> {
    match file {
        Some(p) if p != Path::new("-") => {
            std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| usage(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn load_term(file: Option<&Path>) -> Result<objcalc::Term, Fail> {
    let src = read_source(file)?;
    parse_term(&src).map_err(|e| usage(format!("{}: {e}", file.unwrap_or(Path::new("-")).display())))
}

fn load_type(src: &str) -> Result<objcalc::Type, Fail> {
    parse_type(src).map_err(|e| usage(format!("type {src:?}: {e}")))
}

fn mode(settings: &Settings, flag: &Option<String>) -> Result<Mode, Fail> {
    settings.pick(flag.clone(), "mode", "variance".to_string()).map_err(usage)?.parse().map_err(usage)
}

fn parse(a: &ParseArgs, out: &Out) -> Res {
    if let Some(src) = &a.ty {
        let ty = load_type(src)?;
        out.emit(json!({ "command": "parse", "kind": "type", "printed": print_type(&ty), "ast": type_to_json(&ty) }), || {
            print_type(&ty)
        });
        return Ok(OK);
    }
    let t = load_term(a.file.as_deref())?;
    out.emit(json!({ "command": "parse", "kind": "term", "printed": print_term(&t), "ast": term_to_json(&t) }), || {
        print_term(&t)
    });
    Ok(OK)
}

fn check_cmd(a: &CheckArgs, settings: &Settings, out: &Out) -> Res {
    let mode = mode(settings, &a.mode)?;
    let fuel = settings.pick(a.fuel, "fuel", DEFAULT_FUEL).map_err(usage)?;
    let t = load_term(Some(&a.file))?;
    let ctx = Context::new();
    let result = match &a.ty {
        Some(src) => {
            let ty = load_type(src)?;
            check(&ctx, &t, &ty, mode, fuel).map(|()| ty)
        }
        None => type_of(&ctx, &t, mode, fuel),
    };
    match result {
        Ok(ty) => {
            out.emit(json!({ "command": "check", "mode": mode.to_string(), "ok": true, "type": print_type(&ty) }), || {
                print_type(&ty)
            });
            Ok(OK)
        }
        Err(e) => {
            let explanation = e.explanation();
            out.emit(
                json!({
                    "command": "check",
                    "mode": mode.to_string(),
                    "ok": false,
                    "error": e.to_string(),
                    "explanation": explanation,
                }),
                String::new,
            );
            if !out.json {
                eprintln!("ill-typed: {e}");
                for line in explanation.iter().filter(|_| a.explain) {
                    eprintln!("  {line}");
                }
            }
            Ok(if e.is_fuel() { RESOURCE } else { NEGATIVE })
        }
    }
}

fn eval(a: &EvalArgs, settings: &Settings, out: &Out) -> Res {
    let fuel = settings.pick(a.fuel, "fuel", 500).map_err(usage)?;
    let trace_flag = settings.flag(a.trace, "trace").map_err(usage)?;
    let t = load_term(Some(&a.file))?;
    let alloc_spec = settings.pick(a.alloc.clone(), "alloc", "canonical".to_string()).map_err(usage)?;
    let mut alloc = match alloc_spec.split_once(':') {
        None if alloc_spec == "canonical" => Allocator::canonical(),
        Some(("random", seed)) => Allocator::randomized(seed.parse().map_err(|e| usage(format!("--alloc {alloc_spec}: {e}")))?),
        _ => return Err(usage(format!("--alloc {alloc_spec}: expected canonical or random:SEED"))),
    };
    let trace = run(&Config::program(t), fuel, &mut alloc);
    let fin = trace.final_config();
    let mut value = json!({
        "command": "eval",
        "outcome": trace.outcome.to_string(),
        "steps": trace.steps.len(),
        "result": print_term(&fin.term),
    });
    if trace_flag {
        value["trace"] = trace.to_json();
    }
    out.emit(value, || {
        if trace_flag {
            trace.to_string()
        } else {
            format!("{}\n{} after {} steps", fin, trace.outcome, trace.steps.len())
        }
    });
    Ok(match trace.outcome {
        Outcome::Value => OK,
        Outcome::Stuck(_) => NEGATIVE,
        Outcome::FuelExhausted => RESOURCE,
    })
}

fn fuzz(a: &FuzzArgs, settings: &Settings, out: &Out) -> Res {
    let defaults = GenConfig::default();
    let mutation = settings
        .pick_opt(a.mutate.clone(), "mutate")
        .map_err(usage)?
        .map(|m| m.parse::<Mutation>())
        .transpose()
        .map_err(usage)?;
    let cfg = GenConfig {
        max_term_depth: settings.pick(a.depth, "depth", defaults.max_term_depth).map_err(usage)?,
        fuel: settings.pick(a.fuel, "fuel", defaults.fuel).map_err(usage)?,
        seed: settings.pick(a.seed, "seed", defaults.seed).map_err(usage)?,
        mode: mode(settings, &a.mode)?,
        mutation,
        ..defaults
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let n = settings.pick(a.n, "n", 1000).map_err(usage)?;
    let report = fuzz_safety(&cfg, n);
    let value = serde_json::to_value(&report).expect("report serializes");
    if let Some(path) = &a.report {
        write_report(path, &json!({ "config": cfg, "report": value }))?;
    }
    let summary = json!({
        "command": "fuzz",
        "passed": report.passed(),
        "generated": report.generated,
        "typechecked": report.typechecked,
        "outcomes": report.outcomes,
        "gave_up": report.gave_up,
        "failures": report.failures,
    });
    out.emit(summary, || {
        let mut s = format!(
            "{} generated, {} typechecked: {} values, {} out of fuel, {} stuck\n",
            report.generated,
            report.typechecked,
            report.outcomes.value,
            report.outcomes.fuel_exhausted,
            report.outcomes.stuck
        );
        for f in report.failures.iter().take(5) {
            s.push_str(&format!("{} seed {}: {}\n", f.kind, f.seed, f.detail));
            if let Some(p) = &f.program {
                s.push_str(&format!("  {p}\n"));
            }
        }
        s
    });
    Ok(if report.passed() { OK } else { NEGATIVE })
}

fn write_report(path: &PathBuf, value: &Value) -> Result<(), Fail> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn lemma_fail(e: LemmaError) -> Fail {
    match e {
        LemmaError::Budget(b) => Fail(RESOURCE, b.to_string()),
        other => usage(other.to_string()),
    }
}

fn lemma(a: &LemmaArgs, settings: &Settings, out: &Out) -> Res {
    if a.list {
        let lemmas: Vec<&str> = LemmaId::ALL.iter().map(|l| l.name()).collect();
        let flips: Vec<&str> = Flip::all().into_iter().map(|f| f.name()).collect();
        out.emit(json!({ "command": "lemma", "lemmas": lemmas, "mutations": flips }), || {
            format!("lemmas: {}\nmutations: {}", lemmas.join(" "), flips.join(" "))
        });
        return Ok(OK);
    }
    let k_max = settings.pick(a.budget, "budget", 5).map_err(usage)?;
    let seed = settings.pick(a.seed, "seed", 42).map_err(usage)?;
    let which = settings.pick(a.lemma.clone(), "lemma", "all".to_string()).map_err(usage)?;
    let budget = Budget::standard(k_max, seed);
    budget.validate().map_err(|e| Fail(RESOURCE, e.to_string()))?;
    let lemma = if which == "all" { None } else { Some(which.parse::<LemmaId>().map_err(lemma_fail)?) };
    let flips: Vec<Option<Flip>> = match a.mutate.as_deref() {
        None => vec![None],
        Some("all") => {
            let applicable: Vec<Option<Flip>> = Flip::all()
                .into_iter()
                .filter(|f| lemma.is_none_or(|id| f.targets().contains(&id)))
                .map(Some)
                .collect();
            if applicable.is_empty() {
                return Err(usage(format!("lemma {which} has no mutated variants")));
            }
            applicable
        }
        Some(name) => vec![Some(name.parse::<Flip>().map_err(lemma_fail)?)],
    };
    let mut reports: Vec<LemmaReport> = Vec::new();
    for flip in flips {
        let batch = match (lemma, flip) {
            (Some(id), flip) => vec![check_lemma(id, flip, &budget).map_err(lemma_fail)?],
            (None, None) => stock_suite(&budget).map_err(lemma_fail)?,
            (None, Some(f)) => mutation_suite(f, &budget).map_err(lemma_fail)?,
        };
        reports.extend(batch);
    }
    let mut counterexamples = 0;
    for r in &reports {
        counterexamples += r.counterexamples();
        let flip = r.flip.map(|f| f.name().to_string());
        let summary = json!({
            "command": "lemma",
            "lemma": r.lemma.name(),
            "mutation": flip,
            "k_max": k_max,
            "seed": seed,
            "instances": r.records.len(),
            "holds": r.count(Status::Holds),
            "vacuous": r.count(Status::Vacuous),
            "inconclusive": r.count(Status::Inconclusive),
            "counterexamples": r.counterexamples(),
        });
        out.emit(summary, || {
            format!(
                "{:<28} {:<20} instances {:>4}  holds {:>4}  vacuous {:>3}  inconclusive {:>3}  counterexamples {}",
                r.lemma.name(),
                flip.as_deref().unwrap_or("stock"),
                r.records.len(),
                r.count(Status::Holds),
                r.count(Status::Vacuous),
                r.count(Status::Inconclusive),
                r.counterexamples()
            )
        });
        for rec in &r.records {
            if !out.json && rec.status != Status::Counterexample {
                continue;
            }
            let value = serde_json::to_value(rec).expect("record serializes");
            out.emit(json!({ "command": "lemma", "record": value }), || {
                format!("  counterexample {}: {}\n    {}", rec.instance, rec.claim, rec.verdict)
            });
        }
    }
    Ok(if counterexamples > 0 { NEGATIVE } else { OK })
}

fn transform(a: &TransformArgs, which: &'static str, out: &Out) -> Res {
    if let Some(src) = &a.ty {
        let ty = load_type(src)?;
        let res = if which == "encode" { encode_to_split(&ty) } else { desugar_self(&ty) };
        out.emit(json!({ "command": which, "kind": "type", "printed": print_type(&res), "ast": type_to_json(&res) }), || {
            print_type(&res)
        });
        return Ok(OK);
    }
    let t = load_term(a.file.as_deref())?;
    let res = if which == "encode" { encode_term_to_split(&t, None) } else { desugar_self_in_term(&t) };
    out.emit(json!({ "command": which, "kind": "term", "printed": print_term(&res), "ast": term_to_json(&res) }), || {
        print_term(&res)
    });
    Ok(OK)
}
