use serde_json::Value;
use std::io::Write;
use std::process::{Command, Output, Stdio};
use tempfile::NamedTempFile;

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus");

fn objcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_objcalc")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn corpus(name: &str) -> String {
    format!("{CORPUS}/{name}")
}

fn program(src: &str) -> NamedTempFile {
    let mut f = NamedTempFile::with_suffix(".sigma").unwrap();
    f.write_all(src.as_bytes()).unwrap();
    f
}

fn json_lines(out: &Output) -> Vec<Value> {
    let schema: Value = serde_json::from_str(include_str!("../schema.json")).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| {
            let v: Value = serde_json::from_str(l).unwrap_or_else(|e| panic!("{l}: {e}"));
            assert!(compiled.is_valid(&v), "does not match the schema: {l}");
            v
        })
        .collect()
}

#[test]
fn well_typed_file_checks_in_split_mode() {
    let out = objcalc(&["check", "--mode", "split", &corpus("split_only_witness.sigma")]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "Top");
    let out = objcalc(&["check", &corpus("split_only_witness.sigma")]);
    assert_eq!(code(&out), 1);
    assert!(!String::from_utf8_lossy(&out.stderr).contains("\n  SubObjVar"));
    let out = objcalc(&["check", "--explain", &corpus("split_only_witness.sigma")]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("\n  SubObjVar"));
}

#[test]
fn stuck_program_prints_its_trace() {
    let out = objcalc(&["eval", "--fuel", "10", "--trace", &corpus("stuck_after_one_step.sigma")]);
    assert_eq!(code(&out), 1);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("1 Red-Beta"), "{text}");
    assert!(text.contains("outcome stuck"), "{text}");
}

#[test]
fn fuel_exhaustion_is_a_resource_verdict() {
    let out = objcalc(&["eval", "--fuel", "3", &corpus("divergence.sigma")]);
    assert_eq!(code(&out), 2);
    let out = objcalc(&["eval", &corpus("red_beta.sigma")]);
    assert_eq!(code(&out), 0);
}

#[test]
fn reference_lemma_has_no_counterexample() {
    let out = objcalc(&["lemma", "--lemma", "SemSubVarRef", "--budget", "4", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn mutated_lemma_reports_counterexamples() {
    let out = objcalc(&["--json", "lemma", "--lemma", "SemInv", "--mutate=drop-inv-variance"]);
    assert_eq!(code(&out), 1);
    let lines = json_lines(&out);
    assert!(lines[0]["counterexamples"].as_u64().unwrap() >= 1);
    assert!(lines.iter().any(|l| l["record"]["status"] == "counterexample"));
}

#[test]
fn bare_mutate_runs_every_variant() {
    let out = objcalc(&["--json", "lemma", "--lemma", "SemSubCovRef", "--budget", "3", "--mutate"]);
    assert_eq!(code(&out), 1);
    let lines = json_lines(&out);
    assert_eq!(lines[0]["mutation"], "inverted-premise");
    let out = objcalc(&["--json", "lemma", "--lemma", "SemUpd", "--mutate"]);
    let flips: Vec<Value> =
        json_lines(&out).into_iter().filter(|l| l.get("instances").is_some()).map(|l| l["mutation"].clone()).collect();
    assert_eq!(flips.len(), 2, "{flips:?}");
    assert_eq!(code(&objcalc(&["lemma", "--lemma", "SemLam", "--mutate"])), 3);
    let out = objcalc(&["--json", "lemma", "--list"]);
    let lines = json_lines(&out);
    assert!(lines[0]["lemmas"].as_array().unwrap().len() >= 40);
    assert_eq!(lines[0]["mutations"].as_array().unwrap().len(), 6);
}

#[test]
fn usage_errors_exit_with_three() {
    assert_eq!(code(&objcalc(&["frobnicate"])), 3);
    assert_eq!(code(&objcalc(&["eval", "--fuel", "many", "x.sigma"])), 3);
    assert_eq!(code(&objcalc(&["eval", "/no/such/file.sigma"])), 3);
    assert_eq!(code(&objcalc(&["eval", "--alloc", "random:x", &corpus("red_beta.sigma")])), 3);
    assert_eq!(code(&objcalc(&["lemma", "--lemma", "NoSuchLemma"])), 3);
    assert_eq!(code(&objcalc(&["check", "--mode", "sideways", &corpus("red_beta.sigma")])), 3);
    let bad = program("\\(x:Top");
    assert_eq!(code(&objcalc(&["parse", bad.path().to_str().unwrap()])), 3);
}

#[test]
fn version_and_help_succeed() {
    let out = objcalc(&["--version"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("objcalc "));
    assert_eq!(code(&objcalc(&["--help"])), 0);
}

#[test]
fn json_output_matches_the_schema_for_every_subcommand() {
    let f = program("obj [m:cov Top] { m = self(s:[m:cov Top]) s }.m");
    let p = f.path().to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["--json", "parse", p],
        vec!["--json", "parse", "--type", "Obj(X)[m:cov X]"],
        vec!["--json", "check", p],
        vec!["--json", "check", "--mode", "split", p],
        vec!["--json", "check", "--type", "Bot", p],
        vec!["--json", "eval", "--trace", p],
        vec!["--json", "eval", p],
        vec!["--json", "eval", "--alloc", "random:5", p],
        vec!["--json", "fuzz", "--n", "20", "--seed", "3"],
        vec!["--json", "fuzz", "--n", "60", "--mutate", "drop-upd-variance"],
        vec!["--json", "lemma", "--lemma", "SemLam", "--budget", "3"],
        vec!["--json", "encode", p],
        vec!["--json", "encode", "--type", "[m:inv Top]"],
        vec!["--json", "desugar", "--type", "Obj(X)[m:cov X]"],
        vec!["--json", "desugar", p],
        vec!["--json", "eval", "/no/such/file"],
    ];
    for args in runs {
        let out = objcalc(&args);
        let lines = json_lines(&out);
        assert!(!lines.is_empty(), "{args:?}");
    }
}

#[test]
fn fuzz_writes_a_report() {
    let report = NamedTempFile::new().unwrap();
    let path = report.path().to_str().unwrap();
    let out = objcalc(&["fuzz", "--n", "30", "--seed", "9", "--report", path]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["report"]["generated"], 30);
    assert_eq!(v["config"]["seed"], 9);
    let out = objcalc(&["fuzz", "--n", "200", "--mutate", "drop-inv-variance", "--jobs", "2"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let mut cfg = NamedTempFile::new().unwrap();
    writeln!(cfg, "# settings\nfuel = 3\nmode = split\n").unwrap();
    let cfg_path = cfg.path().to_str().unwrap();
    let div = corpus("divergence.sigma");
    assert_eq!(code(&objcalc(&["--config", cfg_path, "eval", &div])), 2);
    let out = objcalc(&["--config", cfg_path, "--json", "eval", "--fuel", "7", &div]);
    assert_eq!(json_lines(&out)[0]["steps"], 7);
    let out = objcalc(&["--config", cfg_path, "check", &corpus("split_only_witness.sigma")]);
    assert_eq!(code(&out), 0);
    let mut broken = NamedTempFile::new().unwrap();
    writeln!(broken, "fuel").unwrap();
    assert_eq!(code(&objcalc(&["--config", broken.path().to_str().unwrap(), "eval", &div])), 3);
}

#[test]
fn stdin_is_read_for_dash() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_objcalc"))
        .args(["encode", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"\\(x:[m:cov Top]) x").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "\\(x:[m:(Bot, Top)]) x");
}
