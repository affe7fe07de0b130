//! Regression corpus: program files carrying `//!expect:` assertions.
//!
//! Recognised assertions, one per comment line:
//!
//! ```text
//! //!expect: type T            checks against T in variance mode
//! //!expect: type-split T      checks against T in split mode
//! //!expect: ill-typed         rejected in variance mode
//! //!expect: ill-typed-split   rejected in split mode
//! //!expect: wf-type T         T is well-formed in the empty context
//! //!expect: fuel N            fuel for the run (default 500)
//! //!expect: outcome O         value | fuel-exhausted | stuck(reason)
//! //!expect: steps N           number of reduction steps
//! //!expect: rules R ...       the rule applied at each step
//! //!expect: result V          final term, up to alpha-equivalence
//! //!expect: trace FILE        byte-exact golden trace, relative to the file
//! ```

use crate::eval::{run, Allocator, Config, Trace};
use crate::syntax::{alpha_eq_term, desugar_self, parse_term, parse_type, Term};
use crate::typecheck::{check, wf_type, Context, Mode, DEFAULT_FUEL};
use serde::Serialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// File extension of corpus programs.
pub const CORPUS_EXT: &str = "sigma";
/// Fuel used when a file does not set one.
pub const DEFAULT_RUN_FUEL: usize = 500;

#[derive(Debug, Error)]
pub enum CorpusError {
    /// The corpus directory or a file could not be read.
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// An assertion line is malformed.
    #[error("{path}:{line}: {message}")]
    Expectation { path: PathBuf, line: usize, message: String },
    /// The program text does not parse.
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    Type(Mode, String),
    IllTyped(Mode),
    WfType(String),
    Fuel(usize),
    Outcome(String),
    Steps(usize),
    Rules(Vec<String>),
    Result(String),
    Trace(String),
}

/// A parsed corpus file.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub name: String,
    pub source: String,
    pub term: Term,
    pub expectations: Vec<Expectation>,
}

impl CorpusEntry {
    pub fn fuel(&self) -> usize {
        self.expectations
            .iter()
            .find_map(|e| match e {
                Expectation::Fuel(n) => Some(*n),
                _ => None,
            })
            .unwrap_or(DEFAULT_RUN_FUEL)
    }

    /// Whether the file asserts that the program is well typed in `mode`.
    pub fn expected_type(&self, mode: Mode) -> Option<&str> {
        self.expectations.iter().find_map(|e| match e {
            Expectation::Type(m, t) if *m == mode => Some(t.as_str()),
            _ => None,
        })
    }
}

fn parse_expectations(path: &Path, src: &str) -> Result<Vec<Expectation>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let Some(rest) = line.trim().strip_prefix("//!expect:") else { continue };
        let rest = rest.trim();
        let (key, arg) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
        let arg = arg.trim().to_string();
        let bad = |message: String| CorpusError::Expectation { path: path.to_path_buf(), line: i + 1, message };
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("expected a number, found {s:?}")));
        out.push(match key {
            "type" => Expectation::Type(Mode::Variance, arg),
            "type-split" => Expectation::Type(Mode::Split, arg),
            "ill-typed" => Expectation::IllTyped(Mode::Variance),
            "ill-typed-split" => Expectation::IllTyped(Mode::Split),
            "wf-type" => Expectation::WfType(arg),
            "fuel" => Expectation::Fuel(num(&arg)?),
            "outcome" => Expectation::Outcome(arg),
            "steps" => Expectation::Steps(num(&arg)?),
            "rules" => Expectation::Rules(arg.split_whitespace().map(String::from).collect()),
            "result" => Expectation::Result(arg),
            "trace" => Expectation::Trace(arg),
            other => return Err(bad(format!("unknown assertion {other:?}"))),
        });
    }
    Ok(out)
}

/// Reads and parses one corpus file.
pub fn load_entry(path: &Path) -> Result<CorpusEntry, CorpusError> {
    let source = std::fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    let expectations = parse_expectations(path, &source)?;
    let term = parse_term(&source).map_err(|e| CorpusError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(CorpusEntry { path: path.to_path_buf(), name, source, term, expectations })
}

/// Every `.sigma` file directly under `dir`, sorted by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let io = |source| CorpusError::Io { path: dir.to_path_buf(), source };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == CORPUS_EXT))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_entry(p)).collect()
}

/// One checked assertion.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub assertion: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct FileReport {
    pub path: String,
    pub checks: Vec<CheckResult>,
    /// Set when the file could not be loaded at all.
    pub error: Option<String>,
}

impl FileReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CorpusReport {
    pub files: Vec<FileReport>,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        !self.files.is_empty() && self.files.iter().all(FileReport::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &FileReport> {
        self.files.iter().filter(|f| !f.passed())
    }
}

/// Runs every assertion of every file under `dir`.
pub fn run_corpus(dir: &Path) -> CorpusReport {
    run_corpus_with(dir, false)
}

/// Like [`run_corpus`]; with `bless`, golden traces are rewritten instead of
/// compared.
pub fn run_corpus_with(dir: &Path, bless: bool) -> CorpusReport {
    let mut paths: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == CORPUS_EXT))
            .collect(),
        Err(e) => {
            return CorpusReport {
                files: vec![FileReport { path: dir.display().to_string(), checks: Vec::new(), error: Some(e.to_string()) }],
            }
        }
    };
    paths.sort();
    let files = paths
        .iter()
        .map(|p| match load_entry(p) {
            Ok(entry) => check_entry(&entry, bless),
            Err(e) => FileReport { path: p.display().to_string(), checks: Vec::new(), error: Some(e.to_string()) },
        })
        .collect();
    CorpusReport { files }
}

/// The canonical-allocator trace of an entry at its fuel.
pub fn entry_trace(entry: &CorpusEntry) -> Trace {
    run(&Config::program(entry.term.clone()), entry.fuel(), &mut Allocator::canonical())
}

/// Checks the assertions of one loaded file.
pub fn check_entry(entry: &CorpusEntry, bless: bool) -> FileReport {
    let trace = entry_trace(entry);
    let mut checks = Vec::new();
    let mut push = |assertion: String, passed: bool, detail: String| checks.push(CheckResult { assertion, passed, detail });
    let ctx = Context::new();
    for e in &entry.expectations {
        match e {
            Expectation::Type(mode, ty) => {
                let label = format!("type[{mode}] {ty}");
                match parse_type(ty) {
                    Ok(ty) => match check(&ctx, &entry.term, &ty, *mode, DEFAULT_FUEL) {
                        Ok(()) => push(label, true, String::new()),
                        Err(err) => push(label, false, err.to_string()),
                    },
                    Err(err) => push(label, false, err.to_string()),
                }
            }
            Expectation::IllTyped(mode) => {
                let r = crate::typecheck::type_of(&ctx, &entry.term, *mode, DEFAULT_FUEL);
                push(format!("ill-typed[{mode}]"), r.is_err(), r.map(|t| format!("typed at {t}")).unwrap_or_default());
            }
            Expectation::WfType(ty) => match parse_type(ty) {
                Ok(t) => push(format!("wf-type {ty}"), wf_type(&ctx, &desugar_self(&t)), String::new()),
                Err(err) => push(format!("wf-type {ty}"), false, err.to_string()),
            },
            Expectation::Fuel(_) => {}
            Expectation::Outcome(o) => {
                let got = trace.outcome.to_string();
                push(format!("outcome {o}"), got == *o, format!("got {got}"));
            }
            Expectation::Steps(n) => {
                push(format!("steps {n}"), trace.steps.len() == *n, format!("got {}", trace.steps.len()));
            }
            Expectation::Rules(rs) => {
                let got: Vec<String> = trace.rules().iter().map(|r| r.name().to_string()).collect();
                push(format!("rules {}", rs.join(" ")), got == *rs, format!("got {}", got.join(" ")));
            }
            Expectation::Result(v) => match parse_term(v) {
                Ok(v) => {
                    let got = &trace.final_config().term;
                    push(format!("result {v}"), alpha_eq_term(got, &v), format!("got {got}"));
                }
                Err(err) => push(format!("result {v}"), false, err.to_string()),
            },
            Expectation::Trace(file) => {
                let golden = entry.path.parent().unwrap_or(Path::new(".")).join(file);
                let text = trace.to_string();
                if bless {
                    let r = std::fs::write(&golden, &text);
                    push(format!("trace {file}"), r.is_ok(), "blessed".into());
                    continue;
                }
                match std::fs::read_to_string(&golden) {
                    Ok(g) => push(format!("trace {file}"), g == text, if g == text { String::new() } else { text }),
                    Err(err) => push(format!("trace {file}"), false, err.to_string()),
                }
            }
        }
    }
    FileReport { path: entry.path.display().to_string(), checks, error: None }
}
