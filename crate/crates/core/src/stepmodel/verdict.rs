//! Three-valued outcomes of bounded semantic checks.

use serde::Serialize;
use std::fmt;

/// Why a counterexample refutes its claim.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Reason {
    /// The term reached a stuck configuration within the step budget.
    Stuck,
    /// The value has the wrong syntactic form for the type.
    WrongForm,
    /// The object lacks a method the type requires.
    MissingMethod,
    /// A location the type depends on is not typed by the heap typing.
    UntypedLocation,
    /// The type is empty at the index.
    Empty,
    /// Two sides of an equation or inclusion disagree on a sampled triple.
    Disagreement,
    /// The heap does not cover the domain of the heap typing.
    HeapDomain,
    /// A state extension shrinks the domain or changes a typed location.
    ExtensionDomain,
    /// A state extension raises the index.
    IndexOrder,
    /// The recursive-record type demands exactly its own methods.
    ExtraMethod,
}

/// A replayable refutation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub reason: Reason,
    /// Step index at which the failing check was made.
    pub index: u32,
    /// The value, term or location under test.
    pub subject: String,
    /// The code it failed to inhabit.
    pub code: String,
    pub detail: String,
    /// The chain of checks leading to the failure, outermost first.
    pub path: Vec<String>,
}

/// Counters describing how a `Holds` verdict was reached.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub checks: u64,
    /// Whether some quantifier was finitized by sampling.
    pub sampled: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// No counterexample exists within the budget.
    Holds(Stats),
    /// A concrete, replayable refutation.
    Counterexample(Box<Witness>),
    /// Neither outcome could be established; the string names the quantifier.
    Inconclusive(String),
}

impl Verdict {
    pub fn holds() -> Verdict {
        Verdict::Holds(Stats { checks: 1, sampled: false })
    }

    pub fn sampled() -> Verdict {
        Verdict::Holds(Stats { checks: 1, sampled: true })
    }

    pub fn counterexample(
        reason: Reason,
        index: u32,
        subject: impl fmt::Display,
        code: impl fmt::Display,
        detail: impl Into<String>,
    ) -> Verdict {
        Verdict::Counterexample(Box::new(Witness {
            reason,
            index,
            subject: subject.to_string(),
            code: code.to_string(),
            detail: detail.into(),
            path: Vec::new(),
        }))
    }

    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::Holds(_))
    }

    pub fn is_counterexample(&self) -> bool {
        matches!(self, Verdict::Counterexample(_))
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Verdict::Inconclusive(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Counterexample(w) => Some(w),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Holds(_) => "holds",
            Verdict::Counterexample(_) => "counterexample",
            Verdict::Inconclusive(_) => "inconclusive",
        }
    }

    /// Prepends a step to the witness path.
    pub fn within(self, step: impl FnOnce() -> String) -> Verdict {
        match self {
            Verdict::Counterexample(mut w) => {
                w.path.insert(0, step());
                Verdict::Counterexample(w)
            }
            other => other,
        }
    }

    /// Conjunction: a counterexample dominates, then inconclusiveness.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (c @ Verdict::Counterexample(_), _) | (_, c @ Verdict::Counterexample(_)) => c,
            (i @ Verdict::Inconclusive(_), _) | (_, i @ Verdict::Inconclusive(_)) => i,
            (Verdict::Holds(a), Verdict::Holds(b)) => {
                Verdict::Holds(Stats { checks: a.checks + b.checks, sampled: a.sampled || b.sampled })
            }
        }
    }

    /// Marks a `Holds` as resting on sampling.
    pub fn mark_sampled(self) -> Verdict {
        match self {
            Verdict::Holds(s) => Verdict::Holds(Stats { sampled: true, ..s }),
            other => other,
        }
    }

    /// A counterexample becomes inconclusive: used when the refutation
    /// depends on a finitized existential choice.
    pub fn soften(self, why: impl FnOnce() -> String) -> Verdict {
        match self {
            Verdict::Counterexample(w) => Verdict::Inconclusive(format!("{}: {}", why(), w.detail)),
            other => other,
        }
    }
}

/// Lazy conjunction over a sequence of checks, stopping at the first
/// counterexample.
pub fn all_of<I, F>(items: I, mut f: F) -> Verdict
where
    I: IntoIterator,
    F: FnMut(I::Item) -> Verdict,
{
    let mut acc = Verdict::Holds(Stats::default());
    for item in items {
        acc = acc.and(f(item));
        if acc.is_counterexample() {
            break;
        }
    }
    acc
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds(s) => {
                write!(f, "holds ({} checks{})", s.checks, if s.sampled { ", sampled" } else { "" })
            }
            Verdict::Counterexample(w) => write!(
                f,
                "counterexample [{:?}] at index {}: {} against {}: {}",
                w.reason, w.index, w.subject, w.code, w.detail
            ),
            Verdict::Inconclusive(r) => write!(f, "inconclusive: {r}"),
        }
    }
}
