//! Program generation, fuzzing, the declarative oracle and the corpus runner.

pub mod corpus;
pub mod fuzz;
pub mod gen;
pub mod oracle;
pub mod sweep;

pub use oracle::{
    declarative_subtype_oracle, enumerate_universe, load_universe, universe_manifest_text, DeclarativeOracle,
    UNIVERSE_MANIFEST,
};
pub use sweep::{encoding_sweep, oracle_sweep, EncodingSweep, OracleSweep, SWEEP_FUEL};
pub use gen::{gen_well_typed, Features, GenConfig, GenError, Generator};
pub use fuzz::{fuzz_one, fuzz_safety, program_seed, FuzzFailure, FuzzReport, OutcomeCounts};
pub use corpus::{load_corpus, load_entry, run_corpus, run_corpus_with, CorpusEntry, CorpusReport, Expectation};
