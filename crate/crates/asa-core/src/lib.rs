//! Symbolic automata as classifiers for multivariate symbolic sequences.
//!
//! The library covers the full pipeline: discretizing real-valued series into
//! symbolic sequences ([`sax`]), grounding guard predicates over a dataset
//! ([`guards`]), running nondeterministic guard automata ([`automaton`]),
//! scoring them with a lexicographic cost ([`objective`]), learning them in
//! batch ([`search`]) or incrementally with revision ([`incremental`]),
//! evaluating with cross-validation ([`eval`]), and exporting an equivalent
//! ASP optimization program ([`asp`]).
//!
//! Automata are kept deliberately small and fact-shaped: a model is a set of
//! `transition(qi,guard,qj)` facts plus a set of `accepting(qi)` facts, so it
//! can be printed, diffed, and revised one fact at a time.

pub mod asp;
pub mod automaton;
pub mod error;
pub mod eval;
pub mod guards;
pub mod incremental;
pub mod io;
pub mod model;
pub mod objective;
pub mod sax;
pub mod search;

pub use automaton::{
    parse_asa, render_asa, run, step, AcceptanceMode, Asa, Policy, RunResult, Semantics, State,
    StateSet, TransitionFact,
};
pub use error::{Error, Result};
pub use eval::{
    cross_validate, generate_planted, EvalReport, FoldReport, LearnerSpec, Metrics,
    PlantedModelSpec, Prediction,
};
pub use guards::{ground_universe, GroundGuard, GuardKind, GuardUniverse, ValueDomain};
pub use incremental::{
    guard_stats, learn_incremental, learn_incremental_with_progress, revise, BatchProgress,
    GuardStats, IncrConfig,
};
pub use model::{
    AlphabetSpec, Attr, AttributeSet, Dataset, Label, LabeledExample, Mvs, Symbol, Violation,
};
pub use objective::{
    check_structural, cost, error_cost, reg_cost, validate_configs, CostVector, EarlinessMode,
    ObjectiveConfig, RemovalPenalties, StructuralConfig, StructuralViolation,
};
pub use sax::{discretize, gaussian_breakpoints, BreakpointMode, Normalize, RawSeries, SaxConfig};
pub use search::{enumerate_optimal, local_search, BatchConfig, EnumerationCaps, LearnerReport};
