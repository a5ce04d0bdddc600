//! Config-file loading and flag-over-file merging.
//!
//! Every tunable lives in one optional TOML file with a section per config
//! struct; each command also exposes the same fields as flags, and a flag
//! always wins over the file value, which wins over the built-in default.

use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::Args;
use serde::Deserialize;

use asa_core::{
    AcceptanceMode, AlphabetSpec, BatchConfig, BreakpointMode, EarlinessMode, EnumerationCaps,
    Error, GuardKind, IncrConfig, Normalize, Policy, SaxConfig, Semantics, ValueDomain,
};

/// The config file: any subset of sections and fields may be present,
/// missing ones take the library defaults. Unknown section names are
/// rejected so typos fail loudly.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub batch: BatchConfig,
    pub incremental: IncrConfig,
    pub sax: SaxConfig,
    pub caps: EnumerationCaps,
    /// Run semantics for `run` (the learners carry their own copy inside
    /// `batch.semantics`).
    pub semantics: Semantics,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
    let cfg = toml::from_str(&text)
        .map_err(|e| Error::Config(format!("config file {}: {e}", path.display())))?;
    Ok(cfg)
}

fn unknown(what: &str, got: &str, options: &str) -> anyhow::Error {
    Error::Config(format!("unknown {what} {got:?} (expected one of: {options})")).into()
}

pub fn parse_policy(s: &str) -> Result<Policy> {
    match s {
        "strict" | "strict_contiguity" => Ok(Policy::StrictContiguity),
        "skip" | "skip_till_any_match" => Ok(Policy::SkipTillAnyMatch),
        _ => Err(unknown("policy", s, "strict, skip")),
    }
}

pub fn parse_acceptance(s: &str) -> Result<AcceptanceMode> {
    match s {
        "end" | "end_of_sequence" => Ok(AcceptanceMode::EndOfSequence),
        "earliest" | "earliest_absorbing" => Ok(AcceptanceMode::EarliestAbsorbing),
        _ => Err(unknown("acceptance mode", s, "end, earliest")),
    }
}

pub fn parse_earliness(s: &str) -> Result<Option<EarlinessMode>> {
    match s {
        "none" => Ok(None),
        "sum" | "sum_all_accept_steps" => Ok(Some(EarlinessMode::SumAllAcceptSteps)),
        "first" | "first_accept_step" => Ok(Some(EarlinessMode::FirstAcceptStep)),
        _ => Err(unknown("earliness mode", s, "none, sum, first")),
    }
}

pub fn parse_kind(s: &str) -> Result<GuardKind> {
    match s {
        "eq" => Ok(GuardKind::Eq),
        "neg" => Ok(GuardKind::Neg),
        "lt" => Ok(GuardKind::Lt),
        "at_least" => Ok(GuardKind::AtLeast),
        "at_most" => Ok(GuardKind::AtMost),
        _ => Err(unknown("guard kind", s, "eq, neg, lt, at_least, at_most")),
    }
}

pub fn parse_value_domain(s: &str) -> Result<ValueDomain> {
    match s {
        "observed" => Ok(ValueDomain::Observed),
        "full" | "full_alphabet" => Ok(ValueDomain::FullAlphabet),
        _ => Err(unknown("value domain", s, "observed, full_alphabet")),
    }
}

pub fn parse_breakpoint_mode(s: &str) -> Result<BreakpointMode> {
    match s {
        "gaussian" | "gaussian_equiprobable" => Ok(BreakpointMode::GaussianEquiprobable),
        "uniform" | "uniform_range" => Ok(BreakpointMode::UniformRange),
        _ => Err(unknown("breakpoint mode", s, "gaussian, uniform")),
    }
}

pub fn parse_normalize(s: &str) -> Result<Normalize> {
    match s {
        "zscore" => Ok(Normalize::Zscore),
        "none" => Ok(Normalize::None),
        _ => Err(unknown("normalization", s, "zscore, none")),
    }
}

/// Sequence + label input files plus the alphabet they are read against.
#[derive(Debug, Args)]
pub struct DataArgs {
    /// Symbolic sequence CSV: long layout (seq_id,attribute,t,value) or
    /// wide layout (seq_id,t,<attribute>...), detected from the header.
    #[arg(long, value_name = "CSV")]
    pub sequences: PathBuf,
    /// Label CSV with header seq_id,label; labels are pos or neg.
    #[arg(long, value_name = "CSV")]
    pub labels: PathBuf,
    #[command(flatten)]
    pub alphabet: AlphabetArgs,
}

/// Alphabet selection. Symbol order matters: it is the rank order used by
/// at_least/at_most guards.
#[derive(Debug, Args)]
pub struct AlphabetArgs {
    /// Ordered alphabet symbols, comma-separated (e.g. low,mid,high).
    #[arg(long, value_delimiter = ',', value_name = "SYM", conflicts_with = "letters")]
    pub alphabet: Option<Vec<String>>,
    /// Shorthand: the first K lowercase letters. Without --alphabet or
    /// --letters the full a..z alphabet is assumed.
    #[arg(long, value_name = "K")]
    pub letters: Option<usize>,
}

impl AlphabetArgs {
    pub fn build(&self) -> Result<AlphabetSpec> {
        if let Some(names) = &self.alphabet {
            return Ok(AlphabetSpec::new(names.iter().map(String::as_str))?);
        }
        Ok(AlphabetSpec::letters(self.letters.unwrap_or(26))?)
    }
}

/// Search, objective, and semantics settings shared by the learners and
/// the ASP exporter; each flag overrides the `[batch]` config-file field
/// of the same name.
#[derive(Debug, Args)]
pub struct BatchFlags {
    /// State budget: the automaton may use states q0..q{N-1}.
    #[arg(long, value_name = "N")]
    pub max_states: Option<usize>,
    /// Force every transition out of an accepting state to be a self-loop.
    #[arg(long, value_name = "BOOL")]
    pub absorbing: Option<bool>,
    /// Forbid the start state from being accepting.
    #[arg(long, value_name = "BOOL")]
    pub start_not_accepting: Option<bool>,
    /// Error penalty per accepted negative (false positive).
    #[arg(long, value_name = "W")]
    pub w_fp: Option<u64>,
    /// Error penalty per rejected positive (false negative).
    #[arg(long, value_name = "W")]
    pub w_fn: Option<u64>,
    /// Regularization penalty per transition fact.
    #[arg(long, value_name = "W")]
    pub transition_penalty: Option<i64>,
    /// Earliness charge on accepted examples: none, sum, or first.
    /// sum/first require --acceptance earliest and --absorbing true.
    #[arg(long, value_name = "MODE")]
    pub earliness: Option<String>,
    /// Fallback when no transition fires from an occupied state:
    /// strict (the state dies) or skip (it self-loops).
    #[arg(long, value_name = "POLICY")]
    pub policy: Option<String>,
    /// When a run accepts: end (of sequence) or earliest (absorbing).
    #[arg(long, value_name = "MODE")]
    pub acceptance: Option<String>,
    /// Guard kinds to ground, comma-separated: eq,neg,lt,at_least,at_most.
    #[arg(long, value_delimiter = ',', value_name = "KIND")]
    pub kinds: Option<Vec<String>>,
    /// Ground guards over observed symbols only, or the full_alphabet.
    #[arg(long, value_name = "DOMAIN")]
    pub value_domain: Option<String>,
    /// Hard cap on transition facts per candidate automaton.
    #[arg(long, value_name = "N")]
    pub max_transitions: Option<usize>,
    /// Search time budget in seconds.
    #[arg(long, value_name = "SECS")]
    pub timeout_secs: Option<f64>,
    /// Hill-climbing restarts.
    #[arg(long, value_name = "N")]
    pub restarts: Option<u32>,
    /// Equal-cost sideways moves tolerated before a restart settles.
    #[arg(long, value_name = "N")]
    pub sideways_limit: Option<u32>,
    /// Evaluate candidates against precomputed guard-satisfaction tables;
    /// false forces the plain interpreter.
    #[arg(long, value_name = "BOOL")]
    pub use_cache: Option<bool>,
}

pub fn apply_batch_flags(cfg: &mut BatchConfig, f: &BatchFlags) -> Result<()> {
    if let Some(v) = f.max_states {
        cfg.structural.max_states = v;
    }
    if let Some(v) = f.absorbing {
        cfg.structural.accepting_absorbing = v;
    }
    if let Some(v) = f.start_not_accepting {
        cfg.structural.start_not_accepting = v;
    }
    if let Some(v) = f.w_fp {
        cfg.objective.w_fp = v;
    }
    if let Some(v) = f.w_fn {
        cfg.objective.w_fn = v;
    }
    if let Some(v) = f.transition_penalty {
        cfg.objective.transition_penalty = v;
    }
    if let Some(s) = &f.earliness {
        cfg.objective.earliness = parse_earliness(s)?;
    }
    if let Some(s) = &f.policy {
        cfg.semantics.policy = parse_policy(s)?;
    }
    if let Some(s) = &f.acceptance {
        cfg.semantics.acceptance = parse_acceptance(s)?;
    }
    if let Some(ks) = &f.kinds {
        cfg.kinds = ks.iter().map(|k| parse_kind(k)).collect::<Result<_>>()?;
    }
    if let Some(s) = &f.value_domain {
        cfg.value_domain = parse_value_domain(s)?;
    }
    if let Some(v) = f.max_transitions {
        cfg.max_transitions = v;
    }
    if let Some(v) = f.timeout_secs {
        cfg.timeout_secs = v;
    }
    if let Some(v) = f.restarts {
        cfg.restarts = v;
    }
    if let Some(v) = f.sideways_limit {
        cfg.sideways_limit = v;
    }
    if let Some(v) = f.use_cache {
        cfg.use_cache = v;
    }
    Ok(())
}

/// Mini-batch revision settings; each flag overrides the `[incremental]`
/// config-file field of the same name.
#[derive(Debug, Args)]
pub struct IncrFlags {
    /// Examples per mini-batch.
    #[arg(long, value_name = "N")]
    pub batch_size: Option<usize>,
    /// Passes over the training set; each pass reshuffles the batches.
    #[arg(long, value_name = "N")]
    pub iterations: Option<u32>,
    /// Local error rate above which a batch triggers a revision solve.
    #[arg(long, value_name = "RATE")]
    pub error_threshold: Option<f64>,
    /// Distinct locally-best revisions evaluated globally per batch.
    #[arg(long, value_name = "K")]
    pub k_best: Option<usize>,
    /// Batch shuffle seed; defaults to --seed.
    #[arg(long, value_name = "SEED")]
    pub shuffle_seed: Option<u64>,
    /// Adopt a revision on strictly fewer errors alone, ignoring
    /// regularization.
    #[arg(long, value_name = "BOOL")]
    pub error_only_compare: Option<bool>,
}

pub fn apply_incr_flags(cfg: &mut IncrConfig, f: &IncrFlags) -> Result<()> {
    if let Some(v) = f.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = f.iterations {
        cfg.iterations = v;
    }
    if let Some(v) = f.error_threshold {
        cfg.error_threshold = v;
    }
    if let Some(v) = f.k_best {
        cfg.k_best = v;
    }
    if let Some(v) = f.shuffle_seed {
        cfg.shuffle_seed = v;
    }
    if let Some(v) = f.error_only_compare {
        cfg.error_only_compare = v;
    }
    Ok(())
}

/// Discretization settings; each flag overrides the `[sax]` config-file
/// field of the same name.
#[derive(Debug, Args)]
pub struct SaxFlags {
    /// Output alphabet size (number of bins).
    #[arg(long, value_name = "K")]
    pub alphabet_size: Option<usize>,
    /// PAA window width: each output symbol averages this many inputs.
    #[arg(long, value_name = "W")]
    pub paa_window: Option<usize>,
    /// Breakpoint placement: gaussian (equiprobable) or uniform (equal
    /// width over the observed range).
    #[arg(long, value_name = "MODE")]
    pub breakpoint_mode: Option<String>,
    /// Per-sequence, per-attribute normalization: zscore or none.
    #[arg(long, value_name = "MODE")]
    pub normalize: Option<String>,
}

pub fn apply_sax_flags(cfg: &mut SaxConfig, f: &SaxFlags) -> Result<()> {
    if let Some(v) = f.alphabet_size {
        cfg.alphabet_size = v;
    }
    if let Some(v) = f.paa_window {
        cfg.paa_window = v;
    }
    if let Some(s) = &f.breakpoint_mode {
        cfg.breakpoint_mode = parse_breakpoint_mode(s)?;
    }
    if let Some(s) = &f.normalize {
        cfg.normalize = parse_normalize(s)?;
    }
    Ok(())
}

/// Plain semantics flags for commands that run a fixed model.
#[derive(Debug, Args)]
pub struct SemanticsFlags {
    /// Fallback when no transition fires: strict or skip.
    #[arg(long, value_name = "POLICY")]
    pub policy: Option<String>,
    /// Acceptance: end or earliest.
    #[arg(long, value_name = "MODE")]
    pub acceptance: Option<String>,
}

pub fn apply_semantics_flags(sem: &mut Semantics, f: &SemanticsFlags) -> Result<()> {
    if let Some(s) = &f.policy {
        sem.policy = parse_policy(s)?;
    }
    if let Some(s) = &f.acceptance {
        sem.acceptance = parse_acceptance(s)?;
    }
    Ok(())
}
