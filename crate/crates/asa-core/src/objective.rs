//! The two-level lexicographic cost over candidate automata and the
//! structural constraints they must satisfy.
//!
//! Error (misclassification, weighted per class) dominates; regularization
//! (transition count, optional earliness, optional revision penalties) only
//! breaks error ties. The two levels are never blended into one scalar.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::automaton::{evaluate, run, AcceptanceMode, Asa, Semantics, State, TransitionFact};
use crate::error::{Error, Result};
use crate::model::Dataset;

/// How earliness is charged for an accepted example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EarlinessMode {
    /// Charge every time step at which an accepting state is occupied.
    /// With absorbing accepting states that is first_accept_time..=n+1.
    #[default]
    SumAllAcceptSteps,
    /// Charge only first_accept_time itself.
    FirstAcceptStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveConfig {
    /// Penalty per accepted negative (false positive), error level.
    pub w_fp: u64,
    /// Penalty per rejected positive (false negative), error level.
    pub w_fn: u64,
    /// Penalty per transition fact, regularization level.
    pub transition_penalty: i64,
    /// Earliness term, regularization level; `None` disables it.
    pub earliness: Option<EarlinessMode>,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            w_fp: 1,
            w_fn: 1,
            transition_penalty: 1,
            earliness: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StructuralConfig {
    /// State budget N: the automaton may use states q0..q{N-1}.
    pub max_states: usize,
    /// Every transition out of an accepting state must be a self-loop.
    pub accepting_absorbing: bool,
    /// q0 must not be accepting.
    pub start_not_accepting: bool,
}

impl Default for StructuralConfig {
    fn default() -> Self {
        Self {
            max_states: 2,
            accepting_absorbing: false,
            start_not_accepting: false,
        }
    }
}

/// Lexicographic cost: `error` strictly dominates `reg`.
///
/// `reg` is signed because revision rewards (removing a harmful fact) can
/// push the regularization level below zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CostVector {
    pub error: u64,
    pub reg: i64,
}

impl CostVector {
    pub const ZERO: CostVector = CostVector { error: 0, reg: 0 };

    pub fn new(error: u64, reg: i64) -> Self {
        Self { error, reg }
    }
}

impl fmt::Display for CostVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.error, self.reg)
    }
}

/// Reject configuration combinations with no defined meaning before any
/// search or evaluation starts.
pub fn validate_configs(
    objective: &ObjectiveConfig,
    structural: &StructuralConfig,
    sem: Semantics,
) -> Result<()> {
    if structural.max_states == 0 || structural.max_states > crate::automaton::MAX_STATES {
        return Err(Error::Config(format!(
            "state budget {} out of range 1..={}",
            structural.max_states,
            crate::automaton::MAX_STATES
        )));
    }
    if objective.w_fp == 0 || objective.w_fn == 0 {
        return Err(Error::Config(
            "error weights w_fp and w_fn must be at least 1".into(),
        ));
    }
    if objective.transition_penalty < 0 {
        return Err(Error::Config(
            "transition_penalty must be non-negative".into(),
        ));
    }
    if objective.earliness.is_some() {
        if !structural.accepting_absorbing {
            return Err(Error::Config(
                "earliness objective requires the accepting_absorbing structural constraint".into(),
            ));
        }
        if sem.acceptance != AcceptanceMode::EarliestAbsorbing {
            return Err(Error::Config(
                "earliness objective requires the earliest_absorbing acceptance mode".into(),
            ));
        }
    }
    if sem.acceptance == AcceptanceMode::EarliestAbsorbing && !structural.accepting_absorbing {
        return Err(Error::Config(
            "earliest_absorbing acceptance requires the accepting_absorbing structural constraint"
                .into(),
        ));
    }
    Ok(())
}

/// Weighted misclassification count:
/// `w_fn · |rejected positives| + w_fp · |accepted negatives|`.
pub fn error_cost(asa: &Asa, dataset: &Dataset, sem: Semantics, cfg: &ObjectiveConfig) -> u64 {
    let mut total = 0u64;
    for ex in &dataset.examples {
        let accepted = evaluate(asa, &ex.mvs, sem).accepted;
        if ex.label.is_positive() && !accepted {
            total += cfg.w_fn;
        } else if !ex.label.is_positive() && accepted {
            total += cfg.w_fp;
        }
    }
    total
}

/// Regularization level: `transition_penalty · |transitions|` plus, when
/// earliness is enabled, a per-accepted-example charge over accepting
/// occupancy times taken from the recorded run trace.
pub fn reg_cost(asa: &Asa, dataset: &Dataset, sem: Semantics, cfg: &ObjectiveConfig) -> i64 {
    let mut total = cfg.transition_penalty * asa.transition_count() as i64;
    if let Some(mode) = cfg.earliness {
        for ex in &dataset.examples {
            let r = run(asa, &ex.mvs, sem);
            if !r.accepted {
                continue;
            }
            total += match mode {
                EarlinessMode::FirstAcceptStep => {
                    r.first_accept_time.expect("accepted run has a first accept time") as i64
                }
                EarlinessMode::SumAllAcceptSteps => r
                    .occupancy
                    .iter()
                    .enumerate()
                    .filter(|(_, occ)| !occ.intersect(asa.accepting()).is_empty())
                    .map(|(i, _)| (i + 1) as i64)
                    .sum(),
            };
        }
    }
    total
}

/// Earliness charge for one accepted example given its first accept time,
/// assuming absorbing accepting states (occupancy stays accepting from
/// `first_accept` through `n+1`). Shared by the search fast path.
pub(crate) fn earliness_charge(mode: EarlinessMode, first_accept: usize, n: usize) -> i64 {
    match mode {
        EarlinessMode::FirstAcceptStep => first_accept as i64,
        EarlinessMode::SumAllAcceptSteps => {
            // sum of first_accept..=n+1
            let hi = (n + 1) as i64;
            let lo = first_accept as i64;
            (hi * (hi + 1) - (lo - 1) * lo) / 2
        }
    }
}

/// Full lexicographic cost in one pass over the dataset.
///
/// Equals `(error_cost, reg_cost)` whenever the automaton satisfies the
/// absorbing-accepting constraint (which [`validate_configs`] ties to the
/// earliness term); tests assert that equality independently.
pub fn cost(asa: &Asa, dataset: &Dataset, sem: Semantics, cfg: &ObjectiveConfig) -> CostVector {
    let mut error = 0u64;
    let mut reg = cfg.transition_penalty * asa.transition_count() as i64;
    for ex in &dataset.examples {
        let out = evaluate(asa, &ex.mvs, sem);
        if ex.label.is_positive() && !out.accepted {
            error += cfg.w_fn;
        } else if !ex.label.is_positive() && out.accepted {
            error += cfg.w_fp;
        }
        if out.accepted {
            if let Some(mode) = cfg.earliness {
                let fa = out.first_accept_time.expect("accepted run has a first accept time");
                reg += earliness_charge(mode, fa, ex.mvs.len());
            }
        }
    }
    CostVector { error, reg }
}

/// One broken structural constraint, in human-readable form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralViolation {
    pub message: String,
}

impl fmt::Display for StructuralViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Check the automaton against the structural constraints; empty result
/// means fully compliant.
pub fn check_structural(asa: &Asa, cfg: &StructuralConfig) -> Vec<StructuralViolation> {
    let mut out = Vec::new();
    if asa.num_states() > cfg.max_states {
        out.push(StructuralViolation {
            message: format!(
                "uses {} states, exceeding the budget of {}",
                asa.num_states(),
                cfg.max_states
            ),
        });
    }
    if cfg.accepting_absorbing {
        for t in asa.transitions() {
            if asa.is_accepting(t.from) && t.to != t.from {
                out.push(StructuralViolation {
                    message: format!(
                        "accepting state {} has a non-self-loop transition to {}",
                        t.from, t.to
                    ),
                });
            }
        }
    }
    if cfg.start_not_accepting && asa.is_accepting(State(0)) {
        out.push(StructuralViolation {
            message: "start state q0 is accepting".into(),
        });
    }
    out
}

/// Revision penalties: the cost added at the regularization level for each
/// fact of the incumbent that a candidate drops.
///
/// For a transition fact the cost is `p − n` from its guard stats — negative
/// (a reward) when the fact helps accept more negatives than positives.
/// Dropping an accepting fact always costs 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RemovalPenalties {
    pub transitions: BTreeMap<TransitionFact, i64>,
    pub accepting: Vec<State>,
}

impl RemovalPenalties {
    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty() && self.accepting.is_empty()
    }

    /// Total removal cost a candidate incurs relative to the incumbent
    /// these penalties were derived from.
    pub fn reg_delta(&self, candidate: &Asa) -> i64 {
        let mut delta = 0i64;
        for (fact, cost_if_removed) in &self.transitions {
            if candidate.transitions().binary_search(fact).is_err() {
                delta += cost_if_removed;
            }
        }
        for q in &self.accepting {
            if !candidate.is_accepting(*q) {
                delta += 1;
            }
        }
        delta
    }
}
