//! Symbolic automata and their run semantics.
//!
//! An automaton is a set of `transition(qi,guard,qj)` facts plus a set of
//! `accepting(qi)` facts over states `q0..q{N-1}`, with `q0` always the
//! start state. Runs are nondeterministic and tracked with occupancy sets:
//! `occupancy[1] = {q0}` before any input, and consuming the observation at
//! time `t` produces `occupancy[t+1]`. A guard automaton therefore occupies
//! sets of states at times `1..=n+1` for a length-`n` sequence.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guards::{GroundGuard, GuardKind};
use crate::model::{AlphabetSpec, AttributeSet, Mvs, Symbol};

/// Maximum number of states; occupancy sets are 64-bit masks.
pub const MAX_STATES: usize = 64;

/// An automaton state. Displayed as `q{index}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(pub u8);

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// A set of states, packed into a 64-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct StateSet(pub u64);

impl StateSet {
    pub const EMPTY: StateSet = StateSet(0);

    pub fn singleton(s: State) -> StateSet {
        StateSet(1u64 << s.0)
    }

    pub fn insert(&mut self, s: State) {
        self.0 |= 1u64 << s.0;
    }

    pub fn remove(&mut self, s: State) {
        self.0 &= !(1u64 << s.0);
    }

    pub fn contains(self, s: State) -> bool {
        self.0 & (1u64 << s.0) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: StateSet) -> StateSet {
        StateSet(self.0 | other.0)
    }

    pub fn intersect(self, other: StateSet) -> StateSet {
        StateSet(self.0 & other.0)
    }

    /// States in ascending index order.
    pub fn iter(self) -> impl Iterator<Item = State> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as u8;
                bits &= bits - 1;
                Some(State(i))
            }
        })
    }
}

impl FromIterator<State> for StateSet {
    fn from_iter<T: IntoIterator<Item = State>>(iter: T) -> Self {
        let mut s = StateSet::EMPTY;
        for q in iter {
            s.insert(q);
        }
        s
    }
}

/// One transition fact: from `from` to `to` when `guard` holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionFact {
    pub from: State,
    pub guard: GroundGuard,
    pub to: State,
}

/// What happens when no transition out of an occupied state fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// The state dies: its contribution to the next occupancy set is empty.
    #[default]
    StrictContiguity,
    /// The state self-loops, waiting for a later match.
    SkipTillAnyMatch,
}

/// When a run counts as accepting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AcceptanceMode {
    /// Accept iff an accepting state is occupied after the whole sequence.
    #[default]
    EndOfSequence,
    /// Accept at the first time an accepting state is occupied; occupied
    /// accepting states are retained (treated as absorbing).
    EarliestAbsorbing,
}

/// Run semantics: fallback policy plus acceptance mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Semantics {
    pub policy: Policy,
    pub acceptance: AcceptanceMode,
}

/// A guard automaton: `num_states` states `q0..`, accepting set, and a
/// duplicate-free sorted list of transition facts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Asa {
    num_states: u8,
    accepting: StateSet,
    transitions: Vec<TransitionFact>,
}

impl Asa {
    pub fn new(
        num_states: usize,
        accepting: impl IntoIterator<Item = State>,
        mut transitions: Vec<TransitionFact>,
    ) -> Result<Self> {
        if num_states == 0 || num_states > MAX_STATES {
            return Err(Error::Config(format!(
                "state count {num_states} out of range 1..={MAX_STATES}"
            )));
        }
        let accepting: StateSet = accepting.into_iter().collect();
        let limit = StateSet(((1u128 << num_states) - 1) as u64);
        if accepting.intersect(limit) != accepting {
            return Err(Error::Validation(
                "accepting state outside the state range".into(),
            ));
        }
        for t in &transitions {
            if t.from.0 as usize >= num_states || t.to.0 as usize >= num_states {
                return Err(Error::Validation(format!(
                    "transition endpoint outside the state range: {} -> {}",
                    t.from, t.to
                )));
            }
        }
        transitions.sort();
        transitions.dedup();
        Ok(Self {
            num_states: num_states as u8,
            accepting,
            transitions,
        })
    }

    /// An automaton with no transitions and no accepting states. Rejects
    /// everything under either acceptance mode.
    pub fn empty(num_states: usize) -> Result<Self> {
        Self::new(num_states, [], Vec::new())
    }

    pub fn num_states(&self) -> usize {
        self.num_states as usize
    }

    pub fn accepting(&self) -> StateSet {
        self.accepting
    }

    pub fn is_accepting(&self, s: State) -> bool {
        self.accepting.contains(s)
    }

    pub fn transitions(&self) -> &[TransitionFact] {
        &self.transitions
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    /// Transitions leaving `q`. The fact list is sorted by source state, so
    /// this is one contiguous slice.
    pub fn transitions_from(&self, q: State) -> &[TransitionFact] {
        let start = self.transitions.partition_point(|t| t.from < q);
        let end = self.transitions.partition_point(|t| t.from <= q);
        &self.transitions[start..end]
    }

    /// States that matter for size reporting: the start state plus every
    /// transition endpoint.
    pub fn active_state_count(&self) -> usize {
        let mut set = StateSet::singleton(State(0));
        for t in &self.transitions {
            set.insert(t.from);
            set.insert(t.to);
        }
        set.len()
    }
}

/// Advance one step: from the states in `occupied`, consume `coord`.
///
/// Per occupied state, the successor set is the set of targets of firing
/// transitions; if it is empty the policy decides between dying out and
/// self-looping. Under [`AcceptanceMode::EarliestAbsorbing`] occupied
/// accepting states are additionally retained unconditionally.
pub fn step(asa: &Asa, occupied: StateSet, coord: &[Symbol], sem: Semantics) -> StateSet {
    let mut next = StateSet::EMPTY;
    for q in occupied.iter() {
        let mut nq = StateSet::EMPTY;
        for t in asa.transitions_from(q) {
            if t.guard.satisfies(coord) {
                nq.insert(t.to);
            }
        }
        if nq.is_empty() && sem.policy == Policy::SkipTillAnyMatch {
            nq = StateSet::singleton(q);
        }
        next = next.union(nq);
    }
    if sem.acceptance == AcceptanceMode::EarliestAbsorbing {
        next = next.union(occupied.intersect(asa.accepting));
    }
    next
}

/// Full trace of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub accepted: bool,
    /// First time (1-based, up to `n+1`) an accepting state is occupied,
    /// tracked the same way under either acceptance mode.
    pub first_accept_time: Option<usize>,
    /// First time the occupancy set is empty, if it ever is.
    pub dead_time: Option<usize>,
    /// Occupied state sets at times `1..=n+1`; index 0 is time 1.
    pub occupancy: Vec<StateSet>,
    /// Transition facts lying on at least one accepting run.
    pub used_transitions: BTreeSet<TransitionFact>,
}

/// Run the automaton over a sequence and report the full trace.
pub fn run(asa: &Asa, mvs: &Mvs, sem: Semantics) -> RunResult {
    let n = mvs.len();
    let mut occupancy = Vec::with_capacity(n + 1);
    occupancy.push(StateSet::singleton(State(0)));
    for t in 1..=n {
        let coord = mvs.coordinate(t).expect("t within sequence length");
        let prev = occupancy[t - 1];
        // once empty, stays empty under either policy (skip never empties)
        let next = if prev.is_empty() {
            StateSet::EMPTY
        } else {
            step(asa, prev, coord, sem)
        };
        occupancy.push(next);
    }

    let dead_time = occupancy.iter().position(|s| s.is_empty()).map(|i| i + 1);
    // first accepting occupancy, regardless of the acceptance mode
    let first_accept_time = occupancy
        .iter()
        .position(|o| !o.intersect(asa.accepting()).is_empty())
        .map(|i| i + 1);
    let accepted = match sem.acceptance {
        AcceptanceMode::EndOfSequence => !occupancy[n].intersect(asa.accepting()).is_empty(),
        AcceptanceMode::EarliestAbsorbing => first_accept_time.is_some(),
    };

    let used_transitions = if accepted {
        used_on_accepting_runs(asa, mvs, sem, &occupancy)
    } else {
        BTreeSet::new()
    };

    RunResult {
        accepted,
        first_accept_time,
        dead_time,
        occupancy,
        used_transitions,
    }
}

/// Backward pass over the occupancy trace marking states that lead to an
/// acceptance, collecting the transition facts that realize those paths.
fn used_on_accepting_runs(
    asa: &Asa,
    mvs: &Mvs,
    sem: Semantics,
    occupancy: &[StateSet],
) -> BTreeSet<TransitionFact> {
    let n = mvs.len();
    // marks[t-1]: states at time t from which the trace reaches acceptance
    let mut marks = vec![StateSet::EMPTY; n + 1];
    match sem.acceptance {
        AcceptanceMode::EndOfSequence => {
            marks[n] = occupancy[n].intersect(asa.accepting());
        }
        AcceptanceMode::EarliestAbsorbing => {
            for t in 0..=n {
                marks[t] = occupancy[t].intersect(asa.accepting());
            }
        }
    }
    let mut used = BTreeSet::new();
    for t in (1..=n).rev() {
        let coord = mvs.coordinate(t).expect("t within sequence length");
        let occ = occupancy[t - 1];
        if occ.is_empty() {
            continue;
        }
        for q in occ.iter() {
            let mut fired_any = false;
            for f in asa.transitions_from(q) {
                if f.guard.satisfies(coord) {
                    fired_any = true;
                    if marks[t].contains(f.to) {
                        used.insert(*f);
                        marks[t - 1].insert(q);
                    }
                }
            }
            // implicit self-loop under skip-till-any-match
            if !fired_any && sem.policy == Policy::SkipTillAnyMatch && marks[t].contains(q) {
                marks[t - 1].insert(q);
            }
        }
    }
    used
}

/// Accept/reject verdict without the trace. Same semantics as [`run`], with
/// early exits; the hot path for cost evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub accepted: bool,
    pub first_accept_time: Option<usize>,
    pub dead_time: Option<usize>,
}

pub fn evaluate(asa: &Asa, mvs: &Mvs, sem: Semantics) -> Outcome {
    let n = mvs.len();
    let mut occ = StateSet::singleton(State(0));
    let mut first_accept_time = if occ.intersect(asa.accepting()).is_empty() {
        None
    } else {
        Some(1)
    };
    if sem.acceptance == AcceptanceMode::EarliestAbsorbing && first_accept_time.is_some() {
        return Outcome {
            accepted: true,
            first_accept_time,
            dead_time: None,
        };
    }
    for t in 1..=n {
        let coord = mvs.coordinate(t).expect("t within sequence length");
        occ = step(asa, occ, coord, sem);
        if occ.is_empty() {
            return Outcome {
                accepted: false,
                first_accept_time,
                dead_time: Some(t + 1),
            };
        }
        if first_accept_time.is_none() && !occ.intersect(asa.accepting()).is_empty() {
            first_accept_time = Some(t + 1);
            if sem.acceptance == AcceptanceMode::EarliestAbsorbing {
                return Outcome {
                    accepted: true,
                    first_accept_time,
                    dead_time: None,
                };
            }
        }
    }
    match sem.acceptance {
        AcceptanceMode::EndOfSequence => Outcome {
            accepted: !occ.intersect(asa.accepting()).is_empty(),
            first_accept_time,
            dead_time: None,
        },
        AcceptanceMode::EarliestAbsorbing => Outcome {
            accepted: false,
            first_accept_time,
            dead_time: None,
        },
    }
}

/// Render as one fact per line: transitions in sorted order, then accepting
/// facts. The output parses back with [`parse_asa`].
pub fn render_asa(asa: &Asa, attrs: &AttributeSet, alphabet: &AlphabetSpec) -> String {
    let mut out = String::new();
    for t in asa.transitions() {
        out.push_str(&format!(
            "transition({},{},{}).\n",
            t.from,
            t.guard.render(attrs, alphabet),
            t.to
        ));
    }
    for q in asa.accepting().iter() {
        out.push_str(&format!("accepting({q}).\n"));
    }
    out
}

struct Cursor<'a> {
    line: &'a str,
    line_no: usize,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line_no,
            col: self.pos + 1,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.line[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(got) if got == c => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(got) => Err(self.err(format!("expected '{c}', found '{got}'"))),
            None => Err(self.err(format!("expected '{c}', found end of line"))),
        }
    }

    /// Read an identifier: `[A-Za-z0-9_]+`.
    fn ident(&mut self) -> Result<&'a str> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            Err(self.err("expected an identifier"))
        } else {
            Ok(&self.line[start..self.pos])
        }
    }

    fn state(&mut self) -> Result<State> {
        let at = self.pos;
        let id = self.ident()?;
        let digits = id
            .strip_prefix('q')
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .ok_or_else(|| Error::Parse {
                line: self.line_no,
                col: at + 1,
                msg: format!("expected a state like q0, found '{id}'"),
            })?;
        let idx: usize = digits.parse().map_err(|_| Error::Parse {
            line: self.line_no,
            col: at + 1,
            msg: format!("state index out of range in '{id}'"),
        })?;
        if idx >= MAX_STATES {
            return Err(Error::Parse {
                line: self.line_no,
                col: at + 1,
                msg: format!("state index {idx} exceeds the maximum of {}", MAX_STATES - 1),
            });
        }
        Ok(State(idx as u8))
    }

    fn guard(&mut self, attrs: &AttributeSet, alphabet: &AlphabetSpec) -> Result<GroundGuard> {
        let at = self.pos;
        let kind_name = self.ident()?;
        let kind = GuardKind::from_name(kind_name).ok_or_else(|| Error::Parse {
            line: self.line_no,
            col: at + 1,
            msg: format!("unknown guard kind '{kind_name}'"),
        })?;
        self.expect('(')?;
        let a_at = self.pos;
        let a_name = self.ident()?;
        let a = attrs.attr(a_name).ok_or_else(|| Error::Parse {
            line: self.line_no,
            col: a_at + 1,
            msg: format!("unknown attribute '{a_name}'"),
        })?;
        self.expect(',')?;
        let b_at = self.pos;
        let b_name = self.ident()?;
        let guard = match kind {
            GuardKind::Lt => {
                let a2 = attrs.attr(b_name).ok_or_else(|| Error::Parse {
                    line: self.line_no,
                    col: b_at + 1,
                    msg: format!("unknown attribute '{b_name}'"),
                })?;
                if a == a2 {
                    return Err(Error::Parse {
                        line: self.line_no,
                        col: b_at + 1,
                        msg: "lt guard requires two distinct attributes".into(),
                    });
                }
                GroundGuard::Lt(a, a2)
            }
            _ => {
                let v = alphabet.symbol(b_name).ok_or_else(|| Error::Parse {
                    line: self.line_no,
                    col: b_at + 1,
                    msg: format!("unknown symbol '{b_name}'"),
                })?;
                match kind {
                    GuardKind::Eq => GroundGuard::Eq(a, v),
                    GuardKind::Neg => GroundGuard::Neg(a, v),
                    GuardKind::AtLeast => GroundGuard::AtLeast(a, v),
                    GuardKind::AtMost => GroundGuard::AtMost(a, v),
                    GuardKind::Lt => unreachable!(),
                }
            }
        };
        self.expect(')')?;
        Ok(guard)
    }
}

/// Parse the textual fact format: one `transition(...)` or `accepting(...)`
/// fact per line, `%` starting a comment, blank lines ignored.
///
/// Attribute and symbol names resolve against the given sets; the state
/// count is one past the highest state index mentioned.
pub fn parse_asa(text: &str, attrs: &AttributeSet, alphabet: &AlphabetSpec) -> Result<Asa> {
    let mut transitions = Vec::new();
    let mut accepting = Vec::new();
    let mut max_state = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let content = match raw.find('%') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let trimmed_start = content.len() - content.trim_start().len();
        let line = content.trim();
        if line.is_empty() {
            continue;
        }
        let mut cur = Cursor {
            line: content.trim_end(),
            line_no: i + 1,
            pos: trimmed_start,
        };
        let head = cur.ident()?;
        match head {
            "transition" => {
                cur.expect('(')?;
                let from = cur.state()?;
                cur.expect(',')?;
                let guard = cur.guard(attrs, alphabet)?;
                cur.expect(',')?;
                let to = cur.state()?;
                cur.expect(')')?;
                cur.expect('.')?;
                if cur.peek().is_some() {
                    return Err(cur.err("trailing characters after fact"));
                }
                max_state = max_state.max(from.0 as usize).max(to.0 as usize);
                transitions.push(TransitionFact { from, guard, to });
            }
            "accepting" => {
                cur.expect('(')?;
                let q = cur.state()?;
                cur.expect(')')?;
                cur.expect('.')?;
                if cur.peek().is_some() {
                    return Err(cur.err("trailing characters after fact"));
                }
                max_state = max_state.max(q.0 as usize);
                accepting.push(q);
            }
            other => {
                return Err(Error::Parse {
                    line: i + 1,
                    col: trimmed_start + 1,
                    msg: format!("unknown predicate '{other}' (expected transition or accepting)"),
                })
            }
        }
    }
    Asa::new(max_state + 1, accepting, transitions)
}
