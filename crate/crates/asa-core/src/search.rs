//! Batch learners over the guard-automaton space: an exhaustive enumerator
//! serving as a ground-truth oracle on tiny instances, and an anytime
//! stochastic local search for everything else.
//!
//! Both explore exactly the same space — automata over `max_states` states
//! whose transition facts come from the grounded guard universe, with at
//! most `max_transitions` facts, under the structural constraints — so
//! their optima are directly comparable.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automaton::{AcceptanceMode, Asa, Policy, Semantics, State, TransitionFact};
use crate::error::{Error, Result};
use crate::guards::{ground_universe, GroundGuard, GuardKind, ValueDomain};
use crate::model::Dataset;
use crate::objective::{
    self, earliness_charge, validate_configs, CostVector, ObjectiveConfig, RemovalPenalties,
    StructuralConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchConfig {
    pub structural: StructuralConfig,
    pub objective: ObjectiveConfig,
    pub semantics: Semantics,
    /// Guard kinds the candidate pool is grounded from.
    pub kinds: Vec<GuardKind>,
    pub value_domain: ValueDomain,
    /// Hard cap on the number of transition facts in any candidate.
    pub max_transitions: usize,
    pub timeout_secs: f64,
    pub seed: u64,
    /// Hill-climbing restarts; the first starts from the supplied incumbent
    /// or the canonical empty automaton, later ones from random seeds.
    pub restarts: u32,
    /// Consecutive equal-cost (sideways) moves tolerated before a restart
    /// is declared locally optimal.
    pub sideways_limit: u32,
    /// Evaluate candidates against precomputed guard-satisfaction tables;
    /// disable to force every candidate through the plain interpreter
    /// (differential testing).
    pub use_cache: bool,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            structural: StructuralConfig::default(),
            objective: ObjectiveConfig::default(),
            semantics: Semantics::default(),
            kinds: GuardKind::ALL.to_vec(),
            value_domain: ValueDomain::Observed,
            max_transitions: 8,
            timeout_secs: 60.0,
            seed: 0,
            restarts: 5,
            sideways_limit: 20,
            use_cache: true,
        }
    }
}

/// Feasibility limits for [`enumerate_optimal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnumerationCaps {
    /// Maximum transition facts per candidate (subset size bound).
    pub max_transitions: usize,
    /// Refuse to enumerate more candidates than this.
    pub max_candidates: u64,
}

impl Default for EnumerationCaps {
    fn default() -> Self {
        Self {
            max_transitions: 2,
            max_candidates: 10_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LearnerReport {
    pub asa: Asa,
    pub cost: CostVector,
    pub wall_time: Duration,
    /// Candidate evaluations performed.
    pub iterations: u64,
    /// True when the whole candidate space was enumerated (optimality
    /// proof), false for anytime local-search results.
    pub exhaustive: bool,
}

// ---------------------------------------------------------------------------
// internal candidate representation

/// Transition fact with the guard as an index into the search pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct IFact {
    from: u8,
    guard: u32,
    to: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    accepting: u64,
    facts: Vec<IFact>,
}

impl Candidate {
    fn normalized(accepting: u64, mut facts: Vec<IFact>) -> Self {
        facts.sort();
        facts.dedup();
        Self { accepting, facts }
    }
}

/// The grounded guard pool plus index, shared by both learners. Incumbent
/// guards missing from the grounded universe (possible when revising on a
/// mini-batch whose observed symbols differ) are appended at the end.
struct Pool {
    guards: Vec<GroundGuard>,
    index: BTreeMap<GroundGuard, u32>,
}

impl Pool {
    fn build(dataset: &Dataset, cfg: &BatchConfig, extra: Option<&Asa>) -> Result<Pool> {
        let universe = ground_universe(dataset, &cfg.kinds, cfg.value_domain)?;
        let mut guards = universe.guards().to_vec();
        let mut index: BTreeMap<GroundGuard, u32> = guards
            .iter()
            .enumerate()
            .map(|(i, g)| (*g, i as u32))
            .collect();
        if let Some(asa) = extra {
            for t in asa.transitions() {
                index.entry(t.guard).or_insert_with(|| {
                    guards.push(t.guard);
                    (guards.len() - 1) as u32
                });
            }
        }
        Ok(Pool { guards, index })
    }

    fn len(&self) -> usize {
        self.guards.len()
    }

    fn to_candidate(&self, asa: &Asa) -> Candidate {
        let facts = asa
            .transitions()
            .iter()
            .map(|t| IFact {
                from: t.from.0,
                guard: self.index[&t.guard],
                to: t.to.0,
            })
            .collect();
        Candidate::normalized(asa.accepting().0, facts)
    }

    fn to_asa(&self, cand: &Candidate, num_states: usize) -> Asa {
        let facts = cand
            .facts
            .iter()
            .map(|f| TransitionFact {
                from: State(f.from),
                guard: self.guards[f.guard as usize],
                to: State(f.to),
            })
            .collect();
        let accepting = (0..num_states as u8)
            .map(State)
            .filter(|q| cand.accepting & (1u64 << q.0) != 0);
        Asa::new(num_states, accepting, facts).expect("search candidates are structurally valid")
    }
}

// ---------------------------------------------------------------------------
// candidate evaluation

/// Per-example guard-satisfaction table: `sat[g * n + (t-1)]` says whether
/// pool guard `g` holds on the example's coordinate at time `t`.
struct ExampleTable {
    n: usize,
    positive: bool,
    sat: Vec<bool>,
}

struct Evaluator<'a> {
    dataset: &'a Dataset,
    sem: Semantics,
    objective: ObjectiveConfig,
    num_states: usize,
    tables: Option<Vec<ExampleTable>>,
}

impl<'a> Evaluator<'a> {
    fn new(dataset: &'a Dataset, pool: &'a Pool, cfg: &BatchConfig) -> Evaluator<'a> {
        let tables = cfg.use_cache.then(|| {
            dataset
                .examples
                .par_iter()
                .map(|ex| {
                    let n = ex.mvs.len();
                    let mut sat = vec![false; pool.guards.len() * n];
                    for (g, guard) in pool.guards.iter().enumerate() {
                        for t in 1..=n {
                            let coord = ex.mvs.coordinate(t).expect("t within sequence length");
                            sat[g * n + (t - 1)] = guard.satisfies(coord);
                        }
                    }
                    ExampleTable {
                        n,
                        positive: ex.label.is_positive(),
                        sat,
                    }
                })
                .collect()
        });
        Evaluator {
            dataset,
            sem: cfg.semantics,
            objective: cfg.objective,
            num_states: cfg.structural.max_states,
            tables,
        }
    }

    fn eval(&self, cand: &Candidate, pool: &Pool) -> CostVector {
        match &self.tables {
            Some(tables) => {
                let base = self.objective.transition_penalty * cand.facts.len() as i64;
                let fold = |(err, reg): (u64, i64), table: &ExampleTable| {
                    let (e, r) = self.eval_one(cand, table);
                    (err + e, reg + r)
                };
                let (error, earliness) = if tables.len() >= 256 {
                    tables
                        .par_iter()
                        .fold(|| (0u64, 0i64), fold)
                        .reduce(|| (0u64, 0i64), |a, b| (a.0 + b.0, a.1 + b.1))
                } else {
                    tables.iter().fold((0u64, 0i64), fold)
                };
                CostVector {
                    error,
                    reg: base + earliness,
                }
            }
            None => {
                let asa = pool.to_asa(cand, self.num_states);
                objective::cost(&asa, self.dataset, self.sem, &self.objective)
            }
        }
    }

    /// Error and earliness contributions of one example, from the table.
    /// Mirrors the plain interpreter exactly; the `use_cache = false` path
    /// cross-checks it differentially.
    fn eval_one(&self, cand: &Candidate, table: &ExampleTable) -> (u64, i64) {
        let earliest = self.sem.acceptance == AcceptanceMode::EarliestAbsorbing;
        let skip = self.sem.policy == Policy::SkipTillAnyMatch;
        let acc = cand.accepting;
        let n = table.n;

        let mut occ: u64 = 1; // {q0}
        let mut accepted = false;
        let mut first_accept = 0usize;
        if earliest && occ & acc != 0 {
            accepted = true;
            first_accept = 1;
        }
        if !accepted {
            for t in 0..n {
                let mut next: u64 = 0;
                let mut rest = occ;
                while rest != 0 {
                    let q = rest.trailing_zeros() as u8;
                    rest &= rest - 1;
                    let mut nq: u64 = 0;
                    for f in &cand.facts {
                        if f.from == q && table.sat[f.guard as usize * n + t] {
                            nq |= 1 << f.to;
                        }
                    }
                    if nq == 0 && skip {
                        nq = 1 << q;
                    }
                    next |= nq;
                }
                if earliest {
                    next |= occ & acc;
                }
                occ = next;
                if occ == 0 {
                    break;
                }
                if earliest && occ & acc != 0 {
                    accepted = true;
                    first_accept = t + 2;
                    break;
                }
            }
            if !earliest {
                accepted = occ & acc != 0;
                first_accept = n + 1;
            }
        }

        let error = if table.positive && !accepted {
            self.objective.w_fn
        } else if !table.positive && accepted {
            self.objective.w_fp
        } else {
            0
        };
        let earliness = match (accepted, self.objective.earliness) {
            (true, Some(mode)) => earliness_charge(mode, first_accept, n),
            _ => 0,
        };
        (error, earliness)
    }
}

// ---------------------------------------------------------------------------
// shared search-space helpers

fn accepting_masks(structural: &StructuralConfig) -> Result<Vec<u64>> {
    let n = structural.max_states;
    if n > 20 {
        return Err(Error::Config(format!(
            "state budget {n} is too large for exhaustive enumeration"
        )));
    }
    let mut masks = Vec::new();
    for m in 0..(1u64 << n) {
        if structural.start_not_accepting && m & 1 != 0 {
            continue;
        }
        masks.push(m);
    }
    Ok(masks)
}

/// Every transition fact legal under the structural constraints given the
/// accepting mask, in deterministic (from, guard, to) order.
fn valid_facts(pool_len: usize, structural: &StructuralConfig, accepting: u64) -> Vec<IFact> {
    let n = structural.max_states as u8;
    let mut out = Vec::new();
    for from in 0..n {
        let absorbing_here = structural.accepting_absorbing && accepting & (1u64 << from) != 0;
        for guard in 0..pool_len as u32 {
            for to in 0..n {
                if absorbing_here && to != from {
                    continue;
                }
                out.push(IFact { from, guard, to });
            }
        }
    }
    out
}

fn fact_is_valid(f: IFact, structural: &StructuralConfig, accepting: u64) -> bool {
    !structural.accepting_absorbing || accepting & (1u64 << f.from) == 0 || f.to == f.from
}

/// Deterministic tie-break after cost: fewer transitions, then the
/// lexicographically smallest rendering.
fn tie_key(asa: &Asa, dataset: &Dataset) -> (usize, String) {
    (
        asa.transition_count(),
        crate::automaton::render_asa(asa, &dataset.attributes, &dataset.alphabet),
    )
}

// ---------------------------------------------------------------------------
// exhaustive enumeration

fn n_choose_k(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Exhaustively search all accepting sets and transition subsets of size at
/// most `caps.max_transitions`, returning a provably optimal automaton.
///
/// Refuses (with the estimate) when the candidate count exceeds
/// `caps.max_candidates`. Intended as a test oracle on tiny instances; the
/// candidate cost path is the plain interpreter, independent of the local
/// search's cached evaluator.
pub fn enumerate_optimal(
    dataset: &Dataset,
    cfg: &BatchConfig,
    caps: &EnumerationCaps,
) -> Result<LearnerReport> {
    validate_configs(&cfg.objective, &cfg.structural, cfg.semantics)?;
    let start = Instant::now();
    let pool = Pool::build(dataset, cfg, None)?;
    let masks = accepting_masks(&cfg.structural)?;

    let mut estimate: u128 = 0;
    for &mask in &masks {
        let nfacts = valid_facts(pool.len(), &cfg.structural, mask).len() as u128;
        for s in 0..=caps.max_transitions as u128 {
            estimate = estimate.saturating_add(n_choose_k(nfacts, s));
        }
    }
    if estimate > caps.max_candidates as u128 {
        return Err(Error::EnumerationCap {
            estimate,
            cap: caps.max_candidates,
        });
    }

    let mut iterations = 0u64;
    let mut best: Option<(CostVector, (usize, String), Asa)> = None;
    for &mask in &masks {
        let facts = valid_facts(pool.len(), &cfg.structural, mask);
        let mut chosen: Vec<usize> = Vec::with_capacity(caps.max_transitions);
        for size in 0..=caps.max_transitions.min(facts.len()) {
            chosen.clear();
            combinations(facts.len(), size, &mut chosen, &mut |idxs| {
                let cand_facts: Vec<IFact> = idxs.iter().map(|&i| facts[i]).collect();
                let cand = Candidate::normalized(mask, cand_facts);
                let asa = pool.to_asa(&cand, cfg.structural.max_states);
                let cost = objective::cost(&asa, dataset, cfg.semantics, &cfg.objective);
                iterations += 1;
                let key = tie_key(&asa, dataset);
                let better = match &best {
                    None => true,
                    Some((bc, bk, _)) => (cost, &key) < (*bc, bk),
                };
                if better {
                    best = Some((cost, key, asa));
                }
            });
        }
    }

    let (cost, _, asa) = best.expect("the empty candidate is always enumerated");
    debug_assert!(objective::check_structural(&asa, &cfg.structural).is_empty());
    Ok(LearnerReport {
        asa,
        cost,
        wall_time: start.elapsed(),
        iterations,
        exhaustive: true,
    })
}

/// Visit all `size`-element index combinations of `0..n` in lexicographic
/// order.
fn combinations(n: usize, size: usize, buf: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    if buf.len() == size {
        visit(buf);
        return;
    }
    let lo = buf.last().map_or(0, |&i| i + 1);
    let remaining = size - buf.len();
    for i in lo..=(n - remaining) {
        buf.push(i);
        combinations(n, size, buf, visit);
        buf.pop();
    }
}

// ---------------------------------------------------------------------------
// local search

pub(crate) struct SearchOutcome {
    /// Up to k best distinct candidates, sorted by cost then tie key.
    pub best: Vec<(Asa, CostVector)>,
    pub iterations: u64,
    pub wall_time: Duration,
}

struct KBest {
    k: usize,
    entries: Vec<(CostVector, (usize, String), Candidate, Asa)>,
}

impl KBest {
    fn new(k: usize) -> Self {
        Self {
            k,
            entries: Vec::new(),
        }
    }

    fn offer(&mut self, cand: &Candidate, cost: CostVector, pool: &Pool, n: usize, ds: &Dataset) {
        if self.entries.iter().any(|(_, _, c, _)| c == cand) {
            return;
        }
        let asa = pool.to_asa(cand, n);
        let key = tie_key(&asa, ds);
        let pos = self
            .entries
            .partition_point(|(c, k, _, _)| (*c, k) <= (cost, &key));
        if pos >= self.k {
            return;
        }
        self.entries.insert(pos, (cost, key, cand.clone(), asa));
        self.entries.truncate(self.k);
    }
}

/// Moves reachable from `cand`: add a valid fact, remove a fact, redirect a
/// fact's target, toggle one accepting state (dropping facts the new mask
/// invalidates). Every neighbor is structurally valid by construction.
fn neighbors(cand: &Candidate, pool_len: usize, cfg: &BatchConfig) -> Vec<Candidate> {
    let structural = &cfg.structural;
    let n = structural.max_states as u8;
    let mut out = Vec::new();

    if cand.facts.len() < cfg.max_transitions {
        for f in valid_facts(pool_len, structural, cand.accepting) {
            if cand.facts.binary_search(&f).is_err() {
                let mut facts = cand.facts.clone();
                facts.push(f);
                out.push(Candidate::normalized(cand.accepting, facts));
            }
        }
    }

    for i in 0..cand.facts.len() {
        let mut facts = cand.facts.clone();
        facts.remove(i);
        out.push(Candidate {
            accepting: cand.accepting,
            facts,
        });
    }

    for i in 0..cand.facts.len() {
        let f = cand.facts[i];
        for to in 0..n {
            if to == f.to {
                continue;
            }
            let nf = IFact { to, ..f };
            if !fact_is_valid(nf, structural, cand.accepting) {
                continue;
            }
            let mut facts = cand.facts.clone();
            facts[i] = nf;
            out.push(Candidate::normalized(cand.accepting, facts));
        }
    }

    for q in 0..n {
        if q == 0 && structural.start_not_accepting {
            continue;
        }
        let mask = cand.accepting ^ (1u64 << q);
        let facts: Vec<IFact> = cand
            .facts
            .iter()
            .copied()
            .filter(|f| fact_is_valid(*f, structural, mask))
            .collect();
        out.push(Candidate::normalized(mask, facts));
    }

    out
}

/// The canonical start: no transitions, and an empty accepting set unless
/// earliness forces a non-start accepting sink to exist.
fn initial_candidate(cfg: &BatchConfig) -> Candidate {
    let n = cfg.structural.max_states;
    let accepting = if cfg.objective.earliness.is_some()
        && cfg.structural.start_not_accepting
        && n >= 2
    {
        1u64 << (n - 1)
    } else {
        0
    };
    Candidate {
        accepting,
        facts: Vec::new(),
    }
}

fn random_candidate(rng: &mut ChaCha8Rng, pool_len: usize, cfg: &BatchConfig) -> Candidate {
    let structural = &cfg.structural;
    let n = structural.max_states;
    let mut mask = rng.gen::<u64>() & ((1u128 << n) as u64).wrapping_sub(1);
    if mask == 0 && n > 0 {
        // an automaton that accepts nothing rejects every positive, so bias
        // restarts toward seeds with at least one accepting state
        mask = 1u64 << rng.gen_range(0..n);
    }
    if structural.start_not_accepting {
        mask &= !1;
    }
    let pool = valid_facts(pool_len, structural, mask);
    let cap = cfg.max_transitions.min(pool.len());
    // every useful fact costs reg before it can pay off in error, so uphill
    // steps are rare; seed dense (max of two draws) and let the strictly
    // improving `remove` moves carve the candidate down
    let target = rng.gen_range(0..=cap).max(rng.gen_range(0..=cap));
    let mut facts = Vec::with_capacity(target);
    for _ in 0..target {
        facts.push(pool[rng.gen_range(0..pool.len())]);
    }
    Candidate::normalized(mask, facts)
}

/// Hill-climbing with restarts over the shared candidate space. Used
/// directly by [`local_search`] (k = 1, no incumbent) and by the revision
/// step of the incremental learner (incumbent + removal penalties, k > 1).
pub(crate) fn search_core(
    dataset: &Dataset,
    cfg: &BatchConfig,
    incumbent: Option<&Asa>,
    penalties: Option<&RemovalPenalties>,
    k: usize,
) -> Result<SearchOutcome> {
    validate_configs(&cfg.objective, &cfg.structural, cfg.semantics)?;
    if dataset.is_empty() {
        return Err(Error::Validation("cannot search an empty dataset".into()));
    }
    if let Some(asa) = incumbent {
        if asa.num_states() > cfg.structural.max_states {
            return Err(Error::Config(format!(
                "incumbent uses {} states, exceeding the budget of {}",
                asa.num_states(),
                cfg.structural.max_states
            )));
        }
    }
    let start_time = Instant::now();
    let deadline = start_time + Duration::from_secs_f64(cfg.timeout_secs);
    let pool = Pool::build(dataset, cfg, incumbent)?;
    let evaluator = Evaluator::new(dataset, &pool, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_states = cfg.structural.max_states;

    // removal penalties live at the reg level, on top of the standard terms
    let penalty_delta = |cand: &Candidate| -> i64 {
        match penalties {
            Some(p) if !p.is_empty() => p.reg_delta(&pool.to_asa(cand, n_states)),
            _ => 0,
        }
    };
    let mut iterations = 0u64;
    let eval = |cand: &Candidate, it: &mut u64| -> CostVector {
        let mut c = evaluator.eval(cand, &pool);
        c.reg += penalty_delta(cand);
        *it += 1;
        c
    };

    let mut kbest = KBest::new(k);

    'restarts: for restart in 0..cfg.restarts.max(1) {
        if Instant::now() >= deadline {
            break;
        }
        let mut cand = if restart == 0 {
            incumbent
                .map(|a| pool.to_candidate(a))
                .unwrap_or_else(|| initial_candidate(cfg))
        } else {
            random_candidate(&mut rng, pool.len(), cfg)
        };
        let mut cost = eval(&cand, &mut iterations);
        kbest.offer(&cand, cost, &pool, n_states, dataset);

        let mut sideways = 0u32;
        loop {
            if Instant::now() >= deadline {
                break 'restarts;
            }
            let mut moves = neighbors(&cand, pool.len(), cfg);
            moves.shuffle(&mut rng);
            let mut chosen: Option<(Candidate, CostVector)> = None;
            let mut sideway: Option<(Candidate, CostVector)> = None;
            for next in moves {
                if iterations % 256 == 0 && Instant::now() >= deadline {
                    break 'restarts;
                }
                let next_cost = eval(&next, &mut iterations);
                if next_cost < cost {
                    chosen = Some((next, next_cost));
                    break;
                }
                if next_cost == cost && sideway.is_none() {
                    sideway = Some((next, next_cost));
                }
            }
            match chosen {
                Some((next, next_cost)) => {
                    cand = next;
                    cost = next_cost;
                    sideways = 0;
                }
                None => match sideway {
                    Some((next, next_cost)) if sideways < cfg.sideways_limit => {
                        cand = next;
                        cost = next_cost;
                        sideways += 1;
                    }
                    _ => break, // local optimum
                },
            }
            kbest.offer(&cand, cost, &pool, n_states, dataset);
        }
    }

    // report independently recomputed costs, never the cache's numbers
    let mut best: Vec<(Asa, CostVector)> = kbest
        .entries
        .into_iter()
        .map(|(cached, _, cand, asa)| {
            let mut recomputed =
                objective::cost(&asa, dataset, cfg.semantics, &cfg.objective);
            recomputed.reg += penalty_delta(&cand);
            debug_assert_eq!(
                recomputed, cached,
                "cached evaluator disagrees with the interpreter"
            );
            (asa, recomputed)
        })
        .collect();
    best.sort_by(|a, b| {
        (a.1, tie_key(&a.0, dataset)).cmp(&(b.1, tie_key(&b.0, dataset)))
    });

    Ok(SearchOutcome {
        best,
        iterations,
        wall_time: start_time.elapsed(),
    })
}

/// Anytime stochastic local search: seeded hill-climbing restarts over adds,
/// removals, target redirects, and accepting-set toggles, under a wall-clock
/// timeout. Deterministic for a fixed seed when the timeout is not hit.
pub fn local_search(dataset: &Dataset, cfg: &BatchConfig) -> Result<LearnerReport> {
    let outcome = search_core(dataset, cfg, None, None, 1)?;
    let (asa, cost) = outcome
        .best
        .into_iter()
        .next()
        .expect("at least the initial candidate is recorded");
    debug_assert!(objective::check_structural(&asa, &cfg.structural).is_empty());
    Ok(LearnerReport {
        asa,
        cost,
        wall_time: outcome.wall_time,
        iterations: outcome.iterations,
        exhaustive: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AlphabetSpec, AttributeSet, Label, LabeledExample, Mvs};

    fn tiny_dataset() -> Dataset {
        let attrs = AttributeSet::new(["x"]).unwrap();
        let ab = AlphabetSpec::letters(3).unwrap();
        let mk = |id: &str, row: &str, label| LabeledExample {
            mvs: Mvs::from_letter_rows(id, &[row], &ab).unwrap(),
            label,
        };
        Dataset::new(
            ab.clone(),
            attrs,
            vec![
                mk("p1", "abc", Label::Positive),
                mk("p2", "abb", Label::Positive),
                mk("n1", "aaa", Label::Negative),
                mk("n2", "aab", Label::Negative),
            ],
        )
    }

    fn base_cfg() -> BatchConfig {
        BatchConfig {
            structural: StructuralConfig {
                max_states: 2,
                accepting_absorbing: false,
                start_not_accepting: false,
            },
            max_transitions: 2,
            timeout_secs: 30.0,
            seed: 7,
            restarts: 40,
            ..BatchConfig::default()
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(n_choose_k(10, 0), 1);
        assert_eq!(n_choose_k(10, 2), 45);
        assert_eq!(n_choose_k(3, 5), 0);
    }

    #[test]
    fn combinations_visit_lexicographically() {
        let mut seen = Vec::new();
        let mut buf = Vec::new();
        combinations(4, 2, &mut buf, &mut |c| seen.push(c.to_vec()));
        assert_eq!(
            seen,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn enumerator_finds_zero_error_and_search_matches() {
        let ds = tiny_dataset();
        let cfg = base_cfg();
        let caps = EnumerationCaps {
            max_transitions: 2,
            max_candidates: 10_000_000,
        };
        let oracle = enumerate_optimal(&ds, &cfg, &caps).unwrap();
        assert!(oracle.exhaustive);
        assert_eq!(oracle.cost.error, 0, "a 'c' detector separates the classes");
        let hc = local_search(&ds, &cfg).unwrap();
        assert!(!hc.exhaustive);
        assert_eq!(hc.cost, oracle.cost);
    }

    #[test]
    fn enumeration_cap_refuses_with_estimate() {
        let ds = tiny_dataset();
        let cfg = base_cfg();
        let caps = EnumerationCaps {
            max_transitions: 2,
            max_candidates: 10,
        };
        match enumerate_optimal(&ds, &cfg, &caps) {
            Err(Error::EnumerationCap { estimate, cap }) => {
                assert!(estimate > 10);
                assert_eq!(cap, 10);
            }
            other => panic!("expected a cap refusal, got {other:?}"),
        }
    }

    #[test]
    fn local_search_is_deterministic() {
        let ds = tiny_dataset();
        let cfg = base_cfg();
        let a = local_search(&ds, &cfg).unwrap();
        let b = local_search(&ds, &cfg).unwrap();
        assert_eq!(a.asa, b.asa);
        assert_eq!(a.cost, b.cost);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn cache_and_plain_interpreter_agree() {
        let ds = tiny_dataset();
        let cached = base_cfg();
        let plain = BatchConfig {
            use_cache: false,
            ..cached.clone()
        };
        let a = local_search(&ds, &cached).unwrap();
        let b = local_search(&ds, &plain).unwrap();
        assert_eq!(a.asa, b.asa);
        assert_eq!(a.cost, b.cost);
    }

    #[test]
    fn structural_flags_shape_the_space() {
        let ds = tiny_dataset();
        let mut cfg = base_cfg();
        cfg.structural.accepting_absorbing = true;
        cfg.structural.start_not_accepting = true;
        cfg.semantics.acceptance = AcceptanceMode::EarliestAbsorbing;
        cfg.objective.earliness = Some(crate::objective::EarlinessMode::SumAllAcceptSteps);
        let report = local_search(&ds, &cfg).unwrap();
        assert!(objective::check_structural(&report.asa, &cfg.structural).is_empty());
        assert!(!report.asa.is_accepting(State(0)));
    }

    #[test]
    fn neighbors_respect_validity_and_cap() {
        let cfg = BatchConfig {
            structural: StructuralConfig {
                max_states: 2,
                accepting_absorbing: true,
                start_not_accepting: true,
            },
            max_transitions: 1,
            ..BatchConfig::default()
        };
        // one fact, accepting q1 absorbing
        let cand = Candidate {
            accepting: 0b10,
            facts: vec![IFact {
                from: 1,
                guard: 0,
                to: 1,
            }],
        };
        for nb in neighbors(&cand, 3, &cfg) {
            assert!(nb.facts.len() <= 1);
            assert_eq!(nb.accepting & 1, 0, "q0 must never turn accepting");
            for f in &nb.facts {
                assert!(fact_is_valid(*f, &cfg.structural, nb.accepting));
            }
        }
    }
}
