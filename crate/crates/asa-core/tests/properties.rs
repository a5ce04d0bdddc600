//! Randomized differential tests. The interpreter is checked against an
//! explicit path-enumeration oracle (tracking every nondeterministic run
//! separately instead of occupancy sets), and the one-pass cost against the
//! trace-based error/regularization functions.

use std::collections::BTreeSet;

use asa_core::*;
use proptest::prelude::*;

const ATTR_NAMES: [&str; 3] = ["a0", "a1", "a2"];

fn attrs_for(n: usize) -> AttributeSet {
    AttributeSet::new(ATTR_NAMES[..n].iter().copied()).unwrap()
}

fn all_semantics() -> [Semantics; 4] {
    let policies = [Policy::StrictContiguity, Policy::SkipTillAnyMatch];
    let modes = [AcceptanceMode::EndOfSequence, AcceptanceMode::EarliestAbsorbing];
    let mut out = [Semantics::default(); 4];
    let mut i = 0;
    for policy in policies {
        for acceptance in modes {
            out[i] = Semantics { policy, acceptance };
            i += 1;
        }
    }
    out
}

fn arb_guard(num_attrs: u16, k: u16) -> BoxedStrategy<GroundGuard> {
    let a = 0..num_attrs;
    let v = 0..k;
    let unary = prop_oneof![
        (a.clone(), v.clone()).prop_map(|(a, v)| GroundGuard::Eq(Attr(a), Symbol(v))),
        (a.clone(), v.clone()).prop_map(|(a, v)| GroundGuard::Neg(Attr(a), Symbol(v))),
        (a.clone(), v.clone()).prop_map(|(a, v)| GroundGuard::AtLeast(Attr(a), Symbol(v))),
        (a.clone(), v).prop_map(|(a, v)| GroundGuard::AtMost(Attr(a), Symbol(v))),
    ];
    if num_attrs >= 2 {
        prop_oneof![
            unary,
            (0..num_attrs, 0..num_attrs - 1).prop_map(|(x, y)| {
                // distinct-pair trick: skip over x
                let y = if y >= x { y + 1 } else { y };
                GroundGuard::Lt(Attr(x), Attr(y))
            }),
        ]
        .boxed()
    } else {
        unary.boxed()
    }
}

/// A random automaton plus a random labeled dataset over the same signature.
#[derive(Debug, Clone)]
struct World {
    num_attrs: usize,
    k: usize,
    num_states: usize,
    accepting_mask: u64,
    facts: Vec<TransitionFact>,
    examples: Vec<(Vec<Vec<u16>>, bool)>,
}

impl World {
    fn build(&self) -> (AttributeSet, AlphabetSpec, Asa, Dataset) {
        let attrs = attrs_for(self.num_attrs);
        let ab = AlphabetSpec::letters(self.k).unwrap();
        let asa = Asa::new(
            self.num_states,
            StateSet(self.accepting_mask).iter(),
            self.facts.clone(),
        )
        .unwrap();
        let examples = self
            .examples
            .iter()
            .enumerate()
            .map(|(i, (rows, pos))| {
                let rows: Vec<Vec<Symbol>> = rows
                    .iter()
                    .map(|r| r.iter().map(|&s| Symbol(s)).collect())
                    .collect();
                LabeledExample {
                    mvs: Mvs::from_rows(format!("s{i}"), &rows).unwrap(),
                    label: if *pos { Label::Positive } else { Label::Negative },
                }
            })
            .collect();
        let ds = Dataset::new(ab.clone(), attrs.clone(), examples);
        (attrs, ab, asa, ds)
    }
}

fn arb_world() -> BoxedStrategy<World> {
    (1usize..=3, 2usize..=4, 1usize..=3)
        .prop_flat_map(|(num_attrs, k, ns)| {
            let fact = (0..ns as u8, arb_guard(num_attrs as u16, k as u16), 0..ns as u8)
                .prop_map(|(f, g, t)| TransitionFact {
                    from: State(f),
                    guard: g,
                    to: State(t),
                });
            let facts = proptest::collection::vec(fact, 0..=5);
            let example = (1usize..=6).prop_flat_map(move |len| {
                (
                    proptest::collection::vec(
                        proptest::collection::vec(0..k as u16, len),
                        num_attrs,
                    ),
                    any::<bool>(),
                )
            });
            let examples = proptest::collection::vec(example, 1..=3);
            (
                Just((num_attrs, k, ns)),
                0u64..(1u64 << ns),
                facts,
                examples,
            )
        })
        .prop_map(|((num_attrs, k, ns), mask, facts, examples)| World {
            num_attrs,
            k,
            num_states: ns,
            accepting_mask: mask,
            facts,
            examples,
        })
        .boxed()
}

/// Reference interpreter: enumerate every nondeterministic run as its own
/// path. Exponential, fine at this scale; shares no code with `step`.
fn oracle_run(
    asa: &Asa,
    mvs: &Mvs,
    sem: Semantics,
) -> (Vec<BTreeSet<State>>, bool, Option<usize>, Option<usize>) {
    let n = mvs.len();
    let mut paths: Vec<Vec<State>> = vec![vec![State(0)]];
    let endpoint_set = |paths: &[Vec<State>]| -> BTreeSet<State> {
        paths.iter().map(|p| *p.last().unwrap()).collect()
    };
    let mut occ_sets = vec![endpoint_set(&paths)];
    for t in 1..=n {
        let coord = mvs.coordinate(t).unwrap();
        let mut next = Vec::new();
        for p in &paths {
            let q = *p.last().unwrap();
            let mut targets: BTreeSet<State> = asa
                .transitions()
                .iter()
                .filter(|f| f.from == q && f.guard.satisfies(coord))
                .map(|f| f.to)
                .collect();
            if targets.is_empty() && sem.policy == Policy::SkipTillAnyMatch {
                targets.insert(q);
            }
            if sem.acceptance == AcceptanceMode::EarliestAbsorbing && asa.is_accepting(q) {
                targets.insert(q);
            }
            for tgt in targets {
                let mut np = p.clone();
                np.push(tgt);
                next.push(np);
            }
        }
        next.sort();
        next.dedup();
        paths = next;
        occ_sets.push(endpoint_set(&paths));
    }
    let accepting: BTreeSet<State> = asa.accepting().iter().collect();
    let touches = |s: &BTreeSet<State>| s.iter().any(|q| accepting.contains(q));
    let fa = occ_sets.iter().position(touches).map(|i| i + 1);
    let dead = occ_sets.iter().position(|s| s.is_empty()).map(|i| i + 1);
    let accepted = match sem.acceptance {
        AcceptanceMode::EndOfSequence => touches(&occ_sets[n]),
        AcceptanceMode::EarliestAbsorbing => fa.is_some(),
    };
    (occ_sets, accepted, fa, dead)
}

proptest! {
    #[test]
    fn run_matches_explicit_path_enumeration(w in arb_world()) {
        let (_attrs, _ab, asa, ds) = w.build();
        for sem in all_semantics() {
            for ex in &ds.examples {
                let r = run(&asa, &ex.mvs, sem);
                let (occ, accepted, fa, dead) = oracle_run(&asa, &ex.mvs, sem);
                prop_assert_eq!(r.accepted, accepted, "{} {:?}", ex.mvs.id(), sem);
                prop_assert_eq!(r.first_accept_time, fa);
                prop_assert_eq!(r.dead_time, dead);
                prop_assert_eq!(r.occupancy.len(), occ.len());
                for (i, want) in occ.iter().enumerate() {
                    let got: BTreeSet<State> = r.occupancy[i].iter().collect();
                    prop_assert_eq!(&got, want, "time {}", i + 1);
                }
                // the trace-free fast path agrees with the full run
                let o = automaton::evaluate(&asa, &ex.mvs, sem);
                prop_assert_eq!(o.accepted, r.accepted);
                prop_assert_eq!(o.first_accept_time, r.first_accept_time);
                prop_assert_eq!(o.dead_time, r.dead_time);
            }
        }
    }

    #[test]
    fn render_parse_round_trips(w in arb_world()) {
        let (attrs, ab, asa, _ds) = w.build();
        let text = render_asa(&asa, &attrs, &ab);
        let parsed = parse_asa(&text, &attrs, &ab).unwrap();
        prop_assert_eq!(parsed.transitions(), asa.transitions());
        prop_assert_eq!(parsed.accepting(), asa.accepting());
    }

    #[test]
    fn cost_is_invariant_under_state_renaming(w in arb_world(), swap in any::<bool>()) {
        let (_attrs, _ab, asa, ds) = w.build();
        // any bijection fixing the start state preserves run semantics; with
        // up to three states that is the identity or the q1<->q2 swap
        let perm: [u8; 3] = if swap && w.num_states == 3 { [0, 2, 1] } else { [0, 1, 2] };
        let facts: Vec<TransitionFact> = asa
            .transitions()
            .iter()
            .map(|t| TransitionFact {
                from: State(perm[t.from.0 as usize]),
                guard: t.guard,
                to: State(perm[t.to.0 as usize]),
            })
            .collect();
        let renamed = Asa::new(
            asa.num_states(),
            asa.accepting().iter().map(|q| State(perm[q.0 as usize])),
            facts,
        )
        .unwrap();
        let cfg = ObjectiveConfig::default();
        for sem in all_semantics() {
            prop_assert_eq!(
                cost(&asa, &ds, sem, &cfg),
                cost(&renamed, &ds, sem, &cfg),
                "{:?}", sem
            );
        }
    }

    #[test]
    fn one_pass_cost_equals_trace_based_costs(w in arb_world(), first in any::<bool>()) {
        let (_attrs, _ab, asa, ds) = w.build();
        let cfg = ObjectiveConfig {
            earliness: Some(if first {
                EarlinessMode::FirstAcceptStep
            } else {
                EarlinessMode::SumAllAcceptSteps
            }),
            ..ObjectiveConfig::default()
        };
        // earliness is only defined under earliest-absorbing acceptance,
        // where retention makes accepting occupancy contiguous
        for policy in [Policy::StrictContiguity, Policy::SkipTillAnyMatch] {
            let sem = Semantics { policy, acceptance: AcceptanceMode::EarliestAbsorbing };
            let one_pass = cost(&asa, &ds, sem, &cfg);
            prop_assert_eq!(one_pass.error, error_cost(&asa, &ds, sem, &cfg));
            prop_assert_eq!(one_pass.reg, reg_cost(&asa, &ds, sem, &cfg));
        }
    }

    #[test]
    fn discretization_shape_and_range(
        vals in proptest::collection::vec(-1e6f64..1e6, 1..=40),
        k in 2usize..=8,
        window in 1usize..=4,
    ) {
        prop_assume!(vals.len() / window >= 1);
        let alphabet = AlphabetSpec::letters(k).unwrap();
        let series = RawSeries::new("s", vec!["x".into()], vec![vals.clone()]).unwrap();
        for breakpoint_mode in [BreakpointMode::GaussianEquiprobable, BreakpointMode::UniformRange] {
            for normalize in [Normalize::Zscore, Normalize::None] {
                let cfg = SaxConfig { alphabet_size: k, breakpoint_mode, paa_window: window, normalize };
                let mvs = discretize(&series, &cfg, &alphabet).unwrap();
                prop_assert_eq!(mvs.len(), vals.len() / window);
                for t in 1..=mvs.len() {
                    prop_assert!((mvs.coordinate(t).unwrap()[0].0 as usize) < k);
                }
            }
        }
        // binning is monotone: sorted input yields non-decreasing symbols
        let mut sorted = vals;
        sorted.sort_by(f64::total_cmp);
        let series = RawSeries::new("s", vec!["x".into()], vec![sorted]).unwrap();
        let cfg = SaxConfig { alphabet_size: k, ..SaxConfig::default() };
        let mvs = discretize(&series, &cfg, &alphabet).unwrap();
        for t in 1..mvs.len() {
            prop_assert!(mvs.coordinate(t).unwrap()[0].0 <= mvs.coordinate(t + 1).unwrap()[0].0);
        }
    }
}
