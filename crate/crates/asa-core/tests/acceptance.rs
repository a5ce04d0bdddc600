//! Acceptance gate. One test per criterion; each prints a single
//! `criterion N: PASS/FAIL — detail` line (visible with `--nocapture`, or in
//! the failure report) and then asserts the criterion as stated.

mod common;

use std::time::Instant;

use asa_core::*;
use common::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, pass: bool, detail: &str) {
    println!(
        "criterion {n}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

#[test]
fn criterion_1_interpreter_fixtures() {
    let t0 = Instant::now();
    let (attrs, ab, ds) = cells_dataset();
    let (pos, neg) = (&ds.examples[0].mvs, &ds.examples[1].mvs);

    let r1 = run(&reference_asa(&attrs, &ab), pos, strict_end());
    let r2 = run(&reference_asa(&attrs, &ab), neg, strict_end());
    let r3 = run(&compact_two_state(&attrs, &ab), pos, strict_earliest());
    let single = single_state(&attrs, &ab);
    let r4 = run(&single, pos, strict_end());
    let r5 = run(&single, neg, strict_end());

    let checks = [
        r1.accepted && r1.first_accept_time == Some(8),
        !r2.accepted && r2.dead_time == Some(6),
        r3.accepted && r3.first_accept_time == Some(6),
        r4.accepted,
        !r5.accepted,
    ];
    let pass = checks.iter().all(|c| *c) && t0.elapsed().as_secs_f64() < 1.0;
    verdict(
        1,
        pass,
        &format!(
            "reference accepts id1 at {:?} (want 8) and rejects id2 dead at {:?} (want 6); \
             compact accepts id1 at {:?} (want 6); single-state id1 accepted={} id2 accepted={} \
             [{:.3}s]",
            r1.first_accept_time,
            r2.dead_time,
            r3.first_accept_time,
            r4.accepted,
            r5.accepted,
            t0.elapsed().as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_oracle_optimality() {
    let t0 = Instant::now();
    let (_attrs, _ab, ds) = cells_dataset();
    let sem = strict_earliest();
    let base = |mode| BatchConfig {
        structural: StructuralConfig {
            max_states: 2,
            accepting_absorbing: true,
            start_not_accepting: true,
        },
        objective: ObjectiveConfig {
            earliness: Some(mode),
            ..ObjectiveConfig::default()
        },
        semantics: sem,
        timeout_secs: 60.0,
        ..BatchConfig::default()
    };
    let caps = EnumerationCaps {
        max_transitions: 2,
        max_candidates: 50_000_000,
    };

    let cfg = BatchConfig {
        restarts: 300,
        sideways_limit: 40,
        seed: 7,
        ..base(EarlinessMode::SumAllAcceptSteps)
    };
    let oracle = enumerate_optimal(&ds, &cfg, &caps).unwrap();
    let hc = local_search(&ds, &cfg).unwrap();
    let fa = automaton::evaluate(&oracle.asa, &ds.examples[0].mvs, sem).first_accept_time;

    // same space under first-step earliness, for the diagnostic below
    let alt = enumerate_optimal(&ds, &base(EarlinessMode::FirstAcceptStep), &caps).unwrap();
    let alt_fa = automaton::evaluate(&alt.asa, &ds.examples[0].mvs, sem).first_accept_time;

    let error_ok = oracle.cost.error == 0;
    let size_ok = oracle.asa.transition_count() == 2;
    let parity_ok = hc.cost == oracle.cost;
    let fa_ok = fa == Some(6);
    let elapsed = t0.elapsed().as_secs_f64();
    verdict(
        2,
        error_ok && size_ok && parity_ok && fa_ok,
        &format!(
            "exhaustive optimum {} with {} facts accepts id1 at {:?} (want 6); local search \
             reaches {} ({}); under first-step earliness the optimum is {} accepting at {:?} \
             [{:.1}s]",
            oracle.cost,
            oracle.asa.transition_count(),
            fa,
            hc.cost,
            if parity_ok { "cost parity" } else { "cost mismatch" },
            alt.cost,
            alt_fa,
            elapsed
        ),
    );
    assert!(error_ok, "optimum has nonzero error: {}", oracle.cost);
    assert!(size_ok, "optimum has {} facts", oracle.asa.transition_count());
    assert!(parity_ok, "local search {} != exhaustive {}", hc.cost, oracle.cost);
    assert!(elapsed < 300.0);
    // Known-red assertion, kept as stated. Summing the earliness charge over
    // every accepting step of a retained (absorbing) occupancy makes later
    // first-accept times strictly cheaper, so the zero-error optimum accepts
    // id1 at step 11, not 6; charging only the first accepting step instead
    // yields an optimum that accepts at step 5. No optimal automaton in this
    // space accepts at step 6 under either charge.
    assert_eq!(fa, Some(6), "measured first accept {fa:?} under the summed charge, {alt_fa:?} under the first-step charge");
}

#[test]
fn criterion_3_oracle_equivalence_suite() {
    fn random_instance(rng: &mut ChaCha8Rng) -> Dataset {
        let k = rng.gen_range(3..=4usize);
        let n_attrs = rng.gen_range(1..=2usize);
        let ab = AlphabetSpec::letters(k).unwrap();
        let names = ["x", "y"];
        let attrs = AttributeSet::new(names[..n_attrs].iter().copied()).unwrap();
        let n_examples = rng.gen_range(4..=8usize);
        let len = rng.gen_range(3..=8usize);
        let mut examples = Vec::new();
        loop {
            examples.clear();
            for i in 0..n_examples {
                let rows: Vec<Vec<Symbol>> = (0..n_attrs)
                    .map(|_| (0..len).map(|_| Symbol(rng.gen_range(0..k) as u16)).collect())
                    .collect();
                let label = if rng.gen_bool(0.5) { Label::Positive } else { Label::Negative };
                examples.push(LabeledExample {
                    mvs: Mvs::from_rows(format!("e{i}"), &rows).unwrap(),
                    label,
                });
            }
            let pos = examples.iter().filter(|e| e.label.is_positive()).count();
            if pos > 0 && pos < n_examples {
                break;
            }
        }
        Dataset::new(ab, attrs, examples)
    }

    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let total = 60u32;
    let mut matched = 0u32;
    for i in 0..total {
        let ds = random_instance(&mut rng);
        let cfg = BatchConfig {
            structural: StructuralConfig {
                max_states: 2,
                ..StructuralConfig::default()
            },
            max_transitions: 2,
            timeout_secs: 60.0,
            seed: 1000 + i as u64,
            restarts: 1500,
            sideways_limit: 80,
            ..BatchConfig::default()
        };
        let caps = EnumerationCaps {
            max_transitions: 2,
            max_candidates: 50_000_000,
        };
        let oracle = enumerate_optimal(&ds, &cfg, &caps).unwrap();
        let hc = local_search(&ds, &cfg).unwrap();
        // a cost below the enumerated optimum means the two evaluation paths
        // disagree — always a bug, never luck
        assert!(
            hc.cost >= oracle.cost,
            "instance {i}: local search {} beat the exhaustive optimum {}",
            hc.cost,
            oracle.cost
        );
        if hc.cost == oracle.cost {
            matched += 1;
        } else {
            println!(
                "criterion 3 detail: instance {i} off optimum (search {}, oracle {})",
                hc.cost, oracle.cost
            );
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let need = (total as f64 * 0.95).ceil() as u32;
    let pass = matched >= need && elapsed < 1800.0;
    verdict(
        3,
        pass,
        &format!("local search matched the exhaustive optimum on {matched}/{total} random instances (need {need}), never lower [{elapsed:.0}s]"),
    );
    assert!(pass);
}

fn planted(noise: f64) -> PlantedModelSpec {
    let attrs = AttributeSet::new(["x", "y"]).unwrap();
    let ab = AlphabetSpec::letters(6).unwrap();
    let asa = parse_asa("transition(q0,eq(x,f),q1).\naccepting(q1).", &attrs, &ab).unwrap();
    PlantedModelSpec {
        asa,
        semantics: Semantics {
            policy: Policy::SkipTillAnyMatch,
            acceptance: AcceptanceMode::EndOfSequence,
        },
        attributes: attrs,
        alphabet: ab,
        len: 5,
        positives: 500,
        negatives: 500,
        noise,
        bias: None,
    }
}

fn planted_learner_cfg() -> IncrConfig {
    IncrConfig {
        batch_size: 50,
        iterations: 3,
        shuffle_seed: 9,
        batch: BatchConfig {
            structural: StructuralConfig {
                max_states: 2,
                ..StructuralConfig::default()
            },
            semantics: Semantics {
                policy: Policy::SkipTillAnyMatch,
                acceptance: AcceptanceMode::EndOfSequence,
            },
            max_transitions: 2,
            restarts: 40,
            timeout_secs: 20.0,
            seed: 9,
            ..BatchConfig::default()
        },
        ..IncrConfig::default()
    }
}

#[test]
fn criterion_4_incremental_monotonicity_and_recovery() {
    let t0 = Instant::now();

    // clean planted data: recover with near-perfect training F1
    let spec = planted(0.0);
    let ds = generate_planted(&spec, 2024).unwrap();
    assert_eq!(ds.class_counts(), (500, 500));
    let mut costs = Vec::new();
    let report =
        learn_incremental_with_progress(&ds, &planted_learner_cfg(), |p| costs.push(p.global_cost))
            .unwrap();
    let train_f1 =
        Metrics::from_predictions(&eval::predict_dataset(&report.asa, &ds, spec.semantics, 0)).f1();
    let monotone = costs.windows(2).all(|w| w[1] <= w[0]);

    // 10% label noise: held-out F1 under stratified 5-fold CV
    let noisy = generate_planted(&planted(0.1), 2025).unwrap();
    let learner = LearnerSpec::Incremental {
        config: planted_learner_cfg(),
    };
    let cv = cross_validate(&noisy, &learner, 5, 77).unwrap();

    let elapsed = t0.elapsed().as_secs_f64();
    let pass = train_f1 >= 0.95 && monotone && cv.mean_f1 >= 0.85 && elapsed < 900.0;
    verdict(
        4,
        pass,
        &format!(
            "noise 0: training F1 {train_f1:.3} (need >= 0.95), cost trajectory non-increasing: \
             {monotone}; noise 0.1: 5-fold held-out mean F1 {:.3} (need >= 0.85) [{elapsed:.1}s]",
            cv.mean_f1
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_revision_weight_semantics() {
    let t0 = Instant::now();
    let attrs = AttributeSet::new(["x"]).unwrap();
    let ab = AlphabetSpec::letters(3).unwrap();
    let mk = |rows: &[(&str, &str, Label)]| {
        let examples = rows
            .iter()
            .map(|(id, row, label)| LabeledExample {
                mvs: Mvs::from_letter_rows(*id, &[row], &ab).unwrap(),
                label: *label,
            })
            .collect();
        Dataset::new(ab.clone(), attrs.clone(), examples)
    };
    let cfg = IncrConfig {
        batch: BatchConfig {
            structural: StructuralConfig {
                max_states: 2,
                ..StructuralConfig::default()
            },
            max_transitions: 2,
            restarts: 40,
            seed: 3,
            ..BatchConfig::default()
        },
        ..IncrConfig::default()
    };
    use Label::{Negative, Positive};

    // harmful fact: fires on everything, so three negatives are accepted
    let ds = mk(&[
        ("p1", "b", Positive),
        ("p2", "c", Positive),
        ("n1", "a", Negative),
        ("n2", "a", Negative),
        ("n3", "a", Negative),
    ]);
    let incumbent =
        parse_asa("transition(q0,at_least(x,a),q1).\naccepting(q1).", &attrs, &ab).unwrap();
    let bad = incumbent.transitions()[0];
    let stats = guard_stats(&incumbent, &ds, Semantics::default());
    let weight_positive = stats.weight(&bad) > 0;
    let (best, _) = revise(&incumbent, &ds, &stats, &cfg).unwrap().remove(0);
    let removed = !best.transitions().contains(&bad);

    // mirrored fixture: the fact carries two accepted positives
    let ds2 = mk(&[
        ("p1", "b", Positive),
        ("p2", "b", Positive),
        ("p3", "c", Positive),
        ("n1", "a", Negative),
    ]);
    let incumbent2 = parse_asa("transition(q0,eq(x,b),q1).\naccepting(q1).", &attrs, &ab).unwrap();
    let good = incumbent2.transitions()[0];
    let stats2 = guard_stats(&incumbent2, &ds2, Semantics::default());
    let weight_negative = stats2.weight(&good) < 0;
    let (best2, _) = revise(&incumbent2, &ds2, &stats2, &cfg).unwrap().remove(0);
    let retained = best2.transitions().contains(&good);

    let pass = weight_positive && removed && weight_negative && retained;
    verdict(
        5,
        pass,
        &format!(
            "n>p fact: weight {} (positive: {weight_positive}), removed by revise: {removed}; \
             p>n fact: weight {} (negative: {weight_negative}), retained: {retained} [{:.2}s]",
            stats.weight(&bad),
            stats2.weight(&good),
            t0.elapsed().as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_encoding_fidelity() {
    let t0 = Instant::now();
    let golden = |name: &str| {
        std::fs::read_to_string(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
                .join("tests/golden")
                .join(name),
        )
        .unwrap()
    };
    let (attrs, ab, ds) = cells_dataset();

    let earliest_cfg = BatchConfig {
        structural: StructuralConfig {
            max_states: 2,
            accepting_absorbing: true,
            start_not_accepting: true,
        },
        objective: ObjectiveConfig {
            earliness: Some(EarlinessMode::SumAllAcceptSteps),
            ..ObjectiveConfig::default()
        },
        semantics: strict_earliest(),
        ..BatchConfig::default()
    };
    let earliest = asp::export_asp(&ds, &earliest_cfg, None).unwrap();
    let earliest_match = earliest == golden("cells_earliest.lp");

    let spellings = [
        "{transition(S1,F,S2)} :- state(S1), state(S2), feature(F).",
        "{accepting(S)} :- state(S).",
        "[w_fp@2,SeqId]",
        "[w_fn@2,SeqId]",
        "[1@1,S1,S2,X]",
        "[T@1,SeqId,T]",
        ":- transition(S,_,S2), accepting(S), S2 != S.",
    ];
    let missing: Vec<&str> = spellings
        .iter()
        .filter(|s| !earliest.contains(*s))
        .copied()
        .collect();

    let revision = asp::export_asp(&ds, &BatchConfig::default(), Some(&reference_asa(&attrs, &ab)))
        .unwrap();
    let revision_match = revision == golden("cells_revision.lp");
    // incumbent facts appear as existing/1 with per-fact removal constraints
    // weighted -w = p - n (here 1 for every fact: p=1, n=0)
    let revision_spellings = [
        "existing(transition(1,neg(alive,b),1)).",
        "existing(transition(1,lt(alive,necrotic),2)).",
        "existing(transition(2,at_least(necrotic,c),2)).",
        "existing(accepting(2)).",
        ":~ not transition(1,neg(alive,b),1), existing(transition(1,neg(alive,b),1)). [1@1,transition(1,neg(alive,b),1)]",
    ];
    let missing_rev: Vec<&str> = revision_spellings
        .iter()
        .filter(|s| !revision.contains(*s))
        .copied()
        .collect();

    let default_match =
        asp::export_asp(&ds, &BatchConfig::default(), None).unwrap() == golden("cells_default.lp");

    let pass = earliest_match
        && revision_match
        && default_match
        && missing.is_empty()
        && missing_rev.is_empty()
        && t0.elapsed().as_secs_f64() < 1.0;
    verdict(
        6,
        pass,
        &format!(
            "golden byte-match: default {default_match}, earliest {earliest_match}, revision \
             {revision_match}; rule spellings missing: {missing:?}; revision spellings missing: \
             {missing_rev:?} [{:.3}s]",
            t0.elapsed().as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_substituted_absolute_results() {
    // Absolute F1 targets on the original real-world deployments are not
    // checkable here: those datasets are not distributed. Learner quality is
    // covered by criteria 2-4 (proven optima, parity on random instances,
    // planted-model recovery); this criterion pins the remaining pipeline
    // stage, the discretizer, to its independent quantile oracle.
    let erf = |x: f64| -> f64 {
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        let x = x.abs();
        let t = 1.0 / (1.0 + 0.3275911 * x);
        let poly = t
            * (0.254829592
                + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
        sign * (1.0 - poly * (-x * x).exp())
    };
    let cdf = |x: f64| 0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2));
    let quantile = |p: f64| -> f64 {
        let (mut lo, mut hi) = (-10.0f64, 10.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let mut worst: f64 = 0.0;
    for k in 2..=30 {
        let bps = gaussian_breakpoints(k).unwrap();
        for (i, bp) in bps.iter().enumerate() {
            worst = worst.max((bp - quantile((i + 1) as f64 / k as f64)).abs());
        }
        assert!(bps.windows(2).all(|w| w[0] < w[1]), "k={k} not increasing");
    }
    let pass = worst < 1e-3;
    verdict(
        7,
        pass,
        &format!(
            "absolute F1 on the original deployment data is not reproducible (datasets not \
             distributed); substituted by criteria 2-4 plus the discretizer oracle: max \
             breakpoint deviation {worst:.2e} over k=2..=30 (bound 1e-3)"
        ),
    );
    assert!(pass);
}
