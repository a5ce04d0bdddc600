//! Export the learning task as an answer-set-programming optimization
//! program: generation choice rules, guard semantics, the interpreter,
//! weighted error constraints at priority 2, regularization at priority 1,
//! structural hard constraints, the training data as facts, and (for
//! revision) `existing/1` facts with per-fact removal constraints.
//!
//! The output is plain text, byte-deterministic for identical inputs, and
//! self-contained: states are the integers `1..N` with `start(1)`, values
//! are symbol-name constants whose alphabetical order matches the alphabet
//! order, so the built-in term comparisons `<`, `>=`, `<=` implement the
//! guard relations.

use std::fmt::Write as _;

use crate::automaton::{AcceptanceMode, Asa, Policy, State};
use crate::error::Result;
use crate::guards::GuardKind;
use crate::incremental::guard_stats;
use crate::model::Dataset;
use crate::objective::validate_configs;
use crate::search::BatchConfig;

fn state_term(q: State) -> String {
    (q.0 as u32 + 1).to_string()
}

/// Render the full program. When `incumbent` is given its facts are marked
/// `existing/1` and each gets a removal weak constraint whose weight is the
/// fact's removal cost (`p − n` over the dataset, 1 for accepting facts).
pub fn export_asp(dataset: &Dataset, cfg: &BatchConfig, incumbent: Option<&Asa>) -> Result<String> {
    validate_configs(&cfg.objective, &cfg.structural, cfg.semantics)?;
    let attrs = &dataset.attributes;
    let alphabet = &dataset.alphabet;
    let mut kinds = cfg.kinds.clone();
    kinds.sort();
    kinds.dedup();

    let mut out = String::new();
    let w = &mut out;

    writeln!(w, "% automaton learning task, generated").unwrap();
    writeln!(w).unwrap();

    writeln!(w, "% ---- generate a candidate automaton").unwrap();
    writeln!(w, "maxStates(1..{}).", cfg.structural.max_states).unwrap();
    writeln!(w, "start(1).").unwrap();
    writeln!(w, "{{state(S)}} :- maxStates(S).").unwrap();
    writeln!(w, "state(S) :- start(S).").unwrap();
    writeln!(
        w,
        "{{transition(S1,F,S2)}} :- state(S1), state(S2), feature(F)."
    )
    .unwrap();
    writeln!(w, "{{accepting(S)}} :- state(S).").unwrap();
    writeln!(w).unwrap();

    writeln!(w, "% ---- transition feature pool").unwrap();
    for kind in &kinds {
        match kind {
            GuardKind::Lt => {
                writeln!(
                    w,
                    "feature(lt(A1,A2)) :- att(A1), att(A2), A1 != A2."
                )
                .unwrap();
            }
            k => {
                writeln!(w, "feature({}(A,V)) :- att(A), val(V).", k.name()).unwrap();
            }
        }
    }
    writeln!(w).unwrap();

    writeln!(w, "% ---- feature semantics over observations").unwrap();
    for kind in &kinds {
        let rule = match kind {
            GuardKind::Eq => "satisfies(SeqId,eq(A,V),T) :- obs(SeqId,av(A,V),T), val(V).",
            GuardKind::Neg => {
                "satisfies(SeqId,neg(A,V),T) :- obs(SeqId,av(A,V2),T), val(V), V != V2."
            }
            GuardKind::Lt => {
                "satisfies(SeqId,lt(A1,A2),T) :- obs(SeqId,av(A1,V1),T), obs(SeqId,av(A2,V2),T), A1 != A2, V1 < V2."
            }
            GuardKind::AtLeast => {
                "satisfies(SeqId,at_least(A,V),T) :- obs(SeqId,av(A,V2),T), val(V), V2 >= V."
            }
            GuardKind::AtMost => {
                "satisfies(SeqId,at_most(A,V),T) :- obs(SeqId,av(A,V2),T), val(V), V2 <= V."
            }
        };
        writeln!(w, "{rule}").unwrap();
    }
    writeln!(w).unwrap();

    writeln!(w, "% ---- interpreter").unwrap();
    writeln!(w, "inState(SeqId,S,1) :- seq(SeqId), start(S).").unwrap();
    writeln!(
        w,
        "inState(SeqId,S2,T+1) :- inState(SeqId,S1,T), transition(S1,F,S2), satisfies(SeqId,F,T)."
    )
    .unwrap();
    if cfg.semantics.policy == Policy::SkipTillAnyMatch {
        writeln!(
            w,
            "inState(SeqId,S,T+1) :- inState(SeqId,S,T), seqLen(SeqId,N), T <= N, #count{{F : transition(S,F,S2), satisfies(SeqId,F,T)}} = 0."
        )
        .unwrap();
    }
    match cfg.semantics.acceptance {
        AcceptanceMode::EndOfSequence => {
            writeln!(
                w,
                "accepted(SeqId) :- inState(SeqId,S,N+1), accepting(S), seqLen(SeqId,N)."
            )
            .unwrap();
        }
        AcceptanceMode::EarliestAbsorbing => {
            // accepting states are absorbing: retain them, and acceptance
            // starts at the first accepting occupancy
            writeln!(
                w,
                "inState(SeqId,S,T+1) :- inState(SeqId,S,T), accepting(S), seqLen(SeqId,N), T <= N."
            )
            .unwrap();
            writeln!(
                w,
                "accepted(SeqId,T) :- inState(SeqId,S,T), accepting(S)."
            )
            .unwrap();
            writeln!(w, "accepted(SeqId) :- accepted(SeqId,_).").unwrap();
        }
    }
    writeln!(w).unwrap();

    writeln!(w, "% ---- minimize the training error").unwrap();
    writeln!(w, "#const w_fp = {}.", cfg.objective.w_fp).unwrap();
    writeln!(w, "#const w_fn = {}.", cfg.objective.w_fn).unwrap();
    writeln!(w, ":~ accepted(SeqId), negative(SeqId). [w_fp@2,SeqId]").unwrap();
    writeln!(w, ":~ not accepted(SeqId), positive(SeqId). [w_fn@2,SeqId]").unwrap();
    writeln!(w).unwrap();

    writeln!(w, "% ---- regularization").unwrap();
    writeln!(
        w,
        ":~ transition(S1,X,S2). [{}@1,S1,S2,X]",
        cfg.objective.transition_penalty
    )
    .unwrap();
    if cfg.objective.earliness.is_some() {
        writeln!(w, ":~ accepted(SeqId,T). [T@1,SeqId,T]").unwrap();
    }
    writeln!(w).unwrap();

    let wants_structural = cfg.structural.accepting_absorbing || cfg.structural.start_not_accepting;
    if wants_structural {
        writeln!(w, "% ---- structural constraints").unwrap();
        if cfg.structural.accepting_absorbing {
            writeln!(w, ":- transition(S,_,S2), accepting(S), S2 != S.").unwrap();
        }
        if cfg.structural.start_not_accepting {
            writeln!(w, ":- accepting(S), start(S).").unwrap();
        }
        writeln!(w).unwrap();
    }

    if let Some(asa) = incumbent {
        let stats = guard_stats(asa, dataset, cfg.semantics);
        writeln!(w, "% ---- revision: incumbent facts and removal costs").unwrap();
        for t in asa.transitions() {
            let fact = format!(
                "transition({},{},{})",
                state_term(t.from),
                t.guard.render(attrs, alphabet),
                state_term(t.to)
            );
            writeln!(w, "existing({fact}).").unwrap();
        }
        for q in asa.accepting().iter() {
            writeln!(w, "existing(accepting({})).", state_term(q)).unwrap();
        }
        for t in asa.transitions() {
            let fact = format!(
                "transition({},{},{})",
                state_term(t.from),
                t.guard.render(attrs, alphabet),
                state_term(t.to)
            );
            writeln!(
                w,
                ":~ not {fact}, existing({fact}). [{}@1,{fact}]",
                stats.removal_cost(t)
            )
            .unwrap();
        }
        for q in asa.accepting().iter() {
            let fact = format!("accepting({})", state_term(q));
            writeln!(w, ":~ not {fact}, existing({fact}). [1@1,{fact}]").unwrap();
        }
        writeln!(w).unwrap();
    }

    writeln!(w, "% ---- attribute and value domain").unwrap();
    for name in attrs.names() {
        writeln!(w, "att({name}).").unwrap();
    }
    let values = match cfg.value_domain {
        crate::guards::ValueDomain::Observed => dataset.observed_symbols(),
        crate::guards::ValueDomain::FullAlphabet => alphabet.symbols().collect(),
    };
    for v in &values {
        writeln!(w, "val({}).", alphabet.name(*v)).unwrap();
    }
    writeln!(w).unwrap();

    writeln!(w, "% ---- training data").unwrap();
    for ex in &dataset.examples {
        let id = ex.mvs.id();
        writeln!(w, "seq({id}).").unwrap();
        writeln!(w, "seqLen({id},{}).", ex.mvs.len()).unwrap();
        if ex.label.is_positive() {
            writeln!(w, "positive({id}).").unwrap();
        } else {
            writeln!(w, "negative({id}).").unwrap();
        }
        for t in 1..=ex.mvs.len() {
            let coord = ex.mvs.coordinate(t)?;
            for (a, sym) in coord.iter().enumerate() {
                writeln!(
                    w,
                    "obs({id},av({},{}),{t}).",
                    attrs.names()[a],
                    alphabet.name(*sym)
                )
                .unwrap();
            }
        }
    }
    writeln!(w).unwrap();

    writeln!(w, "#show transition/3.").unwrap();
    writeln!(w, "#show accepting/1.").unwrap();

    Ok(out)
}
