//! Shared fixtures: the two-example cell-morphology dataset and the three
//! reference automata exercised throughout the integration suites.

use asa_core::*;

pub fn cells_dataset() -> (AttributeSet, AlphabetSpec, Dataset) {
    let attrs = AttributeSet::new(["alive", "necrotic", "apoptotic"]).unwrap();
    let ab = AlphabetSpec::letters(10).unwrap();
    let mk = |id: &str, rows: [&str; 3], label| LabeledExample {
        mvs: Mvs::from_letter_rows(id, &rows, &ab).unwrap(),
        label,
    };
    let ds = Dataset::new(
        ab.clone(),
        attrs.clone(),
        vec![
            mk(
                "id1",
                ["eeeedcbbbb", "aabbbcccde", "bbbcdghhhh"],
                Label::Positive,
            ),
            mk(
                "id2",
                ["eecdbbbbbb", "aabbbbcccc", "bbbcfghhhh"],
                Label::Negative,
            ),
        ],
    );
    (attrs, ab, ds)
}

/// Two-state detector: stay on q0 while `alive` differs from `b`, move to
/// q1 when `alive < necrotic`, then hold q1 while `necrotic >= c`.
pub fn reference_asa(attrs: &AttributeSet, ab: &AlphabetSpec) -> Asa {
    parse_asa(
        "transition(q0,neg(alive,b),q0).\n\
         transition(q0,lt(alive,necrotic),q1).\n\
         transition(q1,at_least(necrotic,c),q1).\n\
         accepting(q1).",
        attrs,
        ab,
    )
    .unwrap()
}

/// Compact two-state variant that accepts the positive example earlier.
pub fn compact_two_state(attrs: &AttributeSet, ab: &AlphabetSpec) -> Asa {
    parse_asa(
        "transition(q0,at_least(alive,e),q0).\n\
         transition(q0,at_least(apoptotic,d),q1).\n\
         accepting(q1).",
        attrs,
        ab,
    )
    .unwrap()
}

/// Single-state acceptor: survive (and accept) while `apoptotic` avoids `f`.
pub fn single_state(attrs: &AttributeSet, ab: &AlphabetSpec) -> Asa {
    parse_asa(
        "transition(q0,neg(apoptotic,f),q0).\naccepting(q0).",
        attrs,
        ab,
    )
    .unwrap()
}

pub fn strict_end() -> Semantics {
    Semantics {
        policy: Policy::StrictContiguity,
        acceptance: AcceptanceMode::EndOfSequence,
    }
}

pub fn strict_earliest() -> Semantics {
    Semantics {
        policy: Policy::StrictContiguity,
        acceptance: AcceptanceMode::EarliestAbsorbing,
    }
}
