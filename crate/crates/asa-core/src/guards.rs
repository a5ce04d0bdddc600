//! Guard predicates over sequence coordinates, and grounding them into a
//! finite universe.
//!
//! A guard constrains one time step: it looks at the coordinate (the
//! attribute-to-symbol map at time `t`) and holds or not. Five kinds exist;
//! four compare one attribute against a fixed symbol, `lt` compares two
//! attributes against each other under the alphabet order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AlphabetSpec, Attr, AttributeSet, Dataset, Symbol};

/// The guard kinds, in canonical generation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardKind {
    Eq,
    Neg,
    Lt,
    AtLeast,
    AtMost,
}

impl GuardKind {
    pub const ALL: [GuardKind; 5] = [
        GuardKind::Eq,
        GuardKind::Neg,
        GuardKind::Lt,
        GuardKind::AtLeast,
        GuardKind::AtMost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GuardKind::Eq => "eq",
            GuardKind::Neg => "neg",
            GuardKind::Lt => "lt",
            GuardKind::AtLeast => "at_least",
            GuardKind::AtMost => "at_most",
        }
    }

    pub fn from_name(s: &str) -> Option<GuardKind> {
        match s {
            "eq" => Some(GuardKind::Eq),
            "neg" => Some(GuardKind::Neg),
            "lt" => Some(GuardKind::Lt),
            "at_least" => Some(GuardKind::AtLeast),
            "at_most" => Some(GuardKind::AtMost),
            _ => None,
        }
    }

    /// Whether the kind takes an (attribute, value) pair rather than two
    /// attributes.
    pub fn takes_value(self) -> bool {
        !matches!(self, GuardKind::Lt)
    }
}

/// A fully instantiated guard.
///
/// Derived ordering is (kind, arguments), matching universe generation
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroundGuard {
    /// Attribute equals the symbol.
    Eq(Attr, Symbol),
    /// Attribute differs from the symbol.
    Neg(Attr, Symbol),
    /// First attribute's symbol is strictly below the second's in alphabet
    /// order. The two attributes are distinct.
    Lt(Attr, Attr),
    /// Attribute's symbol is at or above the given one.
    AtLeast(Attr, Symbol),
    /// Attribute's symbol is at or below the given one.
    AtMost(Attr, Symbol),
}

impl GroundGuard {
    pub fn kind(self) -> GuardKind {
        match self {
            GroundGuard::Eq(..) => GuardKind::Eq,
            GroundGuard::Neg(..) => GuardKind::Neg,
            GroundGuard::Lt(..) => GuardKind::Lt,
            GroundGuard::AtLeast(..) => GuardKind::AtLeast,
            GroundGuard::AtMost(..) => GuardKind::AtMost,
        }
    }

    /// Evaluate against one coordinate slice (indexed by attribute).
    #[inline]
    pub fn satisfies(self, coord: &[Symbol]) -> bool {
        match self {
            GroundGuard::Eq(a, v) => coord[a.0 as usize] == v,
            GroundGuard::Neg(a, v) => coord[a.0 as usize] != v,
            GroundGuard::Lt(a1, a2) => coord[a1.0 as usize] < coord[a2.0 as usize],
            GroundGuard::AtLeast(a, v) => coord[a.0 as usize] >= v,
            GroundGuard::AtMost(a, v) => coord[a.0 as usize] <= v,
        }
    }

    /// Verify the indices refer into the given attribute set and alphabet.
    pub fn validate(self, attrs: &AttributeSet, alphabet: &AlphabetSpec) -> Result<()> {
        let check_attr = |a: Attr| {
            if (a.0 as usize) < attrs.len() {
                Ok(())
            } else {
                Err(Error::Validation(format!(
                    "guard references attribute index {} outside the attribute set",
                    a.0
                )))
            }
        };
        let check_sym = |v: Symbol| {
            if (v.0 as usize) < alphabet.len() {
                Ok(())
            } else {
                Err(Error::Validation(format!(
                    "guard references symbol index {} outside the alphabet",
                    v.0
                )))
            }
        };
        match self {
            GroundGuard::Eq(a, v)
            | GroundGuard::Neg(a, v)
            | GroundGuard::AtLeast(a, v)
            | GroundGuard::AtMost(a, v) => {
                check_attr(a)?;
                check_sym(v)
            }
            GroundGuard::Lt(a1, a2) => {
                check_attr(a1)?;
                check_attr(a2)?;
                if a1 == a2 {
                    Err(Error::Validation(
                        "lt guard requires two distinct attributes".into(),
                    ))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Render in fact syntax: lowercase, no spaces, e.g.
    /// `lt(alive,necrotic)` or `at_least(alive,e)`.
    pub fn render(self, attrs: &AttributeSet, alphabet: &AlphabetSpec) -> String {
        match self {
            GroundGuard::Lt(a1, a2) => {
                format!("lt({},{})", attrs.name(a1), attrs.name(a2))
            }
            GroundGuard::Eq(a, v)
            | GroundGuard::Neg(a, v)
            | GroundGuard::AtLeast(a, v)
            | GroundGuard::AtMost(a, v) => format!(
                "{}({},{})",
                self.kind().name(),
                attrs.name(a),
                alphabet.name(v)
            ),
        }
    }
}

/// Which symbols (attribute, value) guards range over when grounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ValueDomain {
    /// Only symbols observed in the dataset. The default.
    #[default]
    Observed,
    /// Every symbol of the alphabet.
    FullAlphabet,
}

/// The finite pool of candidate guards a learner may place on transitions.
///
/// Generation order is deterministic: kinds in [`GuardKind::ALL`] order,
/// then attributes in set order, then symbols in alphabet order (for `lt`,
/// the second attribute cycles fastest).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardUniverse {
    kinds: Vec<GuardKind>,
    guards: Vec<GroundGuard>,
}

impl GuardUniverse {
    pub fn generate(
        attrs: &AttributeSet,
        alphabet: &AlphabetSpec,
        kinds: &[GuardKind],
        values: &[Symbol],
    ) -> Result<Self> {
        if kinds.is_empty() {
            return Err(Error::Config("no guard kinds enabled".into()));
        }
        let mut kindv: Vec<GuardKind> = kinds.to_vec();
        kindv.sort();
        kindv.dedup();
        let mut vals: Vec<Symbol> = values.to_vec();
        vals.sort();
        vals.dedup();
        for &v in &vals {
            if v.0 as usize >= alphabet.len() {
                return Err(Error::Config(format!(
                    "value domain symbol index {} outside the alphabet",
                    v.0
                )));
            }
        }
        let needs_values = kindv.iter().any(|k| k.takes_value());
        if needs_values && vals.is_empty() {
            return Err(Error::Config(
                "empty value domain for (attribute,value) guard kinds".into(),
            ));
        }
        let mut guards = Vec::new();
        for &kind in &kindv {
            match kind {
                GuardKind::Lt => {
                    for a1 in attrs.attrs() {
                        for a2 in attrs.attrs() {
                            if a1 != a2 {
                                guards.push(GroundGuard::Lt(a1, a2));
                            }
                        }
                    }
                }
                _ => {
                    for a in attrs.attrs() {
                        for &v in &vals {
                            guards.push(match kind {
                                GuardKind::Eq => GroundGuard::Eq(a, v),
                                GuardKind::Neg => GroundGuard::Neg(a, v),
                                GuardKind::AtLeast => GroundGuard::AtLeast(a, v),
                                GuardKind::AtMost => GroundGuard::AtMost(a, v),
                                GuardKind::Lt => unreachable!(),
                            });
                        }
                    }
                }
            }
        }
        Ok(Self {
            kinds: kindv,
            guards,
        })
    }

    pub fn kinds(&self) -> &[GuardKind] {
        &self.kinds
    }

    pub fn guards(&self) -> &[GroundGuard] {
        &self.guards
    }

    pub fn len(&self) -> usize {
        self.guards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.guards.is_empty()
    }
}

/// Ground the guard universe for a dataset.
///
/// With [`ValueDomain::Observed`], (attribute, value) kinds range over the
/// symbols that occur anywhere in the data; with
/// [`ValueDomain::FullAlphabet`], over every alphabet symbol.
pub fn ground_universe(
    dataset: &Dataset,
    kinds: &[GuardKind],
    domain: ValueDomain,
) -> Result<GuardUniverse> {
    let values = match domain {
        ValueDomain::Observed => dataset.observed_symbols(),
        ValueDomain::FullAlphabet => dataset.alphabet.symbols().collect(),
    };
    GuardUniverse::generate(&dataset.attributes, &dataset.alphabet, kinds, &values)
}
