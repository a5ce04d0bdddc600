//! Core data model: alphabets, attributes, multivariate symbolic sequences,
//! and labeled datasets.
//!
//! Symbols and attributes are interned to small integer codes at the edges
//! (loading, parsing) so that everything on the hot path — guard evaluation,
//! automaton runs — works on plain integers. Names are kept in
//! [`AlphabetSpec`] and [`AttributeSet`] for display and serialization.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A symbol, stored as its position in the owning [`AlphabetSpec`].
///
/// Ordering follows alphabet position, which is what the order-sensitive
/// guards (`lt`, `at_least`, `at_most`) compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u16);

/// An attribute, stored as its position in the owning [`AttributeSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Attr(pub u16);

/// Ordered, distinct symbol names. Position defines the symbol order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphabetSpec {
    names: Vec<String>,
}

impl AlphabetSpec {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Config("alphabet must not be empty".into()));
        }
        if names.len() > u16::MAX as usize {
            return Err(Error::Config("alphabet too large".into()));
        }
        let mut seen = BTreeSet::new();
        for n in &names {
            if n.is_empty() {
                return Err(Error::Config("empty symbol name".into()));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::Config(format!("duplicate symbol name: {n}")));
            }
        }
        Ok(Self { names })
    }

    /// The first `k` lowercase letters, `a..`; the conventional discretizer
    /// output alphabet.
    pub fn letters(k: usize) -> Result<Self> {
        if k == 0 || k > 26 {
            return Err(Error::Config(format!(
                "letter alphabet size {k} out of range 1..=26"
            )));
        }
        Self::new((0..k).map(|i| ((b'a' + i as u8) as char).to_string()))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn symbol(&self, name: &str) -> Option<Symbol> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| Symbol(i as u16))
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.names[s.0 as usize]
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        (0..self.names.len() as u16).map(Symbol)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Ordered, distinct attribute names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSet {
    names: Vec<String>,
}

impl AttributeSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Config("attribute set must not be empty".into()));
        }
        if names.len() > u16::MAX as usize {
            return Err(Error::Config("too many attributes".into()));
        }
        let mut seen = BTreeSet::new();
        for n in &names {
            if n.is_empty() {
                return Err(Error::Config("empty attribute name".into()));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::Config(format!("duplicate attribute name: {n}")));
            }
        }
        Ok(Self { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn attr(&self, name: &str) -> Option<Attr> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| Attr(i as u16))
    }

    pub fn name(&self, a: Attr) -> &str {
        &self.names[a.0 as usize]
    }

    pub fn attrs(&self) -> impl Iterator<Item = Attr> {
        (0..self.names.len() as u16).map(Attr)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "pos", alias = "positive")]
    Positive,
    #[serde(rename = "neg", alias = "negative")]
    Negative,
}

impl Label {
    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "pos" | "positive" => Some(Label::Positive),
            "neg" | "negative" => Some(Label::Negative),
            _ => None,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Positive => "pos",
            Label::Negative => "neg",
        })
    }
}

/// A multivariate symbolic sequence: one symbol per attribute per time step,
/// over times `1..=len`.
///
/// Storage is time-major, so the coordinate at time `t` (the full
/// attribute-to-symbol map) is one contiguous slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mvs {
    id: String,
    len: usize,
    n_attrs: usize,
    values: Vec<Symbol>,
}

impl Mvs {
    /// Build from per-attribute rows; all rows must have equal positive
    /// length.
    pub fn from_rows(id: impl Into<String>, rows: &[Vec<Symbol>]) -> Result<Self> {
        let id = id.into();
        if rows.is_empty() {
            return Err(Error::Validation(format!("sequence {id}: no attributes")));
        }
        let len = rows[0].len();
        if len == 0 {
            return Err(Error::Validation(format!("sequence {id}: empty sequence")));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != len {
                return Err(Error::Validation(format!(
                    "sequence {id}: ragged input, attribute {i} has length {} but attribute 0 has {len}",
                    r.len()
                )));
            }
        }
        let n_attrs = rows.len();
        let mut values = Vec::with_capacity(len * n_attrs);
        for t in 0..len {
            for row in rows {
                values.push(row[t]);
            }
        }
        Ok(Self {
            id,
            len,
            n_attrs,
            values,
        })
    }

    /// Build from one string per attribute where each character is one
    /// single-letter symbol. Convenient for tests and docs.
    pub fn from_letter_rows(
        id: impl Into<String>,
        rows: &[&str],
        alphabet: &AlphabetSpec,
    ) -> Result<Self> {
        let id = id.into();
        let mut sym_rows = Vec::with_capacity(rows.len());
        for row in rows {
            let mut syms = Vec::with_capacity(row.len());
            for ch in row.chars() {
                let name = ch.to_string();
                let sym = alphabet.symbol(&name).ok_or_else(|| {
                    Error::Validation(format!("sequence {id}: unknown symbol '{name}'"))
                })?;
                syms.push(sym);
            }
            sym_rows.push(syms);
        }
        Self::from_rows(id, &sym_rows)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false // length is always positive by construction
    }

    pub fn n_attrs(&self) -> usize {
        self.n_attrs
    }

    /// The full attribute-to-symbol coordinate at time `t` (1-based).
    pub fn coordinate(&self, t: usize) -> Result<&[Symbol]> {
        if t == 0 || t > self.len {
            return Err(Error::TimeOutOfRange { t, len: self.len });
        }
        let start = (t - 1) * self.n_attrs;
        Ok(&self.values[start..start + self.n_attrs])
    }

    pub fn value(&self, a: Attr, t: usize) -> Result<Symbol> {
        Ok(self.coordinate(t)?[a.0 as usize])
    }
}

/// Incremental [`Mvs`] assembly from sparse `(attribute, t, symbol)` cells,
/// as produced by row-oriented loaders. `build` verifies the grid is
/// complete and times are contiguous from 1.
#[derive(Debug)]
pub struct MvsBuilder {
    id: String,
    cells: BTreeMap<(u16, usize), Symbol>,
}

impl MvsBuilder {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            cells: BTreeMap::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn insert(&mut self, attr: Attr, t: usize, sym: Symbol) -> Result<()> {
        if t == 0 {
            return Err(Error::Validation(format!(
                "sequence {}: time indices are 1-based, got t=0",
                self.id
            )));
        }
        if self.cells.insert((attr.0, t), sym).is_some() {
            return Err(Error::Validation(format!(
                "sequence {}: duplicate cell for attribute {} at t={t}",
                self.id, attr.0
            )));
        }
        Ok(())
    }

    pub fn build(self, attributes: &AttributeSet) -> Result<Mvs> {
        let n_attrs = attributes.len();
        let len = self
            .cells
            .keys()
            .map(|&(_, t)| t)
            .max()
            .ok_or_else(|| Error::Validation(format!("sequence {}: no cells", self.id)))?;
        let mut rows = vec![Vec::with_capacity(len); n_attrs];
        for a in 0..n_attrs as u16 {
            for t in 1..=len {
                match self.cells.get(&(a, t)) {
                    Some(&s) => rows[a as usize].push(s),
                    None => {
                        return Err(Error::Validation(format!(
                            "sequence {}: incomplete coordinate, missing value for attribute {} at t={t}",
                            self.id,
                            attributes.name(Attr(a)),
                        )))
                    }
                }
            }
        }
        Mvs::from_rows(self.id, &rows)
    }
}

/// One training or test example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub mvs: Mvs,
    pub label: Label,
}

/// A labeled collection of sequences sharing one alphabet and attribute set.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub alphabet: AlphabetSpec,
    pub attributes: AttributeSet,
    pub examples: Vec<LabeledExample>,
}

/// One broken dataset invariant, tied to the offending example when there is
/// one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub example_id: Option<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.example_id {
            Some(id) => write!(f, "example {id}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl Dataset {
    pub fn new(
        alphabet: AlphabetSpec,
        attributes: AttributeSet,
        examples: Vec<LabeledExample>,
    ) -> Self {
        Self {
            alphabet,
            attributes,
            examples,
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn positives(&self) -> impl Iterator<Item = &LabeledExample> {
        self.examples.iter().filter(|e| e.label.is_positive())
    }

    pub fn negatives(&self) -> impl Iterator<Item = &LabeledExample> {
        self.examples.iter().filter(|e| !e.label.is_positive())
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.positives().count();
        (pos, self.examples.len() - pos)
    }

    /// All symbols that actually occur, in alphabet order.
    pub fn observed_symbols(&self) -> Vec<Symbol> {
        let mut seen = vec![false; self.alphabet.len()];
        for ex in &self.examples {
            for &s in &ex.mvs.values {
                seen[s.0 as usize] = true;
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| Symbol(i as u16))
            .collect()
    }

    /// A new dataset with the examples at `indices`, sharing this dataset's
    /// alphabet and attributes.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            alphabet: self.alphabet.clone(),
            attributes: self.attributes.clone(),
            examples: indices.iter().map(|&i| self.examples[i].clone()).collect(),
        }
    }

    /// Check dataset invariants, returning all violations instead of failing
    /// on the first.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut ids = BTreeSet::new();
        for ex in &self.examples {
            let id = ex.mvs.id();
            if !ids.insert(id.to_string()) {
                out.push(Violation {
                    example_id: Some(id.to_string()),
                    message: "duplicate sequence id".into(),
                });
            }
            if ex.mvs.n_attrs() != self.attributes.len() {
                out.push(Violation {
                    example_id: Some(id.to_string()),
                    message: format!(
                        "attribute count {} does not match dataset attribute set of {}",
                        ex.mvs.n_attrs(),
                        self.attributes.len()
                    ),
                });
            }
            if let Some(&bad) = ex
                .mvs
                .values
                .iter()
                .find(|s| s.0 as usize >= self.alphabet.len())
            {
                out.push(Violation {
                    example_id: Some(id.to_string()),
                    message: format!("symbol code {} outside the alphabet", bad.0),
                });
            }
        }
        out
    }
}
