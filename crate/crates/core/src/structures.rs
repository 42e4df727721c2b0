//! Partial relations, partial functions and partial structures, together with
//! the expansion order and the normal (total) completions of a structure.
//!
//! A partial relation is stored as a total verdict table over `A^n`, so the
//! positive, negative and unknown parts are disjoint and cover `A^n` by
//! construction. The set view is derived on demand.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::syntax::{is_symbol_name, Signature};

/// Which part of a partial relation a tuple falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Pos,
    Neg,
    Unk,
}

impl Verdict {
    pub const ALL: [Verdict; 3] = [Verdict::Pos, Verdict::Neg, Verdict::Unk];

    /// Marker used by the text format: `+`, `-` or `0`.
    pub fn marker(self) -> &'static str {
        match self {
            Verdict::Pos => "+",
            Verdict::Neg => "-",
            Verdict::Unk => "0",
        }
    }
}

/// A tuple of element positions in a universe.
pub type Tuple = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("universe must be non-empty")]
    EmptyUniverse,
    #[error("element `{0}` is listed twice")]
    DuplicateElement(String),
    #[error("`{0}` is not a valid element name")]
    BadElementName(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("element position {0} is outside the universe")]
    ElementOutOfRange(usize),
    #[error("tuple {tuple} has length {found}, expected {expected}")]
    TupleLength {
        tuple: String,
        expected: usize,
        found: usize,
    },
    #[error("tuple {tuple} is in both the {first} and the {second} part")]
    Overlap {
        tuple: String,
        first: &'static str,
        second: &'static str,
    },
    #[error("tuple {0} is in none of the three parts")]
    Coverage(String),
    #[error("relation table of size {size}^{arity} is too large")]
    TooLarge { size: usize, arity: usize },
    #[error("`{0}` is not a valid symbol name")]
    BadSymbol(String),
    #[error("symbol `{0}` is interpreted twice")]
    DuplicateSymbol(String),
    #[error("relation `{symbol}` is {found}-ary but the signature says {expected}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("relation `{symbol}` is built over {found} elements but the universe has {expected}")]
    WrongUniverse {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("symbol `{0}` of the signature has no interpretation")]
    MissingInterpretation(String),
    #[error("symbol `{0}` is interpreted but not in the signature")]
    UnexpectedSymbol(String),
    #[error("signatures differ: {0} vs {1}")]
    SignatureMismatch(String, String),
    #[error("function `{symbol}` violates the {condition} condition at {witness}")]
    InvalidFunction {
        symbol: String,
        condition: FunctionCondition,
        witness: String,
    },
}

/// The non-empty, duplicate-free list of element names of a structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Universe {
    names: Vec<String>,
}

/// Element names may not contain whitespace or any of `( ) , = { } #`.
pub fn is_element_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| !c.is_whitespace() && !"(),={}#".contains(c))
}

impl Universe {
    pub fn new<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
    ) -> Result<Self, StructureError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(StructureError::EmptyUniverse);
        }
        let mut seen = BTreeSet::new();
        for n in &names {
            if !is_element_name(n) {
                return Err(StructureError::BadElementName(n.clone()));
            }
            if !seen.insert(n.as_str()) {
                return Err(StructureError::DuplicateElement(n.clone()));
            }
        }
        Ok(Universe { names })
    }

    /// `e1 .. e<size>`.
    pub fn numbered(size: usize) -> Result<Self, StructureError> {
        Self::new((1..=size).map(|i| format!("e{i}")))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn tuple_by_names(&self, names: &[&str]) -> Result<Tuple, StructureError> {
        names
            .iter()
            .map(|n| {
                self.position(n)
                    .ok_or_else(|| StructureError::UnknownElement(n.to_string()))
            })
            .collect()
    }

    /// Renders a tuple as `(a,b)`.
    pub fn show_tuple(&self, t: &[usize]) -> String {
        let parts: Vec<&str> = t
            .iter()
            .map(|&i| self.names.get(i).map_or("?", String::as_str))
            .collect();
        format!("({})", parts.join(","))
    }

    fn same_elements(&self, other: &Universe) -> bool {
        self.len() == other.len() && self.names.iter().all(|n| other.position(n).is_some())
    }
}

/// An n-ary partial relation over a universe of `size` elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialRelation {
    arity: usize,
    size: usize,
    verdicts: Vec<Verdict>,
}

fn table_len(size: usize, arity: usize) -> Result<usize, StructureError> {
    u32::try_from(arity)
        .ok()
        .and_then(|a| size.checked_pow(a))
        .filter(|&n| n <= 1 << 26)
        .ok_or(StructureError::TooLarge { size, arity })
}

impl PartialRelation {
    pub fn filled(size: usize, arity: usize, v: Verdict) -> Result<Self, StructureError> {
        Ok(PartialRelation {
            arity,
            size,
            verdicts: vec![v; table_len(size, arity)?],
        })
    }

    pub fn from_fn(
        size: usize,
        arity: usize,
        mut f: impl FnMut(&[usize]) -> Verdict,
    ) -> Result<Self, StructureError> {
        let len = table_len(size, arity)?;
        let verdicts = TupleIter::new(size, arity)
            .map(|t| f(&t))
            .collect::<Vec<_>>();
        debug_assert_eq!(verdicts.len(), len);
        Ok(PartialRelation {
            arity,
            size,
            verdicts,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn universe_size(&self) -> usize {
        self.size
    }

    pub fn verdicts(&self) -> &[Verdict] {
        &self.verdicts
    }

    /// Row-major position of a tuple; the first coordinate is most significant,
    /// so positions follow lexicographic tuple order.
    pub fn index_of(&self, t: &[usize]) -> usize {
        debug_assert_eq!(t.len(), self.arity);
        t.iter().fold(0, |acc, &e| {
            debug_assert!(e < self.size);
            acc * self.size + e
        })
    }

    pub fn tuple_at(&self, mut idx: usize) -> Tuple {
        let mut t = vec![0; self.arity];
        for slot in t.iter_mut().rev() {
            *slot = idx % self.size;
            idx /= self.size;
        }
        t
    }

    pub fn get(&self, t: &[usize]) -> Verdict {
        self.verdicts[self.index_of(t)]
    }

    pub fn get_index(&self, idx: usize) -> Verdict {
        self.verdicts[idx]
    }

    pub(crate) fn set_index(&mut self, idx: usize, v: Verdict) {
        self.verdicts[idx] = v;
    }

    /// A copy with one tuple's verdict replaced.
    pub fn with(&self, t: &[usize], v: Verdict) -> Self {
        let mut r = self.clone();
        let i = r.index_of(t);
        r.verdicts[i] = v;
        r
    }

    pub fn tuples(&self) -> TupleIter {
        TupleIter::new(self.size, self.arity)
    }

    /// The tuples carrying verdict `v`, in lexicographic order.
    pub fn part(&self, v: Verdict) -> BTreeSet<Tuple> {
        self.tuples()
            .zip(&self.verdicts)
            .filter(|(_, &w)| w == v)
            .map(|(t, _)| t)
            .collect()
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.verdicts.iter().filter(|&&w| w == v).count()
    }

    pub fn is_total(&self) -> bool {
        !self.verdicts.contains(&Verdict::Unk)
    }

    pub fn map(&self, f: impl Fn(Verdict) -> Verdict) -> Self {
        PartialRelation {
            arity: self.arity,
            size: self.size,
            verdicts: self.verdicts.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Lexicographic enumeration of `{0..size}^arity`.
#[derive(Debug, Clone)]
pub struct TupleIter {
    size: usize,
    next: Option<Tuple>,
}

impl TupleIter {
    pub fn new(size: usize, arity: usize) -> Self {
        let next = if size == 0 && arity > 0 {
            None
        } else {
            Some(vec![0; arity])
        };
        TupleIter { size, next }
    }
}

impl Iterator for TupleIter {
    type Item = Tuple;

    fn next(&mut self) -> Option<Tuple> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carried = true;
        for slot in succ.iter_mut().rev() {
            *slot += 1;
            if *slot < self.size {
                carried = false;
                break;
            }
            *slot = 0;
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(current)
    }
}

/// Builds a relation from its three parts, checking disjointness and that
/// the parts cover `universe^arity`.
pub fn relation_from_triple(
    universe: &Universe,
    arity: usize,
    pos: &BTreeSet<Tuple>,
    neg: &BTreeSet<Tuple>,
    unk: &BTreeSet<Tuple>,
) -> Result<PartialRelation, StructureError> {
    let size = universe.len();
    let len = table_len(size, arity)?;
    let mut slots: Vec<Option<Verdict>> = vec![None; len];
    let name = |v: Verdict| match v {
        Verdict::Pos => "positive",
        Verdict::Neg => "negative",
        Verdict::Unk => "unknown",
    };
    for (v, part) in [
        (Verdict::Pos, pos),
        (Verdict::Neg, neg),
        (Verdict::Unk, unk),
    ] {
        for t in part {
            if t.len() != arity {
                return Err(StructureError::TupleLength {
                    tuple: universe.show_tuple(t),
                    expected: arity,
                    found: t.len(),
                });
            }
            if let Some(&e) = t.iter().find(|&&e| e >= size) {
                return Err(StructureError::ElementOutOfRange(e));
            }
            let idx = t.iter().fold(0, |acc, &e| acc * size + e);
            if let Some(prev) = slots[idx] {
                return Err(StructureError::Overlap {
                    tuple: universe.show_tuple(t),
                    first: name(prev),
                    second: name(v),
                });
            }
            slots[idx] = Some(v);
        }
    }
    let mut verdicts = Vec::with_capacity(len);
    for (t, slot) in TupleIter::new(size, arity).zip(slots) {
        match slot {
            Some(v) => verdicts.push(v),
            None => return Err(StructureError::Coverage(universe.show_tuple(&t))),
        }
    }
    Ok(PartialRelation {
        arity,
        size,
        verdicts,
    })
}

/// The three conditions an (n+1)-ary partial relation must meet to be an
/// n-ary partial function, for every `a1..an, b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FunctionCondition {
    /// `(a, b)` positive forces `(a, b')` negative for every `b' != b`.
    PositiveExcludesOthers,
    /// `(a, b)` negative requires some `(a, b')` positive or unknown.
    NegativeLeavesCandidate,
    /// `(a, b)` unknown forbids any `(a, b')` positive.
    UnknownExcludesPositive,
}

impl fmt::Display for FunctionCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionCondition::PositiveExcludesOthers => "positive-value-excludes-others",
            FunctionCondition::NegativeLeavesCandidate => "negative-leaves-a-candidate",
            FunctionCondition::UnknownExcludesPositive => "unknown-excludes-positive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionViolation {
    pub condition: FunctionCondition,
    /// The `(a1..an, b)` tuple at which the condition fails.
    pub witness: Tuple,
}

/// An n-ary partial function, held as its (n+1)-ary graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialFunctionTable {
    graph: PartialRelation,
}

impl PartialFunctionTable {
    /// Wraps a graph of arity n+1. Use [`validate_partial_function`] to check
    /// the function conditions.
    pub fn new(graph: PartialRelation) -> Result<Self, StructureError> {
        if graph.arity() == 0 {
            return Err(StructureError::Arity {
                symbol: "<function graph>".into(),
                expected: 1,
                found: 0,
            });
        }
        Ok(PartialFunctionTable { graph })
    }

    /// The function's arity n (one less than the graph's).
    pub fn arity(&self) -> usize {
        self.graph.arity() - 1
    }

    pub fn graph(&self) -> &PartialRelation {
        &self.graph
    }

    pub fn is_total(&self) -> bool {
        self.graph.is_total()
    }
}

/// Checks the three partial-function conditions, reporting the first
/// violation in lexicographic tuple order.
pub fn validate_partial_function(f: &PartialFunctionTable) -> Result<(), FunctionViolation> {
    let g = &f.graph;
    let size = g.universe_size();
    // Each argument vector owns a contiguous row of `size` output slots.
    for t in g.tuples() {
        let row_start = g.index_of(&t) - t[t.len() - 1];
        let row = &g.verdicts[row_start..row_start + size];
        let b = t[t.len() - 1];
        let violated = match row[b] {
            Verdict::Pos => row
                .iter()
                .enumerate()
                .any(|(b2, &v)| b2 != b && v != Verdict::Neg)
                .then_some(FunctionCondition::PositiveExcludesOthers),
            Verdict::Neg => (!row.iter().any(|&v| v != Verdict::Neg))
                .then_some(FunctionCondition::NegativeLeavesCandidate),
            Verdict::Unk => row
                .contains(&Verdict::Pos)
                .then_some(FunctionCondition::UnknownExcludesPositive),
        };
        if let Some(condition) = violated {
            return Err(FunctionViolation {
                condition,
                witness: t,
            });
        }
    }
    Ok(())
}

/// A finite partial structure. Relations are the interpretation formulas
/// see; functions and constants are only carried for relationalization and
/// equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialStructure {
    universe: Universe,
    relations: BTreeMap<String, PartialRelation>,
    functions: BTreeMap<String, PartialFunctionTable>,
    constants: BTreeMap<String, Option<usize>>,
}

impl PartialStructure {
    pub fn new(universe: Universe) -> Self {
        PartialStructure {
            universe,
            relations: BTreeMap::new(),
            functions: BTreeMap::new(),
            constants: BTreeMap::new(),
        }
    }

    fn check_new_symbol(&self, name: &str) -> Result<(), StructureError> {
        if !is_symbol_name(name) {
            return Err(StructureError::BadSymbol(name.to_string()));
        }
        if self.relations.contains_key(name)
            || self.functions.contains_key(name)
            || self.constants.contains_key(name)
        {
            return Err(StructureError::DuplicateSymbol(name.to_string()));
        }
        Ok(())
    }

    fn check_size(&self, name: &str, r: &PartialRelation) -> Result<(), StructureError> {
        if r.universe_size() != self.universe.len() {
            return Err(StructureError::WrongUniverse {
                symbol: name.to_string(),
                expected: self.universe.len(),
                found: r.universe_size(),
            });
        }
        Ok(())
    }

    pub fn add_relation(
        &mut self,
        name: impl Into<String>,
        rel: PartialRelation,
    ) -> Result<(), StructureError> {
        let name = name.into();
        self.check_new_symbol(&name)?;
        if rel.arity() == 0 {
            return Err(StructureError::Arity {
                symbol: name,
                expected: 1,
                found: 0,
            });
        }
        self.check_size(&name, &rel)?;
        self.relations.insert(name, rel);
        Ok(())
    }

    pub fn with_relation(
        mut self,
        name: impl Into<String>,
        rel: PartialRelation,
    ) -> Result<Self, StructureError> {
        self.add_relation(name, rel)?;
        Ok(self)
    }

    pub fn add_function(
        &mut self,
        name: impl Into<String>,
        table: PartialFunctionTable,
    ) -> Result<(), StructureError> {
        let name = name.into();
        self.check_new_symbol(&name)?;
        self.check_size(&name, table.graph())?;
        self.functions.insert(name, table);
        Ok(())
    }

    /// Interprets a constant symbol; `None` leaves it undefined.
    pub fn add_constant(
        &mut self,
        name: impl Into<String>,
        value: Option<usize>,
    ) -> Result<(), StructureError> {
        let name = name.into();
        self.check_new_symbol(&name)?;
        if let Some(e) = value.filter(|&e| e >= self.universe.len()) {
            return Err(StructureError::ElementOutOfRange(e));
        }
        self.constants.insert(name, value);
        Ok(())
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn size(&self) -> usize {
        self.universe.len()
    }

    pub fn relation(&self, name: &str) -> Option<&PartialRelation> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &PartialRelation)> {
        self.relations.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub(crate) fn relation_mut(&mut self, name: &str) -> Option<&mut PartialRelation> {
        self.relations.get_mut(name)
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, &PartialFunctionTable)> {
        self.functions.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn constants(&self) -> impl Iterator<Item = (&str, Option<usize>)> {
        self.constants.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_relational(&self) -> bool {
        self.functions.is_empty() && self.constants.is_empty()
    }

    /// The signature this structure interprets.
    pub fn signature(&self) -> Signature {
        let mut sig = Signature::new();
        for (n, r) in &self.relations {
            sig.add_relation(n.clone(), r.arity())
                .expect("relation symbols are checked on insertion");
        }
        for (n, f) in &self.functions {
            sig.add_function(n.clone(), f.arity())
                .expect("function symbols are checked on insertion");
        }
        for n in self.constants.keys() {
            sig.add_function(n.clone(), 0)
                .expect("constant symbols are checked on insertion");
        }
        sig
    }

    /// Checks that every symbol of `sig` is interpreted with the declared
    /// arity and nothing else is. A 0-ary function symbol may be interpreted
    /// either as a constant or as a 0-ary function table.
    pub fn validate(&self, sig: &Signature) -> Result<(), StructureError> {
        for (name, arity) in sig.relations() {
            match self.relations.get(name) {
                None => return Err(StructureError::MissingInterpretation(name.into())),
                Some(r) if r.arity() != arity => {
                    return Err(StructureError::Arity {
                        symbol: name.into(),
                        expected: arity,
                        found: r.arity(),
                    })
                }
                Some(_) => {}
            }
        }
        for (name, arity) in sig.functions() {
            match (self.functions.get(name), self.constants.contains_key(name)) {
                (Some(f), _) if f.arity() != arity => {
                    return Err(StructureError::Arity {
                        symbol: name.into(),
                        expected: arity,
                        found: f.arity(),
                    })
                }
                (Some(_), _) => {}
                (None, true) if arity == 0 => {}
                (None, true) => {
                    return Err(StructureError::Arity {
                        symbol: name.into(),
                        expected: arity,
                        found: 0,
                    })
                }
                (None, false) => return Err(StructureError::MissingInterpretation(name.into())),
            }
        }
        let extra = self
            .relations
            .keys()
            .find(|n| sig.relation_arity(n).is_none())
            .or_else(|| {
                self.functions
                    .keys()
                    .chain(self.constants.keys())
                    .find(|n| sig.function_arity(n).is_none())
            });
        if let Some(n) = extra {
            return Err(StructureError::UnexpectedSymbol(n.clone()));
        }
        for (name, f) in &self.functions {
            validate_partial_function(f).map_err(|v| StructureError::InvalidFunction {
                symbol: name.clone(),
                condition: v.condition,
                witness: self.universe.show_tuple(&v.witness),
            })?;
        }
        Ok(())
    }

    /// True when no relation has an unknown tuple.
    pub fn is_total(&self) -> bool {
        self.relations.values().all(PartialRelation::is_total)
    }

    /// Number of unknown tuples summed over all relations.
    pub fn unknown_count(&self) -> usize {
        self.relations.values().map(|r| r.count(Verdict::Unk)).sum()
    }

    fn map_relations(&self, f: impl Fn(Verdict) -> Verdict) -> Self {
        PartialStructure {
            universe: self.universe.clone(),
            relations: self
                .relations
                .iter()
                .map(|(k, r)| (k.clone(), r.map(&f)))
                .collect(),
            functions: self.functions.clone(),
            constants: self.constants.clone(),
        }
    }

    /// Unknown positions as (relation, table index), in canonical order.
    pub(crate) fn unknown_positions(&self) -> Vec<(&str, usize)> {
        self.relations
            .iter()
            .flat_map(|(name, r)| {
                r.verdicts()
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v == Verdict::Unk)
                    .map(move |(i, _)| (name.as_str(), i))
            })
            .collect()
    }
}

fn relational_mismatch(a: &PartialStructure, b: &PartialStructure) -> Option<StructureError> {
    let (sa, sb) = (
        a.signature().relational_part(),
        b.signature().relational_part(),
    );
    (sa != sb).then(|| StructureError::SignatureMismatch(sa.to_string(), sb.to_string()))
}

/// For each element position of `a`, the position of the same-named element
/// of `b`; `None` when the element sets differ.
fn align(a: &Universe, b: &Universe) -> Option<Vec<usize>> {
    if !a.same_elements(b) {
        return None;
    }
    a.names().iter().map(|n| b.position(n)).collect()
}

fn translate(t: &[usize], map: &[usize]) -> Tuple {
    t.iter().map(|&e| map[e]).collect()
}

/// Whether `b` expands `a`: same universe, and every relation's positive and
/// negative parts in `a` are contained in those of `b`.
pub fn expands(a: &PartialStructure, b: &PartialStructure) -> Result<bool, StructureError> {
    if let Some(e) = relational_mismatch(a, b) {
        return Err(e);
    }
    let Some(map) = align(&a.universe, &b.universe) else {
        return Ok(false);
    };
    for (name, ra) in &a.relations {
        let rb = &b.relations[name];
        for (t, &v) in ra.tuples().zip(ra.verdicts()) {
            if v != Verdict::Unk && rb.get(&translate(&t, &map)) != v {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Resolves every unknown tuple positively.
pub fn plus_completion(a: &PartialStructure) -> PartialStructure {
    a.map_relations(|v| if v == Verdict::Unk { Verdict::Pos } else { v })
}

/// Resolves every unknown tuple negatively.
pub fn minus_completion(a: &PartialStructure) -> PartialStructure {
    a.map_relations(|v| if v == Verdict::Unk { Verdict::Neg } else { v })
}

/// `b` is `a`-normal: it expands `a` and is total.
pub fn is_normal(a: &PartialStructure, b: &PartialStructure) -> Result<bool, StructureError> {
    Ok(expands(a, b)? && b.is_total())
}

/// Every `a`-normal structure, each exactly once.
///
/// Unknown tuples are taken in canonical order (relation name, then tuple);
/// the k-th structure sends the tuples whose bit is set in `k` to `Pos` and
/// the rest to `Neg`. The stream has `2^u` items for `u` unknown tuples.
///
/// # Panics
///
/// If `u >= 64`.
pub fn enumerate_normals(a: &PartialStructure) -> NormalCompletions {
    let slots: Vec<(String, usize)> = a
        .unknown_positions()
        .into_iter()
        .map(|(n, i)| (n.to_string(), i))
        .collect();
    assert!(slots.len() < 64, "too many unknown tuples to enumerate");
    NormalCompletions {
        base: a.clone(),
        end: 1u64 << slots.len(),
        slots,
        next: 0,
    }
}

#[derive(Debug, Clone)]
pub struct NormalCompletions {
    base: PartialStructure,
    slots: Vec<(String, usize)>,
    next: u64,
    end: u64,
}

impl Iterator for NormalCompletions {
    type Item = PartialStructure;

    fn next(&mut self) -> Option<PartialStructure> {
        if self.next >= self.end {
            return None;
        }
        let mask = self.next;
        self.next += 1;
        let mut s = self.base.clone();
        for (bit, (name, idx)) in self.slots.iter().enumerate() {
            let v = if mask >> bit & 1 == 1 {
                Verdict::Pos
            } else {
                Verdict::Neg
            };
            s.relation_mut(name)
                .expect("slot names come from the base structure")
                .set_index(*idx, v);
        }
        Some(s)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = usize::try_from(self.end - self.next).ok();
        (left.unwrap_or(usize::MAX), left)
    }
}

/// Structure equality: same element set (in any listing order), the same
/// constants defined with the same values, and identical interpretations.
pub fn structures_equal(
    a: &PartialStructure,
    b: &PartialStructure,
) -> Result<bool, StructureError> {
    let (sa, sb) = (a.signature(), b.signature());
    if sa != sb {
        return Err(StructureError::SignatureMismatch(
            sa.to_string(),
            sb.to_string(),
        ));
    }
    let Some(map) = align(&a.universe, &b.universe) else {
        return Ok(false);
    };
    let same_rel = |ra: &PartialRelation, rb: &PartialRelation| {
        ra.tuples()
            .zip(ra.verdicts())
            .all(|(t, &v)| rb.get(&translate(&t, &map)) == v)
    };
    for (name, ra) in &a.relations {
        if !same_rel(ra, &b.relations[name]) {
            return Ok(false);
        }
    }
    for (name, fa) in &a.functions {
        match b.functions.get(name) {
            Some(fb) if same_rel(fa.graph(), fb.graph()) => {}
            _ => return Ok(false),
        }
    }
    for (name, &ca) in &a.constants {
        match (ca, b.constants.get(name).copied().flatten()) {
            (None, None) => {}
            (Some(x), Some(y)) if map[x] == y => {}
            _ => return Ok(false),
        }
        if !b.constants.contains_key(name) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Converts functions and constants into relations of one higher arity.
///
/// An n-ary function symbol becomes an (n+1)-ary relation symbol of the same
/// name carrying the function's graph. A defined constant `c = a` becomes a
/// unary relation true exactly at `a`; an undefined constant becomes a
/// unary relation unknown everywhere.
pub fn relationalize(
    s: &PartialStructure,
    sig: &Signature,
) -> Result<(PartialStructure, Signature), StructureError> {
    s.validate(sig)?;
    let mut out = PartialStructure::new(s.universe.clone());
    for (name, r) in &s.relations {
        out.add_relation(name.clone(), r.clone())?;
    }
    for (name, f) in &s.functions {
        out.add_relation(name.clone(), f.graph().clone())?;
    }
    let n = s.size();
    for (name, &value) in &s.constants {
        let rel = match value {
            Some(a) => PartialRelation::from_fn(n, 1, |t| {
                if t[0] == a {
                    Verdict::Pos
                } else {
                    Verdict::Neg
                }
            })?,
            None => PartialRelation::filled(n, 1, Verdict::Unk)?,
        };
        out.add_relation(name.clone(), rel)?;
    }
    let sig = out.signature();
    Ok((out, sig))
}
