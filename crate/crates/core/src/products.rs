//! Direct products, filters, reduced products and ultraproducts of indexed
//! families of partial structures, and the ultraproduct construction of a
//! partial model from models of finite subsets.
//!
//! Index sets are finite and held as bitmasks, so every filter check is
//! exhaustive and every ultrafilter is principal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::semantics::{eval_total, quasi_models, quasi_true, Assignment, EvalError};
use crate::structures::{
    enumerate_normals, is_element_name, minus_completion, plus_completion, PartialRelation,
    PartialStructure, StructureError, Universe, Verdict,
};
use crate::syntax::Formula;

/// Largest index set a filter may range over.
pub const MAX_INDEX: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProductError {
    #[error("index set must be non-empty")]
    EmptyIndex,
    #[error("index `{0}` is listed twice")]
    DuplicateIndex(String),
    #[error("`{0}` is not a valid index name")]
    BadIndexName(String),
    #[error("unknown index `{0}`")]
    UnknownIndex(String),
    #[error("index sets larger than {MAX_INDEX} are not supported")]
    TooManyIndices,
    #[error("factor `{index}` has signature {found}, expected {expected}")]
    SignatureMismatch {
        index: String,
        expected: String,
        found: String,
    },
    #[error("factor `{0}` interprets functions or constants; relationalize it first")]
    NotRelational(String),
    #[error("factor `{0}` is not total")]
    NotTotal(String),
    #[error("the filter ranges over a different index set than the family")]
    GroundMismatch,
    #[error("not a filter: {0}")]
    NotAFilter(String),
    #[error("not an ultrafilter: {0}")]
    NotAnUltrafilter(String),
    #[error("the sets do not have the finite intersection property")]
    NoFiniteIntersection,
    #[error("the product universe is too large")]
    TooLarge,
    #[error("no model given for the subset {0}")]
    MissingModel(String),
    #[error("the structure given for {0} is not a partial model of it")]
    NotAModel(String),
    #[error("internal invariant broken: {0}")]
    Internal(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A subset of a finite index set, by position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IndexSet(u64);

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet(0)
    }

    pub fn full(n: usize) -> Self {
        debug_assert!(n < 64);
        IndexSet((1u64 << n) - 1)
    }

    pub fn singleton(i: usize) -> Self {
        IndexSet(1 << i)
    }

    pub fn from_bits(bits: u64) -> Self {
        IndexSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn intersection(self, o: Self) -> Self {
        IndexSet(self.0 & o.0)
    }

    pub fn union(self, o: Self) -> Self {
        IndexSet(self.0 | o.0)
    }

    /// `{0..n} - self`.
    pub fn complement(self, n: usize) -> Self {
        IndexSet(!self.0 & Self::full(n).0)
    }

    pub fn is_subset(self, o: Self) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.contains(i))
    }

    /// All `2^n` subsets of `{0..n}`.
    pub fn all_subsets(n: usize) -> impl Iterator<Item = IndexSet> {
        (0..1u64 << n).map(IndexSet)
    }

    /// Every set between `self` and `{0..n}`.
    fn supersets(self, n: usize) -> impl Iterator<Item = IndexSet> {
        let free = self.complement(n).0;
        let mut sub = free;
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let out = IndexSet(self.0 | sub);
            if sub == 0 {
                done = true;
            } else {
                sub = (sub - 1) & free;
            }
            Some(out)
        })
    }
}

fn check_index_names(names: &[String]) -> Result<(), ProductError> {
    if names.is_empty() {
        return Err(ProductError::EmptyIndex);
    }
    let mut seen = BTreeSet::new();
    for n in names {
        if !is_element_name(n) {
            return Err(ProductError::BadIndexName(n.clone()));
        }
        if !seen.insert(n) {
            return Err(ProductError::DuplicateIndex(n.clone()));
        }
    }
    Ok(())
}

/// A set of subsets of a finite index set. Whether it is a filter or an
/// ultrafilter is checked, not assumed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FilterSet {
    ground: Vec<String>,
    members: BTreeSet<IndexSet>,
}

impl FilterSet {
    pub fn new(
        ground: Vec<String>,
        members: impl IntoIterator<Item = IndexSet>,
    ) -> Result<Self, ProductError> {
        check_index_names(&ground)?;
        if ground.len() > MAX_INDEX {
            return Err(ProductError::TooManyIndices);
        }
        let full = IndexSet::full(ground.len());
        let members: BTreeSet<IndexSet> = members.into_iter().collect();
        if let Some(m) = members.iter().find(|m| !m.is_subset(full)) {
            return Err(ProductError::NotAFilter(format!(
                "member {:#b} is not a subset of the index set",
                m.0
            )));
        }
        Ok(FilterSet { ground, members })
    }

    /// Members given by index names.
    pub fn from_names(ground: Vec<String>, members: &[Vec<&str>]) -> Result<Self, ProductError> {
        check_index_names(&ground)?;
        let sets = members
            .iter()
            .map(|m| index_set_by_names(&ground, m))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(ground, sets)
    }

    /// `{X : core ⊆ X ⊆ I}`.
    pub fn generated_by(ground: Vec<String>, core: IndexSet) -> Result<Self, ProductError> {
        let n = ground.len();
        Self::new(ground, core.supersets(n))
    }

    /// `{I}`.
    pub fn trivial(ground: Vec<String>) -> Result<Self, ProductError> {
        let n = ground.len();
        Self::new(ground, [IndexSet::full(n)])
    }

    /// `{X ⊆ I : i0 ∈ X}`.
    pub fn principal(ground: Vec<String>, i0: usize) -> Result<Self, ProductError> {
        if i0 >= ground.len() {
            return Err(ProductError::UnknownIndex(i0.to_string()));
        }
        Self::generated_by(ground, IndexSet::singleton(i0))
    }

    pub fn ground(&self) -> &[String] {
        &self.ground
    }

    pub fn members(&self) -> impl Iterator<Item = IndexSet> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, x: IndexSet) -> bool {
        self.members.contains(&x)
    }

    fn n(&self) -> usize {
        self.ground.len()
    }

    /// The first filter condition that fails, if any.
    pub fn filter_violation(&self) -> Option<String> {
        let n = self.n();
        if !self.contains(IndexSet::full(n)) {
            return Some("the whole index set is not a member".into());
        }
        if self.contains(IndexSet::empty()) {
            return Some("the empty set is a member".into());
        }
        for &x in &self.members {
            for &y in &self.members {
                if !self.contains(x.intersection(y)) {
                    return Some(format!(
                        "{} ∩ {} is not a member",
                        self.show(x),
                        self.show(y)
                    ));
                }
            }
            if let Some(y) = x.supersets(n).find(|&y| !self.contains(y)) {
                return Some(format!(
                    "{} is a member but its superset {} is not",
                    self.show(x),
                    self.show(y)
                ));
            }
        }
        None
    }

    pub fn is_filter(&self) -> bool {
        self.filter_violation().is_none()
    }

    /// A filter containing exactly one of `X` and `I - X` for every `X ⊆ I`.
    pub fn is_ultrafilter(&self) -> bool {
        self.ultrafilter_violation().is_none()
    }

    pub fn ultrafilter_violation(&self) -> Option<String> {
        if let Some(v) = self.filter_violation() {
            return Some(v);
        }
        let n = self.n();
        IndexSet::all_subsets(n)
            .find(|&x| self.contains(x) == self.contains(x.complement(n)))
            .map(|x| {
                format!(
                    "{} and its complement {} are both {}",
                    self.show(x),
                    self.show(x.complement(n)),
                    if self.contains(x) {
                        "members"
                    } else {
                        "non-members"
                    }
                )
            })
    }

    /// `{x,y}` using index names.
    pub fn show(&self, x: IndexSet) -> String {
        let names: Vec<&str> = x.iter().map(|i| self.ground[i].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }
}

impl fmt::Display for FilterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members.iter().map(|&m| self.show(m)).collect();
        write!(f, "{}", parts.join(" "))
    }
}

pub fn index_set_by_names(ground: &[String], names: &[&str]) -> Result<IndexSet, ProductError> {
    let mut s = IndexSet::empty();
    for n in names {
        let i = ground
            .iter()
            .position(|g| g == n)
            .ok_or_else(|| ProductError::UnknownIndex(n.to_string()))?;
        s.insert(i);
    }
    Ok(s)
}

/// `{I}` over the given index names.
pub fn trivial_filter(ground: Vec<String>) -> Result<FilterSet, ProductError> {
    FilterSet::trivial(ground)
}

/// Every finite intersection of members of `sets` is non-empty. The empty
/// intersection is the whole (non-empty) index set.
pub fn has_fip(sets: &[IndexSet], n: usize) -> bool {
    n > 0
        && !sets
            .iter()
            .fold(IndexSet::full(n), |acc, &s| acc.intersection(s))
            .is_empty()
}

/// An ultrafilter containing every set in `sets`: the principal ultrafilter
/// at the first index lying in all of them.
pub fn extend_to_ultrafilter(
    sets: &[IndexSet],
    ground: Vec<String>,
) -> Result<FilterSet, ProductError> {
    let n = ground.len();
    let common = sets
        .iter()
        .fold(IndexSet::full(n), |acc, &s| acc.intersection(s));
    let i0 = common
        .iter()
        .find(|&i| i < n)
        .ok_or(ProductError::NoFiniteIntersection)?;
    FilterSet::principal(ground, i0)
}

/// An element of a product: one element position per factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductElement(pub Vec<usize>);

impl ProductElement {
    pub fn coord(&self, i: usize) -> usize {
        self.0[i]
    }
}

/// A non-empty family of relational partial structures over one signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedFamily {
    index: Vec<String>,
    factors: Vec<PartialStructure>,
}

impl IndexedFamily {
    pub fn new<S: Into<String>>(
        members: impl IntoIterator<Item = (S, PartialStructure)>,
    ) -> Result<Self, ProductError> {
        let (index, factors): (Vec<String>, Vec<PartialStructure>) =
            members.into_iter().map(|(n, s)| (n.into(), s)).unzip();
        check_index_names(&index)?;
        let expected = factors[0].signature();
        for (name, f) in index.iter().zip(&factors) {
            if !f.is_relational() {
                return Err(ProductError::NotRelational(name.clone()));
            }
            let found = f.signature();
            if found != expected {
                return Err(ProductError::SignatureMismatch {
                    index: name.clone(),
                    expected: expected.to_string(),
                    found: found.to_string(),
                });
            }
        }
        Ok(IndexedFamily { index, factors })
    }

    pub fn index(&self) -> &[String] {
        &self.index
    }

    pub fn factors(&self) -> &[PartialStructure] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Replaces every factor through `f`, keeping the index.
    pub fn map(&self, f: impl Fn(&PartialStructure) -> PartialStructure) -> Self {
        IndexedFamily {
            index: self.index.clone(),
            factors: self.factors.iter().map(f).collect(),
        }
    }

    fn with_factors(&self, factors: Vec<PartialStructure>) -> Self {
        IndexedFamily {
            index: self.index.clone(),
            factors,
        }
    }

    pub fn product_size(&self) -> Option<usize> {
        self.factors
            .iter()
            .try_fold(1usize, |acc, f| acc.checked_mul(f.size()))
    }

    /// All product elements in lexicographic order (first index most
    /// significant, each coordinate in its factor's listing order).
    pub fn product_elements(&self) -> Result<Vec<ProductElement>, ProductError> {
        let total = self
            .product_size()
            .filter(|&n| n <= 1 << 20)
            .ok_or(ProductError::TooLarge)?;
        let sizes: Vec<usize> = self.factors.iter().map(PartialStructure::size).collect();
        let mut out = Vec::with_capacity(total);
        let mut cur = vec![0; sizes.len()];
        for _ in 0..total {
            out.push(ProductElement(cur.clone()));
            for (slot, &size) in cur.iter_mut().zip(&sizes).rev() {
                *slot += 1;
                if *slot < size {
                    break;
                }
                *slot = 0;
            }
        }
        Ok(out)
    }

    /// `<a1;a2;...>`, the coordinates' element names.
    pub fn element_name(&self, h: &ProductElement) -> String {
        let parts: Vec<&str> = self
            .factors
            .iter()
            .zip(&h.0)
            .map(|(f, &e)| f.universe().name(e))
            .collect();
        format!("<{}>", parts.join(";"))
    }

    /// `{i : (h1(i)..hn(i)) has verdict v in factor i}` for relation `sym`.
    pub fn verdict_set(&self, sym: &str, tuple: &[&ProductElement], v: Verdict) -> IndexSet {
        let mut out = IndexSet::empty();
        let mut coords = Vec::with_capacity(tuple.len());
        for (i, f) in self.factors.iter().enumerate() {
            coords.clear();
            coords.extend(tuple.iter().map(|h| h.coord(i)));
            let r = f.relation(sym).expect("factors share one signature");
            if r.get(&coords) == v {
                out.insert(i);
            }
        }
        out
    }

    fn check_filter_ground(&self, f: &FilterSet) -> Result<(), ProductError> {
        if f.ground() != self.index.as_slice() {
            return Err(ProductError::GroundMismatch);
        }
        Ok(())
    }
}

/// Builds a structure over `names` whose relation verdicts come from `verdict`
/// applied to tuples of element positions.
fn build_structure(
    fam: &IndexedFamily,
    names: Vec<String>,
    mut verdict: impl FnMut(&str, &[usize]) -> Result<Verdict, ProductError>,
) -> Result<PartialStructure, ProductError> {
    let n = names.len();
    let mut s = PartialStructure::new(Universe::new(names)?);
    for (sym, r0) in fam.factors[0].relations() {
        let mut err = None;
        let rel = PartialRelation::from_fn(n, r0.arity(), |t| match verdict(sym, t) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                Verdict::Unk
            }
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        s.add_relation(sym, rel)?;
    }
    Ok(s)
}

/// The direct product: a tuple is positive when it is positive in every
/// factor, negative when it is negative in some factor, unknown otherwise.
pub fn direct_product(fam: &IndexedFamily) -> Result<PartialStructure, ProductError> {
    let elems = fam.product_elements()?;
    let names = elems.iter().map(|h| fam.element_name(h)).collect();
    let all = IndexSet::full(fam.len());
    build_structure(fam, names, |sym, t| {
        let tuple: Vec<&ProductElement> = t.iter().map(|&i| &elems[i]).collect();
        Ok(if fam.verdict_set(sym, &tuple, Verdict::Pos) == all {
            Verdict::Pos
        } else if !fam.verdict_set(sym, &tuple, Verdict::Neg).is_empty() {
            Verdict::Neg
        } else {
            Verdict::Unk
        })
    })
}

/// Both sides of the characterization of a non-empty unknown part in the
/// direct product, for relation `sym`: the product's unknown part is
/// non-empty, and some factor's unknown part is non-empty while every factor
/// has a positive or unknown tuple.
pub fn product_unknown_nonempty_characterization(
    fam: &IndexedFamily,
    sym: &str,
) -> Result<(bool, bool), ProductError> {
    let prod = direct_product(fam)?;
    let rel = |s: &PartialStructure| {
        s.relation(sym).cloned().ok_or_else(|| {
            ProductError::Structure(StructureError::MissingInterpretation(sym.into()))
        })
    };
    let left = rel(&prod)?.count(Verdict::Unk) > 0;
    let mut some_unknown = false;
    let mut each_nonempty = true;
    for f in fam.factors() {
        let r = rel(f)?;
        some_unknown |= r.count(Verdict::Unk) > 0;
        each_nonempty &= r.count(Verdict::Pos) + r.count(Verdict::Unk) > 0;
    }
    Ok((left, some_unknown && each_nonempty))
}

/// `{i : u(i) = v(i)} ∈ F`.
pub fn equivalent_mod_filter(u: &ProductElement, v: &ProductElement, f: &FilterSet) -> bool {
    let mut agree = IndexSet::empty();
    for (i, (a, b)) in u.0.iter().zip(&v.0).enumerate() {
        if a == b {
            agree.insert(i);
        }
    }
    f.contains(agree)
}

/// An equivalence class of product elements modulo a filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassRep {
    /// Least member in lexicographic order.
    pub representative: ProductElement,
    pub members: Vec<ProductElement>,
}

/// Partitions the product elements into classes of `~F`, in order of their
/// least members.
pub fn quotient(fam: &IndexedFamily, f: &FilterSet) -> Result<Vec<ClassRep>, ProductError> {
    fam.check_filter_ground(f)?;
    if let Some(v) = f.filter_violation() {
        return Err(ProductError::NotAFilter(v));
    }
    let mut classes: Vec<ClassRep> = Vec::new();
    for h in fam.product_elements()? {
        match classes
            .iter_mut()
            .find(|c| equivalent_mod_filter(&c.representative, &h, f))
        {
            Some(c) => c.members.push(h),
            None => classes.push(ClassRep {
                representative: h.clone(),
                members: vec![h],
            }),
        }
    }
    Ok(classes)
}

/// The reduced-product verdict of relation `sym` at the classes of the given
/// representatives: positive when the positive index set is in `F`, unknown
/// when the unknown index set is, negative otherwise.
pub fn reduced_verdict(
    fam: &IndexedFamily,
    f: &FilterSet,
    sym: &str,
    reps: &[&ProductElement],
) -> Result<Verdict, ProductError> {
    let pos = f.contains(fam.verdict_set(sym, reps, Verdict::Pos));
    let unk = f.contains(fam.verdict_set(sym, reps, Verdict::Unk));
    match (pos, unk) {
        (true, true) => Err(ProductError::Internal(
            "disjoint index sets both in a filter".into(),
        )),
        (true, false) => Ok(Verdict::Pos),
        (false, true) => Ok(Verdict::Unk),
        (false, false) => Ok(Verdict::Neg),
    }
}

/// The reduced product over filter `f`. Class `[h]` is named `[<h>]` after
/// its least member.
pub fn reduced_product(
    fam: &IndexedFamily,
    f: &FilterSet,
) -> Result<PartialStructure, ProductError> {
    let classes = quotient(fam, f)?;
    let names = classes
        .iter()
        .map(|c| format!("[{}]", fam.element_name(&c.representative)))
        .collect();
    build_structure(fam, names, |sym, t| {
        let reps: Vec<&ProductElement> = t.iter().map(|&i| &classes[i].representative).collect();
        reduced_verdict(fam, f, sym, &reps)
    })
}

/// The reduced product over an ultrafilter.
pub fn ultraproduct(fam: &IndexedFamily, u: &FilterSet) -> Result<PartialStructure, ProductError> {
    fam.check_filter_ground(u)?;
    if let Some(v) = u.ultrafilter_violation() {
        return Err(ProductError::NotAnUltrafilter(v));
    }
    reduced_product(fam, u)
}

fn index_set_where(
    fam: &IndexedFamily,
    mut pred: impl FnMut(&PartialStructure) -> Result<bool, ProductError>,
) -> Result<IndexSet, ProductError> {
    let mut out = IndexSet::empty();
    for (i, f) in fam.factors().iter().enumerate() {
        if pred(f)? {
            out.insert(i);
        }
    }
    Ok(out)
}

/// For a family of total structures: (truth in the ultraproduct, whether the
/// set of factors satisfying the sentence is in `u`).
pub fn los_check(
    fam: &IndexedFamily,
    u: &FilterSet,
    sentence: &Formula,
) -> Result<(bool, bool), ProductError> {
    if let Some(i) = fam.factors().iter().position(|f| !f.is_total()) {
        return Err(ProductError::NotTotal(fam.index()[i].clone()));
    }
    let up = ultraproduct(fam, u)?;
    let left = eval_total(&up, sentence, &Assignment::new())?;
    let right = u.contains(index_set_where(fam, |f| {
        Ok(eval_total(f, sentence, &Assignment::new())?)
    })?);
    Ok((left, right))
}

/// (whether the factors quasi-satisfying the sentence form a set in `u`,
/// whether the ultraproduct quasi-satisfies it). The first implies the
/// second.
pub fn quasi_los_forward(
    fam: &IndexedFamily,
    u: &FilterSet,
    sentence: &Formula,
) -> Result<(bool, bool), ProductError> {
    let up = ultraproduct(fam, u)?;
    let hypothesis = u.contains(index_set_where(fam, |f| Ok(quasi_true(f, sentence)?))?);
    let conclusion = quasi_true(&up, sentence)?;
    Ok((hypothesis, conclusion))
}

/// Plus completion applied factor-wise.
pub fn family_plus(fam: &IndexedFamily) -> IndexedFamily {
    fam.map(plus_completion)
}

/// Minus completion applied factor-wise.
pub fn family_minus(fam: &IndexedFamily) -> IndexedFamily {
    fam.map(minus_completion)
}

/// Every family of factor-wise normal completions, first factor varying
/// slowest. There are `2^(u_1 + ... + u_n)` of them.
pub fn normals_of_family(fam: &IndexedFamily) -> impl Iterator<Item = IndexedFamily> + '_ {
    let choices: Vec<Vec<PartialStructure>> = fam
        .factors()
        .iter()
        .map(|f| enumerate_normals(f).collect())
        .collect();
    let mut cur = Some(vec![0usize; choices.len()]);
    std::iter::from_fn(move || {
        let pick = cur.as_mut()?;
        let out = fam.with_factors(
            pick.iter()
                .zip(&choices)
                .map(|(&k, c)| c[k].clone())
                .collect(),
        );
        let mut carried = true;
        for (slot, c) in pick.iter_mut().zip(&choices).rev() {
            *slot += 1;
            if *slot < c.len() {
                carried = false;
                break;
            }
            *slot = 0;
        }
        if carried {
            cur = None;
        }
        Some(out)
    })
}

/// Everything built while turning models of finite subsets into a model of
/// the whole set.
#[derive(Debug, Clone)]
pub struct CompactnessWitness {
    /// The non-empty subsets of the sentence set, as sentence positions.
    pub subsets: Vec<BTreeSet<usize>>,
    pub family: IndexedFamily,
    /// For each sentence, the index positions of the subsets containing it.
    pub star_sets: Vec<IndexSet>,
    pub ultrafilter: FilterSet,
    pub structure: PartialStructure,
}

/// Index name of a subset: `g0+g2`.
pub fn subset_name(subset: &BTreeSet<usize>) -> String {
    let parts: Vec<String> = subset.iter().map(|k| format!("g{k}")).collect();
    parts.join("+")
}

/// Builds a partial model of `gamma` as an ultraproduct of the given models
/// of its non-empty subsets.
///
/// The index set is the non-empty subsets of `gamma`; the sets
/// `{i : gamma_k ∈ i}` have the finite intersection property and are
/// extended to an ultrafilter over which the family of models is reduced.
pub fn compactness_witness(
    gamma: &[Formula],
    models: &BTreeMap<BTreeSet<usize>, PartialStructure>,
) -> Result<CompactnessWitness, ProductError> {
    let n = gamma.len();
    if n == 0 {
        return Err(ProductError::EmptyIndex);
    }
    if (1usize << n) - 1 > MAX_INDEX {
        return Err(ProductError::TooManyIndices);
    }
    let subsets: Vec<BTreeSet<usize>> = (1u64..1 << n)
        .map(|bits| (0..n).filter(|&k| bits >> k & 1 == 1).collect())
        .collect();
    let mut members = Vec::with_capacity(subsets.len());
    for s in &subsets {
        let name = subset_name(s);
        let model = models
            .get(s)
            .ok_or_else(|| ProductError::MissingModel(name.clone()))?;
        let part: Vec<Formula> = s.iter().map(|&k| gamma[k].clone()).collect();
        if !quasi_models(model, &part)? {
            return Err(ProductError::NotAModel(name));
        }
        members.push((name, model.clone()));
    }
    let family = IndexedFamily::new(members)?;
    let star_sets: Vec<IndexSet> = (0..n)
        .map(|k| {
            let mut set = IndexSet::empty();
            for (i, s) in subsets.iter().enumerate() {
                if s.contains(&k) {
                    set.insert(i);
                }
            }
            set
        })
        .collect();
    if !has_fip(&star_sets, subsets.len()) {
        return Err(ProductError::Internal(
            "subset-membership sets lack the finite intersection property".into(),
        ));
    }
    let ultrafilter = extend_to_ultrafilter(&star_sets, family.index().to_vec())?;
    if !ultrafilter.is_ultrafilter() || !star_sets.iter().all(|&e| ultrafilter.contains(e)) {
        return Err(ProductError::Internal(
            "extension is not an ultrafilter over the membership sets".into(),
        ));
    }
    let structure = ultraproduct(&family, &ultrafilter)?;
    if !quasi_models(&structure, gamma)? {
        return Err(ProductError::Internal(
            "ultraproduct is not a partial model".into(),
        ));
    }
    Ok(CompactnessWitness {
        subsets,
        family,
        star_sets,
        ultrafilter,
        structure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{is_normal, structures_equal};
    use crate::syntax::{parse_sentence, Signature};

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    fn unary(elem: &str, v: Verdict) -> PartialStructure {
        PartialStructure::new(Universe::new([elem]).unwrap())
            .with_relation("R", PartialRelation::filled(1, 1, v).unwrap())
            .unwrap()
    }

    /// Factor x: R positive at a1. Factor y: R unknown at a2.
    fn two_factor() -> IndexedFamily {
        IndexedFamily::new([
            ("x", unary("a1", Verdict::Pos)),
            ("y", unary("a2", Verdict::Unk)),
        ])
        .unwrap()
    }

    #[test]
    fn two_factor_direct_product() {
        let p = direct_product(&two_factor()).unwrap();
        assert_eq!(p.universe().names(), ["<a1;a2>"]);
        let r = p.relation("R").unwrap();
        assert_eq!(r.count(Verdict::Unk), 1);
        assert_eq!(r.count(Verdict::Pos) + r.count(Verdict::Neg), 0);
        assert_eq!(
            product_unknown_nonempty_characterization(&two_factor(), "R").unwrap(),
            (true, true)
        );
    }

    #[test]
    fn two_factor_reduced_products() {
        let fam = two_factor();
        let trivial = trivial_filter(names(&["x", "y"])).unwrap();
        let q = reduced_product(&fam, &trivial).unwrap();
        assert_eq!(q.universe().names(), ["[<a1;a2>]"]);
        assert_eq!(q.relation("R").unwrap().count(Verdict::Neg), 1);
        assert!(q.is_total());

        let b = reduced_product(&family_plus(&fam), &trivial).unwrap();
        assert_eq!(b.relation("R").unwrap().count(Verdict::Pos), 1);
        assert!(!is_normal(&q, &b).unwrap());
        assert!(!structures_equal(&plus_completion(&q), &b).unwrap());
    }

    #[test]
    fn two_factor_ultraproducts() {
        let fam = two_factor();
        let at_x = FilterSet::principal(names(&["x", "y"]), 0).unwrap();
        let ux = ultraproduct(&fam, &at_x).unwrap();
        assert!(ux.is_total());
        assert_eq!(ux.relation("R").unwrap().count(Verdict::Pos), 1);
        let at_y = FilterSet::principal(names(&["x", "y"]), 1).unwrap();
        let uy = ultraproduct(&fam, &at_y).unwrap();
        assert_eq!(uy.relation("R").unwrap().count(Verdict::Unk), 1);
        let trivial = trivial_filter(names(&["x", "y"])).unwrap();
        assert!(matches!(
            ultraproduct(&fam, &trivial),
            Err(ProductError::NotAnUltrafilter(_))
        ));
    }

    #[test]
    fn filter_examples() {
        let t = trivial_filter(names(&["x", "y"])).unwrap();
        assert!(t.is_filter());
        assert!(!t.is_ultrafilter());
        let p = FilterSet::principal(names(&["x", "y", "z"]), 1).unwrap();
        assert!(p.is_filter() && p.is_ultrafilter());
        let bad =
            FilterSet::from_names(names(&["x", "y"]), &[vec!["x"], vec!["y"], vec!["x", "y"]])
                .unwrap();
        assert!(!bad.is_filter());
        let no_top = FilterSet::from_names(names(&["x", "y"]), &[vec!["x"]]).unwrap();
        assert!(!no_top.is_filter());
        let x = IndexSet::singleton(0);
        let y = IndexSet::singleton(1);
        assert!(!has_fip(&[x, y], 2));
        assert!(has_fip(&[], 2));
    }

    #[test]
    fn ultrafilter_extension() {
        let g = names(&["x", "y", "z"]);
        let xy = index_set_by_names(&g, &["x", "y"]).unwrap();
        let yz = index_set_by_names(&g, &["y", "z"]).unwrap();
        let u = extend_to_ultrafilter(&[xy, yz], g.clone()).unwrap();
        assert_eq!(u, FilterSet::principal(g.clone(), 1).unwrap());
        assert!(u.contains(xy) && u.contains(yz) && u.is_ultrafilter());
        assert_eq!(
            extend_to_ultrafilter(&[], g.clone()).unwrap(),
            FilterSet::principal(g.clone(), 0).unwrap()
        );
        assert_eq!(
            extend_to_ultrafilter(&[IndexSet::singleton(0), IndexSet::singleton(1)], g),
            Err(ProductError::NoFiniteIntersection)
        );
    }

    #[test]
    fn filter_equivalence_examples() {
        let g = names(&["x", "y", "z"]);
        let u = ProductElement(vec![0, 1, 0]);
        let v = ProductElement(vec![0, 0, 0]);
        assert!(equivalent_mod_filter(
            &u,
            &u,
            &trivial_filter(g.clone()).unwrap()
        ));
        assert!(!equivalent_mod_filter(
            &u,
            &v,
            &trivial_filter(g.clone()).unwrap()
        ));
        assert!(equivalent_mod_filter(
            &u,
            &v,
            &FilterSet::principal(g.clone(), 0).unwrap()
        ));
        assert!(!equivalent_mod_filter(
            &u,
            &v,
            &FilterSet::principal(g, 1).unwrap()
        ));
    }

    #[test]
    fn trivial_filter_keeps_shared_unknowns() {
        // Both factors unknown on their only tuple: unknown in both products.
        let fam = IndexedFamily::new([
            ("x", unary("a", Verdict::Unk)),
            ("y", unary("b", Verdict::Unk)),
        ])
        .unwrap();
        let d = direct_product(&fam).unwrap();
        let r = reduced_product(&fam, &trivial_filter(names(&["x", "y"])).unwrap()).unwrap();
        assert_eq!(
            d.relation("R").unwrap().verdicts(),
            r.relation("R").unwrap().verdicts()
        );
        assert_eq!(r.relation("R").unwrap().count(Verdict::Unk), 1);
    }

    #[test]
    fn principal_ultraproduct_reads_off_a_coordinate() {
        let u2 = Universe::new(["p", "q"]).unwrap();
        let a = PartialStructure::new(u2.clone())
            .with_relation(
                "R",
                PartialRelation::from_fn(2, 2, |t| Verdict::ALL[(t[0] + 2 * t[1]) % 3]).unwrap(),
            )
            .unwrap();
        let b = PartialStructure::new(Universe::new(["r", "s", "t"]).unwrap())
            .with_relation(
                "R",
                PartialRelation::from_fn(3, 2, |t| Verdict::ALL[(t[0] * t[1]) % 3]).unwrap(),
            )
            .unwrap();
        let fam = IndexedFamily::new([("i", a.clone()), ("j", b.clone())]).unwrap();
        for (k, factor) in [(0, &a), (1, &b)] {
            let u = FilterSet::principal(fam.index().to_vec(), k).unwrap();
            let classes = quotient(&fam, &u).unwrap();
            let up = ultraproduct(&fam, &u).unwrap();
            assert_eq!(up.size(), factor.size());
            let up_r = up.relation("R").unwrap();
            let f_r = factor.relation("R").unwrap();
            for t in up_r.tuples() {
                let coords: Vec<usize> = t
                    .iter()
                    .map(|&c| classes[c].representative.coord(k))
                    .collect();
                assert_eq!(up_r.get(&t), f_r.get(&coords));
            }
        }
    }

    #[test]
    fn los_on_disagreeing_factors() {
        let sig = Signature::relational([("R", 1)]).unwrap();
        let phi = parse_sentence("forall x (R(x))", &sig).unwrap();
        let fam = IndexedFamily::new([
            ("x", unary("a", Verdict::Pos)),
            ("y", unary("b", Verdict::Neg)),
        ])
        .unwrap();
        let at = |k| FilterSet::principal(fam.index().to_vec(), k).unwrap();
        assert_eq!(los_check(&fam, &at(0), &phi).unwrap(), (true, true));
        assert_eq!(los_check(&fam, &at(1), &phi).unwrap(), (false, false));
        let single = IndexedFamily::new([("x", unary("a", Verdict::Neg))]).unwrap();
        let u = FilterSet::principal(single.index().to_vec(), 0).unwrap();
        assert_eq!(los_check(&single, &u, &phi).unwrap(), (false, false));
        assert!(matches!(
            los_check(&two_factor(), &at(0), &phi),
            Err(ProductError::NotTotal(_))
        ));
    }

    #[test]
    fn quasi_los_on_unknown_factors() {
        let sig = Signature::relational([("R", 1)]).unwrap();
        let phi = parse_sentence("forall x (R(x))", &sig).unwrap();
        let fam = IndexedFamily::new([
            ("x", unary("a", Verdict::Unk)),
            ("y", unary("b", Verdict::Unk)),
        ])
        .unwrap();
        for k in 0..2 {
            let u = FilterSet::principal(fam.index().to_vec(), k).unwrap();
            assert_eq!(quasi_los_forward(&fam, &u, &phi).unwrap(), (true, true));
        }
    }

    #[test]
    fn family_normals_and_completions() {
        let fam = two_factor();
        assert_eq!(normals_of_family(&fam).count(), 2);
        let plus = family_plus(&fam);
        assert!(plus.factors().iter().all(|f| f.is_total()));
        assert!(plus
            .factors()
            .iter()
            .all(|f| f.relation("R").unwrap().count(Verdict::Pos) == 1));
        let total = family_minus(&fam);
        assert_eq!(
            normals_of_family(&total).collect::<Vec<_>>(),
            vec![total.clone()]
        );
    }

    #[test]
    fn family_validation() {
        let other = PartialStructure::new(Universe::new(["a"]).unwrap())
            .with_relation("S", PartialRelation::filled(1, 1, Verdict::Pos).unwrap())
            .unwrap();
        assert!(matches!(
            IndexedFamily::new([("x", unary("a", Verdict::Pos)), ("y", other)]),
            Err(ProductError::SignatureMismatch { .. })
        ));
        assert!(matches!(
            IndexedFamily::new([
                ("x", unary("a", Verdict::Pos)),
                ("x", unary("a", Verdict::Pos))
            ]),
            Err(ProductError::DuplicateIndex(_))
        ));
        assert_eq!(
            IndexedFamily::new(Vec::<(String, PartialStructure)>::new()),
            Err(ProductError::EmptyIndex)
        );
        let wrong_ground = trivial_filter(names(&["p", "q"])).unwrap();
        assert_eq!(
            reduced_product(&two_factor(), &wrong_ground),
            Err(ProductError::GroundMismatch)
        );
    }

    #[test]
    fn compactness_on_contradictory_pair() {
        let sig = Signature::relational([("R", 1)]).unwrap();
        let gamma = vec![
            parse_sentence("forall x (R(x))", &sig).unwrap(),
            parse_sentence("~forall x (R(x))", &sig).unwrap(),
        ];
        let model = unary("a", Verdict::Unk);
        let models: BTreeMap<_, _> = [vec![0], vec![1], vec![0, 1]]
            .into_iter()
            .map(|s| (s.into_iter().collect::<BTreeSet<_>>(), model.clone()))
            .collect();
        let w = compactness_witness(&gamma, &models).unwrap();
        assert_eq!(w.subsets.len(), 3);
        assert!(quasi_models(&w.structure, &gamma).unwrap());
        assert!(w.ultrafilter.is_ultrafilter());

        let mut missing = models.clone();
        missing.remove(&BTreeSet::from([0, 1]));
        assert!(matches!(
            compactness_witness(&gamma, &missing),
            Err(ProductError::MissingModel(_))
        ));
        let mut wrong = models;
        wrong.insert(BTreeSet::from([0]), unary("a", Verdict::Neg));
        assert!(matches!(
            compactness_witness(&gamma, &wrong),
            Err(ProductError::NotAModel(_))
        ));
    }

    mod properties {
        use super::super::*;
        use crate::laws::{
            law_signature, random_family, random_filter, random_sentence, random_ultrafilter,
        };
        use crate::structures::structures_equal;
        use proptest::prelude::*;
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;

        fn family(seed: u64, max_unknowns: usize) -> (ChaCha8Rng, IndexedFamily) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fam = random_family(&mut rng, &law_signature(), 3, 2, max_unknowns);
            (rng, fam)
        }

        proptest! {
            #[test]
            fn unknown_characterization_sides_agree(seed in any::<u64>()) {
                let (_, fam) = family(seed, 3);
                for sym in ["P", "R"] {
                    let (l, r) = product_unknown_nonempty_characterization(&fam, sym).unwrap();
                    prop_assert_eq!(l, r);
                }
            }

            #[test]
            fn completions_commute_with_direct_products(seed in any::<u64>()) {
                let (_, fam) = family(seed, 3);
                let prod = direct_product(&fam).unwrap();
                prop_assert!(structures_equal(&plus_completion(&prod), &direct_product(&family_plus(&fam)).unwrap()).unwrap());
                prop_assert!(structures_equal(&minus_completion(&prod), &direct_product(&family_minus(&fam)).unwrap()).unwrap());
            }

            #[test]
            fn minus_completion_commutes_with_reduced_products(seed in any::<u64>()) {
                let (mut rng, fam) = family(seed, 3);
                let f = random_filter(&mut rng, fam.index());
                let left = minus_completion(&reduced_product(&fam, &f).unwrap());
                prop_assert!(structures_equal(&left, &reduced_product(&family_minus(&fam), &f).unwrap()).unwrap());
            }

            #[test]
            fn plus_completion_commutes_with_ultraproducts(seed in any::<u64>()) {
                let (mut rng, fam) = family(seed, 3);
                let u = random_ultrafilter(&mut rng, fam.index());
                let left = plus_completion(&ultraproduct(&fam, &u).unwrap());
                prop_assert!(structures_equal(&left, &ultraproduct(&family_plus(&fam), &u).unwrap()).unwrap());
            }

            #[test]
            fn los_sides_agree_on_total_families(seed in any::<u64>()) {
                let (mut rng, fam) = family(seed, 0);
                let phi = random_sentence(&mut rng, &law_signature(), 3);
                for i0 in 0..fam.len() {
                    let u = FilterSet::principal(fam.index().to_vec(), i0).unwrap();
                    let (l, r) = los_check(&fam, &u, &phi).unwrap();
                    prop_assert_eq!(l, r);
                }
            }

            #[test]
            fn quasi_truth_transfers_forward(seed in any::<u64>()) {
                let (mut rng, fam) = family(seed, 3);
                let phi = random_sentence(&mut rng, &law_signature(), 3);
                let u = random_ultrafilter(&mut rng, fam.index());
                let (hyp, concl) = quasi_los_forward(&fam, &u, &phi).unwrap();
                prop_assert!(!hyp || concl);
            }

            #[test]
            fn filters_are_filters(seed in any::<u64>()) {
                let (mut rng, fam) = family(seed, 0);
                prop_assert!(random_filter(&mut rng, fam.index()).is_filter());
                prop_assert!(random_ultrafilter(&mut rng, fam.index()).is_ultrafilter());
            }
        }
    }
}
